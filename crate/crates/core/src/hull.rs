//! Planar convex hulls and distances between them.

pub type P2 = [f64; 2];

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn norm(v: P2) -> f64 {
    v[0].hypot(v[1])
}

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Counter-clockwise hull by Andrew's monotone chain. Collinear points are
/// dropped; degenerate inputs give one or two vertices.
pub fn convex_hull(points: &[P2]) -> Vec<P2> {
    let mut pts: Vec<P2> = points.iter().copied().filter(|p| p[0].is_finite() && p[1].is_finite()).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<P2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn diameter(hull: &[P2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in hull.iter().enumerate() {
        for b in &hull[i + 1..] {
            d = d.max(norm(sub(*a, *b)));
        }
    }
    d
}

fn segment_dist(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return norm(sub(p, a));
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Distance from `p` to a convex polygon given counter-clockwise (0 inside).
pub fn point_polygon_dist(p: P2, hull: &[P2]) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => norm(sub(p, hull[0])),
        2 => segment_dist(p, hull[0], hull[1]),
        n => {
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0.0);
            if inside {
                return 0.0;
            }
            (0..n)
                .map(|i| segment_dist(p, hull[i], hull[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Hausdorff distance between two convex polygons. For convex sets the
/// supremum is attained at a vertex, so vertices suffice.
pub fn hausdorff(a: &[P2], b: &[P2]) -> f64 {
    let one_sided = |x: &[P2], y: &[P2]| x.iter().map(|p| point_polygon_dist(*p, y)).fold(0.0, f64::max);
    one_sided(a, b).max(one_sided(b, a))
}

pub fn centroid(points: &[P2]) -> P2 {
    let n = points.len().max(1) as f64;
    let s = points.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
    [s[0] / n, s[1] / n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_hull() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!((diameter(&h) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(point_polygon_dist([0.3, 0.7], &h), 0.0);
        assert!((point_polygon_dist([2.0, 0.5], &h) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(convex_hull(&[[1.0, 2.0], [1.0, 2.0]]), vec![[1.0, 2.0]]);
        let seg = convex_hull(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        assert_eq!(seg, vec![[0.0, 0.0], [2.0, 2.0]]);
        assert!((hausdorff(&[[0.0, 0.0]], &seg) - 8f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn hull_contains_samples(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..60)) {
            let pts: Vec<P2> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            let h = convex_hull(&pts);
            for p in &pts {
                prop_assert!(point_polygon_dist(*p, &h) < 1e-12);
            }
            prop_assert!(hausdorff(&h, &h) < 1e-12);
        }
    }
}
