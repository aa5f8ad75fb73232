pub mod bsgroup;
pub mod catalog;
pub mod cli;
pub mod chart;
pub mod circle;
pub mod denjoy;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod gl2z;
pub mod hull;
pub mod perturb;
pub mod report;
pub mod reproduce;
pub mod space;
pub mod torus;

pub use error::{Error, Result};
