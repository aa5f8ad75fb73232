fn main() {
    std::process::exit(bsdl::cli::main_with_args(std::env::args_os()));
}
