fn main() {
    std::process::exit(hydrogen_curvature::cli::run(std::env::args_os()));
}
