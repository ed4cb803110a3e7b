fn main() {
    std::process::exit(pmcurve::cli::run(std::env::args_os()));
}
