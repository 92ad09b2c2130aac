fn main() {
    std::process::exit(sle_rho::cli::run(std::env::args_os()));
}
