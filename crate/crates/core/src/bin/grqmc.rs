fn main() {
    std::process::exit(grqmc::cli::run(std::env::args_os()));
}
