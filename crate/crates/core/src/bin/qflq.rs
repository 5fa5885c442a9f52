fn main() {
    std::process::exit(qflq::cli::main_with_args(std::env::args_os()));
}
