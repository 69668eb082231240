fn main() {
    std::process::exit(cavity_transport::cli::main_with_args(std::env::args_os()));
}
