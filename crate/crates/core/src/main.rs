fn main() {
    std::process::exit(decoykit::cli::main_with_args(std::env::args_os()));
}
