fn main() {
    std::process::exit(risloc::cli::main_with_args(std::env::args_os()));
}
