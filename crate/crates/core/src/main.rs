fn main() {
    std::process::exit(defsum::cli::main_with_args(std::env::args_os()));
}
