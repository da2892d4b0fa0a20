fn main() {
    std::process::exit(fminlab::cli::main_with_args(std::env::args_os()));
}
