fn main() {
    std::process::exit(ftpl_cli::main_with_args(std::env::args_os()));
}
