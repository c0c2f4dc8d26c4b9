fn main() {
    std::process::exit(altlf::cli::main_with_args(std::env::args_os()));
}
