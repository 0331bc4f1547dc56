fn main() {
    std::process::exit(gnd::cli::main_with_args(std::env::args_os()));
}
