fn main() {
    std::process::exit(cubli_cli::main_with(std::env::args_os()));
}
