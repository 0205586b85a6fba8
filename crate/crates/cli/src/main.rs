fn main() {
    std::process::exit(polymer_cli::main_with_args(std::env::args_os()));
}
