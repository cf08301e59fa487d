fn main() {
    std::process::exit(fracext::cli::main_exit_code());
}
