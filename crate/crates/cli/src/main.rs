fn main() {
    std::process::exit(svv_cli::main_with_process_env());
}
