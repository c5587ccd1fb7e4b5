fn main() {
    std::process::exit(collider_lab_cli::main_with(std::env::args_os()));
}
