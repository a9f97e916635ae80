fn main() {
    std::process::exit(circuit_geometry::cli::main_with(std::env::args_os()));
}
