fn main() {
    std::process::exit(gridmesh::cli::main_with_args(std::env::args_os()));
}
