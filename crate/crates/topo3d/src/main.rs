fn main() {
    std::process::exit(topo3d::cli::run_cli(std::env::args_os()));
}
