fn main() {
    std::process::exit(spmrf_cli::run(std::env::args_os()));
}
