fn main() {
    std::process::exit(poolmax_cli::run(std::env::args_os()));
}
