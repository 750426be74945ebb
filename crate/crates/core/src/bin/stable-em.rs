fn main() {
    std::process::exit(stable_em::cli::run(std::env::args_os()));
}
