fn main() {
    std::process::exit(qk_core::cli::run(std::env::args_os()));
}
