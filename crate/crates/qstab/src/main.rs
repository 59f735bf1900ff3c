fn main() {
    std::process::exit(qstab::cli::run(std::env::args_os()));
}
