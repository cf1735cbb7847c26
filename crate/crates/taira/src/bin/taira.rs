fn main() {
    std::process::exit(taira::cli::run());
}
