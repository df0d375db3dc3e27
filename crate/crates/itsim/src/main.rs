fn main() {
    std::process::exit(itsim::cli::run());
}
