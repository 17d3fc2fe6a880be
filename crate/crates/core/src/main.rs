fn main() {
    std::process::exit(tetrafold::cli::run())
}
