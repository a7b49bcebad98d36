fn main() {
    std::process::exit(qplr::cli::run());
}
