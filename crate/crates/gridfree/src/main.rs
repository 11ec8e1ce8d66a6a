fn main() {
    std::process::exit(gridfree::cli::run());
}
