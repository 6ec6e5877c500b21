fn main() {
    std::process::exit(elastoblow::cli_main());
}
