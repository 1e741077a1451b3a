fn main() {
    std::process::exit(nsforge::harness::cli_main(std::env::args_os()));
}
