fn main() {
    std::process::exit(rladder_harness::cli::run(std::env::args_os()));
}
