fn main() {
    std::process::exit(kll_core::harness::run_cli(std::env::args_os()));
}
