fn main() {
    std::process::exit(tlreg_cli::run());
}
