fn main() {
    let code = earlyrank::cli::run(std::env::args_os());
    std::process::exit(code);
}
