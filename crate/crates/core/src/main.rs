fn main() {
    mgc::cli::init_logging();
    let code = mgc::cli::run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
