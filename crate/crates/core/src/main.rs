fn main() {
    let code = h3rect::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
