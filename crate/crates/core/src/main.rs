fn main() {
    let mut out = std::io::stdout();
    let code = walkforge::cli::run(std::env::args_os(), &mut out, &mut std::io::stderr());
    std::process::exit(code);
}
