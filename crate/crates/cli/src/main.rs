fn main() {
    let (code, _) = gidlab_cli::run(std::env::args_os());
    std::process::exit(code);
}
