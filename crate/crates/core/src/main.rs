fn main() {
    let code = iceberg_lab::cli::run(std::env::args_os());
    std::process::exit(code);
}
