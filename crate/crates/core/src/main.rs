fn main() {
    let code = hybrid_bench::cli::run(std::env::args_os());
    std::process::exit(code);
}
