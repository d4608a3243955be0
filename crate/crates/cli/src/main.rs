fn main() {
    std::process::exit(julialab::run(std::env::args_os()));
}
