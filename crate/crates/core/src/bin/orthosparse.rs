fn main() {
    std::process::exit(orthosparse::cli::run(std::env::args_os()));
}
