fn main() {
    std::process::exit(ordchoice::cli::run(std::env::args_os()));
}
