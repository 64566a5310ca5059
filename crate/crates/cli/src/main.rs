fn main() {
    std::process::exit(botscope_cli::run(std::env::args_os()));
}
