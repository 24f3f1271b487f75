fn main() {
    std::process::exit(genderation_cli::run(std::env::args_os()));
}
