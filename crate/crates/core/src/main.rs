fn main() {
    std::process::exit(jointeig::cli::run(std::env::args_os()));
}
