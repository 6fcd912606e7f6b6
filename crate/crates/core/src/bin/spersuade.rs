fn main() {
    std::process::exit(stable_persuasion::cli::main_with(std::env::args_os()));
}
