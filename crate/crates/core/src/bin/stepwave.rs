fn main() { std::process::exit(stepwave::cli::run(std::env::args_os())) }
