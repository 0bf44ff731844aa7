fn main() {
    std::process::exit(meterdown::cli::main_with_args(std::env::args_os()));
}
