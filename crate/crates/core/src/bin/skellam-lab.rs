fn main() {
    std::process::exit(skellam_lab::cli::main_with_args(std::env::args_os()));
}
