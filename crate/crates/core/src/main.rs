fn main() {
    std::process::exit(renyi_select::cli::run(std::env::args_os()));
}
