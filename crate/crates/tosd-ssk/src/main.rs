fn main() {
    std::process::exit(tosd_ssk::cli::run(std::env::args_os()));
}
