fn main() {
    std::process::exit(brainscale::cli::cli_main(std::env::args_os()));
}
