fn main() {
    std::process::exit(revmono_cli::cli_main(std::env::args_os()));
}
