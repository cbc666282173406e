fn main() {
    std::process::exit(shortpacket::cli::run(std::env::args_os()));
}
