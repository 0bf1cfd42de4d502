fn main() {
    std::process::exit(qkscreen::cli::main());
}
