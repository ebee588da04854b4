fn main() {
    std::process::exit(parabound::cli::main());
}
