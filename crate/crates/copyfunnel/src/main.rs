fn main() {
    std::process::exit(copyfunnel::cli::main_entry());
}
