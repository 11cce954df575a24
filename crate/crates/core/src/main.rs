fn main() {
    std::process::exit(stratal::cli::main());
}
