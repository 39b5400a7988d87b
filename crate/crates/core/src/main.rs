fn main() {
    std::process::exit(ksc::cli::main());
}
