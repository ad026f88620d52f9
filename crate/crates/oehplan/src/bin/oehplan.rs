fn main() {
    std::process::exit(oehplan::cli::main());
}
