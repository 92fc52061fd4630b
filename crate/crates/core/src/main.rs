fn main() {
    std::process::exit(blowup_lab::cli::main());
}
