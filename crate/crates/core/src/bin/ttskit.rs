fn main() {
    std::process::exit(ttskit::cli::main());
}
