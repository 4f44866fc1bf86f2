fn main() {
    eprintln!("orbitlab: scenarios not wired up yet");
    std::process::exit(2);
}
