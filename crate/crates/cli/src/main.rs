fn main() {
    eprintln!("fracon: not yet wired");
    std::process::exit(2);
}
