//! Print a named preset as canonical TOML, a starting point for custom
//! experiment files: `cargo run --example dump_preset -- scenario-a`.

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "appendix-c".into());
    match pricer::config::preset(&name).and_then(|c| pricer::config::to_toml(&c)) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
