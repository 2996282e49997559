//! Drive the command-line front end from code: solve with a config file and a flag override,
//! then verify the written measures.
//!
//!     cargo run --release --example cli_run

fn main() {
    let dir = std::env::temp_dir().join("veq-cli-example");
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/veq.cfg");
    let out = dir.to_str().unwrap();
    let code = veq::cli::run(["veq", "solve", "--config", cfg, "--tau", "0.9", "--out", out]);
    println!("solve exited with {code}");
    println!("{}", std::fs::read_to_string(dir.join("manifest.txt")).unwrap_or_default());
    let code = veq::cli::run(["veq", "verify", "--config", cfg, "--tau", "0.9", "--out", out]);
    println!("verify exited with {code}");
}
