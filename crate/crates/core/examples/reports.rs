// Build a JSON report for a command in-process, the same way the binary
// does, and show its config hash.

use clap::Parser;
use thinht::workbench::{build_report, Cli};

pub fn main() {
    let cli = Cli::try_parse_from([
        "thinht",
        "search",
        "fs",
        "--generator",
        "sum_mod:3",
        "--universe",
        "12",
        "--size",
        "2",
    ])
    .unwrap();
    let a = build_report(&cli.command).unwrap();
    let b = build_report(&cli.command).unwrap();
    println!("command {}, status {:?}", a.command, a.status);
    println!("config hash {}", a.config_hash);
    println!("payloads equal across runs: {}", a.payload() == b.payload());
    println!("verdict: {}", a.verdict);
}
