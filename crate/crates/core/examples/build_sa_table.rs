//! Builds an SA fragment-score table from reference SMILES files.
//!
//! `cargo run --example build_sa_table -- OUT.tsv REF.smi [REF2.smi ...]`

use std::path::Path;

use hitgate::descriptors::build_fragment_table;
use hitgate::io::read_smiles_file;
use hitgate::smiles::parse_smiles;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        eprintln!("usage: build_sa_table OUT.tsv REF.smi [REF2.smi ...]");
        std::process::exit(2);
    }
    let mut mols = Vec::new();
    for path in &args[1..] {
        for rec in read_smiles_file(Path::new(path)).expect("readable reference file") {
            match parse_smiles(&rec.smiles) {
                Ok(m) => mols.push(m.largest_fragment()),
                Err(e) => eprintln!("{path}:{}: skipped ({e})", rec.line),
            }
        }
    }
    let table = build_fragment_table(&mols);
    let mut text = format!("# built from {} reference molecules\n", mols.len());
    text.push_str(&table.to_tsv());
    std::fs::write(&args[0], text).expect("writable output");
    eprintln!(
        "{} environments from {} molecules",
        table.scores.len(),
        mols.len()
    );
}
