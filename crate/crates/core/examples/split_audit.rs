//! Builds the train and eval partitions of monster-team-modifier-element
//! tuples, checks they are disjoint and writes the audit document.

use rtfm::worldgen::{load_catalog, split_assignments, SplitAudit};

pub fn run_example() -> rtfm::Result<()> {
    let catalog = load_catalog();
    let (train, eval) = split_assignments(&catalog, 0.2, 0)?;
    let shared = train.members.intersection(&eval.members).count();
    println!(
        "train tuples: {}, eval tuples: {}, shared: {shared}",
        train.len(),
        eval.len()
    );
    let audit = SplitAudit::new(&catalog, &train, &eval);
    let json = serde_json::to_string(&audit)?;
    println!(
        "audit document: {} bytes, first eval tuple {:?}",
        json.len(),
        audit.eval.first()
    );
    if let Ok(path) = std::env::var("AUDIT_OUT") {
        std::fs::write(&path, json)?;
        println!("written to {path}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
