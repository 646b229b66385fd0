//! Every lemma check at its default size, as one report.
//!
//! `cargo run --release --example lemma_suite`

use maxvar::experiments::lemma_suite;

fn main() -> maxvar::Result<()> {
    let report = lemma_suite(42, usize::MAX);
    for r in &report.records {
        let measured: Vec<String> = r.measured.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
        println!("{:<22} {:<5} {}", r.lemma, if r.as_expected() { "ok" } else { "FAIL" }, measured.join(" "));
        if let Some(w) = &r.witness {
            println!("{:<22} witness: {w}", "");
        }
    }
    println!("all as expected: {}", report.all_as_expected());
    Ok(())
}
