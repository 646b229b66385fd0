//! Constants over the standard shape corpus, compared with the stored envelopes.
//!
//! `cargo run --release --example corpus -- 128`

use maxvar::experiments::{corpus_constants, golden_dir, standard_corpus, Envelopes};

fn main() -> maxvar::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(128, |s| s.parse().expect("resolution"));
    for (i, spec) in standard_corpus(2, 42).iter().enumerate() {
        println!("{i:>2}: {}", serde_json::to_string(&spec.shape).expect("serializable"));
    }
    let (rows, max) = corpus_constants(n, 42)?;
    for r in rows.iter().filter(|r| r.operator == "uncentered") {
        println!("shape {:>2}: Var(M)/Per(E) {:.3}  sup c_dy {:.3}  sup c_un {:.3}", r.index, r.variation_ratio, r.sup_c_dy, r.sup_c_un);
    }
    let env = Envelopes::load(&golden_dir())?;
    for (k, v) in &max {
        let c = env.check(k, *v)?;
        println!("{k:<28} {v:.4}  limit {:.4}  {}", c.limit, if c.passes { "ok" } else { "above" });
    }
    Ok(())
}
