//! Writes a stand-in labeled corpus as CSV.
//!
//! cargo run -p sentinel-core --example gen_corpus -- OUT.csv [N] [SEED]

use sentinel_core::synth::{self, SynthConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| {
        eprintln!("usage: gen_corpus OUT.csv [N] [SEED]");
        std::process::exit(2);
    });
    let n: usize = args.next().map_or(16_000, |s| s.parse().expect("N must be an integer"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("SEED must be an integer"));
    let corpus = synth::generate(n, seed, &SynthConfig::default());
    std::fs::write(&out, synth::to_csv(&corpus)).expect("write corpus");
    let [neg, pos] = corpus.class_counts();
    println!("wrote {n} documents to {out} ({neg} non-bullying, {pos} bullying)");
}
