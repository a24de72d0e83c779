//! Regenerates the bundled certification corpus.
//!
//! The corpus under `fixtures/corpus/` is a fixed set of 30 Büchi automata
//! together with a manifest (`verdicts.txt`) freezing the verdict
//! `certify_gfm` produced for each of them with the slim reference and the
//! default game budget. The conformance suite re-certifies every file and
//! demands a 100% match, so the manifest pins the certifier's behavior.
//!
//! Run from the crate root:
//!
//! ```sh
//! cargo run -p gfmkit --example gen_corpus
//! ```
//!
//! The corpus mixes hand-written automata (copied from `fixtures/`), slim and
//! subset/breakpoint constructions of seeded random automata, and raw seeded
//! random automata. Changing anything here changes the corpus; the manifest
//! is rewritten to match.

use std::fs;
use std::path::PathBuf;

use gfmkit::constructions::{build_sldba, build_slim, SldbaOptions, SlimOptions};
use gfmkit::hoa::{read_hoa_file, write_hoa};
use gfmkit::random::random_nba;
use gfmkit::sim::{certify_gfm, Reference, DEFAULT_GAME_BUDGET};

fn main() {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let corpus = fixtures.join("corpus");
    fs::create_dir_all(&corpus).expect("create corpus directory");

    // Hand-written automata, copied verbatim from the fixture set.
    let copied = [
        "fgp_odd.hoa",
        "oddchoc_sldba3.hoa",
        "oddchoc_slim4.hoa",
        "guessing_nba.hoa",
        "universal_b.hoa",
        "lookahead_det.hoa",
        "lookahead_guesser.hoa",
        "fgx_gfy_jumping.hoa",
        "fgx_gfy_forgiving.hoa",
        "infinitely_often_a.hoa",
        "milk_nba.hoa",
        "milk_sldba7.hoa",
    ];
    for name in copied {
        fs::copy(fixtures.join(name), corpus.join(name)).expect("copy fixture");
    }

    // Constructions over seeded random automata (≤6 states, 2 propositions).
    for seed in 1..=7u64 {
        let a = random_nba(seed, 6, 2);
        let slim = build_slim(&a, SlimOptions::default());
        fs::write(corpus.join(format!("slim_rnd{seed}.hoa")), write_hoa(&slim))
            .expect("write slim construction");
    }
    for seed in 8..=12u64 {
        let a = random_nba(seed, 6, 2);
        let sldba = build_sldba(&a, SldbaOptions::default()).expect("subset construction");
        fs::write(
            corpus.join(format!("sldba_rnd{seed}.hoa")),
            write_hoa(&sldba),
        )
        .expect("write subset construction");
    }

    // Raw seeded random automata, unprocessed.
    for seed in 13..=18u64 {
        let a = random_nba(seed, 6, 2);
        fs::write(corpus.join(format!("rnd{seed}.hoa")), write_hoa(&a))
            .expect("write random automaton");
    }

    // Freeze the verdicts.
    let mut names: Vec<String> = fs::read_dir(&corpus)
        .expect("list corpus")
        .filter_map(|e| {
            let name = e.expect("dir entry").file_name().into_string().ok()?;
            name.ends_with(".hoa").then_some(name)
        })
        .collect();
    names.sort();
    assert_eq!(names.len(), 30, "the corpus is defined to hold 30 automata");

    let mut manifest = String::new();
    for name in &names {
        let aut = read_hoa_file(&corpus.join(name)).expect("parse corpus automaton");
        let report =
            certify_gfm(&aut, Reference::Slim, DEFAULT_GAME_BUDGET).expect("certify corpus file");
        manifest.push_str(&format!("{name} {}\n", report.verdict));
        println!("{name}: {}", report.verdict);
    }
    fs::write(corpus.join("verdicts.txt"), manifest).expect("write manifest");
    println!("wrote {} entries to verdicts.txt", names.len());
}
