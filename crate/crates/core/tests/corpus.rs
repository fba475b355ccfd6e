mod common;

use common::*;

#[test]
fn corpus_traces_are_exact() {
    let files = corpus_programs();
    assert!(files.len() >= 20, "only {} corpus programs", files.len());
    let mut runs = Vec::new();
    for f in &files {
        let run = run_corpus_file(f).unwrap_or_else(|e| panic!("{e}"));
        assert_eq!(run.actual, run.expected, "trace mismatch in {}", run.name);
        runs.push(run);
    }
    let covered = rules_covered(&runs);
    let missing: Vec<_> = ALL_RULES.iter().filter(|r| !covered.contains(**r)).collect();
    assert!(missing.is_empty(), "rules never exercised: {missing:?}");
}
