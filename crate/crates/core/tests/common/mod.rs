use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use toto_core::dynamics::{evaluate, render_trace, Status};
use toto_core::program::Program;
use toto_core::syntax::{Ty, TypingCtx};
use toto_core::typing::synthesize;

pub const CORPUS_FUEL: u64 = 10_000;

pub const ALL_RULES: &[&str] = &[
    "r_cls", "r_ccls", "r_new", "r_match", "r_matchsuc", "r_matchfail", "r_untag1", "r_untag2",
    "r_app1", "r_app2", "r_appabs", "r_rcdhead", "r_rcdtail", "r_projrcd", "r_projcong", "r_let",
    "r_letv", "r_fix", "r_fixb", "r_fld", "r_unfld", "r_unfldfld", "r_pair1", "r_pair2", "r_proj1",
    "r_proj2", "r_pairv1", "r_pairv2",
];

pub struct CorpusRun {
    pub name: String,
    #[allow(dead_code)]
    pub ty: Ty,
    pub expected: String,
    pub actual: String,
    pub rules: Vec<String>,
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus")
}

pub fn corpus_programs() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toto"))
        .collect();
    files.sort();
    files
}

/// Parses, typechecks and evaluates one corpus program against its trace file.
pub fn run_corpus_file(path: &Path) -> Result<CorpusRun, String> {
    let name = path.file_stem().unwrap().to_string_lossy().into_owned();
    let src = std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"))?;
    let expected = std::fs::read_to_string(path.with_extension("trace")).map_err(|e| format!("{name}.trace: {e}"))?;
    let program = Program::parse(&src).map_err(|e| format!("{name}: {e}"))?;
    let ty = synthesize(&TypingCtx::new(), &program.sigma, &program.main).map_err(|e| format!("{name}: {e}"))?;
    let eval = evaluate(program.store.clone(), program.main.clone(), CORPUS_FUEL);
    if eval.status != Status::Value {
        return Err(format!("{name}: ended {:?}", eval.status));
    }
    let actual = render_trace(&program.store, &program.main, &eval);
    let rules = eval.trace.iter().map(|t| t.rule.clone()).collect();
    Ok(CorpusRun { name, ty, expected, actual, rules })
}

pub fn rules_covered(runs: &[CorpusRun]) -> BTreeSet<String> {
    runs.iter()
        .flat_map(|r| r.rules.iter())
        .flat_map(|r| r.split('/').map(str::to_owned).collect::<Vec<_>>())
        .collect()
}
