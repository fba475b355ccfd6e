//! The full self-test: differential subtyping over the type enumeration,
//! progress and preservation over generated cases, and negative controls.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::enumerate::{enumerate_types, enumeration_sigma};
use super::generate::{gen_typed_term, DEFAULT_DEPTH};
use super::oracle::DeclarativeClosure;
use super::{run_case, run_negative_controls, CaseReport, Verdict};
use crate::subtype::{subtype_with_fuel, SubtypeQuery};
use crate::syntax::{AmberEnv, Ty, TypingCtx};

/// Call budget for a single algorithmic subtyping query.
pub const SUBTYPE_FUEL: u64 = 10_000;
/// Step budget for a generated case.
pub const CASE_FUEL: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub lhs: String,
    pub rhs: String,
    pub algorithm: Option<bool>,
    pub oracle_height: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferentialReport {
    pub types: usize,
    pub pairs: u64,
    pub related: u64,
    pub max_height: u32,
    pub disagreements: u64,
    /// The smallest disagreeing pair, by combined type size.
    pub smallest: Option<Disagreement>,
    pub out_of_fuel: u64,
    pub reflexivity_failures: u64,
    pub transitivity_violations: u64,
    pub smallest_transitivity_violation: Option<[String; 3]>,
}

impl DifferentialReport {
    pub fn passed(&self) -> bool {
        self.disagreements == 0
            && self.out_of_fuel == 0
            && self.reflexivity_failures == 0
            && self.transitivity_violations == 0
    }
}

fn ty_size(t: &Ty) -> usize {
    match t {
        Ty::Tag(b) | Ty::TagExt(b, _) | Ty::Mu(_, b) => 1 + ty_size(b),
        Ty::Prod(_, a, b) | Ty::Sum(_, a, b) | Ty::RCons(_, a, b) => 1 + ty_size(a) + ty_size(b),
        Ty::Tagged(_) | Ty::RNil | Ty::Top | Ty::Var(_) => 1,
    }
}

/// Compares the algorithm with the declarative closure on every ordered
/// pair of the enumeration, under the empty Γ and Δ.
pub fn differential_subtyping(tag_count: usize, labels: &[&str], depth: usize) -> DifferentialReport {
    let sigma = enumeration_sigma(tag_count);
    let types = enumerate_types(tag_count, labels, depth);
    let closure = DeclarativeClosure::compute(&sigma, &types);
    let ids: Vec<u32> = types.iter().map(|t| closure.id_of(t).expect("closure contains its base")).collect();
    let position: HashMap<u32, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let (delta, gamma) = (AmberEnv::new(), TypingCtx::new());

    let mut report = DifferentialReport {
        types: types.len(),
        pairs: 0,
        related: 0,
        max_height: closure.rounds(),
        disagreements: 0,
        smallest: None,
        out_of_fuel: 0,
        reflexivity_failures: 0,
        transitivity_violations: 0,
        smallest_transitivity_violation: None,
    };
    let mut smallest_size = usize::MAX;
    // Algorithmic supertypes of each enumerated type, as enumeration indices.
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); types.len()];
    for (i, a) in types.iter().enumerate() {
        let mut oracle: Vec<usize> = closure.supertypes(ids[i]).iter().filter_map(|id| position.get(id).copied()).collect();
        oracle.sort_unstable();
        for (j, b) in types.iter().enumerate() {
            report.pairs += 1;
            let alg = subtype_with_fuel(&SubtypeQuery::new(&delta, &gamma, &sigma, a, b), SUBTYPE_FUEL);
            let decl = oracle.binary_search(&j).is_ok();
            match alg {
                None => report.out_of_fuel += 1,
                Some(true) => succ[i].push(j),
                Some(false) => {}
            }
            if i == j && alg != Some(true) {
                report.reflexivity_failures += 1;
            }
            if alg != Some(decl) {
                report.disagreements += 1;
                let size = ty_size(a) + ty_size(b);
                if size < smallest_size {
                    smallest_size = size;
                    report.smallest = Some(Disagreement {
                        lhs: a.to_string(),
                        rhs: b.to_string(),
                        algorithm: alg,
                        oracle_height: closure.height(a, b),
                    });
                }
            }
        }
    }
    report.related = succ.iter().map(|s| s.len() as u64).sum();

    let mut smallest_size = usize::MAX;
    for (a, sa) in succ.iter().enumerate() {
        for &b in sa {
            for &c in &succ[b] {
                if sa.binary_search(&c).is_err() {
                    report.transitivity_violations += 1;
                    let size = ty_size(&types[a]) + ty_size(&types[b]) + ty_size(&types[c]);
                    if size < smallest_size {
                        smallest_size = size;
                        report.smallest_transitivity_violation =
                            Some([types[a].to_string(), types[b].to_string(), types[c].to_string()]);
                    }
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoundnessSummary {
    pub cases: usize,
    pub first_seed: u64,
    pub states: usize,
    pub steps: usize,
    pub allocations: usize,
    pub values: usize,
    pub out_of_fuel: usize,
    pub with_match: usize,
    pub match_fraction: f64,
    pub progress_failures: usize,
    pub preservation_failures: usize,
    pub reverse_inclusion_failures: usize,
    pub node_kinds: BTreeMap<&'static str, usize>,
    pub rules: BTreeMap<String, usize>,
    /// For each failing seed, the smallest generation depth that still
    /// fails, with the failing term and the reason.
    pub minimized_failures: Vec<(u64, usize, String, String)>,
}

impl SoundnessSummary {
    pub fn passed(&self) -> bool {
        self.progress_failures == 0 && self.preservation_failures == 0
    }
}

fn failure(r: &CaseReport) -> Option<String> {
    match (&r.progress, &r.preservation) {
        (Verdict::Fail(m), _) => Some(format!("progress: {m}")),
        (_, Verdict::Fail(m)) => Some(format!("preservation: {m}")),
        _ => None,
    }
}

/// Generates `cases` cases from consecutive seeds and runs each to
/// completion.
pub fn soundness(cases: usize, first_seed: u64) -> (SoundnessSummary, Vec<CaseReport>) {
    let mut reports = Vec::with_capacity(cases);
    let mut s = SoundnessSummary {
        cases,
        first_seed,
        states: 0,
        steps: 0,
        allocations: 0,
        values: 0,
        out_of_fuel: 0,
        with_match: 0,
        match_fraction: 0.0,
        progress_failures: 0,
        preservation_failures: 0,
        reverse_inclusion_failures: 0,
        node_kinds: BTreeMap::new(),
        rules: BTreeMap::new(),
        minimized_failures: Vec::new(),
    };
    for k in 0..cases as u64 {
        let seed = first_seed.wrapping_add(k);
        let case = gen_typed_term(seed, DEFAULT_DEPTH);
        let r = run_case(&case, CASE_FUEL);
        s.states += r.steps + 1;
        s.steps += r.steps;
        s.allocations += r.allocations;
        s.reverse_inclusion_failures += r.reverse_inclusion_failures;
        match r.outcome {
            "value" => s.values += 1,
            "out of fuel" => s.out_of_fuel += 1,
            _ => {}
        }
        if r.histogram.contains_key("Match") {
            s.with_match += 1;
        }
        for (k, n) in &r.histogram {
            *s.node_kinds.entry(k).or_default() += n;
        }
        for rule in &r.rules {
            for part in rule.split('/') {
                *s.rules.entry(part.to_string()).or_default() += 1;
            }
        }
        if !r.progress.passed() {
            s.progress_failures += 1;
        }
        if !r.preservation.passed() {
            s.preservation_failures += 1;
        }
        if let Some(reason) = failure(&r) {
            s.minimized_failures.push(minimize(seed, reason));
        }
        reports.push(r);
    }
    s.match_fraction = if cases == 0 { 0.0 } else { s.with_match as f64 / cases as f64 };
    (s, reports)
}

/// Regenerates a failing seed at smaller depths and keeps the smallest
/// depth that still fails.
fn minimize(seed: u64, reason: String) -> (u64, usize, String, String) {
    let mut best = (seed, DEFAULT_DEPTH, gen_typed_term(seed, DEFAULT_DEPTH).term.to_string(), reason);
    for depth in (0..DEFAULT_DEPTH).rev() {
        let case = gen_typed_term(seed, depth);
        match failure(&run_case(&case, CASE_FUEL)) {
            Some(r) => best = (seed, depth, case.term.to_string(), r),
            None => break,
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub subtyping: DifferentialReport,
    pub soundness: SoundnessSummary,
    pub negative_controls: Vec<String>,
    pub negative_controls_rejected: bool,
    pub passed: bool,
}

impl SelftestReport {
    /// Deterministic human-readable summary, one check per line.
    pub fn render(&self) -> String {
        let d = &self.subtyping;
        let s = &self.soundness;
        let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut out = String::new();
        out.push_str(&format!(
            "{} subtyping: {} types, {} pairs, {} related, max height {}, {} disagreements, {} out of fuel\n",
            mark(d.disagreements == 0 && d.out_of_fuel == 0),
            d.types,
            d.pairs,
            d.related,
            d.max_height,
            d.disagreements,
            d.out_of_fuel
        ));
        if let Some(x) = &d.smallest {
            out.push_str(&format!(
                "    smallest disagreement: {} <: {} (algorithm {:?}, oracle height {:?})\n",
                x.lhs, x.rhs, x.algorithm, x.oracle_height
            ));
        }
        out.push_str(&format!(
            "{} reflexivity and transitivity: {} reflexivity failures, {} transitivity violations\n",
            mark(d.reflexivity_failures == 0 && d.transitivity_violations == 0),
            d.reflexivity_failures,
            d.transitivity_violations
        ));
        if let Some([a, b, c]) = &d.smallest_transitivity_violation {
            out.push_str(&format!("    smallest violation: {a} <: {b} <: {c}\n"));
        }
        out.push_str(&format!(
            "{} progress: {} cases from seed {}, {} states, {} failures\n",
            mark(s.progress_failures == 0),
            s.cases,
            s.first_seed,
            s.states,
            s.progress_failures
        ));
        out.push_str(&format!(
            "{} preservation: {} steps, {} allocating, {} failures\n",
            mark(s.preservation_failures == 0),
            s.steps,
            s.allocations,
            s.preservation_failures
        ));
        for (seed, depth, term, reason) in &s.minimized_failures {
            out.push_str(&format!("    seed {seed} depth {depth}: {reason}\n      {term}\n"));
        }
        out.push_str(&format!(
            "     coverage: {} values, {} out of fuel, {} with Match ({:.1}%)\n",
            s.values,
            s.out_of_fuel,
            s.with_match,
            100.0 * s.match_fraction
        ));
        let kinds: Vec<String> = s.node_kinds.iter().map(|(k, n)| format!("{k}={n}")).collect();
        out.push_str(&format!("     node kinds: {}\n", kinds.join(" ")));
        let rules: Vec<String> = s.rules.iter().map(|(k, n)| format!("{k}={n}")).collect();
        out.push_str(&format!("     rules: {}\n", rules.join(" ")));
        out.push_str(&format!("{} negative controls\n", mark(self.negative_controls_rejected)));
        for line in &self.negative_controls {
            out.push_str(&format!("    {line}\n"));
        }
        out.push_str(if self.passed { "selftest passed\n" } else { "selftest FAILED\n" });
        out
    }
}

/// Runs every check. `enum_depth` bounds the type enumeration, over two
/// tags and the labels `f` and `g`.
pub fn run_selftest(cases: usize, seed: u64, enum_depth: usize) -> SelftestReport {
    let subtyping = differential_subtyping(2, &["f", "g"], enum_depth);
    let (soundness, _) = soundness(cases, seed);
    let (negative_controls, negative_controls_rejected) = run_negative_controls();
    let passed = subtyping.passed() && soundness.passed() && negative_controls_rejected;
    SelftestReport { subtyping, soundness, negative_controls, negative_controls_rejected, passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_differential_agrees() {
        let r = differential_subtyping(2, &["f", "g"], 2);
        assert_eq!(r.types, 73);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn soundness_smoke() {
        let (s, reports) = soundness(50, 0);
        assert!(s.passed(), "{s:?}");
        assert_eq!(reports.len(), 50);
    }
}
