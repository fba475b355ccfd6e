//! Machine-checked soundness: progress and preservation over generated
//! well-typed programs, plus differential testing of subtyping against the
//! declarative rules.

pub mod enumerate;
pub mod generate;
pub mod oracle;
pub mod selftest;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dynamics::{step, StepResult};
use crate::store::Store;
use crate::subtype::is_subtype;
use crate::syntax::{Name, TagCtx, Tm, Ty, TypingCtx};
use crate::typing::{check_against, synthesize};

pub use generate::gen_typed_term;

/// A closed program together with the contexts it is typed and run in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub gamma: TypingCtx,
    pub sigma: TagCtx,
    pub store: Store,
    pub term: Tm,
    pub ty: Ty,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Every binding of `small` appears unchanged in `big`.
pub fn subcontext(small: &TagCtx, big: &TagCtx) -> bool {
    small.iter().all(|(c, e)| big.get(c) == Some(e))
}

/// Σ and the store describe the same tags with the same parents.
pub fn storecontext_check(sigma: &TagCtx, store: &Store) -> bool {
    let in_store: BTreeSet<_> = store.heads().collect();
    let in_sigma: BTreeSet<_> = sigma.tags().collect();
    in_store == in_sigma
        && store.entries().iter().all(|p| {
            let want = p.parent().map(Name::Tag);
            sigma.get(p.head()).is_some_and(|e| e.parent == want)
        })
}

/// The first state of `case` is a value or takes a step.
pub fn check_progress(case: &TestCase) -> Verdict {
    match step(&case.store, &case.term) {
        StepResult::Stuck(reason) => Verdict::Fail(format!("stuck: {reason}: {}", case.term)),
        _ => Verdict::Pass,
    }
}

/// One step of `case` keeps its type up to subtyping, under Σ extended with
/// the allocated tag, and keeps Σ in agreement with the store.
pub fn check_preservation(case: &TestCase) -> Verdict {
    match step(&case.store, &case.term) {
        StepResult::Stepped(st) => {
            let sigma2 = extend_sigma(&case.sigma, st.alloc.as_ref());
            preservation_of(case, &sigma2, &st.store, &st.term, &case.ty)
        }
        // Nothing to preserve.
        StepResult::IsValue | StepResult::Stuck(_) => Verdict::Pass,
    }
}

fn extend_sigma(sigma: &TagCtx, alloc: Option<&crate::dynamics::Allocation>) -> TagCtx {
    let mut next = sigma.clone();
    if let Some(a) = alloc {
        next.insert(a.tag, a.body.clone(), a.parent.map(Name::Tag));
    }
    next
}

fn preservation_of(case: &TestCase, sigma2: &TagCtx, store2: &Store, term2: &Tm, ty: &Ty) -> Verdict {
    if !subcontext(&case.sigma, sigma2) {
        return Verdict::Fail("tag context shrank".into());
    }
    if !storecontext_check(sigma2, store2) {
        return Verdict::Fail(format!("tag context and store disagree after step: {store2}"));
    }
    // Synthesis alone is incomplete for pairs, whose Sum types are not
    // unique, so checking against the old type also counts.
    let synthesized = synthesize(&case.gamma, sigma2, term2);
    if let Ok(t2) = &synthesized {
        if is_subtype(&case.gamma, sigma2, t2, ty) {
            return Verdict::Pass;
        }
    }
    if check_against(&case.gamma, sigma2, term2, ty).is_ok() {
        return Verdict::Pass;
    }
    match synthesized {
        Ok(t2) => Verdict::Fail(format!("{term2} has type {t2}, not a subtype of {ty}")),
        Err(e) => Verdict::Fail(format!("{term2} no longer typechecks: {e}")),
    }
}

/// What happened to one case when run to a value, a stuck state, or the
/// fuel limit, checking progress at every state and preservation at every
/// step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub seed: u64,
    pub term_size: usize,
    pub term_depth: usize,
    pub histogram: BTreeMap<&'static str, usize>,
    pub steps: usize,
    pub allocations: usize,
    pub outcome: &'static str,
    pub rules: BTreeSet<String>,
    pub progress: Verdict,
    pub preservation: Verdict,
    /// Steps after which the old Σ was not a supercontext of the new one,
    /// i.e. steps that allocated.
    pub reverse_inclusion_failures: usize,
}

pub fn run_case(case: &TestCase, fuel: usize) -> CaseReport {
    let mut histogram = BTreeMap::new();
    case.term.histogram(&mut histogram);
    let mut report = CaseReport {
        seed: case.seed,
        term_size: case.term.size(),
        term_depth: case.term.depth(),
        histogram,
        steps: 0,
        allocations: 0,
        outcome: "out of fuel",
        rules: BTreeSet::new(),
        progress: Verdict::Pass,
        preservation: Verdict::Pass,
        reverse_inclusion_failures: 0,
    };
    if !storecontext_check(&case.sigma, &case.store) {
        report.preservation = Verdict::Fail("initial tag context and store disagree".into());
    }
    let mut cur = case.clone();
    for _ in 0..fuel {
        match step(&cur.store, &cur.term) {
            StepResult::IsValue => {
                report.outcome = "value";
                return report;
            }
            StepResult::Stuck(reason) => {
                report.outcome = "stuck";
                report.progress = Verdict::Fail(format!("stuck after {} steps: {reason}: {}", report.steps, cur.term));
                return report;
            }
            StepResult::Stepped(st) => {
                report.steps += 1;
                report.rules.insert(st.rule.clone());
                let sigma2 = extend_sigma(&cur.sigma, st.alloc.as_ref());
                if st.alloc.is_some() {
                    report.allocations += 1;
                }
                if !subcontext(&sigma2, &cur.sigma) {
                    report.reverse_inclusion_failures += 1;
                }
                if report.preservation.passed() {
                    let v = preservation_of(&cur, &sigma2, &st.store, &st.term, &cur.ty);
                    if let Verdict::Fail(m) = v {
                        report.preservation = Verdict::Fail(format!("step {} ({}): {m}", report.steps, st.rule));
                    }
                }
                let next_ty = synthesize(&cur.gamma, &sigma2, &st.term).unwrap_or_else(|_| cur.ty.clone());
                cur = TestCase { gamma: cur.gamma, sigma: sigma2, store: st.store, term: st.term, ty: next_ty, seed: cur.seed };
            }
        }
    }
    match step(&cur.store, &cur.term) {
        StepResult::IsValue => report.outcome = "value",
        StepResult::Stuck(reason) => {
            report.outcome = "stuck";
            report.progress = Verdict::Fail(format!("stuck after {} steps: {reason}: {}", report.steps, cur.term));
        }
        StepResult::Stepped(_) => {}
    }
    report
}

/// Hand-made ill-typed cases that the checks must reject. Each pairs a
/// label with the case and whether it targets progress or preservation.
pub fn negative_controls() -> Vec<(&'static str, TestCase, bool)> {
    let sigma = TagCtx::new().with(0, Ty::Top, None);
    let store = Store::new().extend_root(crate::syntax::TagId(0)).expect("fresh");
    let case = |term: Tm, ty: Ty| TestCase {
        gamma: TypingCtx::new(),
        sigma: sigma.clone(),
        store: store.clone(),
        term,
        ty,
        seed: 0,
    };
    vec![
        ("NewTag claimed to be a record", case(Tm::NewTag(Ty::Top), Ty::RNil), false),
        (
            "Extract claimed to be tagged by an unknown tag",
            case(Tm::extract(Tm::new_tagged(Name::tag(0), Tm::Unit)), Ty::Tagged(Name::tag(999))),
            false,
        ),
        (
            "application claimed to be a function",
            case(Tm::app(Tm::lam("x", Ty::Top, Tm::var("x")), Tm::Unit), Ty::prod("x", Ty::Top, Ty::Top)),
            false,
        ),
        ("Extract of unit", case(Tm::extract(Tm::Unit), Ty::Top), true),
    ]
}

/// Runs the negative controls; returns one line per control and whether
/// all of them were rejected.
pub fn run_negative_controls() -> (Vec<String>, bool) {
    let mut lines = Vec::new();
    let mut all = true;
    for (label, case, progress) in negative_controls() {
        let v = if progress { check_progress(&case) } else { check_preservation(&case) };
        let rejected = !v.passed();
        all &= rejected;
        lines.push(format!("{} {label}", if rejected { "rejected" } else { "ACCEPTED" }));
    }
    (lines, all)
}
