//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use toto_core::dynamics::{evaluate, render_trace, step, StepResult};
use toto_core::harness::enumerate::enumerate_types;
use toto_core::harness::generate::{gen_typed_term, DEFAULT_DEPTH};
use toto_core::harness::selftest::{differential_subtyping, run_selftest, soundness};
use toto_core::harness::{run_negative_controls, TestCase};
use toto_core::parse::{parse_term, parse_type};
use toto_core::program::Program;
use toto_core::subst::{subst_tm, subst_tyvar};
use toto_core::syntax::{Name, Tm, Ty, TypingCtx};
use toto_core::typing::{synthesize, TypeErrorKind};

const DIFFERENTIAL_BUDGET: Duration = Duration::from_secs(60);
const SOUNDNESS_BUDGET: Duration = Duration::from_secs(120);
const SOUNDNESS_CASES: usize = 1000;
const LAW_INSTANCES: usize = 1000;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn differential() -> Outcome {
    let start = Instant::now();
    let r = differential_subtyping(2, &["f", "g"], 3);
    let took = start.elapsed();
    outcome(
        r.passed() && took < DIFFERENTIAL_BUDGET,
        format!(
            "{} types, {} pairs, {} related, max height {}, {} disagreements, {} out of fuel, {} transitivity violations, {:.1}s",
            r.types,
            r.pairs,
            r.related,
            r.max_height,
            r.disagreements,
            r.out_of_fuel,
            r.transitivity_violations,
            took.as_secs_f64()
        ),
    )
}

fn progress_and_preservation() -> (Outcome, Outcome) {
    let start = Instant::now();
    let (s, _) = soundness(SOUNDNESS_CASES, 0);
    let took = start.elapsed();
    let progress = outcome(
        s.cases >= SOUNDNESS_CASES && s.progress_failures == 0 && took < SOUNDNESS_BUDGET,
        format!(
            "{} cases, {} states, {} values, {} out of fuel, {} failures, {:.1}% with Match, {:.1}s",
            s.cases,
            s.states,
            s.values,
            s.out_of_fuel,
            s.progress_failures,
            100.0 * s.match_fraction,
            took.as_secs_f64()
        ),
    );
    let (controls, rejected) = run_negative_controls();
    let preservation = outcome(
        s.preservation_failures == 0 && rejected,
        format!(
            "{} steps, {} allocating, {} failures, {} negative controls {}",
            s.steps,
            s.allocations,
            s.preservation_failures,
            controls.len(),
            if rejected { "rejected" } else { "NOT rejected" }
        ),
    );
    (progress, preservation)
}

fn corpus() -> Outcome {
    let files = corpus_programs();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for f in &files {
        match run_corpus_file(f) {
            Ok(r) if r.actual == r.expected => runs.push(r),
            Ok(r) => failures.push(format!("{}: trace differs", r.name)),
            Err(e) => failures.push(e),
        }
    }
    let covered = rules_covered(&runs);
    let missing: Vec<&str> = ALL_RULES.iter().copied().filter(|r| !covered.contains(*r)).collect();
    outcome(
        files.len() >= 20 && failures.is_empty() && missing.is_empty(),
        format!(
            "{} programs, {} exact, {} of {} rules covered{}{}",
            files.len(),
            runs.len(),
            ALL_RULES.len() - missing.len(),
            ALL_RULES.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) },
            if missing.is_empty() { String::new() } else { format!("; missing {missing:?}") }
        ),
    )
}

fn first_rule(p: &Program) -> Option<String> {
    match step(&p.store, &p.main) {
        StepResult::Stepped(s) => Some(s.rule),
        _ => None,
    }
}

fn match_semantics() -> Outcome {
    let decls = "tag #0 : Top; tag #1 : Top extends #0; tag #3 : Top;\n";
    let prog = |body: &str| Program::parse(&format!("{decls}{body}")).expect("fixed program parses");
    let mut notes = Vec::new();

    let up = prog("Match{New{< >}(#1)}(#0)(y){Extract{y}}{< >}");
    let up_ok = synthesize(&TypingCtx::new(), &up.sigma, &up.main) == Ok(Ty::Top)
        && first_rule(&up).as_deref() == Some("r_matchsuc");
    notes.push(format!("#1 against #0 {}", if up_ok { "hits" } else { "WRONG" }));

    let unrelated = prog("Match{New{< >}(#1)}(#3)(y){Extract{y}}{< >}");
    let unrelated_ok = synthesize(&TypingCtx::new(), &unrelated.sigma, &unrelated.main)
        .is_err_and(|e| e.kind == TypeErrorKind::NoMutualSupertype);
    notes.push(format!("#1 against #3 {}", if unrelated_ok { "rejected" } else { "WRONG" }));

    let down = prog("Match{New{< >}(#0)}(#1)(y){Extract{y}}{< >}");
    let down_ok = synthesize(&TypingCtx::new(), &down.sigma, &down.main) == Ok(Ty::Top)
        && first_rule(&down).as_deref() == Some("r_matchfail");
    notes.push(format!("#0 against #1 {}", if down_ok { "misses" } else { "WRONG" }));

    outcome(up_ok && unrelated_ok && down_ok, notes.join(", "))
}

/// Free term variables, computed independently of the library.
fn free(e: &Tm) -> BTreeSet<String> {
    fn name(n: &Name, out: &mut BTreeSet<String>) {
        match n {
            Name::Var(x) => {
                out.insert(x.to_string());
            }
            Name::Tag(_) => {}
            Name::Fst(m) | Name::Unfold(m) => name(m, out),
        }
    }
    fn ty(t: &Ty, out: &mut BTreeSet<String>) {
        match t {
            Ty::Tag(b) | Ty::Mu(_, b) => ty(b, out),
            Ty::TagExt(b, n) => {
                ty(b, out);
                name(n, out);
            }
            Ty::Tagged(n) => name(n, out),
            Ty::Prod(x, a, b) | Ty::Sum(x, a, b) => {
                ty(a, out);
                let mut inner = BTreeSet::new();
                ty(b, &mut inner);
                inner.remove(x.as_str());
                out.extend(inner);
            }
            Ty::RCons(_, a, b) => {
                ty(a, out);
                ty(b, out);
            }
            Ty::RNil | Ty::Top | Ty::Var(_) => {}
        }
    }
    fn bound(x: &str, body: &Tm, out: &mut BTreeSet<String>) {
        let mut inner = free(body);
        inner.remove(x);
        out.extend(inner);
    }
    let mut out = BTreeSet::new();
    match e {
        Tm::NewTag(t) => ty(t, &mut out),
        Tm::SubTag(t, n) => {
            ty(t, &mut out);
            name(n, &mut out);
        }
        Tm::New(n, b) => {
            name(n, &mut out);
            out.extend(free(b));
        }
        Tm::Match { scrutinee, pattern, binder, hit, miss } => {
            out.extend(free(scrutinee));
            name(pattern, &mut out);
            bound(binder, hit, &mut out);
            out.extend(free(miss));
        }
        Tm::Lam(x, t, b) => {
            ty(t, &mut out);
            bound(x, b, &mut out);
        }
        Tm::Let(x, a, b) => {
            out.extend(free(a));
            bound(x, b, &mut out);
        }
        Tm::Fold(t, b) => {
            ty(t, &mut out);
            out.extend(free(b));
        }
        Tm::Name(n) => name(n, &mut out),
        Tm::Extract(a) | Tm::Proj(a, _) | Tm::Fix(a) | Tm::Unfold(a) | Tm::Fst(a) | Tm::Snd(a) => {
            out.extend(free(a))
        }
        Tm::App(a, b) | Tm::RCons(_, a, b) | Tm::Pair(a, b) => {
            out.extend(free(a));
            out.extend(free(b));
        }
        Tm::Unit | Tm::RNil => {}
    }
    out
}

fn subterms<'a>(e: &'a Tm, out: &mut Vec<&'a Tm>) {
    out.push(e);
    for c in e.children() {
        subterms(c, out);
    }
}

fn substitution_laws() -> Outcome {
    let candidates: Vec<String> = (0..12).map(|i| format!("v{i}")).chain(["x", "y", "rec"].map(String::from)).collect();
    let replacement = Tm::pair(Tm::Unit, Tm::RNil);

    let mut identity = 0usize;
    let mut identity_bad = 0usize;
    let mut seed = 0u64;
    while identity < LAW_INSTANCES {
        let case = gen_typed_term(seed, DEFAULT_DEPTH);
        seed += 1;
        let mut subs = Vec::new();
        subterms(&case.term, &mut subs);
        for t in subs {
            let fv = free(t);
            for x in candidates.iter().filter(|x| !fv.contains(*x)) {
                identity += 1;
                if subst_tm(x, &replacement, t) != *t {
                    identity_bad += 1;
                }
            }
        }
    }

    let mut shadow = 0usize;
    let mut shadow_bad = 0usize;
    for seed in 0..LAW_INSTANCES as u64 {
        let filler = gen_typed_term(seed, 3).term;
        let y = Tm::var("y");
        let m = Tm::match_(
            Tm::pair(y.clone(), filler.clone()),
            Name::tag(0),
            "y",
            Tm::pair(y.clone(), filler.clone()),
            Tm::pair(filler.clone(), y.clone()),
        );
        let want = Tm::match_(
            Tm::pair(replacement.clone(), filler.clone()),
            Name::tag(0),
            "y",
            Tm::pair(y.clone(), filler.clone()),
            Tm::pair(filler.clone(), replacement.clone()),
        );
        shadow += 1;
        if subst_tm("y", &replacement, &m) != want {
            shadow_bad += 1;
        }
    }

    let mut mu = 0usize;
    let mut mu_bad = 0usize;
    let u = Ty::record([("f", Ty::Top)]);
    for body in enumerate_types(2, &["f", "g"], 3).into_iter().take(LAW_INSTANCES * 2) {
        let shadowed = Ty::mu("t", body.clone());
        let open = Ty::prod("x", Ty::var("t"), shadowed.clone());
        mu += 1;
        let want = Ty::prod("x", u.clone(), shadowed.clone());
        if subst_tyvar("t", &u, &shadowed) != shadowed || subst_tyvar("t", &u, &open) != want {
            mu_bad += 1;
        }
    }

    outcome(
        identity_bad + shadow_bad + mu_bad == 0 && identity.min(shadow).min(mu) >= LAW_INSTANCES,
        format!(
            "identity {}/{}, match shadowing {}/{}, mu shadowing {}/{}",
            identity - identity_bad,
            identity,
            shadow - shadow_bad,
            shadow,
            mu - mu_bad,
            mu
        ),
    )
}

fn determinism() -> Outcome {
    let traces = || -> Vec<String> {
        corpus_programs()
            .iter()
            .map(|f| {
                let p = Program::parse(&std::fs::read_to_string(f).unwrap()).unwrap();
                let e = evaluate(p.store.clone(), p.main.clone(), CORPUS_FUEL);
                render_trace(&p.store, &p.main, &e)
            })
            .collect()
    };
    let cases = |seed: u64| -> Vec<TestCase> { (seed..seed + 200).map(|s| gen_typed_term(s, DEFAULT_DEPTH)).collect() };
    let selftest = || {
        let r = run_selftest(200, 7, 2);
        (r.render(), serde_json::to_string(&r).expect("report serializes"))
    };
    let same_traces = traces() == traces();
    let same_cases = cases(0) == cases(0);
    let same_selftest = selftest() == selftest();
    outcome(
        same_traces && same_cases && same_selftest,
        format!(
            "corpus traces {}, generated cases {}, selftest report {}",
            if same_traces { "identical" } else { "DIFFER" },
            if same_cases { "identical" } else { "DIFFER" },
            if same_selftest { "identical" } else { "DIFFER" }
        ),
    )
}

fn round_trip() -> Outcome {
    let mut terms = 0usize;
    let mut bad = Vec::new();
    for seed in 0..LAW_INSTANCES as u64 {
        let t = gen_typed_term(seed, DEFAULT_DEPTH).term;
        terms += 1;
        if parse_term(&t.to_string()).as_ref() != Ok(&t) {
            bad.push(format!("seed {seed}"));
        }
    }
    let mut files = 0usize;
    for f in corpus_programs() {
        let p = Program::parse(&std::fs::read_to_string(&f).unwrap()).unwrap();
        files += 1;
        if parse_term(&p.main.to_string()).as_ref() != Ok(&p.main) {
            bad.push(f.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    let mut types = 0usize;
    for t in enumerate_types(2, &["f", "g"], 3) {
        types += 1;
        if parse_type(&t.to_string()).as_ref() != Ok(&t) {
            bad.push(t.to_string());
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{terms} generated terms, {files} corpus programs, {types} types, {} failures{}",
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    results.push(("differential subtyping", differential()));
    let (progress, preservation) = progress_and_preservation();
    results.push(("progress", progress));
    results.push(("preservation", preservation));
    results.push(("corpus traces", corpus()));
    results.push(("match semantics", match_semantics()));
    results.push(("substitution laws", substitution_laws()));
    results.push(("determinism", determinism()));
    results.push(("parse round trip", round_trip()));

    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.ok;
        println!("{} [{}] {}: {}", if o.ok { "PASS" } else { "FAIL" }, i + 1, name, o.detail);
    }
    println!("{} of {} criteria passed", results.iter().filter(|(_, o)| o.ok).count(), results.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
