//! Values and small-step reduction over store/term pairs.
//!
//! A step through congruence rules is reported with the whole chain of rule
//! names, outermost first: `r_let/r_cls` is the `NewTag` allocation firing
//! inside the bound term of a `Let`.

use std::fmt::Write;

use crate::store::Store;
use crate::subst::subst_tm;
use crate::syntax::{record_tm, tm_lookup, Name, TagId, Tm, Ty};

/// A tag created by a step, with what the static context needs to know
/// about it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub tag: TagId,
    pub body: Ty,
    pub parent: Option<TagId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stepped {
    pub store: Store,
    pub term: Tm,
    pub rule: String,
    pub alloc: Option<Allocation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Stepped(Stepped),
    IsValue,
    Stuck(String),
}

pub fn is_value(s: &Store, e: &Tm) -> bool {
    match e {
        Tm::Unit | Tm::Lam(..) | Tm::RNil => true,
        Tm::Name(Name::Tag(c)) => s.contains(*c),
        Tm::New(_, v) | Tm::Fold(_, v) => is_value(s, v),
        Tm::RCons(_, h, t) => record_tm(t) && is_value(s, h) && is_value(s, t),
        Tm::Pair(a, b) => is_value(s, a) && is_value(s, b),
        _ => false,
    }
}

pub fn step(s: &Store, e: &Tm) -> StepResult {
    if is_value(s, e) {
        return StepResult::IsValue;
    }
    match reduce(s, e) {
        Ok(st) => StepResult::Stepped(st),
        Err(reason) => StepResult::Stuck(reason),
    }
}

fn stuck<T>(reason: &str) -> Result<T, String> {
    Err(reason.to_string())
}

fn base(s: &Store, term: Tm, rule: &str) -> Result<Stepped, String> {
    Ok(Stepped { store: s.clone(), term, rule: rule.to_string(), alloc: None })
}

/// Steps `inner` (which must not be a value) and rebuilds the surrounding
/// term with `wrap`.
fn congruence(s: &Store, inner: &Tm, rule: &str, wrap: impl FnOnce(Tm) -> Tm) -> Result<Stepped, String> {
    let st = reduce(s, inner)?;
    Ok(Stepped { store: st.store, term: wrap(st.term), rule: format!("{rule}/{}", st.rule), alloc: st.alloc })
}

/// One reduction step of a term that is not a value.
fn reduce(s: &Store, e: &Tm) -> Result<Stepped, String> {
    match e {
        Tm::NewTag(ty) => {
            let (c, s1) = s.fresh_tag();
            let s2 = s1.extend_root(c).map_err(|err| err.to_string())?;
            Ok(Stepped {
                store: s2,
                term: Tm::Name(Name::Tag(c)),
                rule: "r_cls".to_string(),
                alloc: Some(Allocation { tag: c, body: ty.clone(), parent: None }),
            })
        }
        Tm::SubTag(ty, n) => {
            let Name::Tag(parent) = n else {
                return stuck("open name");
            };
            if s.path_of(*parent).is_none() {
                return stuck("SubTag parent not in store");
            }
            let (c, s1) = s.fresh_tag();
            let s2 = s1.extend_child(c, *parent).map_err(|err| err.to_string())?;
            Ok(Stepped {
                store: s2,
                term: Tm::Name(Name::Tag(c)),
                rule: "r_ccls".to_string(),
                alloc: Some(Allocation { tag: c, body: ty.clone(), parent: Some(*parent) }),
            })
        }
        Tm::New(n, body) => congruence(s, body, "r_new", |b| Tm::new_tagged(n.clone(), b)),
        Tm::Match { scrutinee, pattern, binder, hit, miss } => {
            if !is_value(s, scrutinee) {
                return congruence(s, scrutinee, "r_match", |sc| Tm::Match {
                    scrutinee: Box::new(sc),
                    pattern: pattern.clone(),
                    binder: binder.clone(),
                    hit: hit.clone(),
                    miss: miss.clone(),
                });
            }
            let Tm::New(Name::Tag(c), _) = &**scrutinee else {
                return stuck("Match scrutinee is not a tagged value");
            };
            let Some(path) = s.path_of(*c) else {
                return stuck("Match scrutinee tag not in store");
            };
            let Name::Tag(wanted) = pattern else {
                return stuck("open name");
            };
            if path.contains(*wanted) {
                base(s, subst_tm(binder, scrutinee, hit), "r_matchsuc")
            } else {
                base(s, (**miss).clone(), "r_matchfail")
            }
        }
        Tm::Extract(inner) => {
            if !is_value(s, inner) {
                return congruence(s, inner, "r_untag1", Tm::extract);
            }
            match &**inner {
                Tm::New(_, v) => base(s, (**v).clone(), "r_untag2"),
                _ => stuck("Extract of non-New value"),
            }
        }
        Tm::App(f, a) => {
            if !is_value(s, f) {
                return congruence(s, f, "r_app1", |f2| Tm::app(f2, (**a).clone()));
            }
            if !is_value(s, a) {
                return congruence(s, a, "r_app2", |a2| Tm::app((**f).clone(), a2));
            }
            match &**f {
                Tm::Lam(x, _, body) => base(s, subst_tm(x, a, body), "r_appabs"),
                _ => stuck("application of non-function"),
            }
        }
        Tm::RCons(l, h, t) => {
            if !is_value(s, h) {
                return congruence(s, h, "r_rcdhead", |h2| Tm::rcons(l.clone(), h2, (**t).clone()));
            }
            if !is_value(s, t) {
                return congruence(s, t, "r_rcdtail", |t2| Tm::rcons(l.clone(), (**h).clone(), t2));
            }
            stuck("record tail is not a record")
        }
        Tm::Proj(r, l) => {
            if !is_value(s, r) {
                return congruence(s, r, "r_projcong", |r2| Tm::proj(r2, l.clone()));
            }
            if !record_tm(r) {
                return stuck("projection from non-record");
            }
            match tm_lookup(l, r) {
                Some(v) => base(s, v.clone(), "r_projrcd"),
                None => stuck("projection label missing"),
            }
        }
        Tm::Let(x, e1, e2) => {
            if !is_value(s, e1) {
                return congruence(s, e1, "r_let", |b| Tm::let_(x.clone(), b, (**e2).clone()));
            }
            base(s, subst_tm(x, e1, e2), "r_letv")
        }
        Tm::Fix(f) => match &**f {
            Tm::Lam(x, _, body) => base(s, subst_tm(x, e, body), "r_fixb"),
            _ if !is_value(s, f) => congruence(s, f, "r_fix", Tm::fix),
            _ => stuck("Fix of non-function"),
        },
        Tm::Fold(ty, inner) => congruence(s, inner, "r_fld", |b| Tm::fold(ty.clone(), b)),
        Tm::Unfold(inner) => {
            if !is_value(s, inner) {
                return congruence(s, inner, "r_unfld", Tm::unfold);
            }
            match &**inner {
                Tm::Fold(_, v) => base(s, (**v).clone(), "r_unfldfld"),
                _ => stuck("Unfold of non-Fold value"),
            }
        }
        Tm::Pair(a, b) => {
            if !is_value(s, a) {
                return congruence(s, a, "r_pair1", |a2| Tm::pair(a2, (**b).clone()));
            }
            congruence(s, b, "r_pair2", |b2| Tm::pair((**a).clone(), b2))
        }
        Tm::Fst(p) => {
            if !is_value(s, p) {
                return congruence(s, p, "r_proj1", Tm::fst);
            }
            match &**p {
                Tm::Pair(v, _) => base(s, (**v).clone(), "r_pairv1"),
                _ => stuck("Fst of non-pair"),
            }
        }
        Tm::Snd(p) => {
            if !is_value(s, p) {
                return congruence(s, p, "r_proj2", Tm::snd);
            }
            match &**p {
                Tm::Pair(_, v) => base(s, (**v).clone(), "r_pairv2"),
                _ => stuck("Snd of non-pair"),
            }
        }
        Tm::Name(Name::Tag(_)) => stuck("tag not in store"),
        Tm::Name(_) => stuck("open name"),
        Tm::Unit | Tm::Lam(..) | Tm::RNil => stuck("value cannot step"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Value,
    Stuck(String),
    OutOfFuel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub rule: String,
    pub term: Tm,
    /// The store after the step, present only when the step changed it.
    pub store: Option<Store>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub store: Store,
    pub term: Tm,
    pub status: Status,
    pub trace: Vec<TraceEntry>,
}

impl Evaluation {
    pub fn steps(&self) -> usize {
        self.trace.len()
    }
}

/// Steps at most `fuel` times.
pub fn evaluate(store: Store, term: Tm, fuel: u64) -> Evaluation {
    let mut store = store;
    let mut term = term;
    let mut trace = Vec::new();
    let mut remaining = fuel;
    loop {
        match step(&store, &term) {
            StepResult::IsValue => return Evaluation { store, term, status: Status::Value, trace },
            StepResult::Stuck(reason) => return Evaluation { store, term, status: Status::Stuck(reason), trace },
            StepResult::Stepped(st) => {
                if remaining == 0 {
                    return Evaluation { store, term, status: Status::OutOfFuel, trace };
                }
                remaining -= 1;
                let changed = (st.store != store).then(|| st.store.clone());
                trace.push(TraceEntry { rule: st.rule, term: st.term.clone(), store: changed });
                store = st.store;
                term = st.term;
            }
        }
    }
}

/// Renders a trace, one line per step after a `0: start` line showing the
/// initial state.
pub fn render_trace(initial_store: &Store, initial: &Tm, eval: &Evaluation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "0: start  e := {initial}  store := {initial_store}");
    for (i, entry) in eval.trace.iter().enumerate() {
        let _ = write!(out, "{}: {}  e := {}", i + 1, entry.rule, entry.term);
        if let Some(s) = &entry.store {
            let _ = write!(out, "  store := {s}");
        }
        out.push('\n');
    }
    out
}
