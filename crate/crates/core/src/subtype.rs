//! Algorithmic subtyping, principal types of names, and the tag-hierarchy
//! queries built on them.
//!
//! Reflexivity and transitivity are not rules of the algorithm; they are
//! admissible, which the harness checks against a declarative search.

use std::fmt;

use thiserror::Error;

use crate::subst::unfold_mu;
use crate::syntax::{ty_lookup, AmberEnv, Ident, Name, TagCtx, TagId, Ty, TypingCtx};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("unbound variable {0}")]
    UnboundVariable(Ident),
    #[error("unbound tag {0}")]
    UnboundTag(TagId),
    #[error("{0} has type {1}, which is not a Sum")]
    NotASum(Name, Ty),
    #[error("{0} has type {1}, which is not a mu type")]
    NotAMu(Name, Ty),
}

/// The subsumption-free type of a name.
pub fn name_type(gamma: &TypingCtx, sigma: &TagCtx, n: &Name) -> Result<Ty, NameError> {
    match n {
        Name::Var(x) => gamma.lookup(x).cloned().ok_or_else(|| NameError::UnboundVariable(x.clone())),
        Name::Tag(c) => {
            let entry = sigma.get(*c).ok_or(NameError::UnboundTag(*c))?;
            Ok(match &entry.parent {
                None => Ty::tag(entry.body.clone()),
                Some(p) => Ty::tag_ext(entry.body.clone(), p.clone()),
            })
        }
        Name::Fst(inner) => match name_type(gamma, sigma, inner)? {
            Ty::Sum(_, first, _) => Ok(*first),
            other => Err(NameError::NotASum((**inner).clone(), other)),
        },
        Name::Unfold(inner) => match name_type(gamma, sigma, inner)? {
            Ty::Mu(t, body) => Ok(unfold_mu(&t, &body)),
            other => Err(NameError::NotAMu((**inner).clone(), other)),
        },
    }
}

pub fn name_tag_type(gamma: &TypingCtx, sigma: &TagCtx, n: &Name) -> Option<Ty> {
    name_type(gamma, sigma, n).ok()
}

fn parent_of(gamma: &TypingCtx, sigma: &TagCtx, n: &Name) -> Option<Name> {
    match name_tag_type(gamma, sigma, n)? {
        Ty::TagExt(_, p) => Some(p),
        _ => None,
    }
}

/// `[n, parent(n), parent(parent(n)), ...]`, stopping at a root tag, an
/// unresolvable name, or a repeated name.
pub fn ancestor_chain(gamma: &TypingCtx, sigma: &TagCtx, n: &Name) -> Vec<Name> {
    let mut chain = vec![n.clone()];
    let mut cur = n.clone();
    while let Some(p) = parent_of(gamma, sigma, &cur) {
        if chain.contains(&p) {
            break;
        }
        chain.push(p.clone());
        cur = p;
    }
    chain
}

/// Whether `Tagged(n)` and `Tagged(m)` share a supertype.
pub fn mutual_supertype(gamma: &TypingCtx, sigma: &TagCtx, n: &Name, m: &Name) -> bool {
    let left = ancestor_chain(gamma, sigma, n);
    ancestor_chain(gamma, sigma, m).iter().any(|a| left.contains(a))
}

/// `Δ | Γ ⊢Σ lhs <: rhs`.
#[derive(Clone, Copy, Debug)]
pub struct SubtypeQuery<'a> {
    pub delta: &'a AmberEnv,
    pub gamma: &'a TypingCtx,
    pub sigma: &'a TagCtx,
    pub lhs: &'a Ty,
    pub rhs: &'a Ty,
}

impl<'a> SubtypeQuery<'a> {
    pub fn new(delta: &'a AmberEnv, gamma: &'a TypingCtx, sigma: &'a TagCtx, lhs: &'a Ty, rhs: &'a Ty) -> Self {
        SubtypeQuery { delta, gamma, sigma, lhs, rhs }
    }
}

pub fn subtype_check(q: &SubtypeQuery<'_>) -> bool {
    let mut fuel = u64::MAX;
    sub(q.delta, q.gamma, q.sigma, q.lhs, q.rhs, &mut fuel).unwrap_or(false)
}

/// Subtyping with an empty Amber environment.
pub fn is_subtype(gamma: &TypingCtx, sigma: &TagCtx, lhs: &Ty, rhs: &Ty) -> bool {
    subtype_check(&SubtypeQuery::new(&AmberEnv::new(), gamma, sigma, lhs, rhs))
}

/// Runs the check with a budget of recursive calls. `None` means the budget
/// ran out before an answer was reached.
pub fn subtype_with_fuel(q: &SubtypeQuery<'_>, fuel: u64) -> Option<bool> {
    let mut fuel = fuel;
    sub(q.delta, q.gamma, q.sigma, q.lhs, q.rhs, &mut fuel).ok()
}

struct OutOfFuel;

fn sub(
    delta: &AmberEnv,
    gamma: &TypingCtx,
    sigma: &TagCtx,
    lhs: &Ty,
    rhs: &Ty,
    fuel: &mut u64,
) -> Result<bool, OutOfFuel> {
    if *fuel == 0 {
        return Err(OutOfFuel);
    }
    *fuel -= 1;
    if lhs == rhs {
        return Ok(true);
    }
    Ok(match (lhs, rhs) {
        (Ty::Var(t), Ty::Var(u)) => delta.contains(t, u),
        (Ty::Mu(t, a), Ty::Mu(u, b)) => sub(&delta.with(t, u), gamma, sigma, a, b, fuel)?,
        (Ty::RNil | Ty::RCons(..), Ty::RNil | Ty::RCons(..)) => {
            for (label, want) in rhs.record_fields() {
                match ty_lookup(label, lhs) {
                    Some(have) if sub(delta, gamma, sigma, have, want, fuel)? => {}
                    _ => return Ok(false),
                }
            }
            true
        }
        (Ty::Prod(x, t1, t2), Ty::Prod(y, t3, t4)) => {
            x == y
                && sub(delta, gamma, sigma, t3, t1, fuel)?
                && sub(delta, &gamma.extend(x.clone(), (**t3).clone()), sigma, t2, t4, fuel)?
        }
        (Ty::Tagged(n), Ty::Tagged(m)) => tag_below(gamma, sigma, n, m),
        (Ty::TagExt(a, n), Ty::TagExt(b, m)) => a == b && tag_below(gamma, sigma, n, m),
        (Ty::TagExt(a, _), Ty::Tag(b)) => a == b,
        _ => false,
    })
}

/// `Tagged(n) <: Tagged(m)`: `m` is on the ancestor chain of `n`.
fn tag_below(gamma: &TypingCtx, sigma: &TagCtx, n: &Name, m: &Name) -> bool {
    n == m || ancestor_chain(gamma, sigma, n).contains(m)
}

/// A derivation tree of the algorithmic system, labelled with the names of
/// the declarative rules each step corresponds to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: String,
    pub lhs: Ty,
    pub rhs: Ty,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    fn leaf(rule: &str, lhs: &Ty, rhs: &Ty) -> Derivation {
        Derivation { rule: rule.to_string(), lhs: lhs.clone(), rhs: rhs.clone(), premises: vec![] }
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        writeln!(f, "{:indent$}{}: {} <: {}", "", self.rule, self.lhs, self.rhs, indent = indent)?;
        for p in &self.premises {
            p.write_indented(f, indent + 2)?;
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

/// Same decision procedure as [`subtype_check`], returning the derivation.
pub fn derive(q: &SubtypeQuery<'_>) -> Option<Derivation> {
    derive_in(q.delta, q.gamma, q.sigma, q.lhs, q.rhs)
}

fn derive_in(delta: &AmberEnv, gamma: &TypingCtx, sigma: &TagCtx, lhs: &Ty, rhs: &Ty) -> Option<Derivation> {
    if lhs == rhs {
        return Some(Derivation::leaf("ST-Reflexive", lhs, rhs));
    }
    let node = |rule: &str, premises: Vec<Derivation>| Derivation {
        rule: rule.to_string(),
        lhs: lhs.clone(),
        rhs: rhs.clone(),
        premises,
    };
    match (lhs, rhs) {
        (Ty::Var(t), Ty::Var(u)) if delta.contains(t, u) => Some(node("ST-Amber-1", vec![])),
        (Ty::Mu(t, a), Ty::Mu(u, b)) => {
            let p = derive_in(&delta.with(t, u), gamma, sigma, a, b)?;
            Some(node("ST-Amber-2", vec![p]))
        }
        (Ty::RNil | Ty::RCons(..), Ty::RNil | Ty::RCons(..)) => {
            let mut premises = Vec::new();
            for (label, want) in rhs.record_fields() {
                let have = ty_lookup(label, lhs)?;
                premises.push(derive_in(delta, gamma, sigma, have, want)?);
            }
            let rule = record_rule_name(lhs, rhs, &premises);
            Some(node(&rule, premises))
        }
        (Ty::Prod(x, t1, t2), Ty::Prod(y, t3, t4)) if x == y => {
            let dom = derive_in(delta, gamma, sigma, t3, t1)?;
            let cod = derive_in(delta, &gamma.extend(x.clone(), (**t3).clone()), sigma, t2, t4)?;
            Some(node("ST-App", vec![dom, cod]))
        }
        (Ty::Tagged(n), Ty::Tagged(m)) => tag_derivation(gamma, sigma, n, m),
        (Ty::TagExt(a, n), Ty::TagExt(b, m)) if a == b => {
            let p = tag_derivation(gamma, sigma, n, m)?;
            Some(node("ST-Tag-2", vec![p]))
        }
        (Ty::TagExt(a, _), Ty::Tag(b)) if a == b => Some(node("ST-Tag-3", vec![])),
        _ => None,
    }
}

/// One ST-Tag-1 step per edge of the ancestor chain, nested so that each
/// node's premise continues from the parent.
fn tag_derivation(gamma: &TypingCtx, sigma: &TagCtx, n: &Name, m: &Name) -> Option<Derivation> {
    let chain = ancestor_chain(gamma, sigma, n);
    let pos = chain.iter().position(|a| a == m)?;
    let target = Ty::Tagged(m.clone());
    let mut d = Derivation::leaf("ST-Reflexive", &target, &target);
    for a in chain[..pos].iter().rev() {
        d = Derivation {
            rule: "ST-Tag-1".to_string(),
            lhs: Ty::Tagged(a.clone()),
            rhs: target.clone(),
            premises: vec![d],
        };
    }
    Some(d)
}

fn record_rule_name(lhs: &Ty, rhs: &Ty, premises: &[Derivation]) -> String {
    let left: Vec<&str> = lhs.record_fields().into_iter().map(|(l, _)| l).collect();
    let right: Vec<&str> = rhs.record_fields().into_iter().map(|(l, _)| l).collect();
    let width = left.len() > right.len();
    let permuted = !left.starts_with(&right);
    let depth = premises.iter().any(|p| p.rule != "ST-Reflexive");
    let mut parts = Vec::new();
    if width {
        parts.push("1");
    }
    if depth || !width && !permuted {
        parts.push("2");
    }
    if permuted {
        parts.push("3");
    }
    format!("ST-Record-{}", parts.join("/"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hierarchy() -> TagCtx {
        TagCtx::new()
            .with(0, Ty::Top, None)
            .with(1, Ty::Top, Some(0))
            .with(2, Ty::Top, Some(1))
            .with(3, Ty::Top, None)
            .with(4, Ty::Top, Some(0))
    }

    fn check(sigma: &TagCtx, lhs: &Ty, rhs: &Ty) -> bool {
        is_subtype(&TypingCtx::new(), sigma, lhs, rhs)
    }

    #[test]
    fn reflexive_on_tagged_variable() {
        let t = Ty::tagged(Name::var("x"));
        assert!(check(&TagCtx::new(), &t, &t));
    }

    #[test]
    fn record_width_after_permutation() {
        let lhs = Ty::record([("f", Ty::Top), ("g", Ty::Top)]);
        let rhs = Ty::record([("g", Ty::Top)]);
        assert!(check(&TagCtx::new(), &lhs, &rhs));
        assert!(!check(&TagCtx::new(), &rhs, &lhs));
        assert!(!check(&TagCtx::new(), &Ty::Top, &Ty::RNil));
    }

    #[test]
    fn tag_ext_below_tag() {
        let lhs = Ty::tag_ext(Ty::Top, Name::tag(1));
        assert!(check(&TagCtx::new(), &lhs, &Ty::tag(Ty::Top)));
        assert!(!check(&TagCtx::new(), &lhs, &Ty::tag(Ty::RNil)));
    }

    #[test]
    fn amber_then_width() {
        let lhs = Ty::mu("t", Ty::record([("f", Ty::var("t"))]));
        let rhs = Ty::mu("s", Ty::RNil);
        assert!(check(&TagCtx::new(), &lhs, &rhs));
        let rhs = Ty::mu("s", Ty::record([("f", Ty::var("s"))]));
        assert!(check(&TagCtx::new(), &lhs, &rhs));
        assert!(!check(&TagCtx::new(), &Ty::var("t"), &Ty::var("s")));
    }

    #[test]
    fn products_are_contravariant_in_the_domain() {
        let big = Ty::record([("f", Ty::Top), ("g", Ty::Top)]);
        let small = Ty::record([("f", Ty::Top)]);
        let sigma = TagCtx::new();
        assert!(check(&sigma, &Ty::prod("x", small.clone(), Ty::Top), &Ty::prod("x", big.clone(), Ty::Top)));
        assert!(!check(&sigma, &Ty::prod("x", big.clone(), Ty::Top), &Ty::prod("x", small.clone(), Ty::Top)));
        assert!(!check(&sigma, &Ty::prod("x", small.clone(), Ty::Top), &Ty::prod("y", big, Ty::Top)));
    }

    #[test]
    fn product_codomain_sees_the_binder() {
        // x : Tag[Top]Extends(#0) makes Tagged(x) a subtype of Tagged(#0).
        let sigma = hierarchy();
        let dom = Ty::tag_ext(Ty::Top, Name::tag(0));
        let lhs = Ty::prod("x", dom.clone(), Ty::tagged(Name::var("x")));
        let rhs = Ty::prod("x", dom, Ty::tagged(Name::tag(0)));
        assert!(check(&sigma, &lhs, &rhs));
    }

    #[test]
    fn tag_chains() {
        let sigma = hierarchy();
        let tagged = |c| Ty::tagged(Name::tag(c));
        assert!(check(&sigma, &tagged(2), &tagged(0)));
        assert!(check(&sigma, &tagged(2), &tagged(1)));
        assert!(!check(&sigma, &tagged(0), &tagged(2)));
        assert!(!check(&sigma, &tagged(1), &tagged(4)));
        assert!(!check(&sigma, &tagged(3), &tagged(0)));
        let ext = |c| Ty::tag_ext(Ty::Top, Name::tag(c));
        assert!(check(&sigma, &ext(2), &ext(0)));
        assert!(!check(&sigma, &ext(0), &ext(2)));
        assert!(!check(&sigma, &Ty::Top, &Ty::tag(Ty::Top)));
    }

    #[test]
    fn top_is_inert() {
        assert!(!check(&TagCtx::new(), &Ty::RNil, &Ty::Top));
        assert!(check(&TagCtx::new(), &Ty::Top, &Ty::Top));
    }

    #[test]
    fn name_types() {
        let sigma = TagCtx::new().with(0, Ty::Top, None).with(1, Ty::Top, Some(0));
        let gamma = TypingCtx::new().extend("x", Ty::Top);
        assert_eq!(name_tag_type(&gamma, &sigma, &Name::tag(0)), Some(Ty::tag(Ty::Top)));
        assert_eq!(name_tag_type(&gamma, &sigma, &Name::var("x")), Some(Ty::Top));
        assert_eq!(
            name_tag_type(&gamma, &sigma, &Name::tag(1)),
            Some(Ty::tag_ext(Ty::Top, Name::tag(0)))
        );
        assert_eq!(name_tag_type(&gamma, &sigma, &Name::var("q")), None);
        let gamma = gamma.extend("p", Ty::sum("y", Ty::RNil, Ty::Top));
        assert_eq!(name_tag_type(&gamma, &sigma, &Name::fst(Name::var("p"))), Some(Ty::RNil));
        let m = Ty::mu("t", Ty::record([("hd", Ty::var("t"))]));
        let gamma = gamma.extend("m", m.clone());
        assert_eq!(
            name_tag_type(&gamma, &sigma, &Name::unfold(Name::var("m"))),
            Some(Ty::record([("hd", m)]))
        );
    }

    #[test]
    fn chains_and_mutual_supertypes() {
        let sigma = hierarchy();
        let g = TypingCtx::new();
        assert_eq!(ancestor_chain(&g, &sigma, &Name::tag(2)), vec![Name::tag(2), Name::tag(1), Name::tag(0)]);
        assert_eq!(ancestor_chain(&g, &sigma, &Name::tag(0)), vec![Name::tag(0)]);
        assert_eq!(ancestor_chain(&g, &sigma, &Name::var("q")), vec![Name::var("q")]);
        assert!(mutual_supertype(&g, &sigma, &Name::tag(0), &Name::tag(0)));
        assert!(mutual_supertype(&g, &sigma, &Name::tag(1), &Name::tag(4)));
        assert!(!mutual_supertype(&g, &sigma, &Name::tag(0), &Name::tag(3)));
    }

    #[test]
    fn cyclic_contexts_terminate() {
        let sigma = TagCtx::new().with(0, Ty::Top, Some(1)).with(1, Ty::Top, Some(0));
        let g = TypingCtx::new();
        assert_eq!(ancestor_chain(&g, &sigma, &Name::tag(0)), vec![Name::tag(0), Name::tag(1)]);
        assert!(!check(&sigma, &Ty::tagged(Name::tag(0)), &Ty::tagged(Name::tag(3))));
    }

    #[test]
    fn derivations_name_their_rules() {
        let sigma = hierarchy();
        let g = TypingCtx::new();
        let d = AmberEnv::new();
        let lhs = Ty::record([("f", Ty::Top), ("g", Ty::tagged(Name::tag(2)))]);
        let rhs = Ty::record([("g", Ty::tagged(Name::tag(0)))]);
        let tree = derive(&SubtypeQuery::new(&d, &g, &sigma, &lhs, &rhs)).unwrap();
        assert_eq!(tree.rule, "ST-Record-1/2/3");
        assert_eq!(tree.premises[0].rule, "ST-Tag-1");
        assert_eq!(tree.premises[0].premises[0].rule, "ST-Tag-1");
        let text = tree.to_string();
        assert!(text.starts_with("ST-Record-1/2/3: {f:Top ;; g:Tagged(#2)} <: {g:Tagged(#0)}\n"));
        let lhs = Ty::tag_ext(Ty::Top, Name::tag(1));
        let tree = derive(&SubtypeQuery::new(&d, &g, &sigma, &lhs, &Ty::tag(Ty::Top))).unwrap();
        assert_eq!(tree.rule, "ST-Tag-3");
        assert!(derive(&SubtypeQuery::new(&d, &g, &sigma, &Ty::Top, &Ty::RNil)).is_none());
    }

    #[test]
    fn fuel_exhaustion_is_reported() {
        let d = AmberEnv::new();
        let g = TypingCtx::new();
        let s = TagCtx::new();
        let lhs = Ty::record([("f", Ty::Top), ("g", Ty::Top)]);
        let rhs = Ty::record([("g", Ty::Top), ("f", Ty::Top)]);
        let q = SubtypeQuery::new(&d, &g, &s, &lhs, &rhs);
        assert_eq!(subtype_with_fuel(&q, 1), None);
        assert_eq!(subtype_with_fuel(&q, 3), Some(true));
    }
}
