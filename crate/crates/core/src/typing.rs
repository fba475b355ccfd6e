//! Syntax-directed type synthesis and checking.
//!
//! Subsumption is not a separate rule. It is applied where a term meets an
//! expected type: function arguments, `New` payloads, `SubTag` bodies, `Fold`
//! bodies, pair components checked against a `Sum`, and the reconciliation of
//! `Match` branches.

use std::fmt;

use thiserror::Error;

use crate::subst::{subst_name_ty, unfold_mu};
use crate::subtype::{ancestor_chain, is_subtype, mutual_supertype, name_type, NameError};
use crate::syntax::{record_tm, tm_lookup, ty_lookup, wellformed_ty, Ident, Name, TagCtx, Tm, Ty, TypingCtx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeErrorKind {
    UnboundVariable,
    UnboundTag,
    NotAFunction,
    ArgumentNotAName,
    ArgumentTypeMismatch,
    NotATag,
    NotTagged,
    NoMutualSupertype,
    BranchTypesIncomparable,
    NotARecord,
    MissingField,
    NotASum,
    NotAMu,
    FoldAnnotationMismatch,
    IllFormedType,
    FirstComponentNotAName,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// What went wrong beyond the kind itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Detail {
    Types { expected: Ty, got: Ty },
    Message(String),
}

/// A typing failure at a node, addressed by child indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub path: Vec<usize>,
    pub detail: Detail,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ ", self.kind)?;
        if self.path.is_empty() {
            f.write_str("root")?;
        } else {
            let parts: Vec<String> = self.path.iter().map(usize::to_string).collect();
            f.write_str(&parts.join("."))?;
        }
        match &self.detail {
            Detail::Types { expected, got } => write!(f, ": expected {expected}, got {got}"),
            Detail::Message(m) => write!(f, ": {m}"),
        }
    }
}

type TResult<T> = Result<T, TypeError>;

/// Principal type of `e`.
pub fn synthesize(gamma: &TypingCtx, sigma: &TagCtx, e: &Tm) -> TResult<Ty> {
    Checker::new(sigma).synth(gamma, e)
}

/// Checks `e` against `ty`, using subsumption wherever a type is expected.
pub fn check_against(gamma: &TypingCtx, sigma: &TagCtx, e: &Tm, ty: &Ty) -> TResult<()> {
    let mut c = Checker::new(sigma);
    c.ty_ok(gamma, ty)?;
    c.check(gamma, e, ty, TypeErrorKind::ArgumentTypeMismatch)
}

/// Checks that a type annotation is well formed and that every name in it
/// denotes a tag in scope.
pub fn check_type(gamma: &TypingCtx, sigma: &TagCtx, ty: &Ty) -> TResult<()> {
    Checker::new(sigma).ty_ok(gamma, ty)
}

/// Types `LetRec x:T be e1 in e2` through its desugaring.
pub fn type_letrec(gamma: &TypingCtx, sigma: &TagCtx, x: &str, ty: &Ty, e1: &Tm, e2: &Tm) -> TResult<Ty> {
    synthesize(gamma, sigma, &Tm::letrec(x, ty.clone(), e1.clone(), e2.clone()))
}

/// A common supertype of `a` and `b`, if one can be built.
pub fn join(gamma: &TypingCtx, sigma: &TagCtx, a: &Ty, b: &Ty) -> Option<Ty> {
    if is_subtype(gamma, sigma, a, b) {
        return Some(b.clone());
    }
    if is_subtype(gamma, sigma, b, a) {
        return Some(a.clone());
    }
    match (a, b) {
        (Ty::Tagged(n), Ty::Tagged(m)) => nearest_common_ancestor(gamma, sigma, n, m).map(Ty::Tagged),
        (Ty::TagExt(x, n), Ty::TagExt(y, m)) if x == y => Some(match nearest_common_ancestor(gamma, sigma, n, m) {
            Some(p) => Ty::TagExt(x.clone(), p),
            None => Ty::Tag(x.clone()),
        }),
        (Ty::RNil | Ty::RCons(..), Ty::RNil | Ty::RCons(..)) => {
            let fields: Vec<(&str, Ty)> = a
                .record_fields()
                .into_iter()
                .filter_map(|(l, t)| {
                    let u = ty_lookup(l, b)?;
                    Some((l, join(gamma, sigma, t, u)?))
                })
                .collect();
            Some(Ty::record(fields))
        }
        (Ty::Prod(x, d1, c1), Ty::Prod(y, d2, c2)) if x == y && d1 == d2 => {
            let inner = gamma.extend(x.clone(), (**d1).clone());
            Some(Ty::prod(x.clone(), (**d1).clone(), join(&inner, sigma, c1, c2)?))
        }
        _ => None,
    }
}

fn nearest_common_ancestor(gamma: &TypingCtx, sigma: &TagCtx, n: &Name, m: &Name) -> Option<Name> {
    let other = ancestor_chain(gamma, sigma, m);
    ancestor_chain(gamma, sigma, n).into_iter().find(|a| other.contains(a))
}

struct Checker<'a> {
    sigma: &'a TagCtx,
    path: Vec<usize>,
}

impl<'a> Checker<'a> {
    fn new(sigma: &'a TagCtx) -> Self {
        Checker { sigma, path: Vec::new() }
    }

    fn err(&self, kind: TypeErrorKind, detail: Detail) -> TypeError {
        TypeError { kind, path: self.path.clone(), detail }
    }

    fn msg(&self, kind: TypeErrorKind, m: impl Into<String>) -> TypeError {
        self.err(kind, Detail::Message(m.into()))
    }

    fn mismatch(&self, kind: TypeErrorKind, expected: &Ty, got: &Ty) -> TypeError {
        self.err(kind, Detail::Types { expected: expected.clone(), got: got.clone() })
    }

    fn child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> TResult<T>) -> TResult<T> {
        self.path.push(i);
        let r = f(self)?;
        self.path.pop();
        Ok(r)
    }

    fn name(&self, gamma: &TypingCtx, n: &Name) -> TResult<Ty> {
        name_type(gamma, self.sigma, n).map_err(|e| {
            let kind = match e {
                NameError::UnboundVariable(_) => TypeErrorKind::UnboundVariable,
                NameError::UnboundTag(_) => TypeErrorKind::UnboundTag,
                NameError::NotASum(..) => TypeErrorKind::NotASum,
                NameError::NotAMu(..) => TypeErrorKind::NotAMu,
            };
            self.msg(kind, e.to_string())
        })
    }

    /// The payload type of tag `n`.
    fn tag_body(&self, gamma: &TypingCtx, n: &Name) -> TResult<Ty> {
        match self.name(gamma, n)? {
            Ty::Tag(b) | Ty::TagExt(b, _) => Ok(*b),
            other => Err(self.msg(TypeErrorKind::NotATag, format!("{n} has type {other}, which is not a tag type"))),
        }
    }

    /// Annotations must be well formed and every name in them must denote a
    /// tag in scope.
    fn ty_ok(&self, gamma: &TypingCtx, ty: &Ty) -> TResult<()> {
        if !wellformed_ty(ty) {
            return Err(self.msg(TypeErrorKind::IllFormedType, format!("{ty} is not well formed")));
        }
        self.names_ok(gamma, ty)
    }

    fn names_ok(&self, gamma: &TypingCtx, ty: &Ty) -> TResult<()> {
        let tag_name = |n: &Name| -> TResult<()> {
            match self.name(gamma, n) {
                Ok(Ty::Tag(_) | Ty::TagExt(..)) => Ok(()),
                Ok(other) => Err(self.msg(
                    TypeErrorKind::IllFormedType,
                    format!("{n} has type {other} and cannot name a tag in a type"),
                )),
                Err(e) => Err(self.msg(TypeErrorKind::IllFormedType, format!("in type {ty}: {}", detail_text(&e)))),
            }
        };
        match ty {
            Ty::Top | Ty::Var(_) | Ty::RNil => Ok(()),
            Ty::Tagged(n) => tag_name(n),
            Ty::TagExt(b, n) => {
                self.names_ok(gamma, b)?;
                tag_name(n)
            }
            Ty::Tag(b) | Ty::Mu(_, b) => self.names_ok(gamma, b),
            Ty::RCons(_, h, t) => {
                self.names_ok(gamma, h)?;
                self.names_ok(gamma, t)
            }
            Ty::Prod(x, a, b) | Ty::Sum(x, a, b) => {
                self.names_ok(gamma, a)?;
                self.names_ok(&gamma.extend(x.clone(), (**a).clone()), b)
            }
        }
    }

    fn synth(&mut self, gamma: &TypingCtx, e: &Tm) -> TResult<Ty> {
        use TypeErrorKind::*;
        match e {
            Tm::Name(n) => self.name(gamma, n),
            Tm::Unit => Ok(Ty::Top),
            Tm::NewTag(t) => {
                self.ty_ok(gamma, t)?;
                Ok(Ty::tag(t.clone()))
            }
            Tm::SubTag(t, n) => {
                self.ty_ok(gamma, t)?;
                let parent_body = self.tag_body(gamma, n)?;
                if !is_subtype(gamma, self.sigma, t, &parent_body) {
                    return Err(self.mismatch(ArgumentTypeMismatch, &parent_body, t));
                }
                Ok(Ty::tag_ext(t.clone(), n.clone()))
            }
            Tm::New(n, body) => {
                let want = self.tag_body(gamma, n)?;
                self.child(0, |c| c.check(gamma, body, &want, ArgumentTypeMismatch))?;
                Ok(Ty::tagged(n.clone()))
            }
            Tm::Match { scrutinee, pattern, binder, hit, miss } => {
                let (hit_ty, miss_ty) = self.match_branches(gamma, scrutinee, pattern, binder, hit, miss)?;
                join(gamma, self.sigma, &hit_ty, &miss_ty)
                    .ok_or_else(|| self.mismatch(BranchTypesIncomparable, &hit_ty, &miss_ty))
            }
            Tm::Extract(inner) => {
                let n = match self.child(0, |c| c.synth(gamma, inner))? {
                    Ty::Tagged(n) => n,
                    other => return Err(self.msg(NotTagged, format!("cannot extract from a value of type {other}"))),
                };
                self.tag_body(gamma, &n)
            }
            Tm::Lam(x, t, body) => {
                self.ty_ok(gamma, t)?;
                let inner = gamma.extend(x.clone(), t.clone());
                let cod = self.child(0, |c| c.synth(&inner, body))?;
                Ok(Ty::prod(x.clone(), t.clone(), cod))
            }
            Tm::App(f, a) => {
                let (x, dom, cod) = match self.child(0, |c| c.synth(gamma, f))? {
                    Ty::Prod(x, dom, cod) => (x, *dom, *cod),
                    other => return Err(self.msg(NotAFunction, format!("cannot apply a value of type {other}"))),
                };
                self.child(1, |c| c.check(gamma, a, &dom, ArgumentTypeMismatch))?;
                if !cod.mentions_name(&x) {
                    return Ok(cod);
                }
                match &**a {
                    Tm::Name(n) => Ok(subst_name_ty(n, &x, &cod)),
                    _ => Err(self.msg(
                        ArgumentNotAName,
                        format!("the result type {cod} depends on {x}, so the argument must be a name"),
                    )),
                }
            }
            Tm::RNil => Ok(Ty::RNil),
            Tm::RCons(l, h, t) => {
                if !record_tm(t) {
                    return Err(self.msg(IllFormedType, format!("record tail {t} is not a record")));
                }
                let head = self.child(0, |c| c.synth(gamma, h))?;
                let tail = self.child(1, |c| c.synth(gamma, t))?;
                if ty_lookup(l, &tail).is_some() {
                    return Err(self.msg(IllFormedType, format!("duplicate label {l}")));
                }
                Ok(Ty::rcons(l.clone(), head, tail))
            }
            Tm::Proj(r, l) => {
                let rt = self.child(0, |c| c.synth(gamma, r))?;
                if !matches!(rt, Ty::RNil | Ty::RCons(..)) {
                    return Err(self.msg(NotARecord, format!("cannot project {l} from a value of type {rt}")));
                }
                ty_lookup(l, &rt)
                    .cloned()
                    .ok_or_else(|| self.msg(MissingField, format!("no field {l} in {rt}")))
            }
            Tm::Let(x, e1, e2) => {
                let bound = self.child(0, |c| c.synth(gamma, e1))?;
                let inner = gamma.extend(x.clone(), bound);
                let body = self.child(1, |c| c.synth(&inner, e2))?;
                self.close_over(x, e1, body)
            }
            Tm::Fix(f) => {
                let (x, dom, cod) = match self.child(0, |c| c.synth(gamma, f))? {
                    Ty::Prod(x, dom, cod) => (x, *dom, *cod),
                    other => return Err(self.msg(NotAFunction, format!("Fix needs a function, got {other}"))),
                };
                if cod.mentions_name(&x) {
                    return Err(self.msg(ArgumentNotAName, format!("the result type {cod} of a fixed point depends on {x}")));
                }
                if !is_subtype(gamma, self.sigma, &cod, &dom) {
                    return Err(self.mismatch(ArgumentTypeMismatch, &dom, &cod));
                }
                Ok(cod)
            }
            Tm::Fold(t, body) => {
                self.ty_ok(gamma, t)?;
                let Ty::Mu(v, b) = t else {
                    return Err(self.msg(NotAMu, format!("Fold annotation {t} is not a mu type")));
                };
                let unrolled = unfold_mu(v, b);
                self.child(0, |c| c.check(gamma, body, &unrolled, FoldAnnotationMismatch))?;
                Ok(t.clone())
            }
            Tm::Unfold(inner) => match self.child(0, |c| c.synth(gamma, inner))? {
                Ty::Mu(v, b) => Ok(unfold_mu(&v, &b)),
                other => Err(self.msg(NotAMu, format!("cannot unfold a value of type {other}"))),
            },
            Tm::Pair(a, b) => {
                let first = self.child(0, |c| c.synth(gamma, a))?;
                let second = self.child(1, |c| c.synth(gamma, b))?;
                Ok(Ty::sum("_", first, second))
            }
            Tm::Fst(p) => match self.child(0, |c| c.synth(gamma, p))? {
                Ty::Sum(_, first, _) => Ok(*first),
                other => Err(self.msg(NotASum, format!("Fst of a value of type {other}"))),
            },
            Tm::Snd(p) => match self.child(0, |c| c.synth(gamma, p))? {
                Ty::Sum(x, _, second) if !second.mentions_name(&x) => Ok(*second),
                Ty::Sum(x, _, second) => match &**p {
                    Tm::Name(n) => Ok(subst_name_ty(&Name::fst(n.clone()), &x, &second)),
                    _ => Err(self.msg(
                        ArgumentNotAName,
                        format!("the type {second} depends on {x}, so Snd needs a name"),
                    )),
                },
                other => Err(self.msg(NotASum, format!("Snd of a value of type {other}"))),
            },
        }
    }

    /// `Let x be e1 in ...` where the body has type `body`: a dependency on
    /// `x` is resolved by substituting `e1`, which must then be a name.
    fn close_over(&self, x: &Ident, e1: &Tm, body: Ty) -> TResult<Ty> {
        if !body.mentions_name(x) {
            return Ok(body);
        }
        match e1 {
            Tm::Name(n) => Ok(subst_name_ty(n, x, &body)),
            _ => Err(self.msg(
                TypeErrorKind::ArgumentNotAName,
                format!("the body type {body} depends on {x}, so the bound term must be a name"),
            )),
        }
    }

    fn match_branches(
        &mut self,
        gamma: &TypingCtx,
        scrutinee: &Tm,
        pattern: &Name,
        binder: &Ident,
        hit: &Tm,
        miss: &Tm,
    ) -> TResult<(Ty, Ty)> {
        let hit_env = self.match_head(gamma, scrutinee, pattern, binder)?;
        let hit_ty = self.child(1, |c| c.synth(&hit_env, hit))?;
        let miss_ty = self.child(2, |c| c.synth(gamma, miss))?;
        Ok((hit_ty, miss_ty))
    }

    /// Checks the scrutinee and pattern of a `Match` and returns the context
    /// for the hit branch.
    fn match_head(&mut self, gamma: &TypingCtx, scrutinee: &Tm, pattern: &Name, binder: &Ident) -> TResult<TypingCtx> {
        use TypeErrorKind::*;
        let scrut_name = match self.child(0, |c| c.synth(gamma, scrutinee))? {
            Ty::Tagged(n) => n,
            other => return Err(self.msg(NotTagged, format!("cannot match on a value of type {other}"))),
        };
        self.tag_body(gamma, pattern)?;
        if !mutual_supertype(gamma, self.sigma, &scrut_name, pattern) {
            return Err(self.mismatch(NoMutualSupertype, &Ty::tagged(pattern.clone()), &Ty::tagged(scrut_name)));
        }
        Ok(gamma.extend(binder.clone(), Ty::tagged(pattern.clone())))
    }

    /// Checking mode. Forms that can push the expected type inward do so;
    /// everything else is synthesized and compared by subtyping, failing
    /// with `kind`.
    fn check(&mut self, gamma: &TypingCtx, e: &Tm, want: &Ty, kind: TypeErrorKind) -> TResult<()> {
        match (e, want) {
            (Tm::Pair(a, b), Ty::Sum(x, first, second)) => {
                self.child(0, |c| c.check(gamma, a, first, kind))?;
                if !second.mentions_name(x) {
                    return self.child(1, |c| c.check(gamma, b, second, kind));
                }
                let Tm::Name(n) = &**a else {
                    return Err(self.msg(
                        TypeErrorKind::FirstComponentNotAName,
                        format!("the second component type {second} depends on {x}, so the first component must be a name"),
                    ));
                };
                let second = subst_name_ty(n, x, second);
                self.child(1, |c| c.check(gamma, b, &second, kind))
            }
            (Tm::RNil | Tm::RCons(..), Ty::RNil | Ty::RCons(..)) => self.check_record(gamma, e, want, kind),
            (Tm::Let(x, e1, e2), _) if !want.mentions_name(x) => {
                let bound = self.child(0, |c| c.synth(gamma, e1))?;
                let inner = gamma.extend(x.clone(), bound);
                self.child(1, |c| c.check(&inner, e2, want, kind))
            }
            (Tm::Match { scrutinee, pattern, binder, hit, miss }, _) if !want.mentions_name(binder) => {
                let hit_env = self.match_head(gamma, scrutinee, pattern, binder)?;
                self.child(1, |c| c.check(&hit_env, hit, want, kind))?;
                self.child(2, |c| c.check(gamma, miss, want, kind))
            }
            // A pair literal has many Sum types and no Sum subtyping relates
            // them, so projections out of literals check the component
            // directly. Same for record literals.
            (Tm::Fst(p), _) if matches!(**p, Tm::Pair(..)) => {
                let Tm::Pair(a, b) = &**p else { unreachable!() };
                self.child(0, |c| c.child(1, |c| c.synth(gamma, b)))?;
                self.child(0, |c| c.child(0, |c| c.check(gamma, a, want, kind)))
            }
            (Tm::Snd(p), _) if matches!(**p, Tm::Pair(..)) => {
                let Tm::Pair(a, b) = &**p else { unreachable!() };
                self.child(0, |c| c.child(0, |c| c.synth(gamma, a)))?;
                self.child(0, |c| c.child(1, |c| c.check(gamma, b, want, kind)))
            }
            (Tm::Proj(r, l), _) if record_tm(r) && tm_lookup(l, r).is_some() => {
                let only = Ty::record([(l.clone(), want.clone())]);
                self.child(0, |c| c.check_record(gamma, r, &only, kind))
            }
            _ => {
                let got = self.synth(gamma, e)?;
                if is_subtype(gamma, self.sigma, &got, want) {
                    Ok(())
                } else {
                    Err(self.mismatch(kind, want, &got))
                }
            }
        }
    }

    /// A record literal against a record type: every expected field must be
    /// present and check; the other fields only need to be well typed.
    fn check_record(&mut self, gamma: &TypingCtx, e: &Tm, want: &Ty, kind: TypeErrorKind) -> TResult<()> {
        for (label, _) in want.record_fields() {
            if tm_lookup(label, e).is_none() {
                return Err(self.msg(TypeErrorKind::MissingField, format!("record {e} has no field {label}")));
            }
        }
        self.check_spine(gamma, e, want, kind)
    }

    fn check_spine(&mut self, gamma: &TypingCtx, e: &Tm, want: &Ty, kind: TypeErrorKind) -> TResult<()> {
        let Tm::RCons(l, h, t) = e else {
            return Ok(());
        };
        if !record_tm(t) {
            return Err(self.msg(TypeErrorKind::IllFormedType, format!("record tail {t} is not a record")));
        }
        if tm_lookup(l, t).is_some() {
            return Err(self.msg(TypeErrorKind::IllFormedType, format!("duplicate label {l}")));
        }
        match ty_lookup(l, want) {
            Some(field) => self.child(0, |c| c.check(gamma, h, field, kind))?,
            None => {
                self.child(0, |c| c.synth(gamma, h))?;
            }
        }
        self.child(1, |c| c.check_spine(gamma, t, want, kind))
    }
}

fn detail_text(e: &TypeError) -> String {
    match &e.detail {
        Detail::Message(m) => m.clone(),
        Detail::Types { expected, got } => format!("expected {expected}, got {got}"),
    }
}
