//! Substitution of terms into terms, names into types, and types into type
//! variables.
//!
//! None of these rename binders. Evaluation only substitutes closed values and
//! typing only substitutes names, so shadowing checks are enough.

use crate::syntax::{Name, Tm, Ty};

/// What a name turns into once `x` is replaced by a term.
enum Image {
    Name(Name),
    Term(Tm),
}

impl Image {
    fn of(t: &Tm) -> Image {
        match t {
            Tm::Name(m) => Image::Name(m.clone()),
            other => Image::Term(other.clone()),
        }
    }

    fn into_term(self) -> Tm {
        match self {
            Image::Name(m) => Tm::Name(m),
            Image::Term(t) => t,
        }
    }
}

/// Image of `n` in term position: projections of a substituted non-name are
/// kept as term-level projections so the evaluator performs them.
fn term_image(n: &Name, x: &str, s: &Tm) -> Image {
    match n {
        Name::Var(y) if y == x => Image::of(s),
        Name::Var(_) | Name::Tag(_) => Image::Name(n.clone()),
        Name::Fst(inner) => match term_image(inner, x, s) {
            Image::Name(m) => Image::Name(Name::fst(m)),
            Image::Term(t) => Image::Term(Tm::fst(t)),
        },
        Name::Unfold(inner) => match term_image(inner, x, s) {
            Image::Name(m) => Image::Name(Name::unfold(m)),
            Image::Term(t) => Image::Term(Tm::unfold(t)),
        },
    }
}

/// Image of `n` where only a name fits (tag positions and types). Projections
/// out of pair and fold values are resolved on the spot.
fn name_image(n: &Name, x: &str, s: &Tm) -> Image {
    match n {
        Name::Var(y) if y == x => Image::of(s),
        Name::Var(_) | Name::Tag(_) => Image::Name(n.clone()),
        Name::Fst(inner) => match name_image(inner, x, s) {
            Image::Name(m) => Image::Name(Name::fst(m)),
            Image::Term(Tm::Pair(a, _)) => Image::of(&a),
            Image::Term(t) => Image::Term(Tm::fst(t)),
        },
        Name::Unfold(inner) => match name_image(inner, x, s) {
            Image::Name(m) => Image::Name(Name::unfold(m)),
            Image::Term(Tm::Fold(_, v)) => Image::of(&v),
            Image::Term(t) => Image::Term(Tm::unfold(t)),
        },
    }
}

/// Replaces `x` inside a name position. If the substituted value cannot be
/// read as a name the position is left alone; that only happens for ill-typed
/// programs.
fn subst_name_pos(n: &Name, x: &str, s: &Tm) -> Name {
    if !n.mentions(x) {
        return n.clone();
    }
    match name_image(n, x, s) {
        Image::Name(m) => m,
        Image::Term(_) => n.clone(),
    }
}

/// Rewrites every name in `ty` that is rooted at `x`, honouring Prod/Sum
/// binders.
fn map_ty_names(ty: &Ty, x: &str, f: &dyn Fn(&Name) -> Name) -> Ty {
    let go = |t: &Ty| map_ty_names(t, x, f);
    let name = |n: &Name| if n.mentions(x) { f(n) } else { n.clone() };
    match ty {
        Ty::Top | Ty::Var(_) | Ty::RNil => ty.clone(),
        Ty::Tagged(n) => Ty::Tagged(name(n)),
        Ty::Tag(b) => Ty::tag(go(b)),
        Ty::TagExt(b, n) => Ty::tag_ext(go(b), name(n)),
        Ty::Mu(t, b) => Ty::mu(t.clone(), go(b)),
        Ty::RCons(l, h, t) => Ty::rcons(l.clone(), go(h), go(t)),
        Ty::Prod(y, a, b) => {
            let b = if y == x { (**b).clone() } else { go(b) };
            Ty::prod(y.clone(), go(a), b)
        }
        Ty::Sum(y, a, b) => {
            let b = if y == x { (**b).clone() } else { go(b) };
            Ty::sum(y.clone(), go(a), b)
        }
    }
}

fn replace_var(n: &Name, x: &str, e: &Name) -> Name {
    match n {
        Name::Var(y) if y == x => e.clone(),
        Name::Var(_) | Name::Tag(_) => n.clone(),
        Name::Fst(inner) => Name::fst(replace_var(inner, x, e)),
        Name::Unfold(inner) => Name::unfold(replace_var(inner, x, e)),
    }
}

/// `[e/x]T` for a name `e`.
pub fn subst_name_ty(e: &Name, x: &str, ty: &Ty) -> Ty {
    map_ty_names(ty, x, &|n| replace_var(n, x, e))
}

/// Substitutes a value for `x` in the names of a type annotation.
fn subst_value_ty(x: &str, s: &Tm, ty: &Ty) -> Ty {
    map_ty_names(ty, x, &|n| subst_name_pos(n, x, s))
}

/// `[x:=s]t`.
///
/// Besides term-position occurrences this also rewrites `x` where it occurs
/// in tag positions (`New`, `SubTag`, `Match` patterns) and inside type
/// annotations, so that a tag bound by a lambda or `Let` reaches every place
/// that names it.
pub fn subst_tm(x: &str, s: &Tm, t: &Tm) -> Tm {
    let go = |e: &Tm| subst_tm(x, s, e);
    let ty = |ty: &Ty| subst_value_ty(x, s, ty);
    let name = |n: &Name| subst_name_pos(n, x, s);
    match t {
        Tm::NewTag(ann) => Tm::NewTag(ty(ann)),
        Tm::SubTag(ann, n) => Tm::SubTag(ty(ann), name(n)),
        Tm::New(n, e) => Tm::new_tagged(name(n), go(e)),
        Tm::Match { scrutinee, pattern, binder, hit, miss } => Tm::Match {
            scrutinee: Box::new(go(scrutinee)),
            pattern: name(pattern),
            binder: binder.clone(),
            hit: Box::new(if binder == x { (**hit).clone() } else { go(hit) }),
            miss: Box::new(go(miss)),
        },
        Tm::Extract(e) => Tm::extract(go(e)),
        Tm::Lam(y, ann, body) => {
            let body = if y == x { (**body).clone() } else { go(body) };
            Tm::lam(y.clone(), ty(ann), body)
        }
        Tm::App(f, a) => Tm::app(go(f), go(a)),
        Tm::RNil => Tm::RNil,
        Tm::RCons(l, h, r) => Tm::rcons(l.clone(), go(h), go(r)),
        Tm::Proj(e, l) => Tm::proj(go(e), l.clone()),
        Tm::Let(y, e1, e2) => {
            let e2 = if y == x { (**e2).clone() } else { go(e2) };
            Tm::let_(y.clone(), go(e1), e2)
        }
        Tm::Fix(e) => Tm::fix(go(e)),
        Tm::Fold(ann, e) => Tm::fold(ty(ann), go(e)),
        Tm::Unfold(e) => Tm::unfold(go(e)),
        Tm::Pair(a, b) => Tm::pair(go(a), go(b)),
        Tm::Fst(e) => Tm::fst(go(e)),
        Tm::Snd(e) => Tm::snd(go(e)),
        Tm::Unit => Tm::Unit,
        Tm::Name(n) if n.mentions(x) => term_image(n, x, s).into_term(),
        Tm::Name(_) => t.clone(),
    }
}

/// `[t to U]T`: replaces the type variable `t` by `u`. `mu(t)` shadows.
pub fn subst_tyvar(t: &str, u: &Ty, ty: &Ty) -> Ty {
    let go = |x: &Ty| subst_tyvar(t, u, x);
    match ty {
        Ty::Var(v) if v == t => u.clone(),
        Ty::Var(_) | Ty::Top | Ty::RNil | Ty::Tagged(_) => ty.clone(),
        Ty::Tag(b) => Ty::tag(go(b)),
        Ty::TagExt(b, n) => Ty::tag_ext(go(b), n.clone()),
        Ty::Mu(v, _) if v == t => ty.clone(),
        Ty::Mu(v, b) => Ty::mu(v.clone(), go(b)),
        Ty::Prod(x, a, b) => Ty::prod(x.clone(), go(a), go(b)),
        Ty::Sum(x, a, b) => Ty::sum(x.clone(), go(a), go(b)),
        Ty::RCons(l, h, r) => Ty::rcons(l.clone(), go(h), go(r)),
    }
}

/// One-level unrolling of `mu(t):T`.
pub fn unfold_mu(t: &str, body: &Ty) -> Ty {
    subst_tyvar(t, &Ty::mu(t, body.clone()), body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::free_vars;

    #[test]
    fn variable_case() {
        assert_eq!(subst_tm("x", &Tm::Unit, &Tm::var("x")), Tm::Unit);
        assert_eq!(subst_tm("x", &Tm::Unit, &Tm::var("y")), Tm::var("y"));
    }

    #[test]
    fn lambda_shadows() {
        let l = Tm::lam("x", Ty::Top, Tm::var("x"));
        assert_eq!(subst_tm("x", &Tm::Unit, &l), l);
    }

    #[test]
    fn match_binder_shadows_hit_branch_only() {
        let m = Tm::match_(Tm::var("x"), Name::var("n"), "x", Tm::var("x"), Tm::var("x"));
        let want = Tm::match_(Tm::Unit, Name::var("n"), "x", Tm::var("x"), Tm::Unit);
        assert_eq!(subst_tm("x", &Tm::Unit, &m), want);
    }

    #[test]
    fn tag_positions_are_substituted() {
        let body = Tm::extract(Tm::new_tagged(Name::var("x"), Tm::Unit));
        let out = subst_tm("x", &Tm::tag(0), &body);
        assert_eq!(out, Tm::extract(Tm::new_tagged(Name::tag(0), Tm::Unit)));

        let m = Tm::match_(Tm::Unit, Name::var("x"), "y", Tm::Unit, Tm::Unit);
        assert_eq!(
            subst_tm("x", &Tm::tag(3), &m),
            Tm::match_(Tm::Unit, Name::tag(3), "y", Tm::Unit, Tm::Unit)
        );
        let s = Tm::SubTag(Ty::Top, Name::var("x"));
        assert_eq!(subst_tm("x", &Tm::tag(1), &s), Tm::SubTag(Ty::Top, Name::tag(1)));
    }

    #[test]
    fn annotations_are_substituted() {
        let l = Tm::lam("y", Ty::Tagged(Name::var("x")), Tm::var("y"));
        assert_eq!(
            subst_tm("x", &Tm::tag(2), &l),
            Tm::lam("y", Ty::Tagged(Name::tag(2)), Tm::var("y"))
        );
    }

    #[test]
    fn projection_names_resolve_through_pairs() {
        let pair = Tm::pair(Tm::tag(0), Tm::Unit);
        // term position keeps the projection for the evaluator
        let e = Tm::Name(Name::fst(Name::var("p")));
        assert_eq!(subst_tm("p", &pair, &e), Tm::fst(pair.clone()));
        // tag position resolves it
        let n = Tm::new_tagged(Name::fst(Name::var("p")), Tm::Unit);
        assert_eq!(subst_tm("p", &pair, &n), Tm::new_tagged(Name::tag(0), Tm::Unit));
        // substituting a name keeps a name
        assert_eq!(subst_tm("p", &Tm::var("q"), &e), Tm::Name(Name::fst(Name::var("q"))));
    }

    #[test]
    fn unfold_names_resolve_through_folds() {
        let mu = Ty::mu("t", Ty::tag(Ty::Top));
        let v = Tm::fold(mu, Tm::tag(4));
        let n = Tm::new_tagged(Name::unfold(Name::var("r")), Tm::Unit);
        assert_eq!(subst_tm("r", &v, &n), Tm::new_tagged(Name::tag(4), Tm::Unit));
    }

    #[test]
    fn name_into_type() {
        let t0 = Name::tag(0);
        assert_eq!(subst_name_ty(&t0, "x", &Ty::Tagged(Name::var("x"))), Ty::Tagged(t0.clone()));
        assert_eq!(subst_name_ty(&t0, "x", &Ty::Top), Ty::Top);
        let s = Ty::sum("x", Ty::Tagged(Name::var("x")), Ty::Tagged(Name::var("x")));
        assert_eq!(
            subst_name_ty(&Name::var("z"), "x", &s),
            Ty::sum("x", Ty::Tagged(Name::var("z")), Ty::Tagged(Name::var("x")))
        );
        let ext = Ty::tag_ext(Ty::Top, Name::fst(Name::var("x")));
        assert_eq!(subst_name_ty(&t0, "x", &ext), Ty::tag_ext(Ty::Top, Name::fst(t0)));
    }

    #[test]
    fn type_variable_substitution() {
        assert_eq!(subst_tyvar("t", &Ty::Top, &Ty::var("t")), Ty::Top);
        let shadow = Ty::mu("t", Ty::var("t"));
        assert_eq!(subst_tyvar("t", &Ty::Top, &shadow), shadow);
        let body = Ty::rcons("f", Ty::var("t"), Ty::RNil);
        let mu = Ty::mu("t", body.clone());
        assert_eq!(
            subst_tyvar("t", &mu, &body),
            Ty::rcons("f", mu.clone(), Ty::RNil)
        );
        assert_eq!(unfold_mu("t", &body), Ty::rcons("f", mu, Ty::RNil));
    }

    #[test]
    fn substitution_does_not_grow_free_vars() {
        let e = Tm::app(Tm::var("x"), Tm::lam("y", Ty::Top, Tm::var("z")));
        let out = subst_tm("x", &Tm::tag(0), &e);
        assert!(!free_vars(&out).contains("x"));
        assert!(free_vars(&out).is_subset(&free_vars(&e)));
    }
}
