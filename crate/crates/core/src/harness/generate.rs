//! Seeded, goal-directed generation of closed well-typed programs.
//!
//! A case starts from a random tag forest, already allocated in the store.
//! Terms are built top-down against a goal type; each construction is one
//! that the type checker accepts with a subtype of the goal, and the result
//! is re-checked with [`synthesize`]. Cases that fail the re-check are
//! discarded and regenerated from the same random stream.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TestCase;
use crate::store::Store;
use crate::subst::{subst_name_ty, unfold_mu};
use crate::subtype::{is_subtype, mutual_supertype, name_type};
use crate::syntax::{Ident, Name, TagCtx, TagId, Tm, Ty, TypingCtx};
use crate::typing::synthesize;

pub const DEFAULT_DEPTH: usize = 4;
const ATTEMPTS: usize = 32;

/// The case for `seed`. The same seed and depth always give the same case.
pub fn gen_typed_term(seed: u64, depth: usize) -> TestCase {
    let mut g = Gen::new(seed);
    for _ in 0..ATTEMPTS {
        let goal = g.goal_type();
        let sc = Scope::default();
        let Some(term) = g.gen(&goal, &sc, depth) else { continue };
        if let Ok(ty) = synthesize(&TypingCtx::new(), &g.sigma, &term) {
            return TestCase { gamma: TypingCtx::new(), sigma: g.sigma, store: g.store, term, ty, seed };
        }
    }
    TestCase { gamma: TypingCtx::new(), sigma: g.sigma, store: g.store, term: Tm::Unit, ty: Ty::Top, seed }
}

#[derive(Clone, Default)]
struct Scope {
    gamma: TypingCtx,
    vars: Vec<(Ident, Ty)>,
    /// Variables bound by `Fix` for a recursive type, used only to close
    /// off the recursive occurrences of that type.
    rec: Vec<(Ident, Ty)>,
}

impl Scope {
    fn bind(&self, x: &str, ty: Ty) -> Scope {
        let mut next = self.clone();
        next.vars.retain(|(y, _)| y != x);
        next.rec.retain(|(y, _)| y != x);
        next.vars.push((x.to_string(), ty.clone()));
        next.gamma = next.gamma.extend(x, ty);
        next
    }

    fn bind_rec(&self, x: &str, ty: Ty) -> Scope {
        let mut next = self.clone();
        next.vars.retain(|(y, _)| y != x);
        next.rec.retain(|(y, _)| y != x);
        next.rec.push((x.to_string(), ty.clone()));
        next.gamma = next.gamma.extend(x, ty);
        next
    }
}

#[derive(Clone, Copy, Debug)]
enum Strategy {
    Intro,
    Var,
    Let,
    Beta,
    AppVar,
    Match,
    FreshTag,
    Extract,
    Proj,
    PairElim,
    DepSum,
    Fix,
    FoldUnfold,
}

const STRATEGIES: &[(Strategy, u32)] = &[
    (Strategy::Intro, 4),
    (Strategy::Var, 2),
    (Strategy::Let, 2),
    (Strategy::Beta, 2),
    (Strategy::AppVar, 2),
    (Strategy::Match, 5),
    (Strategy::FreshTag, 2),
    (Strategy::Extract, 2),
    (Strategy::Proj, 1),
    (Strategy::PairElim, 1),
    (Strategy::DepSum, 1),
    (Strategy::Fix, 1),
    (Strategy::FoldUnfold, 1),
];

fn rec(fields: &[(&str, Ty)]) -> Ty {
    Ty::record(fields.iter().cloned())
}

fn bodies() -> Vec<Ty> {
    vec![Ty::Top, Ty::RNil, rec(&[("f", Ty::Top)]), rec(&[("f", Ty::Top), ("g", Ty::Top)])]
}

fn mu_types() -> Vec<Ty> {
    vec![
        Ty::mu("t", rec(&[("hd", Ty::Top)])),
        Ty::mu("t", Ty::prod("x", Ty::Top, Ty::var("t"))),
        Ty::mu("t", rec(&[("hd", Ty::Top), ("tl", Ty::prod("x", Ty::Top, Ty::var("t")))])),
    ]
}

struct Gen {
    rng: ChaCha8Rng,
    sigma: TagCtx,
    store: Store,
    fresh: usize,
}

impl Gen {
    fn new(seed: u64) -> Gen {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sigma = TagCtx::new();
        let mut store = Store::new();
        let n = rng.gen_range(0..=4u64);
        for i in 0..n {
            let parent = (i > 0 && rng.gen_bool(0.6)).then(|| rng.gen_range(0..i));
            let mut menu = bodies();
            menu.extend((0..i).map(|j| Ty::Tagged(Name::tag(j))));
            if let Some(p) = parent {
                let pb = sigma.get(TagId(p)).expect("earlier tag").body.clone();
                menu.retain(|b| is_subtype(&TypingCtx::new(), &sigma, b, &pb));
            }
            let body = menu.choose(&mut rng).expect("the parent body itself qualifies").clone();
            sigma.insert(TagId(i), body, parent.map(Name::tag));
            store = match parent {
                None => store.extend_root(TagId(i)),
                Some(p) => store.extend_child(TagId(i), TagId(p)),
            }
            .expect("fresh ids in order");
        }
        Gen { rng, sigma, store, fresh: 0 }
    }

    fn fresh(&mut self) -> Ident {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn tag_names(&self, sc: &Scope) -> Vec<Name> {
        let mut names: Vec<Name> = self.sigma.tags().map(Name::Tag).collect();
        for (x, t) in &sc.vars {
            if matches!(t, Ty::Tag(_) | Ty::TagExt(..)) {
                names.push(Name::var(x.clone()));
            }
        }
        names
    }

    fn body_of(&self, sc: &Scope, n: &Name) -> Option<Ty> {
        match name_type(&sc.gamma, &self.sigma, n).ok()? {
            Ty::Tag(b) | Ty::TagExt(b, _) => Some(*b),
            _ => None,
        }
    }

    fn sub(&self, sc: &Scope, a: &Ty, b: &Ty) -> bool {
        is_subtype(&sc.gamma, &self.sigma, a, b)
    }

    /// Types used for binders and as goals. Dependent sums are left out:
    /// a variable of dependent Sum type that is later replaced by a pair
    /// value can lose its type under the algorithm, because pair types are
    /// not unique and Sum has no subtyping. [`Strategy::DepSum`] builds
    /// dependent pairs only where they are consumed at once.
    fn small_type(&mut self, sc: &Scope) -> Ty {
        let mut menu = bodies();
        menu.push(Ty::prod("x", Ty::Top, Ty::Top));
        menu.push(Ty::prod("x", rec(&[("f", Ty::Top)]), Ty::Top));
        menu.push(Ty::sum("_", Ty::Top, Ty::Top));
        menu.extend(mu_types());
        for b in bodies() {
            menu.push(Ty::tag(b.clone()));
        }
        menu.push(Ty::prod("x", Ty::tag(Ty::Top), Ty::tagged(Name::var("x"))));
        for n in self.tag_names(sc) {
            menu.push(Ty::Tagged(n.clone()));
            if let Ok(t) = name_type(&sc.gamma, &self.sigma, &n) {
                menu.push(t);
            }
        }
        menu.choose(&mut self.rng).expect("non-empty").clone()
    }

    fn goal_type(&mut self) -> Ty {
        self.small_type(&Scope::default())
    }

    fn gen(&mut self, goal: &Ty, sc: &Scope, d: usize) -> Option<Tm> {
        if d == 0 {
            return self.canon(goal, sc);
        }
        let s = STRATEGIES
            .choose_weighted(&mut self.rng, |(_, w)| *w)
            .expect("weights are positive")
            .0;
        match self.strategy(s, goal, sc, d) {
            Some(t) => Some(t),
            None => self.canon(goal, sc),
        }
    }

    fn strategy(&mut self, s: Strategy, goal: &Ty, sc: &Scope, d: usize) -> Option<Tm> {
        match s {
            Strategy::Intro => self.intro(goal, sc, d),
            Strategy::Var => {
                let hits: Vec<Ident> =
                    sc.vars.iter().filter(|(_, t)| self.sub(sc, t, goal)).map(|(x, _)| x.clone()).collect();
                hits.choose(&mut self.rng).map(|x| Tm::var(x.clone()))
            }
            Strategy::Let => {
                let x = self.fresh();
                let t1 = self.small_type(sc);
                let bound = self.gen(&t1, sc, d - 1)?;
                let bt = synthesize(&sc.gamma, &self.sigma, &bound).ok()?;
                let body = self.gen(goal, &sc.bind(&x, bt), d - 1)?;
                Some(Tm::let_(x, bound, body))
            }
            Strategy::Beta => {
                let x = self.fresh();
                let t1 = self.small_type(sc);
                let arg = self.arg_for(&t1, sc, d - 1)?;
                let body = self.gen(goal, &sc.bind(&x, t1.clone()), d - 1)?;
                Some(Tm::app(Tm::lam(x, t1, body), arg))
            }
            Strategy::AppVar => {
                let funs: Vec<(Ident, Ty)> =
                    sc.vars.iter().filter(|(_, t)| matches!(t, Ty::Prod(..))).cloned().collect();
                let (f, Ty::Prod(x, dom, cod)) = funs.choose(&mut self.rng)?.clone() else { unreachable!() };
                if cod.mentions_name(&x) {
                    let names: Vec<Name> = self
                        .tag_names(sc)
                        .into_iter()
                        .filter(|n| {
                            name_type(&sc.gamma, &self.sigma, n).is_ok_and(|t| self.sub(sc, &t, &dom))
                                && self.sub(sc, &subst_name_ty(n, &x, &cod), goal)
                        })
                        .collect();
                    let n = names.choose(&mut self.rng)?.clone();
                    Some(Tm::app(Tm::var(f), Tm::Name(n)))
                } else if self.sub(sc, &cod, goal) {
                    let arg = self.gen(&dom, sc, d - 1)?;
                    Some(Tm::app(Tm::var(f), arg))
                } else {
                    None
                }
            }
            Strategy::Match => {
                let names = self.tag_names(sc);
                let c = names.choose(&mut self.rng)?.clone();
                let pats: Vec<Name> =
                    names.iter().filter(|p| mutual_supertype(&sc.gamma, &self.sigma, &c, p)).cloned().collect();
                let p = pats.choose(&mut self.rng)?.clone();
                let scrutinee = self.gen(&Ty::Tagged(c), sc, d - 1)?;
                let y = self.fresh();
                let hit = self.gen(goal, &sc.bind(&y, Ty::Tagged(p.clone())), d - 1)?;
                let miss = self.gen(goal, sc, d - 1)?;
                Some(Tm::match_(scrutinee, p, y, hit, miss))
            }
            Strategy::FreshTag => {
                let t = self.fresh();
                let names = self.tag_names(sc);
                let (bound, ty) = match names.choose(&mut self.rng).cloned() {
                    Some(p) if self.rng.gen_bool(0.6) => {
                        let pb = self.body_of(sc, &p)?;
                        let menu: Vec<Ty> = bodies().into_iter().filter(|b| self.sub(sc, b, &pb)).collect();
                        let b = menu.choose(&mut self.rng)?.clone();
                        (Tm::SubTag(b.clone(), p.clone()), Ty::tag_ext(b, p))
                    }
                    _ => {
                        let b = bodies().choose(&mut self.rng).expect("non-empty").clone();
                        (Tm::NewTag(b.clone()), Ty::tag(b))
                    }
                };
                let body = self.gen(goal, &sc.bind(&t, ty), d - 1)?;
                Some(Tm::let_(t, bound, body))
            }
            Strategy::Extract => {
                let names: Vec<Name> = self
                    .tag_names(sc)
                    .into_iter()
                    .filter(|n| self.body_of(sc, n).is_some_and(|b| self.sub(sc, &b, goal)))
                    .collect();
                let n = names.choose(&mut self.rng)?.clone();
                Some(Tm::extract(self.gen(&Ty::Tagged(n), sc, d - 1)?))
            }
            Strategy::Proj => {
                let l = *["f", "g", "h"].choose(&mut self.rng).expect("non-empty");
                let mut fields = vec![(l.to_string(), goal.clone())];
                if self.rng.gen_bool(0.5) {
                    let other = if l == "f" { "g" } else { "f" };
                    fields.push((other.to_string(), self.small_type(sc)));
                }
                let r = self.gen(&Ty::record(fields), sc, d - 1)?;
                Some(Tm::proj(r, l))
            }
            Strategy::PairElim => {
                let here = self.gen(goal, sc, d - 1)?;
                let other_ty = self.small_type(sc);
                let other = self.gen(&other_ty, sc, d - 1)?;
                Some(if self.rng.gen_bool(0.5) {
                    Tm::fst(Tm::pair(here, other))
                } else {
                    Tm::snd(Tm::pair(other, here))
                })
            }
            Strategy::DepSum => {
                let names: Vec<(Name, Ty)> = self
                    .tag_names(sc)
                    .into_iter()
                    .filter_map(|n| self.body_of(sc, &n).map(|b| (n, b)))
                    .filter(|(_, b)| self.sub(sc, b, goal))
                    .collect();
                let (n, b) = names.choose(&mut self.rng)?.clone();
                let p = self.fresh();
                let sum = Ty::sum("x", Ty::tag(b), Ty::tagged(Name::var("x")));
                let second = self.gen(&Ty::Tagged(n.clone()), sc, d - 1)?;
                let f = Tm::lam(p.clone(), sum, Tm::extract(Tm::snd(Tm::var(p))));
                Some(Tm::app(f, Tm::pair(Tm::Name(n), second)))
            }
            Strategy::Fix => {
                let body = self.gen(goal, sc, d - 1)?;
                let s = synthesize(&sc.gamma, &self.sigma, &body).ok()?;
                let f = self.fresh();
                Some(Tm::fix(Tm::lam(f, s, body)))
            }
            Strategy::FoldUnfold => {
                let m = Ty::mu("t", goal.clone());
                if unfold_mu("t", goal) != *goal {
                    return None;
                }
                Some(Tm::unfold(Tm::fold(m, self.gen(goal, sc, d - 1)?)))
            }
        }
    }

    /// An argument for a binder of type `t1`. Tag-typed binders get a tag
    /// name when one fits, so that dependent bodies stay typeable.
    fn arg_for(&mut self, t1: &Ty, sc: &Scope, d: usize) -> Option<Tm> {
        if matches!(t1, Ty::Tag(_) | Ty::TagExt(..)) {
            let fits: Vec<Name> = self
                .tag_names(sc)
                .into_iter()
                .filter(|n| name_type(&sc.gamma, &self.sigma, n).is_ok_and(|t| self.sub(sc, &t, t1)))
                .collect();
            if let Some(n) = fits.choose(&mut self.rng) {
                return Some(Tm::Name(n.clone()));
            }
        }
        self.gen(t1, sc, d)
    }

    fn intro(&mut self, goal: &Ty, sc: &Scope, d: usize) -> Option<Tm> {
        match goal {
            Ty::Top => Some(Tm::Unit),
            Ty::RNil | Ty::RCons(..) => {
                let mut fields = Vec::new();
                for (l, t) in goal.record_fields() {
                    fields.push((l.to_string(), self.gen(&t.clone(), sc, d - 1)?));
                }
                if self.rng.gen_bool(0.3) && goal.record_fields().iter().all(|(l, _)| *l != "h") {
                    fields.push(("h".to_string(), Tm::Unit));
                }
                fields.shuffle(&mut self.rng);
                Some(Tm::record(fields))
            }
            Ty::Tagged(n) => {
                let b = self.body_of(sc, n)?;
                Some(Tm::new_tagged(n.clone(), self.gen(&b, sc, d - 1)?))
            }
            Ty::Prod(x, a, c) => {
                let inner = sc.bind(x, (**a).clone());
                Some(Tm::lam(x.clone(), (**a).clone(), self.gen(c, &inner, d - 1)?))
            }
            Ty::Sum(x, a, b) => {
                if b.mentions_name(x) {
                    let n = self.pick_name_below(a, sc)?;
                    let second = self.gen(&subst_name_ty(&n, x, b), sc, d - 1)?;
                    Some(Tm::pair(Tm::Name(n), second))
                } else {
                    let first = self.gen(a, sc, d - 1)?;
                    Some(Tm::pair(first, self.gen(b, sc, d - 1)?))
                }
            }
            Ty::Mu(t, b) => {
                let unfolded = unfold_mu(t, b);
                if unfolded == **b || sc.rec.iter().any(|(_, r)| r == goal) {
                    return Some(Tm::fold(goal.clone(), self.gen(&unfolded, sc, d - 1)?));
                }
                let f = self.fresh();
                let inner = sc.bind_rec(&f, goal.clone());
                let body = Tm::fold(goal.clone(), self.gen(&unfolded, &inner, d - 1)?);
                Some(Tm::fix(Tm::lam(f, goal.clone(), body)))
            }
            Ty::Tag(_) | Ty::TagExt(..) => self.canon(goal, sc),
            Ty::Var(_) => None,
        }
    }

    fn pick_name_below(&mut self, t: &Ty, sc: &Scope) -> Option<Name> {
        let fits: Vec<Name> = self
            .tag_names(sc)
            .into_iter()
            .filter(|n| name_type(&sc.gamma, &self.sigma, n).is_ok_and(|nt| self.sub(sc, &nt, t)))
            .collect();
        fits.choose(&mut self.rng).cloned()
    }

    /// A small inhabitant of `goal`, by structure.
    fn canon(&mut self, goal: &Ty, sc: &Scope) -> Option<Tm> {
        if let Some((f, _)) = sc.rec.iter().find(|(_, r)| r == goal) {
            return Some(Tm::var(f.clone()));
        }
        let hits: Vec<Ident> =
            sc.vars.iter().filter(|(_, t)| self.sub(sc, t, goal)).map(|(x, _)| x.clone()).collect();
        if !hits.is_empty() && self.rng.gen_bool(0.5) {
            return hits.choose(&mut self.rng).map(|x| Tm::var(x.clone()));
        }
        match goal {
            Ty::Top => Some(Tm::Unit),
            Ty::RNil | Ty::RCons(..) => {
                let mut fields = Vec::new();
                for (l, t) in goal.record_fields() {
                    fields.push((l.to_string(), self.canon(&t.clone(), sc)?));
                }
                Some(Tm::record(fields))
            }
            Ty::Tagged(n) => {
                let b = self.body_of(sc, n)?;
                Some(Tm::new_tagged(n.clone(), self.canon(&b, sc)?))
            }
            Ty::Tag(b) => match self.pick_name_below(goal, sc) {
                Some(n) if self.rng.gen_bool(0.7) => Some(Tm::Name(n)),
                _ => Some(Tm::NewTag((**b).clone())),
            },
            Ty::TagExt(b, p) => match self.pick_name_below(goal, sc) {
                Some(n) if self.rng.gen_bool(0.7) => Some(Tm::Name(n)),
                _ => {
                    let pb = self.body_of(sc, p)?;
                    self.sub(sc, b, &pb).then(|| Tm::SubTag((**b).clone(), p.clone()))
                }
            },
            Ty::Prod(x, a, c) => {
                let inner = sc.bind(x, (**a).clone());
                Some(Tm::lam(x.clone(), (**a).clone(), self.canon(c, &inner)?))
            }
            Ty::Sum(x, a, b) => {
                if b.mentions_name(x) {
                    let n = self.pick_name_below(a, sc)?;
                    let second = self.canon(&subst_name_ty(&n, x, b), sc)?;
                    Some(Tm::pair(Tm::Name(n), second))
                } else {
                    let first = self.canon(a, sc)?;
                    Some(Tm::pair(first, self.canon(b, sc)?))
                }
            }
            Ty::Mu(t, b) => {
                let unfolded = unfold_mu(t, b);
                if unfolded == **b {
                    return Some(Tm::fold(goal.clone(), self.canon(&unfolded, sc)?));
                }
                let f = self.fresh();
                let inner = sc.bind_rec(&f, goal.clone());
                let body = Tm::fold(goal.clone(), self.canon(&unfolded, &inner)?);
                Some(Tm::fix(Tm::lam(f, goal.clone(), body)))
            }
            Ty::Var(_) => None,
        }
    }
}
