//! Two independent implementations of the declarative subtyping rules,
//! including reflexivity and transitivity as explicit rules, to compare the
//! algorithm against.
//!
//! [`DeclarativeClosure`] computes the least fixpoint of the rules over a
//! finite universe of types, round by round, so every derivable pair also
//! gets its minimal derivation height. [`DeclarativeSearch`] answers single
//! queries by bounded backward search, with transitivity restricted to middle
//! types drawn from the universe.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::subtype::name_type;
use crate::syntax::{AmberEnv, Ident, Name, TagCtx, Ty, TypingCtx};

/// Closes `types` under taking immediate component types, record
/// permutations and record prefixes. Original order is kept and new types
/// are appended.
pub fn close_universe(types: &[Ty]) -> Vec<Ty> {
    let mut out: Vec<Ty> = Vec::new();
    let mut seen: HashSet<Ty> = HashSet::new();
    let mut queue: std::collections::VecDeque<Ty> = types.iter().cloned().collect();
    while let Some(t) = queue.pop_front() {
        if !seen.insert(t.clone()) {
            continue;
        }
        match &t {
            Ty::Tag(b) => queue.push_back((**b).clone()),
            Ty::TagExt(b, _) => queue.push_back((**b).clone()),
            Ty::Prod(_, a, b) | Ty::Sum(_, a, b) | Ty::RCons(_, a, b) => {
                queue.push_back((**a).clone());
                queue.push_back((**b).clone());
            }
            Ty::Mu(_, b) => queue.push_back((**b).clone()),
            Ty::Tagged(_) | Ty::RNil | Ty::Top | Ty::Var(_) => {}
        }
        if let Some(fields) = record_spine(&t) {
            for k in 0..fields.len() {
                queue.push_back(Ty::record(fields[..k].iter().cloned()));
            }
            if fields.len() <= 5 {
                for p in permutations(&fields) {
                    queue.push_back(Ty::record(p));
                }
            }
        }
        out.push(t);
    }
    out
}

/// Fields of a record type whose spine ends in `RNil`.
fn record_spine(t: &Ty) -> Option<Vec<(Ident, Ty)>> {
    let mut fields = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Ty::RNil => return Some(fields),
            Ty::RCons(l, h, rest) => {
                fields.push((l.clone(), (**h).clone()));
                cur = rest;
            }
            _ => return None,
        }
    }
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first.clone());
            out.push(p);
        }
    }
    out
}

type Id = u32;

#[derive(Clone, Debug)]
enum Shape {
    Record(Vec<(Ident, Id)>),
    Prod(Ident, Id, Id),
    Mu(Ident, Id),
    Tagged(Name),
    TagExt(Id, Name),
    Var(Ident),
    Other,
}

/// Per-Δ relation: minimal heights plus successor and predecessor lists.
#[derive(Default)]
struct Relation {
    height: HashMap<(Id, Id), u32>,
    succ: Vec<Vec<Id>>,
    pred: Vec<Vec<Id>>,
}

impl Relation {
    fn new(n: usize) -> Self {
        Relation { height: HashMap::new(), succ: vec![Vec::new(); n], pred: vec![Vec::new(); n] }
    }

    fn contains(&self, a: Id, b: Id) -> bool {
        self.height.contains_key(&(a, b))
    }

    fn add(&mut self, a: Id, b: Id, h: u32) {
        self.height.insert((a, b), h);
        self.succ[a as usize].push(b);
        self.pred[b as usize].push(a);
    }
}

/// The declarative relation restricted to a finite universe, computed as a
/// least fixpoint. Γ is empty throughout: the universe may not mention term
/// variables, so extending Γ in the product rule changes nothing.
pub struct DeclarativeClosure {
    types: Vec<Ty>,
    index: HashMap<Ty, Id>,
    states: Vec<AmberEnv>,
    rels: Vec<Relation>,
    rounds: u32,
}

impl DeclarativeClosure {
    pub fn compute(sigma: &TagCtx, universe: &[Ty]) -> DeclarativeClosure {
        let types = close_universe(universe);
        for t in &types {
            assert!(t.free_names().is_empty(), "closure universe mentions a term variable: {t}");
        }
        let index: HashMap<Ty, Id> = types.iter().enumerate().map(|(i, t)| (t.clone(), i as Id)).collect();
        let shapes: Vec<Shape> = types.iter().map(|t| shape_of(t, &index)).collect();
        let n = types.len();

        // Δ states reachable from the empty one by entering pairs of mu binders.
        let binders: BTreeSet<Ident> = shapes
            .iter()
            .filter_map(|s| match s {
                Shape::Mu(t, _) => Some(t.clone()),
                _ => None,
            })
            .collect();
        let mut states = vec![AmberEnv::new()];
        let mut transitions: HashMap<(usize, Ident, Ident), usize> = HashMap::new();
        let mut i = 0;
        while i < states.len() {
            for t in &binders {
                for u in &binders {
                    let next = states[i].with(t, u);
                    let j = match states.iter().position(|s| *s == next) {
                        Some(j) => j,
                        None => {
                            states.push(next);
                            states.len() - 1
                        }
                    };
                    transitions.insert((i, t.clone(), u.clone()), j);
                }
            }
            i += 1;
        }

        // Indexes used to find rule conclusions from a new premise.
        let mut record_idx: HashMap<Vec<(Ident, Id)>, Id> = HashMap::new();
        let mut records_containing: HashMap<Id, Vec<(Id, usize)>> = HashMap::new();
        let mut prod_idx: HashMap<(Ident, Id, Id), Id> = HashMap::new();
        let mut prods_by_dom: HashMap<Id, Vec<Id>> = HashMap::new();
        let mut prods_by_cod: HashMap<Id, Vec<Id>> = HashMap::new();
        let mut mus_by_body: HashMap<Id, Vec<(Id, Ident)>> = HashMap::new();
        let mut tagext_by_name: HashMap<Name, Vec<(Id, Id)>> = HashMap::new();
        let mut tagext_idx: HashMap<(Id, Name), Id> = HashMap::new();
        for (i, s) in shapes.iter().enumerate() {
            let i = i as Id;
            match s {
                Shape::Record(fields) => {
                    record_idx.insert(fields.clone(), i);
                    for (pos, (_, f)) in fields.iter().enumerate() {
                        records_containing.entry(*f).or_default().push((i, pos));
                    }
                }
                Shape::Prod(x, a, b) => {
                    prod_idx.insert((x.clone(), *a, *b), i);
                    prods_by_dom.entry(*a).or_default().push(i);
                    prods_by_cod.entry(*b).or_default().push(i);
                }
                Shape::Mu(t, b) => mus_by_body.entry(*b).or_default().push((i, t.clone())),
                Shape::TagExt(b, m) => {
                    tagext_by_name.entry(m.clone()).or_default().push((i, *b));
                    tagext_idx.insert((*b, m.clone()), i);
                }
                _ => {}
            }
        }
        let empty = TypingCtx::new();

        // Round 1: the axioms.
        let mut delta: Vec<Vec<(Id, Id)>> = vec![Vec::new(); states.len()];
        for (s, env) in states.iter().enumerate() {
            let d = &mut delta[s];
            for (i, shape) in shapes.iter().enumerate() {
                let i = i as Id;
                d.push((i, i));
                match shape {
                    Shape::Var(t) => {
                        for (j, other) in shapes.iter().enumerate() {
                            if let Shape::Var(u) = other {
                                if t != u && env.contains(t, u) {
                                    d.push((i, j as Id));
                                }
                            }
                        }
                    }
                    Shape::Record(fields) => {
                        for k in 0..fields.len() {
                            if let Some(&j) = record_idx.get(&fields[..k].to_vec()) {
                                d.push((i, j));
                            }
                        }
                        if fields.len() <= 5 {
                            for p in permutations(fields) {
                                if p != *fields {
                                    if let Some(&j) = record_idx.get(&p) {
                                        d.push((i, j));
                                    }
                                }
                            }
                        }
                    }
                    Shape::Tagged(nm) => {
                        if let Ok(Ty::TagExt(_, parent)) = name_type(&empty, sigma, nm) {
                            if let Some(&j) = index.get(&Ty::Tagged(parent)) {
                                d.push((i, j));
                            }
                        }
                    }
                    Shape::TagExt(b, _) => {
                        if let Some(&j) = index.get(&Ty::tag(types[*b as usize].clone())) {
                            d.push((i, j));
                        }
                    }
                    Shape::Prod(..) | Shape::Mu(..) | Shape::Other => {}
                }
            }
        }

        let mut rels: Vec<Relation> = (0..states.len()).map(|_| Relation::new(n)).collect();
        let mut fresh = dedup_new(&rels, delta);
        let mut rounds = 0;
        while fresh.iter().any(|d| !d.is_empty()) {
            rounds += 1;
            for (s, d) in fresh.iter().enumerate() {
                for &(a, b) in d {
                    rels[s].add(a, b, rounds);
                }
            }
            let mut cand: Vec<Vec<(Id, Id)>> = vec![Vec::new(); states.len()];
            for s in 0..states.len() {
                let rel = &rels[s];
                for &(a, b) in &fresh[s] {
                    let out = &mut cand[s];
                    // Transitivity, with the new pair on either side.
                    for &c in &rel.succ[b as usize] {
                        out.push((a, c));
                    }
                    for &z in &rel.pred[a as usize] {
                        out.push((z, b));
                    }
                    // Record depth: the new pair at one position, any pairs elsewhere.
                    if let Some(holders) = records_containing.get(&a) {
                        for &(r, pos) in holders {
                            let Shape::Record(fields) = &shapes[r as usize] else { unreachable!() };
                            let mut choices: Vec<Vec<Id>> = Vec::with_capacity(fields.len());
                            for (k, (_, f)) in fields.iter().enumerate() {
                                choices.push(if k == pos { vec![b] } else { rel.succ[*f as usize].clone() });
                            }
                            for pick in cartesian(&choices) {
                                let key: Vec<(Ident, Id)> =
                                    fields.iter().zip(&pick).map(|((l, _), t)| (l.clone(), *t)).collect();
                                if let Some(&r2) = record_idx.get(&key) {
                                    out.push((r, r2));
                                }
                            }
                        }
                    }
                    // Products: the new pair as the domain premise (T3 <: T1) ...
                    if let Some(lhss) = prods_by_dom.get(&b) {
                        for &l in lhss {
                            let Shape::Prod(x, _, t2) = &shapes[l as usize] else { unreachable!() };
                            for &t4 in &rel.succ[*t2 as usize] {
                                if let Some(&r) = prod_idx.get(&(x.clone(), a, t4)) {
                                    out.push((l, r));
                                }
                            }
                        }
                    }
                    // ... or as the codomain premise (T2 <: T4).
                    if let Some(lhss) = prods_by_cod.get(&a) {
                        for &l in lhss {
                            let Shape::Prod(x, t1, _) = &shapes[l as usize] else { unreachable!() };
                            for &t3 in &rel.pred[*t1 as usize] {
                                if let Some(&r) = prod_idx.get(&(x.clone(), t3, b)) {
                                    out.push((l, r));
                                }
                            }
                        }
                    }
                    // Tag-2.
                    if let (Shape::Tagged(nm), Shape::Tagged(m)) = (&shapes[a as usize], &shapes[b as usize]) {
                        if let Some(exts) = tagext_by_name.get(nm) {
                            for &(l, body) in exts {
                                if let Some(&r) = tagext_idx.get(&(body, m.clone())) {
                                    out.push((l, r));
                                }
                            }
                        }
                    }
                }
                // Amber-2: a new pair under Δ,t<:u concludes a pair of mus under Δ.
                for &(a, b) in &fresh[s] {
                    let (Some(left), Some(right)) = (mus_by_body.get(&a), mus_by_body.get(&b)) else { continue };
                    for (l, t) in left {
                        for (r, u) in right {
                            for p in 0..states.len() {
                                if transitions.get(&(p, t.clone(), u.clone())) == Some(&s) {
                                    cand[p].push((*l, *r));
                                }
                            }
                        }
                    }
                }
            }
            fresh = dedup_new(&rels, cand);
        }
        DeclarativeClosure { types, index, states, rels, rounds }
    }

    pub fn universe(&self) -> &[Ty] {
        &self.types
    }

    pub fn id_of(&self, t: &Ty) -> Option<u32> {
        self.index.get(t).copied()
    }

    /// Number of rounds until the fixpoint, which is the largest minimal
    /// derivation height.
    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// Minimal derivation height of `delta ⊢ lhs <: rhs`, if derivable.
    pub fn height_in(&self, delta: &AmberEnv, lhs: &Ty, rhs: &Ty) -> Option<u32> {
        let s = self.states.iter().position(|e| e == delta)?;
        let (a, b) = (self.id_of(lhs)?, self.id_of(rhs)?);
        self.rels[s].height.get(&(a, b)).copied()
    }

    pub fn height(&self, lhs: &Ty, rhs: &Ty) -> Option<u32> {
        self.height_in(&AmberEnv::new(), lhs, rhs)
    }

    pub fn holds(&self, lhs: &Ty, rhs: &Ty) -> bool {
        self.height(lhs, rhs).is_some()
    }

    /// Ids of the supertypes of type `id` under the empty Δ, sorted.
    pub fn supertypes(&self, id: u32) -> Vec<u32> {
        let mut v = self.rels[0].succ[id as usize].clone();
        v.sort_unstable();
        v
    }

    /// Number of derivable pairs under the empty Δ.
    pub fn pair_count(&self) -> usize {
        self.rels[0].height.len()
    }
}

fn shape_of(t: &Ty, index: &HashMap<Ty, Id>) -> Shape {
    let id = |t: &Ty| index[t];
    if let Some(fields) = record_spine(t) {
        return Shape::Record(fields.iter().map(|(l, f)| (l.clone(), id(f))).collect());
    }
    match t {
        Ty::Prod(x, a, b) => Shape::Prod(x.clone(), id(a), id(b)),
        Ty::Mu(x, b) => Shape::Mu(x.clone(), id(b)),
        Ty::Tagged(n) => Shape::Tagged(n.clone()),
        Ty::TagExt(b, n) => Shape::TagExt(id(b), n.clone()),
        Ty::Var(t) => Shape::Var(t.clone()),
        _ => Shape::Other,
    }
}

fn dedup_new(rels: &[Relation], cand: Vec<Vec<(Id, Id)>>) -> Vec<Vec<(Id, Id)>> {
    cand.into_iter()
        .enumerate()
        .map(|(s, c)| {
            let mut seen = HashSet::new();
            c.into_iter().filter(|&(a, b)| !rels[s].contains(a, b) && seen.insert((a, b))).collect()
        })
        .collect()
}

fn cartesian(choices: &[Vec<Id>]) -> Vec<Vec<Id>> {
    let mut acc: Vec<Vec<Id>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(acc.len() * c.len());
        for prefix in &acc {
            for &x in c {
                let mut p = prefix.clone();
                p.push(x);
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

type SearchKey = (AmberEnv, TypingCtx, Ty, Ty, u32);

/// Bounded backward search over the declarative rules. Transitivity tries
/// every type of the universe as the middle type.
pub struct DeclarativeSearch<'u> {
    universe: &'u [Ty],
    universe_names: BTreeSet<Ident>,
    sigma: TagCtx,
    memo: HashMap<SearchKey, bool>,
}

impl<'u> DeclarativeSearch<'u> {
    pub fn new(sigma: &TagCtx, universe: &'u [Ty]) -> Self {
        let universe_names = universe.iter().flat_map(|t| t.free_names()).collect();
        DeclarativeSearch { universe, universe_names, sigma: sigma.clone(), memo: HashMap::new() }
    }

    /// Whether `delta | gamma ⊢ lhs <: rhs` has a derivation of height at
    /// most `depth`.
    pub fn derivable(&mut self, delta: &AmberEnv, gamma: &TypingCtx, lhs: &Ty, rhs: &Ty, depth: u32) -> bool {
        if depth == 0 {
            return false;
        }
        let key = (delta.clone(), gamma.clone(), lhs.clone(), rhs.clone(), depth);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = self.search(delta, gamma, lhs, rhs, depth);
        self.memo.insert(key, v);
        v
    }

    fn search(&mut self, delta: &AmberEnv, gamma: &TypingCtx, lhs: &Ty, rhs: &Ty, depth: u32) -> bool {
        if lhs == rhs {
            return true;
        }
        let d = depth - 1;
        let structural = match (lhs, rhs) {
            (Ty::Var(t), Ty::Var(u)) => delta.contains(t, u),
            (Ty::Mu(t, a), Ty::Mu(u, b)) => self.derivable(&delta.with(t, u), gamma, a, b, d),
            (Ty::Prod(x, t1, t2), Ty::Prod(y, t3, t4)) if x == y => {
                let inner = if t2.mentions_name(x) || t4.mentions_name(x) || self.universe_names.contains(x) {
                    gamma.extend(x.clone(), (**t3).clone())
                } else {
                    gamma.clone()
                };
                self.derivable(delta, gamma, t3, t1, d) && self.derivable(delta, &inner, t2, t4, d)
            }
            (Ty::Tagged(n), Ty::Tagged(m)) => {
                matches!(name_type(gamma, &self.sigma, n), Ok(Ty::TagExt(_, p)) if p == *m)
            }
            (Ty::TagExt(a, n), Ty::TagExt(b, m)) if a == b => {
                self.derivable(delta, gamma, &Ty::Tagged(n.clone()), &Ty::Tagged(m.clone()), d)
            }
            (Ty::TagExt(a, _), Ty::Tag(b)) => a == b,
            _ => match (record_spine(lhs), record_spine(rhs)) {
                (Some(l), Some(r)) => {
                    // Width and permutation are axioms; depth needs pointwise premises.
                    r.len() < l.len() && l.starts_with(&r)
                        || (r.len() == l.len() && is_permutation(&l, &r))
                        || (r.len() == l.len()
                            && l.iter().zip(&r).all(|((a, _), (b, _))| a == b)
                            && l.iter().zip(&r).all(|((_, s), (_, t))| self.derivable(delta, gamma, s, t, d)))
                }
                _ => false,
            },
        };
        if structural {
            return true;
        }
        let universe = self.universe;
        universe
            .iter()
            .any(|mid| self.derivable(delta, gamma, lhs, mid, d) && self.derivable(delta, gamma, mid, rhs, d))
    }
}

fn is_permutation(l: &[(Ident, Ty)], r: &[(Ident, Ty)]) -> bool {
    let mut a = l.to_vec();
    let mut b = r.to_vec();
    a.sort();
    b.sort();
    a == b
}

/// One-off declarative query: is `q` derivable with height at most `depth`,
/// using middle types from `universe`?
pub fn subtype_oracle(q: &crate::subtype::SubtypeQuery<'_>, depth: u32, universe: &[Ty]) -> bool {
    DeclarativeSearch::new(q.sigma, universe).derivable(q.delta, q.gamma, q.lhs, q.rhs, depth)
}
