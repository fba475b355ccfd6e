//! Abstract syntax of names, types and terms, plus the three static contexts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifiers are opaque strings.
pub type Ident = String;

/// Identity of a runtime-generated tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TagId(pub u64);

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// The restricted class of expressions that may appear inside types.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    Var(Ident),
    Tag(TagId),
    Fst(Box<Name>),
    Unfold(Box<Name>),
}

impl Name {
    pub fn var(x: impl Into<Ident>) -> Name {
        Name::Var(x.into())
    }

    pub fn tag(id: u64) -> Name {
        Name::Tag(TagId(id))
    }

    pub fn fst(n: Name) -> Name {
        Name::Fst(Box::new(n))
    }

    pub fn unfold(n: Name) -> Name {
        Name::Unfold(Box::new(n))
    }

    /// The variable at the root of a `Fst`/`Unfold` spine, if any.
    pub fn root_var(&self) -> Option<&str> {
        match self {
            Name::Var(x) => Some(x),
            Name::Tag(_) => None,
            Name::Fst(n) | Name::Unfold(n) => n.root_var(),
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.root_var() == Some(x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    /// `Tag[T]`
    Tag(Box<Ty>),
    /// `Tag[T]Extends(n)`
    TagExt(Box<Ty>, Name),
    /// `Tagged(n)`
    Tagged(Name),
    /// `Prod[x:T1],T2`
    Prod(Ident, Box<Ty>, Box<Ty>),
    /// `Sum[x:T1]T2`
    Sum(Ident, Box<Ty>, Box<Ty>),
    RNil,
    RCons(Ident, Box<Ty>, Box<Ty>),
    /// `mu(t):T`
    Mu(Ident, Box<Ty>),
    Top,
    Var(Ident),
}

impl Ty {
    pub fn tag(body: Ty) -> Ty {
        Ty::Tag(Box::new(body))
    }

    pub fn tag_ext(body: Ty, parent: Name) -> Ty {
        Ty::TagExt(Box::new(body), parent)
    }

    pub fn tagged(n: Name) -> Ty {
        Ty::Tagged(n)
    }

    pub fn prod(x: impl Into<Ident>, dom: Ty, cod: Ty) -> Ty {
        Ty::Prod(x.into(), Box::new(dom), Box::new(cod))
    }

    pub fn sum(x: impl Into<Ident>, first: Ty, second: Ty) -> Ty {
        Ty::Sum(x.into(), Box::new(first), Box::new(second))
    }

    pub fn rcons(label: impl Into<Ident>, head: Ty, tail: Ty) -> Ty {
        Ty::RCons(label.into(), Box::new(head), Box::new(tail))
    }

    pub fn mu(t: impl Into<Ident>, body: Ty) -> Ty {
        Ty::Mu(t.into(), Box::new(body))
    }

    pub fn var(t: impl Into<Ident>) -> Ty {
        Ty::Var(t.into())
    }

    /// Builds a record spine from `(label, type)` pairs.
    pub fn record<L: Into<Ident>>(fields: impl IntoIterator<Item = (L, Ty)>) -> Ty {
        let fields: Vec<(Ident, Ty)> = fields.into_iter().map(|(l, t)| (l.into(), t)).collect();
        fields
            .into_iter()
            .rev()
            .fold(Ty::RNil, |tail, (l, t)| Ty::rcons(l, t, tail))
    }

    /// Fields of a record spine in order. Stops at the first non-record tail.
    pub fn record_fields(&self) -> Vec<(&str, &Ty)> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Ty::RCons(l, h, t) = cur {
            out.push((l.as_str(), &**h));
            cur = t;
        }
        out
    }

    /// Syntactic height; names count as leaves of height zero.
    pub fn depth(&self) -> usize {
        match self {
            Ty::Top | Ty::Var(_) | Ty::RNil | Ty::Tagged(_) => 1,
            Ty::Tag(b) | Ty::TagExt(b, _) | Ty::Mu(_, b) => 1 + b.depth(),
            Ty::Prod(_, a, b) | Ty::Sum(_, a, b) | Ty::RCons(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Term variables occurring free in the names inside this type.
    pub fn free_names(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        collect_ty_names(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn mentions_name(&self, x: &str) -> bool {
        self.free_names().contains(x)
    }
}

fn collect_ty_names(ty: &Ty, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
    let name = |n: &Name, bound: &Vec<Ident>, out: &mut BTreeSet<Ident>| {
        if let Some(x) = n.root_var() {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.to_string());
            }
        }
    };
    match ty {
        Ty::Top | Ty::Var(_) | Ty::RNil => {}
        Ty::Tagged(n) => name(n, bound, out),
        Ty::Tag(b) | Ty::Mu(_, b) => collect_ty_names(b, bound, out),
        Ty::TagExt(b, n) => {
            collect_ty_names(b, bound, out);
            name(n, bound, out);
        }
        Ty::RCons(_, h, t) => {
            collect_ty_names(h, bound, out);
            collect_ty_names(t, bound, out);
        }
        Ty::Prod(x, a, b) | Ty::Sum(x, a, b) => {
            collect_ty_names(a, bound, out);
            bound.push(x.clone());
            collect_ty_names(b, bound, out);
            bound.pop();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tm {
    NewTag(Ty),
    SubTag(Ty, Name),
    New(Name, Box<Tm>),
    Match {
        scrutinee: Box<Tm>,
        pattern: Name,
        binder: Ident,
        hit: Box<Tm>,
        miss: Box<Tm>,
    },
    Extract(Box<Tm>),
    Lam(Ident, Ty, Box<Tm>),
    App(Box<Tm>, Box<Tm>),
    RNil,
    RCons(Ident, Box<Tm>, Box<Tm>),
    Proj(Box<Tm>, Ident),
    Let(Ident, Box<Tm>, Box<Tm>),
    Fix(Box<Tm>),
    Fold(Ty, Box<Tm>),
    Unfold(Box<Tm>),
    Pair(Box<Tm>, Box<Tm>),
    Fst(Box<Tm>),
    Snd(Box<Tm>),
    Unit,
    Name(Name),
}

impl Tm {
    pub fn var(x: impl Into<Ident>) -> Tm {
        Tm::Name(Name::Var(x.into()))
    }

    pub fn tag(id: u64) -> Tm {
        Tm::Name(Name::tag(id))
    }

    pub fn new_tagged(n: Name, body: Tm) -> Tm {
        Tm::New(n, Box::new(body))
    }

    pub fn match_(scrutinee: Tm, pattern: Name, binder: impl Into<Ident>, hit: Tm, miss: Tm) -> Tm {
        Tm::Match {
            scrutinee: Box::new(scrutinee),
            pattern,
            binder: binder.into(),
            hit: Box::new(hit),
            miss: Box::new(miss),
        }
    }

    pub fn extract(e: Tm) -> Tm {
        Tm::Extract(Box::new(e))
    }

    pub fn lam(x: impl Into<Ident>, ty: Ty, body: Tm) -> Tm {
        Tm::Lam(x.into(), ty, Box::new(body))
    }

    pub fn app(f: Tm, a: Tm) -> Tm {
        Tm::App(Box::new(f), Box::new(a))
    }

    pub fn rcons(label: impl Into<Ident>, head: Tm, tail: Tm) -> Tm {
        Tm::RCons(label.into(), Box::new(head), Box::new(tail))
    }

    pub fn record<L: Into<Ident>>(fields: impl IntoIterator<Item = (L, Tm)>) -> Tm {
        let fields: Vec<(Ident, Tm)> = fields.into_iter().map(|(l, t)| (l.into(), t)).collect();
        fields
            .into_iter()
            .rev()
            .fold(Tm::RNil, |tail, (l, t)| Tm::rcons(l, t, tail))
    }

    pub fn proj(e: Tm, label: impl Into<Ident>) -> Tm {
        Tm::Proj(Box::new(e), label.into())
    }

    pub fn let_(x: impl Into<Ident>, bound: Tm, body: Tm) -> Tm {
        Tm::Let(x.into(), Box::new(bound), Box::new(body))
    }

    /// `LetRec x:T be e1 in e2`, which is sugar for `Let x be Fix{/x:T,e1} in e2`.
    pub fn letrec(x: impl Into<Ident>, ty: Ty, bound: Tm, body: Tm) -> Tm {
        let x = x.into();
        Tm::let_(x.clone(), Tm::fix(Tm::lam(x, ty, bound)), body)
    }

    pub fn fix(e: Tm) -> Tm {
        Tm::Fix(Box::new(e))
    }

    pub fn fold(annot: Ty, e: Tm) -> Tm {
        Tm::Fold(annot, Box::new(e))
    }

    pub fn unfold(e: Tm) -> Tm {
        Tm::Unfold(Box::new(e))
    }

    pub fn pair(l: Tm, r: Tm) -> Tm {
        Tm::Pair(Box::new(l), Box::new(r))
    }

    pub fn fst(e: Tm) -> Tm {
        Tm::Fst(Box::new(e))
    }

    pub fn snd(e: Tm) -> Tm {
        Tm::Snd(Box::new(e))
    }

    /// Direct subterms in child-index order (the order used by error paths).
    pub fn children(&self) -> Vec<&Tm> {
        match self {
            Tm::NewTag(_) | Tm::SubTag(..) | Tm::RNil | Tm::Unit | Tm::Name(_) => vec![],
            Tm::New(_, e)
            | Tm::Extract(e)
            | Tm::Lam(_, _, e)
            | Tm::Proj(e, _)
            | Tm::Fix(e)
            | Tm::Fold(_, e)
            | Tm::Unfold(e)
            | Tm::Fst(e)
            | Tm::Snd(e) => vec![e],
            Tm::Match { scrutinee, hit, miss, .. } => vec![scrutinee, hit, miss],
            Tm::App(a, b) | Tm::RCons(_, a, b) | Tm::Let(_, a, b) | Tm::Pair(a, b) => vec![a, b],
        }
    }

    /// Short constructor name, used for histograms and diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Tm::NewTag(_) => "NewTag",
            Tm::SubTag(..) => "SubTag",
            Tm::New(..) => "New",
            Tm::Match { .. } => "Match",
            Tm::Extract(_) => "Extract",
            Tm::Lam(..) => "Lam",
            Tm::App(..) => "App",
            Tm::RNil => "RNil",
            Tm::RCons(..) => "RCons",
            Tm::Proj(..) => "Proj",
            Tm::Let(..) => "Let",
            Tm::Fix(_) => "Fix",
            Tm::Fold(..) => "Fold",
            Tm::Unfold(_) => "Unfold",
            Tm::Pair(..) => "Pair",
            Tm::Fst(_) => "Fst",
            Tm::Snd(_) => "Snd",
            Tm::Unit => "Unit",
            Tm::Name(_) => "Name",
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Tm::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Tm::depth).max().unwrap_or(0)
    }

    /// Counts nodes per constructor kind.
    pub fn histogram(&self, out: &mut BTreeMap<&'static str, usize>) {
        *out.entry(self.kind()).or_default() += 1;
        for c in self.children() {
            c.histogram(out);
        }
    }
}

// ---------------------------------------------------------------------------
// Contexts

/// Γ: term variables to types. Later bindings shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TypingCtx {
    bindings: BTreeMap<Ident, Ty>,
}

impl TypingCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, x: &str) -> Option<&Ty> {
        self.bindings.get(x)
    }

    pub fn extend(&self, x: impl Into<Ident>, ty: Ty) -> TypingCtx {
        let mut next = self.clone();
        next.bindings.insert(x.into(), ty);
        next
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Ty)> {
        self.bindings.iter()
    }
}

/// What Σ records about one tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagEntry {
    pub body: Ty,
    pub parent: Option<Name>,
}

/// Σ: tags to the payload type they tag and their optional parent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TagCtx {
    entries: BTreeMap<TagId, TagEntry>,
}

impl TagCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, c: TagId) -> Option<&TagEntry> {
        self.entries.get(&c)
    }

    pub fn insert(&mut self, c: TagId, body: Ty, parent: Option<Name>) {
        self.entries.insert(c, TagEntry { body, parent });
    }

    pub fn with(mut self, c: u64, body: Ty, parent: Option<u64>) -> Self {
        self.insert(TagId(c), body, parent.map(Name::tag));
        self
    }

    pub fn contains(&self, c: TagId) -> bool {
        self.entries.contains_key(&c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TagId, &TagEntry)> {
        self.entries.iter().map(|(c, e)| (*c, e))
    }

    pub fn tags(&self) -> impl Iterator<Item = TagId> + '_ {
        self.entries.keys().copied()
    }
}

/// Δ: assumed subtyping between recursive type variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AmberEnv {
    pairs: BTreeSet<(Ident, Ident)>,
}

impl AmberEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, t: &str, u: &str) -> bool {
        self.pairs.iter().any(|(a, b)| a == t && b == u)
    }

    pub fn with(&self, t: &str, u: &str) -> AmberEnv {
        let mut next = self.clone();
        next.pairs.insert((t.to_string(), u.to_string()));
        next
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Structural predicates

pub fn record_ty(ty: &Ty) -> bool {
    matches!(ty, Ty::RNil | Ty::RCons(..))
}

pub fn record_tm(e: &Tm) -> bool {
    matches!(e, Tm::RNil | Tm::RCons(..))
}

/// Every record spine ends in `nil`, spine labels are distinct, and all
/// subterms are well formed.
pub fn wellformed_ty(ty: &Ty) -> bool {
    match ty {
        Ty::Top | Ty::Var(_) | Ty::RNil | Ty::Tagged(_) => true,
        Ty::Tag(b) | Ty::TagExt(b, _) | Ty::Mu(_, b) => wellformed_ty(b),
        Ty::Prod(_, a, b) | Ty::Sum(_, a, b) => wellformed_ty(a) && wellformed_ty(b),
        Ty::RCons(..) => {
            let mut seen = BTreeSet::new();
            let mut cur = ty;
            loop {
                match cur {
                    Ty::RNil => return true,
                    Ty::RCons(l, h, t) => {
                        if !seen.insert(l.as_str()) || !wellformed_ty(h) {
                            return false;
                        }
                        cur = t;
                    }
                    _ => return false,
                }
            }
        }
    }
}

pub fn ty_lookup<'a>(label: &str, ty: &'a Ty) -> Option<&'a Ty> {
    match ty {
        Ty::RCons(l, h, _) if l == label => Some(h),
        Ty::RCons(_, _, t) => ty_lookup(label, t),
        _ => None,
    }
}

pub fn tm_lookup<'a>(label: &str, e: &'a Tm) -> Option<&'a Tm> {
    match e {
        Tm::RCons(l, h, _) if l == label => Some(h),
        Tm::RCons(_, _, t) => tm_lookup(label, t),
        _ => None,
    }
}

/// Free term variables, including those inside type annotations and name
/// positions.
pub fn free_vars(e: &Tm) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_tm_vars(e, &mut Vec::new(), &mut out);
    out
}

fn collect_tm_vars(e: &Tm, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
    fn name(n: &Name, bound: &[Ident], out: &mut BTreeSet<Ident>) {
        if let Some(x) = n.root_var() {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.to_string());
            }
        }
    }
    fn ty(t: &Ty, bound: &[Ident], out: &mut BTreeSet<Ident>) {
        for x in t.free_names() {
            if !bound.contains(&x) {
                out.insert(x);
            }
        }
    }
    match e {
        Tm::NewTag(t) => ty(t, bound, out),
        Tm::SubTag(t, n) => {
            ty(t, bound, out);
            name(n, bound, out);
        }
        Tm::New(n, body) => {
            name(n, bound, out);
            collect_tm_vars(body, bound, out);
        }
        Tm::Match { scrutinee, pattern, binder, hit, miss } => {
            collect_tm_vars(scrutinee, bound, out);
            name(pattern, bound, out);
            bound.push(binder.clone());
            collect_tm_vars(hit, bound, out);
            bound.pop();
            collect_tm_vars(miss, bound, out);
        }
        Tm::Lam(x, t, body) => {
            ty(t, bound, out);
            bound.push(x.clone());
            collect_tm_vars(body, bound, out);
            bound.pop();
        }
        Tm::Let(x, e1, e2) => {
            collect_tm_vars(e1, bound, out);
            bound.push(x.clone());
            collect_tm_vars(e2, bound, out);
            bound.pop();
        }
        Tm::Fold(t, body) => {
            ty(t, bound, out);
            collect_tm_vars(body, bound, out);
        }
        Tm::Name(n) => name(n, bound, out),
        Tm::RNil | Tm::Unit => {}
        Tm::Extract(a) | Tm::Proj(a, _) | Tm::Fix(a) | Tm::Unfold(a) | Tm::Fst(a) | Tm::Snd(a) => {
            collect_tm_vars(a, bound, out)
        }
        Tm::App(a, b) | Tm::RCons(_, a, b) | Tm::Pair(a, b) => {
            collect_tm_vars(a, bound, out);
            collect_tm_vars(b, bound, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<Ident> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn wellformedness() {
        assert!(wellformed_ty(&Ty::Top));
        assert!(!wellformed_ty(&Ty::rcons("f", Ty::Top, Ty::Top)));
        assert!(wellformed_ty(&Ty::rcons("f", Ty::Top, Ty::rcons("g", Ty::Top, Ty::RNil))));
        // duplicate labels on one spine
        assert!(!wellformed_ty(&Ty::record([("f", Ty::Top), ("f", Ty::Top)])));
        // ill-formed record nested under a binder
        assert!(!wellformed_ty(&Ty::prod("x", Ty::Top, Ty::rcons("f", Ty::Top, Ty::Top))));
    }

    #[test]
    fn record_predicates() {
        assert!(record_ty(&Ty::RNil));
        assert!(record_ty(&Ty::rcons("f", Ty::Top, Ty::RNil)));
        assert!(!record_ty(&Ty::Tagged(Name::var("x"))));
        assert!(record_tm(&Tm::RNil));
        assert!(record_tm(&Tm::rcons("f", Tm::Unit, Tm::RNil)));
        assert!(!record_tm(&Tm::Unit));
    }

    #[test]
    fn lookups() {
        let r = Ty::rcons("f", Ty::Top, Ty::RNil);
        assert_eq!(ty_lookup("f", &r), Some(&Ty::Top));
        assert_eq!(ty_lookup("g", &r), None);
        let r2 = Ty::rcons("f", Ty::Top, Ty::rcons("g", Ty::Tagged(Name::var("x")), Ty::RNil));
        assert_eq!(ty_lookup("g", &r2), Some(&Ty::Tagged(Name::var("x"))));

        let e = Tm::rcons("f", Tm::Unit, Tm::RNil);
        assert_eq!(tm_lookup("f", &e), Some(&Tm::Unit));
        assert_eq!(tm_lookup("g", &e), None);
        assert_eq!(tm_lookup("f", &Tm::RNil), None);
    }

    #[test]
    fn free_variables() {
        assert_eq!(free_vars(&Tm::lam("x", Ty::Top, Tm::var("x"))), set(&[]));
        assert_eq!(free_vars(&Tm::app(Tm::var("f"), Tm::var("x"))), set(&["f", "x"]));
        let m = Tm::match_(Tm::Unit, Name::var("n"), "y", Tm::var("y"), Tm::var("z"));
        assert_eq!(free_vars(&m), set(&["n", "z"]));
        // the binder does not scope over its own annotation
        let l = Tm::lam("x", Ty::Tagged(Name::var("x")), Tm::var("x"));
        assert_eq!(free_vars(&l), set(&["x"]));
        let dep = Tm::lam("y", Ty::prod("x", Ty::Top, Ty::Tagged(Name::fst(Name::var("x")))), Tm::Unit);
        assert_eq!(free_vars(&dep), set(&[]));
    }

    #[test]
    fn letrec_is_sugar() {
        let sugar = Tm::letrec("f", Ty::Top, Tm::var("f"), Tm::Unit);
        let expanded = Tm::let_("f", Tm::fix(Tm::lam("f", Ty::Top, Tm::var("f"))), Tm::Unit);
        assert_eq!(sugar, expanded);
    }

    #[test]
    fn type_depth() {
        assert_eq!(Ty::Top.depth(), 1);
        assert_eq!(Ty::Tagged(Name::tag(0)).depth(), 1);
        assert_eq!(Ty::tag(Ty::Top).depth(), 2);
        assert_eq!(Ty::record([("f", Ty::Top), ("g", Ty::Top)]).depth(), 3);
    }
}
