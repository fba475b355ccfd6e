//! Surface-syntax rendering. The output is accepted by [`crate::parse`] and
//! parses back to the same tree.

use std::fmt::{self, Display, Formatter, Write};

use crate::syntax::{Name, Tm, Ty};

impl Display for Name {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Name::Var(x) => f.write_str(x),
            Name::Tag(c) => write!(f, "{c}"),
            Name::Fst(n) => write!(f, "Fst({n})"),
            Name::Unfold(n) => write!(f, "Unfold({n})"),
        }
    }
}

impl Display for Ty {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Tag(b) => write!(f, "Tag[{b}]"),
            Ty::TagExt(b, n) => write!(f, "Tag[{b}]Extends({n})"),
            Ty::Tagged(n) => write!(f, "Tagged({n})"),
            Ty::Prod(x, a, b) => write!(f, "Prod[{x}:{a}],{b}"),
            Ty::Sum(x, a, b) => write!(f, "Sum[{x}:{a}]{b}"),
            Ty::RNil => f.write_str("{}"),
            Ty::RCons(..) => {
                f.write_char('{')?;
                let mut cur = self;
                let mut first = true;
                while let Ty::RCons(l, h, t) = cur {
                    if !first {
                        f.write_str(" ;; ")?;
                    }
                    first = false;
                    write!(f, "{l}:{h}")?;
                    cur = t;
                }
                if *cur != Ty::RNil {
                    write!(f, " | {cur}")?;
                }
                f.write_char('}')
            }
            Ty::Mu(t, b) => write!(f, "mu({t}):{b}"),
            Ty::Top => f.write_str("Top"),
            Ty::Var(t) => f.write_str(t),
        }
    }
}

impl Display for Tm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        expr(self, f)
    }
}

/// Lambdas and lets extend as far right as possible.
fn expr(e: &Tm, f: &mut Formatter<'_>) -> fmt::Result {
    match e {
        Tm::Lam(x, t, body) => {
            write!(f, "/{x}:{t},")?;
            expr(body, f)
        }
        Tm::Let(x, e1, e2) => {
            write!(f, "Let {x} be ")?;
            expr(e1, f)?;
            f.write_str(" in ")?;
            expr(e2, f)
        }
        _ => app(e, f),
    }
}

fn app(e: &Tm, f: &mut Formatter<'_>) -> fmt::Result {
    match e {
        Tm::App(g, a) => {
            app(g, f)?;
            f.write_char(' ')?;
            postfix(a, f)
        }
        _ => postfix(e, f),
    }
}

fn postfix(e: &Tm, f: &mut Formatter<'_>) -> fmt::Result {
    match e {
        Tm::Proj(r, l) => {
            postfix(r, f)?;
            write!(f, " proj {l}")
        }
        _ => atom(e, f),
    }
}

fn atom(e: &Tm, f: &mut Formatter<'_>) -> fmt::Result {
    match e {
        Tm::Lam(..) | Tm::Let(..) | Tm::App(..) | Tm::Proj(..) => {
            f.write_char('(')?;
            expr(e, f)?;
            f.write_char(')')
        }
        Tm::NewTag(t) => write!(f, "NewTag[{t}]"),
        Tm::SubTag(t, n) => write!(f, "SubTag[{t}]({n})"),
        Tm::New(n, body) => write!(f, "New{{{body}}}({n})"),
        Tm::Match { scrutinee, pattern, binder, hit, miss } => {
            write!(f, "Match{{{scrutinee}}}({pattern})({binder}){{{hit}}}{{{miss}}}")
        }
        Tm::Extract(e) => write!(f, "Extract{{{e}}}"),
        Tm::RNil => f.write_str("nil"),
        Tm::RCons(..) => {
            f.write_char('{')?;
            let mut cur = e;
            let mut first = true;
            while let Tm::RCons(l, h, t) = cur {
                if !first {
                    f.write_str(" ;; ")?;
                }
                first = false;
                write!(f, "{l} = {h}")?;
                cur = t;
            }
            if *cur != Tm::RNil {
                write!(f, " | {cur}")?;
            }
            f.write_char('}')
        }
        Tm::Fix(e) => write!(f, "Fix{{{e}}}"),
        Tm::Fold(t, e) => write!(f, "Fold[{t}]{{{e}}}"),
        Tm::Unfold(e) => write!(f, "Unfold{{{e}}}"),
        Tm::Pair(a, b) => write!(f, "<{a},{b}>"),
        Tm::Fst(e) => write!(f, "Fst{{{e}}}"),
        Tm::Snd(e) => write!(f, "Snd{{{e}}}"),
        Tm::Unit => f.write_str("< >"),
        Tm::Name(n) => write!(f, "{n}"),
    }
}
