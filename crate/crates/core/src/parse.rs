//! Lexer and recursive-descent parser for the surface syntax.
//!
//! ```text
//! program ::= decl* expr
//! decl    ::= "tag" #k ":" type [("extends" | "Extends") #j] [";"]
//! expr    ::= "/" x ":" type "," expr
//!           | "Let" x "be" expr "in" expr
//!           | "LetRec" x ":" type "be" expr "in" expr
//!           | postfix+                          (left-associative application)
//! postfix ::= atom ("proj" label)*
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Ident, Name, TagId, Tm, Ty};

const KEYWORDS: &[&str] = &[
    "NewTag", "SubTag", "New", "Match", "Extract", "nil", "proj", "Let", "LetRec", "be", "in", "Fix", "Fold",
    "Unfold", "Fst", "Snd", "Tag", "Tagged", "Prod", "Sum", "mu", "Top", "tag", "Extends", "extends",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {column}: expected {}, found {found}", expected_list(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: BTreeSet<String>,
    pub found: String,
}

fn expected_list(expected: &BTreeSet<String>) -> String {
    let items: Vec<&str> = expected.iter().map(String::as_str).collect();
    match items.len() {
        0 => "nothing".to_string(),
        1 => items[0].to_string(),
        _ => format!("one of {}", items.join(" ")),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Tag(u64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Tag(k) => write!(f, "`#{k}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &[&str] = &[";;", "[", "]", "(", ")", "{", "}", "<", ">", ",", ":", ";", "/", "=", "|"];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    // Position of the last character consumed by a token, used for Eof.
    let mut last = (1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, column);
        let start_i = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                i += 1;
            }
            Tok::Ident(s)
        } else if c == '#' {
            let mut digits = String::new();
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                digits.push(chars[i]);
                i += 1;
            }
            match digits.parse() {
                Ok(k) => Tok::Tag(k),
                Err(_) => {
                    return Err(ParseError {
                        line,
                        column,
                        expected: ["tag number".to_string()].into(),
                        found: "`#`".to_string(),
                    })
                }
            }
        } else if let Some(sym) = SYMBOLS.iter().find(|s| chars[i..].starts_with(&s.chars().collect::<Vec<_>>())) {
            i += sym.len();
            Tok::Sym(sym)
        } else {
            return Err(ParseError {
                line,
                column,
                expected: ["a token".to_string()].into(),
                found: format!("`{c}`"),
            });
        };
        column += i - start_i;
        last = (line, column - 1);
        tokens.push(Token { tok, line: start.0, column: start.1 });
    }
    tokens.push(Token { tok: Tok::Eof, line: last.0, column: last.1 });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = &self.tokens[self.pos];
        Err(ParseError {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn sym(&mut self, s: &'static str) -> PResult<()> {
        if self.is_sym(s) {
            self.advance();
            Ok(())
        } else {
            self.error(&[&format!("`{s}`")])
        }
    }

    fn kw(&mut self, s: &'static str) -> PResult<()> {
        if self.is_kw(s) {
            self.advance();
            Ok(())
        } else {
            self.error(&[&format!("`{s}`")])
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn tag_id(&mut self) -> PResult<u64> {
        match self.peek() {
            Tok::Tag(k) => {
                let k = *k;
                self.advance();
                Ok(k)
            }
            _ => self.error(&["tag"]),
        }
    }

    fn eof(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.error(&["end of input"]),
        }
    }

    // -- names ---------------------------------------------------------

    fn name(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Tag(k) => {
                self.advance();
                Ok(Name::Tag(TagId(k)))
            }
            Tok::Ident(s) if s == "Fst" || s == "Unfold" => {
                self.advance();
                self.sym("(")?;
                let inner = self.name()?;
                self.sym(")")?;
                Ok(if s == "Fst" { Name::fst(inner) } else { Name::unfold(inner) })
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.advance();
                Ok(Name::Var(s))
            }
            _ => self.error(&["identifier", "tag", "`Fst`", "`Unfold`"]),
        }
    }

    fn paren_name(&mut self) -> PResult<Name> {
        self.sym("(")?;
        let n = self.name()?;
        self.sym(")")?;
        Ok(n)
    }

    // -- types ---------------------------------------------------------

    fn ty(&mut self) -> PResult<Ty> {
        match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "Tag" => {
                    self.advance();
                    self.sym("[")?;
                    let body = self.ty()?;
                    self.sym("]")?;
                    if self.is_kw("Extends") {
                        self.advance();
                        let n = self.paren_name()?;
                        Ok(Ty::tag_ext(body, n))
                    } else {
                        Ok(Ty::tag(body))
                    }
                }
                "Tagged" => {
                    self.advance();
                    Ok(Ty::tagged(self.paren_name()?))
                }
                "Prod" | "Sum" => {
                    self.advance();
                    self.sym("[")?;
                    let x = self.ident()?;
                    self.sym(":")?;
                    let a = self.ty()?;
                    self.sym("]")?;
                    if s == "Prod" {
                        self.sym(",")?;
                        Ok(Ty::prod(x, a, self.ty()?))
                    } else {
                        Ok(Ty::sum(x, a, self.ty()?))
                    }
                }
                "mu" => {
                    self.advance();
                    self.sym("(")?;
                    let t = self.ident()?;
                    self.sym(")")?;
                    self.sym(":")?;
                    Ok(Ty::mu(t, self.ty()?))
                }
                "Top" => {
                    self.advance();
                    Ok(Ty::Top)
                }
                "nil" => {
                    self.advance();
                    Ok(Ty::RNil)
                }
                _ if !is_keyword(&s) => {
                    self.advance();
                    Ok(Ty::Var(s))
                }
                _ => self.type_error(),
            },
            Tok::Sym("{") => self.record_ty(),
            Tok::Sym("(") => {
                self.advance();
                let t = self.ty()?;
                self.sym(")")?;
                Ok(t)
            }
            _ => self.type_error(),
        }
    }

    fn type_error<T>(&self) -> PResult<T> {
        self.error(&["type", "`Tag`", "`Tagged`", "`Prod`", "`Sum`", "`mu`", "`Top`", "`{`", "`(`"])
    }

    fn record_ty(&mut self) -> PResult<Ty> {
        self.sym("{")?;
        if self.is_sym("}") {
            self.advance();
            return Ok(Ty::RNil);
        }
        let mut fields = Vec::new();
        loop {
            let l = self.ident()?;
            self.sym(":")?;
            fields.push((l, self.ty()?));
            if self.is_sym(";;") {
                self.advance();
                continue;
            }
            break;
        }
        let tail = if self.is_sym("|") {
            self.advance();
            self.ty()?
        } else {
            Ty::RNil
        };
        if !self.is_sym("}") {
            return self.error(&["`;;`", "`|`", "`}`"]);
        }
        self.advance();
        Ok(fields.into_iter().rev().fold(tail, |t, (l, h)| Ty::rcons(l, h, t)))
    }

    // -- terms ---------------------------------------------------------

    fn expr(&mut self) -> PResult<Tm> {
        if self.is_sym("/") {
            self.advance();
            let x = self.ident()?;
            self.sym(":")?;
            let t = self.ty()?;
            self.sym(",")?;
            return Ok(Tm::lam(x, t, self.expr()?));
        }
        if self.is_kw("Let") {
            self.advance();
            let x = self.ident()?;
            self.kw("be")?;
            let e1 = self.expr()?;
            self.kw("in")?;
            return Ok(Tm::let_(x, e1, self.expr()?));
        }
        if self.is_kw("LetRec") {
            self.advance();
            let x = self.ident()?;
            self.sym(":")?;
            let t = self.ty()?;
            self.kw("be")?;
            let e1 = self.expr()?;
            self.kw("in")?;
            return Ok(Tm::letrec(x, t, e1, self.expr()?));
        }
        let mut e = self.postfix()?;
        while self.starts_atom() {
            let a = self.postfix()?;
            e = Tm::app(e, a);
        }
        Ok(e)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Tag(_) => true,
            Tok::Ident(s) => {
                !is_keyword(s)
                    || matches!(
                        s.as_str(),
                        "NewTag" | "SubTag" | "New" | "Match" | "Extract" | "nil" | "Fix" | "Fold" | "Unfold" | "Fst" | "Snd"
                    )
            }
            Tok::Sym(s) => matches!(*s, "(" | "{" | "<"),
            Tok::Eof => false,
        }
    }

    fn postfix(&mut self) -> PResult<Tm> {
        let mut e = self.atom()?;
        while self.is_kw("proj") {
            self.advance();
            let l = self.ident()?;
            e = Tm::proj(e, l);
        }
        Ok(e)
    }

    fn braced(&mut self) -> PResult<Tm> {
        self.sym("{")?;
        let e = self.expr()?;
        self.sym("}")?;
        Ok(e)
    }

    fn bracketed_ty(&mut self) -> PResult<Ty> {
        self.sym("[")?;
        let t = self.ty()?;
        self.sym("]")?;
        Ok(t)
    }

    fn atom(&mut self) -> PResult<Tm> {
        match self.peek().clone() {
            Tok::Tag(k) => {
                self.advance();
                Ok(Tm::tag(k))
            }
            Tok::Ident(s) => {
                if !is_keyword(&s) {
                    self.advance();
                    return Ok(Tm::var(s));
                }
                match s.as_str() {
                    "NewTag" => {
                        self.advance();
                        Ok(Tm::NewTag(self.bracketed_ty()?))
                    }
                    "SubTag" => {
                        self.advance();
                        let t = self.bracketed_ty()?;
                        Ok(Tm::SubTag(t, self.paren_name()?))
                    }
                    "New" => {
                        self.advance();
                        let body = self.braced()?;
                        Ok(Tm::new_tagged(self.paren_name()?, body))
                    }
                    "Match" => {
                        self.advance();
                        let scrutinee = self.braced()?;
                        let pattern = self.paren_name()?;
                        self.sym("(")?;
                        let binder = self.ident()?;
                        self.sym(")")?;
                        let hit = self.braced()?;
                        let miss = self.braced()?;
                        Ok(Tm::match_(scrutinee, pattern, binder, hit, miss))
                    }
                    "Extract" => {
                        self.advance();
                        Ok(Tm::extract(self.braced()?))
                    }
                    "nil" => {
                        self.advance();
                        Ok(Tm::RNil)
                    }
                    "Fix" => {
                        self.advance();
                        Ok(Tm::fix(self.braced()?))
                    }
                    "Fold" => {
                        self.advance();
                        let t = self.bracketed_ty()?;
                        Ok(Tm::fold(t, self.braced()?))
                    }
                    "Unfold" | "Fst" if matches!(self.peek_at(1), Tok::Sym("(")) => Ok(Tm::Name(self.name()?)),
                    "Unfold" => {
                        self.advance();
                        Ok(Tm::unfold(self.braced()?))
                    }
                    "Fst" => {
                        self.advance();
                        Ok(Tm::fst(self.braced()?))
                    }
                    "Snd" => {
                        self.advance();
                        Ok(Tm::snd(self.braced()?))
                    }
                    _ => self.term_error(),
                }
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            Tok::Sym("<") => {
                self.advance();
                if self.is_sym(">") {
                    self.advance();
                    return Ok(Tm::Unit);
                }
                let a = self.expr()?;
                self.sym(",")?;
                let b = self.expr()?;
                self.sym(">")?;
                Ok(Tm::pair(a, b))
            }
            Tok::Sym("{") => self.record_tm(),
            _ => self.term_error(),
        }
    }

    fn term_error<T>(&self) -> PResult<T> {
        self.error(&[
            "term", "identifier", "tag", "`NewTag`", "`SubTag`", "`New`", "`Match`", "`Extract`", "`nil`", "`Fix`",
            "`Fold`", "`Unfold`", "`Fst`", "`Snd`", "`/`", "`Let`", "`LetRec`", "`(`", "`{`", "`<`",
        ])
    }

    fn record_tm(&mut self) -> PResult<Tm> {
        self.sym("{")?;
        if self.is_sym("}") {
            self.advance();
            return Ok(Tm::RNil);
        }
        let mut fields = Vec::new();
        loop {
            let l = self.ident()?;
            self.sym("=")?;
            fields.push((l, self.expr()?));
            if self.is_sym(";;") {
                self.advance();
                continue;
            }
            break;
        }
        let tail = if self.is_sym("|") {
            self.advance();
            self.expr()?
        } else {
            Tm::RNil
        };
        if !self.is_sym("}") {
            return self.error(&["`;;`", "`|`", "`}`"]);
        }
        self.advance();
        Ok(fields.into_iter().rev().fold(tail, |t, (l, h)| Tm::rcons(l, h, t)))
    }

    // -- programs ------------------------------------------------------

    fn decl(&mut self) -> PResult<TagDecl> {
        let (line, column) = (self.tokens[self.pos].line, self.tokens[self.pos].column);
        self.kw("tag")?;
        let id = self.tag_id()?;
        self.sym(":")?;
        let body = self.ty()?;
        let parent = if self.is_kw("extends") || self.is_kw("Extends") {
            self.advance();
            Some(self.tag_id()?)
        } else {
            None
        };
        if self.is_sym(";") {
            self.advance();
        }
        Ok(TagDecl { id: TagId(id), body, parent: parent.map(TagId), line, column })
    }
}

/// `tag #k : T [extends #j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagDecl {
    pub id: TagId,
    pub body: Ty,
    pub parent: Option<TagId>,
    pub line: usize,
    pub column: usize,
}

/// A source file: initial tag declarations followed by the main term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramFile {
    pub decls: Vec<TagDecl>,
    pub main: Tm,
}

fn parser(src: &str) -> PResult<Parser> {
    Ok(Parser { tokens: lex(src)?, pos: 0 })
}

pub fn parse_program(src: &str) -> PResult<ProgramFile> {
    let mut p = parser(src)?;
    let mut decls = Vec::new();
    while p.is_kw("tag") {
        decls.push(p.decl()?);
    }
    let main = p.expr()?;
    p.eof()?;
    Ok(ProgramFile { decls, main })
}

pub fn parse_term(src: &str) -> PResult<Tm> {
    let mut p = parser(src)?;
    let e = p.expr()?;
    p.eof()?;
    Ok(e)
}

pub fn parse_type(src: &str) -> PResult<Ty> {
    let mut p = parser(src)?;
    let t = p.ty()?;
    p.eof()?;
    Ok(t)
}

pub fn parse_name(src: &str) -> PResult<Name> {
    let mut p = parser(src)?;
    let n = p.name()?;
    p.eof()?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(s: &str) -> Tm {
        parse_term(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    fn ty(s: &str) -> Ty {
        parse_type(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn unit_and_names() {
        assert_eq!(term("< >"), Tm::Unit);
        assert_eq!(term("<>"), Tm::Unit);
        assert_eq!(term("#3"), Tm::tag(3));
        assert_eq!(term("Fst(p)"), Tm::Name(Name::fst(Name::var("p"))));
        assert_eq!(term("Fst{p}"), Tm::fst(Tm::var("p")));
        assert_eq!(term("Unfold(Fst(p))"), Tm::Name(Name::unfold(Name::fst(Name::var("p")))));
    }

    #[test]
    fn let_example() {
        let e = term("Let x be NewTag[Top] in Extract{New{< >}(x)}");
        assert_eq!(
            e,
            Tm::let_("x", Tm::NewTag(Ty::Top), Tm::extract(Tm::new_tagged(Name::var("x"), Tm::Unit)))
        );
    }

    #[test]
    fn types() {
        assert_eq!(ty("Prod[x:Top],Top"), Ty::prod("x", Ty::Top, Ty::Top));
        assert_eq!(ty("Prod[x:Prod[y:A],B],C"), Ty::prod("x", Ty::prod("y", Ty::var("A"), Ty::var("B")), Ty::var("C")));
        assert_eq!(ty("Sum[x:Tag[Top]]Tagged(x)"), Ty::sum("x", Ty::tag(Ty::Top), Ty::tagged(Name::var("x"))));
        assert_eq!(ty("Tag[{}]Extends(#0)"), Ty::tag_ext(Ty::RNil, Name::tag(0)));
        assert_eq!(ty("{f:Top ;; g:mu(t):{hd:t}}"), Ty::record([
            ("f", Ty::Top),
            ("g", Ty::mu("t", Ty::record([("hd", Ty::var("t"))]))),
        ]));
        assert_eq!(ty("{f:Top | Top}"), Ty::rcons("f", Ty::Top, Ty::Top));
    }

    #[test]
    fn application_is_left_associative_and_proj_binds_tighter() {
        assert_eq!(term("f a b"), Tm::app(Tm::app(Tm::var("f"), Tm::var("a")), Tm::var("b")));
        assert_eq!(term("f r proj l"), Tm::app(Tm::var("f"), Tm::proj(Tm::var("r"), "l")));
        assert_eq!(term("r proj a proj b"), Tm::proj(Tm::proj(Tm::var("r"), "a"), "b"));
        assert_eq!(term("(/x:Top,x) < >"), Tm::app(Tm::lam("x", Ty::Top, Tm::var("x")), Tm::Unit));
    }

    #[test]
    fn lambda_with_product_annotation() {
        let e = term("/f:Prod[y:Top],Top,f < >");
        assert_eq!(e, Tm::lam("f", Ty::prod("y", Ty::Top, Ty::Top), Tm::app(Tm::var("f"), Tm::Unit)));
    }

    #[test]
    fn records_pairs_and_match() {
        assert_eq!(term("{f = < > ;; g = nil}"), Tm::record([("f", Tm::Unit), ("g", Tm::RNil)]));
        assert_eq!(term("{}"), Tm::RNil);
        assert_eq!(term("</x:Top,x, < >>"), Tm::pair(Tm::lam("x", Ty::Top, Tm::var("x")), Tm::Unit));
        assert_eq!(
            term("Match{New{< >}(#1)}(#0)(y){y}{< >}"),
            Tm::match_(Tm::new_tagged(Name::tag(1), Tm::Unit), Name::tag(0), "y", Tm::var("y"), Tm::Unit)
        );
    }

    #[test]
    fn letrec_desugars() {
        let e = term("LetRec f:Prod[x:Top],Top be /x:Top,x in f");
        let want = Tm::let_(
            "f",
            Tm::fix(Tm::lam("f", Ty::prod("x", Ty::Top, Ty::Top), Tm::lam("x", Ty::Top, Tm::var("x")))),
            Tm::var("f"),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(term("// a comment\n< > // trailing"), Tm::Unit);
    }

    #[test]
    fn truncated_match_reports_position() {
        let err = parse_term("Match{e}(").unwrap_err();
        assert_eq!((err.line, err.column), (1, 9));
        assert_eq!(err.found, "end of input");
        assert!(err.expected.contains("tag"));
    }

    #[test]
    fn errors_carry_line_and_column() {
        let err = parse_term("Let x be\n  < > ; < >").unwrap_err();
        assert_eq!((err.line, err.column), (2, 7));
        assert!(err.expected.contains("`in`"));
        let err = parse_term("< > $").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
    }

    #[test]
    fn programs_with_declarations() {
        let p = parse_program("tag #0 : Top;\ntag #1 : Top extends #0\nMatch{New{< >}(#1)}(#0)(y){y}{< >}").unwrap();
        assert_eq!(p.decls.len(), 2);
        assert_eq!(p.decls[1].parent, Some(TagId(1 - 1)));
        assert_eq!((p.decls[1].line, p.decls[1].column), (2, 1));
    }

    #[test]
    fn keywords_are_not_identifiers() {
        assert!(parse_term("/in:Top,in").is_err());
        assert!(parse_type("Top Top").is_err());
    }
}
