//! Source files: tag declarations that seed the store, plus a main term.

use thiserror::Error;

use crate::parse::{parse_program, ParseError, ProgramFile};
use crate::store::Store;
use crate::subtype::is_subtype;
use crate::syntax::{Name, TagCtx, TagId, Tm, Ty, TypingCtx};
use crate::typing::{check_type, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeclError {
    #[error("line {line}: tag {tag} is declared twice")]
    Duplicate { tag: TagId, line: usize },
    #[error("line {line}: parent {parent} of {tag} is not declared before it")]
    UnknownParent { tag: TagId, parent: TagId, line: usize },
    #[error("line {line}: body of {tag}: {error}")]
    BadBody { tag: TagId, line: usize, error: TypeError },
    #[error("line {line}: body {body} of {tag} is not a subtype of its parent's body {parent_body}")]
    BodyNotRefined { tag: TagId, line: usize, body: Ty, parent_body: Ty },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Decl(#[from] DeclError),
}

/// A parsed program whose declarations have been turned into a matching
/// tag context and store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub sigma: TagCtx,
    pub store: Store,
    pub main: Tm,
}

impl Program {
    pub fn from_file(file: ProgramFile) -> Result<Program, DeclError> {
        let mut sigma = TagCtx::new();
        let mut store = Store::new();
        for d in &file.decls {
            if sigma.contains(d.id) {
                return Err(DeclError::Duplicate { tag: d.id, line: d.line });
            }
            check_type(&TypingCtx::new(), &sigma, &d.body)
                .map_err(|error| DeclError::BadBody { tag: d.id, line: d.line, error })?;
            match d.parent {
                None => {
                    store = store.extend_root(d.id).expect("fresh by the duplicate check");
                }
                Some(p) => {
                    let parent = sigma
                        .get(p)
                        .ok_or(DeclError::UnknownParent { tag: d.id, parent: p, line: d.line })?;
                    if !is_subtype(&TypingCtx::new(), &sigma, &d.body, &parent.body) {
                        return Err(DeclError::BodyNotRefined {
                            tag: d.id,
                            line: d.line,
                            body: d.body.clone(),
                            parent_body: parent.body.clone(),
                        });
                    }
                    store = store.extend_child(d.id, p).expect("parent was declared");
                }
            }
            sigma.insert(d.id, d.body.clone(), d.parent.map(Name::Tag));
        }
        Ok(Program { sigma, store, main: file.main })
    }

    pub fn parse(src: &str) -> Result<Program, ProgramError> {
        Ok(Program::from_file(parse_program(src)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Path;

    #[test]
    fn declarations_build_matching_contexts() {
        let p = Program::parse("tag #0 : Top; tag #1 : Top extends #0; tag #3 : {}\n< >").unwrap();
        assert_eq!(
            p.sigma,
            TagCtx::new().with(0, Ty::Top, None).with(1, Ty::Top, Some(0)).with(3, Ty::RNil, None)
        );
        assert_eq!(
            p.store,
            Store::from_entries(vec![Path::from_ids(&[3]), Path::from_ids(&[1, 0]), Path::from_ids(&[0])])
        );
        assert_eq!(p.store.next_id(), 4);
    }

    #[test]
    fn bad_declarations() {
        assert!(matches!(
            Program::parse("tag #0 : Top; tag #0 : Top; < >"),
            Err(ProgramError::Decl(DeclError::Duplicate { .. }))
        ));
        assert!(matches!(
            Program::parse("tag #1 : Top extends #0; < >"),
            Err(ProgramError::Decl(DeclError::UnknownParent { .. }))
        ));
        assert!(matches!(
            Program::parse("tag #0 : {f:Top}; tag #1 : Top extends #0; < >"),
            Err(ProgramError::Decl(DeclError::BodyNotRefined { .. }))
        ));
        assert!(matches!(
            Program::parse("tag #0 : Tagged(#5); < >"),
            Err(ProgramError::Decl(DeclError::BadBody { .. }))
        ));
    }
}
