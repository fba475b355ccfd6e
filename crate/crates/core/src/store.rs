//! The hierarchical tag store: every generated tag together with the chain of
//! its ancestors.

use std::fmt;

use thiserror::Error;

use crate::syntax::TagId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("tag {0} is already in the store")]
    NotFresh(TagId),
    #[error("parent tag {0} heads no store entry")]
    MissingParent(TagId),
}

/// `c ~> c1 ~> ... ~> .`: a tag followed by its ancestors, nearest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path(Vec<TagId>);

impl Path {
    pub fn root(c: TagId) -> Path {
        Path(vec![c])
    }

    /// Builds a path from explicit ids. Panics on an empty slice.
    pub fn from_ids(ids: &[u64]) -> Path {
        assert!(!ids.is_empty(), "a path always starts at its own tag");
        Path(ids.iter().copied().map(TagId).collect())
    }

    pub fn head(&self) -> TagId {
        self.0[0]
    }

    pub fn parent(&self) -> Option<TagId> {
        self.0.get(1).copied()
    }

    pub fn tags(&self) -> &[TagId] {
        &self.0
    }

    pub fn contains(&self, c: TagId) -> bool {
        path_contains(c, self)
    }

    fn child(&self, c: TagId) -> Path {
        let mut tags = Vec::with_capacity(self.0.len() + 1);
        tags.push(c);
        tags.extend_from_slice(&self.0);
        Path(tags)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{c} -> ")?;
        }
        write!(f, ".")
    }
}

pub fn path_contains(c: TagId, p: &Path) -> bool {
    p.0.contains(&c)
}

/// Entries are kept newest first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Store {
    entries: Vec<Path>,
    next_id: u64,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    /// Rebuilds a store from entries given newest first. The counter is set
    /// past every id mentioned.
    pub fn from_entries(entries: Vec<Path>) -> Store {
        let next_id = entries
            .iter()
            .flat_map(|p| p.tags().iter())
            .map(|c| c.0 + 1)
            .max()
            .unwrap_or(0);
        Store { entries, next_id }
    }

    pub fn entries(&self) -> &[Path] {
        &self.entries
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Path membership, exactly as `nameinstore` derives it.
    pub fn contains(&self, c: TagId) -> bool {
        self.entries.iter().any(|p| p.contains(c))
    }

    pub fn path_of(&self, c: TagId) -> Option<&Path> {
        self.entries.iter().find(|p| p.head() == c)
    }

    pub fn fresh_tag(&self) -> (TagId, Store) {
        let c = TagId(self.next_id);
        let mut next = self.clone();
        next.next_id += 1;
        (c, next)
    }

    pub fn extend_root(&self, c: TagId) -> Result<Store, StoreError> {
        if self.contains(c) {
            return Err(StoreError::NotFresh(c));
        }
        let mut next = self.clone();
        next.entries.insert(0, Path::root(c));
        next.next_id = next.next_id.max(c.0 + 1);
        Ok(next)
    }

    pub fn extend_child(&self, c: TagId, parent: TagId) -> Result<Store, StoreError> {
        if self.contains(c) {
            return Err(StoreError::NotFresh(c));
        }
        let path = self.path_of(parent).ok_or(StoreError::MissingParent(parent))?.child(c);
        let mut next = self.clone();
        next.entries.insert(0, path);
        next.next_id = next.next_id.max(c.0 + 1);
        Ok(next)
    }

    /// Tags that head an entry, newest first.
    pub fn heads(&self) -> impl Iterator<Item = TagId> + '_ {
        self.entries.iter().map(Path::head)
    }

    /// Multi-line dump: one entry per line, then the counter.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for p in &self.entries {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out.push_str(&format!("next_id: {}\n", self.next_id));
        out
    }

    /// Checks the structural invariants: unique heads, ancestors present, no
    /// repeated tag within a path, counter past every id.
    pub fn is_consistent(&self) -> bool {
        let mut heads = std::collections::BTreeSet::new();
        for p in &self.entries {
            if !heads.insert(p.head()) {
                return false;
            }
            let mut seen = std::collections::BTreeSet::new();
            if !p.tags().iter().all(|c| seen.insert(*c)) {
                return false;
            }
        }
        self.entries.iter().all(|p| {
            let below_counter = p.tags().iter().all(|c| c.0 < self.next_id);
            let ancestors_ok = match p.parent() {
                None => true,
                Some(par) => self.path_of(par).is_some_and(|pp| pp.tags() == &p.tags()[1..]),
            };
            below_counter && ancestors_ok
        })
    }
}

/// Single-line rendering used in traces.
impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "empty");
        }
        for (i, p) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}
