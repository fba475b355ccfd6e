//! Exhaustive enumeration of small types, the universe for differential
//! testing of subtyping.

use crate::syntax::{Name, TagCtx, Ty};

/// All well-formed types of height at most `depth` over: `Top`, the type
/// variable `t`, `Tagged(#k)` for `k < tag_count`, tag types with body
/// `Top`, records over `labels`, products and sums with binder `x`, and
/// `mu` with binder `t`. The order is deterministic.
pub fn enumerate_types(tag_count: usize, labels: &[&str], depth: usize) -> Vec<Ty> {
    if depth == 0 {
        return Vec::new();
    }
    let tags: Vec<Name> = (0..tag_count as u64).map(Name::tag).collect();
    let mut leaves = vec![Ty::Top, Ty::var("t"), Ty::RNil];
    leaves.extend(tags.iter().cloned().map(Ty::Tagged));
    let mut level = leaves.clone();
    for _ in 2..=depth {
        let below = level;
        let mut next = leaves.clone();
        next.push(Ty::tag(Ty::Top));
        next.extend(tags.iter().map(|n| Ty::tag_ext(Ty::Top, n.clone())));
        for a in &below {
            for b in &below {
                next.push(Ty::prod("x", a.clone(), b.clone()));
            }
        }
        for a in &below {
            for b in &below {
                next.push(Ty::sum("x", a.clone(), b.clone()));
            }
        }
        for a in &below {
            next.push(Ty::mu("t", a.clone()));
        }
        for l in labels {
            for head in &below {
                for tail in below.iter().filter(|t| is_record(t) && crate::syntax::ty_lookup(l, t).is_none()) {
                    next.push(Ty::rcons(*l, head.clone(), tail.clone()));
                }
            }
        }
        level = next;
    }
    level
}

fn is_record(t: &Ty) -> bool {
    matches!(t, Ty::RNil | Ty::RCons(..))
}

/// The tag context used with [`enumerate_types`]: `#0` is a root and `#i`
/// extends `#((i-1)/2)`, all with body `Top`.
pub fn enumeration_sigma(tag_count: usize) -> TagCtx {
    let mut sigma = TagCtx::new();
    for i in 0..tag_count as u64 {
        let parent = (i > 0).then(|| (i - 1) / 2);
        sigma = sigma.with(i, Ty::Top, parent);
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::wellformed_ty;
    use std::collections::HashSet;

    #[test]
    fn depth_one_is_the_leaves() {
        assert_eq!(enumerate_types(0, &[], 1), vec![Ty::Top, Ty::var("t"), Ty::RNil]);
        assert!(enumerate_types(2, &["f"], 0).is_empty());
    }

    #[test]
    fn counts_and_shape() {
        // 5 leaves, 3 tag types, 25 products, 25 sums, 5 mus, 10 records.
        assert_eq!(enumerate_types(2, &["f", "g"], 2).len(), 73);
        let all = enumerate_types(2, &["f", "g"], 3);
        // 5 + 3 + 2 * 73^2 + 73 + 2 * 73 * 6
        assert_eq!(all.len(), 11615);
        assert!(all.iter().all(wellformed_ty));
        assert!(all.iter().all(|t| t.depth() <= 3));
        let distinct: HashSet<&Ty> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn sigma_shape() {
        let s = enumeration_sigma(3);
        assert_eq!(s.get(crate::syntax::TagId(0)).unwrap().parent, None);
        assert_eq!(s.get(crate::syntax::TagId(2)).unwrap().parent, Some(Name::tag(0)));
    }
}
