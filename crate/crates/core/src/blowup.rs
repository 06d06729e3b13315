//! Subset collections of `F = {1, ..., n}` encoding a sequence of blowups of
//! the local model `xy = u_1 ... u_n`, and the combinatorics of the resulting
//! exceptional chain.
//!
//! A set `A` stands for the divisor `D_A = V(x, u_A)` with `u_A` the product
//! of the `u_i`, `i in A`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index_set::{IndexSet, MAX_INDEX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlowupError {
    #[error("index set size {0} outside 1..={MAX_INDEX}")]
    BadGroundSize(usize),
    #[error("set #{index} = {set} is empty, not proper, or leaves 1..={n}")]
    BadSet { index: usize, set: IndexSet, n: usize },
    #[error("collection is not smooth: {0} and {1} are never separated")]
    NotSmooth(usize, usize),
    #[error("node index {index} outside 1..={n}")]
    NodeOutOfRange { index: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetCollection {
    n: usize,
    sets: Vec<IndexSet>,
}

impl SubsetCollection {
    /// Every set must be a nonempty proper subset of `{1, ..., n}`.
    pub fn new(n: usize, sets: Vec<IndexSet>) -> Result<Self, BlowupError> {
        if !(1..=MAX_INDEX).contains(&n) {
            return Err(BlowupError::BadGroundSize(n));
        }
        let full = IndexSet::full(n);
        if let Some((index, &set)) = sets
            .iter()
            .enumerate()
            .find(|(_, s)| s.is_empty() || !s.is_subset(full) || **s == full)
        {
            return Err(BlowupError::BadSet { index, set, n });
        }
        Ok(SubsetCollection { n, sets })
    }

    /// `|F| = d + 1`.
    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> IndexSet {
        IndexSet::full(self.n)
    }

    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisorKind {
    /// `V(x, u_A)`.
    X,
    /// `V(y, u_A)`.
    Y,
    /// `V(x - u_{A^c}, y - u_A)`.
    #[serde(rename = "diag")]
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlowupDivisor {
    pub kind: DivisorKind,
    pub set: IndexSet,
}

/// The set `A` with `D_A` giving the same blowup as `b`, inside `{1, ..., n}`.
pub fn normalize_divisor(b: BlowupDivisor, n: usize) -> IndexSet {
    match b.kind {
        DivisorKind::X | DivisorKind::Diagonal => b.set,
        DivisorKind::Y => b.set.complement(n),
    }
}

fn membership_key(col: &SubsetCollection, m: usize) -> u128 {
    // bit k from the top is 0 iff m lies in A_{k+1}; needs at most 128 sets
    col.sets.iter().fold(0u128, |acc, s| (acc << 1) | u128::from(!s.contains(m)))
}

fn cmp_in_first(col: &SubsetCollection, m: usize, n: usize) -> Ordering {
    for s in &col.sets {
        match (s.contains(m), s.contains(n)) {
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
    }
    Ordering::Equal
}

/// First pair `i < j` no set separates.
pub fn first_unseparated(col: &SubsetCollection) -> Option<(usize, usize)> {
    if col.sets.len() <= 128 {
        let keys: Vec<u128> = (1..=col.n).map(|m| membership_key(col, m)).collect();
        for i in 0..col.n {
            for j in i + 1..col.n {
                if keys[i] == keys[j] {
                    return Some((i + 1, j + 1));
                }
            }
        }
        return None;
    }
    (1..=col.n)
        .flat_map(|i| (i + 1..=col.n).map(move |j| (i, j)))
        .find(|&(i, j)| cmp_in_first(col, i, j) == Ordering::Equal)
}

/// Every pair of distinct indices is separated by some set.
pub fn is_smooth_collection(col: &SubsetCollection) -> bool {
    first_unseparated(col).is_none()
}

/// `m <_A n`: the first set separating them contains `m`. `None` when no set
/// separates them.
pub fn a_less(col: &SubsetCollection, m: usize, n: usize) -> Option<bool> {
    match cmp_in_first(col, m, n) {
        Ordering::Less => Some(true),
        Ordering::Greater => Some(false),
        Ordering::Equal => None,
    }
}

fn require_smooth(col: &SubsetCollection) -> Result<(), BlowupError> {
    match first_unseparated(col) {
        Some((i, j)) => Err(BlowupError::NotSmooth(i, j)),
        None => Ok(()),
    }
}

/// `eta(1) <_A ... <_A eta(n)`, returned as `[eta(1), ..., eta(n)]`.
pub fn a_order(col: &SubsetCollection) -> Result<Vec<usize>, BlowupError> {
    require_smooth(col)?;
    let mut order: Vec<usize> = (1..=col.n).collect();
    order.sort_by(|&m, &n| cmp_in_first(col, m, n));
    Ok(order)
}

/// Node `N_i` of the exceptional chain lies on `Sigma_{eta(i)}`; entry `i - 1`
/// is `eta(i)`.
pub fn node_sigma_assignment(col: &SubsetCollection) -> Result<Vec<usize>, BlowupError> {
    a_order(col)
}

/// Indices whose `x`-side and `y`-side strict transforms pass through `N_i`:
/// `({eta(1..=i)}, {eta(i..=n)})`.
pub fn strict_transform_incidence(
    col: &SubsetCollection,
    i: usize,
) -> Result<(IndexSet, IndexSet), BlowupError> {
    if !(1..=col.n).contains(&i) {
        return Err(BlowupError::NodeOutOfRange { index: i, n: col.n });
    }
    let eta = a_order(col)?;
    let x = eta[..i].iter().copied().collect();
    let y = eta[i - 1..].iter().copied().collect();
    Ok((x, y))
}

/// Exceptional chain computed by recursing into the two charts of each blowup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartChain {
    /// `Sigma` index of each node along the chain.
    pub nodes: Vec<usize>,
    /// Number of exceptional rational curves.
    pub curves: usize,
}

/// Chart recursion over the whole ground set.
pub fn chart_recursion_oracle(col: &SubsetCollection) -> Result<ChartChain, BlowupError> {
    chart_recursion_on(col, col.ground())
}

/// Chart recursion on the localization at the indices outside `ground`: sets
/// are intersected with `ground` and dropped when empty or full.
pub fn chart_recursion_on(
    col: &SubsetCollection,
    ground: IndexSet,
) -> Result<ChartChain, BlowupError> {
    assert!(!ground.is_empty() && ground.is_subset(col.ground()));
    recurse(&col.sets, ground)
}

fn recurse(sets: &[IndexSet], ground: IndexSet) -> Result<ChartChain, BlowupError> {
    if ground.len() == 1 {
        return Ok(ChartChain {
            nodes: ground.to_vec(),
            curves: 0,
        });
    }
    let Some(pos) = sets.iter().position(|s| {
        let t = s.intersection(ground);
        !t.is_empty() && t != ground
    }) else {
        let mut it = ground.iter();
        let (i, j) = (it.next().unwrap(), it.next().unwrap());
        return Err(BlowupError::NotSmooth(i, j));
    };
    let a = sets[pos].intersection(ground);
    let rest = &sets[pos + 1..];
    let u = recurse(rest, a)?;
    let v = recurse(rest, ground.difference(a))?;
    let mut nodes = u.nodes;
    nodes.extend(v.nodes);
    Ok(ChartChain {
        nodes,
        curves: u.curves + v.curves + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> IndexSet {
        v.iter().copied().collect()
    }

    fn col(n: usize, sets: &[&[usize]]) -> SubsetCollection {
        SubsetCollection::new(n, sets.iter().map(|s| set(s)).collect()).unwrap()
    }

    #[test]
    fn normalization() {
        let x = BlowupDivisor {
            kind: DivisorKind::X,
            set: set(&[1]),
        };
        assert_eq!(normalize_divisor(x, 3), set(&[1]));
        let y = BlowupDivisor {
            kind: DivisorKind::Y,
            set: set(&[2, 3]),
        };
        assert_eq!(normalize_divisor(y, 3), set(&[1]));
        let diag = BlowupDivisor {
            kind: DivisorKind::Diagonal,
            set: set(&[1, 2]),
        };
        assert_eq!(normalize_divisor(diag, 3), set(&[1, 2]));
    }

    #[test]
    fn rejects_improper_sets() {
        assert!(SubsetCollection::new(3, vec![IndexSet::EMPTY]).is_err());
        assert!(SubsetCollection::new(3, vec![set(&[1, 2, 3])]).is_err());
        assert!(SubsetCollection::new(3, vec![set(&[4])]).is_err());
        assert!(SubsetCollection::new(0, vec![]).is_err());
    }

    #[test]
    fn smoothness() {
        assert!(is_smooth_collection(&col(3, &[&[1], &[2]])));
        assert!(is_smooth_collection(&col(1, &[])));
        assert!(!is_smooth_collection(&col(3, &[&[1, 2]])));
        assert_eq!(first_unseparated(&col(3, &[&[1, 2]])), Some((1, 2)));
    }

    #[test]
    fn orderings() {
        assert_eq!(a_order(&col(3, &[&[1], &[2]])).unwrap(), vec![1, 2, 3]);
        assert_eq!(a_order(&col(2, &[&[1]])).unwrap(), vec![1, 2]);
        assert_eq!(a_order(&col(3, &[&[2], &[1]])).unwrap(), vec![2, 1, 3]);
        assert_eq!(
            node_sigma_assignment(&col(3, &[&[2], &[1]])).unwrap(),
            vec![2, 1, 3]
        );
        assert_eq!(a_less(&col(3, &[&[2], &[1]]), 2, 1), Some(true));
        assert_eq!(a_less(&col(3, &[&[1, 2]]), 1, 2), None);
        assert_eq!(
            a_order(&col(3, &[&[1, 2]])),
            Err(BlowupError::NotSmooth(1, 2))
        );
    }

    #[test]
    fn incidence_of_the_standard_example() {
        let c = col(3, &[&[1], &[2]]);
        let expect = [
            (set(&[1]), set(&[1, 2, 3])),
            (set(&[1, 2]), set(&[2, 3])),
            (set(&[1, 2, 3]), set(&[3])),
        ];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(&strict_transform_incidence(&c, i + 1).unwrap(), e);
        }
        assert!(strict_transform_incidence(&c, 4).is_err());
    }

    #[test]
    fn chart_recursion_examples() {
        let c = col(3, &[&[1], &[2]]);
        let chain = chart_recursion_oracle(&c).unwrap();
        assert_eq!(chain.nodes, vec![1, 2, 3]);
        assert_eq!(chain.curves, 2);

        let c = col(1, &[]);
        assert_eq!(
            chart_recursion_oracle(&c).unwrap(),
            ChartChain {
                nodes: vec![1],
                curves: 0
            }
        );

        let c = col(4, &[&[2, 3], &[3], &[1]]);
        assert_eq!(chart_recursion_oracle(&c).unwrap().nodes, a_order(&c).unwrap());

        assert!(chart_recursion_oracle(&col(3, &[&[1, 2]])).is_err());
    }

    #[test]
    fn localization_shortens_the_chain() {
        let c = col(4, &[&[1], &[2], &[3]]);
        let a = set(&[1, 2]);
        let chain = chart_recursion_on(&c, a.complement(4)).unwrap();
        assert_eq!(chain.curves, 4 - 2 - 1);
        assert_eq!(chain.nodes, vec![3, 4]);
    }
}
