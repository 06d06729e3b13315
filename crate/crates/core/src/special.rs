//! Special point data for the desingularized `d`-fold product of a curve
//! with two smooth components `C_1`, `C_2` meeting at `q` nodes.
//!
//! A datum is a node tuple `(l_1, ..., l_d)` together with `d + 1` distinct
//! words `[u_1], ..., [u_{d+1}]` of length `d` over `{1, 2}`. Letter `k` of a
//! word says on which component the `k`-th factor lies.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::ExactScalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecialError {
    #[error("label {0:?} has a letter other than 1 or 2")]
    BadLetter(String),
    #[error("label {label} has length {got}, expected {expected}")]
    LabelLength {
        label: Label,
        expected: usize,
        got: usize,
    },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("label {0} occurs twice")]
    DuplicateLabel(Label),
    #[error("node numbers start at 1")]
    ZeroNode,
    #[error("degree d must be at least 1")]
    ZeroDegree,
    #[error("labels {0} and {1} are not comparable in the {2}-ordering")]
    OrderIncomplete(Label, Label, usize),
    #[error("ordering has {got} entries, expected a permutation of {expected} labels")]
    BadOrdering { expected: usize, got: usize },
}

/// A word over `{1, 2}`, ordered lexicographically with `1 < 2`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Vec<u8>);

impl Label {
    pub fn new(letters: Vec<u8>) -> Result<Self, SpecialError> {
        if letters.iter().any(|&c| c != 1 && c != 2) {
            return Err(SpecialError::BadLetter(
                letters.iter().map(|c| c.to_string()).collect(),
            ));
        }
        Ok(Label(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    /// Letter at 1-based position `k`.
    pub fn at(&self, k: usize) -> u8 {
        self.0[k - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn appended(&self, letter: u8) -> Label {
        debug_assert!(letter == 1 || letter == 2);
        let mut v = self.0.clone();
        v.push(letter);
        Label(v)
    }
}

impl FromStr for Label {
    type Err = SpecialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(SpecialError::BadLetter(s.to_string())),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Ok(Label(letters))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `{(l_1, ..., l_d), [u_1], ..., [u_{d+1}]}`. Labels keep the order given;
/// enumeration produces them in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SpecialPointData {
    ells: Vec<usize>,
    labels: Vec<Label>,
}

impl SpecialPointData {
    pub fn new(ells: Vec<usize>, labels: Vec<Label>) -> Result<Self, SpecialError> {
        let d = ells.len();
        if d == 0 {
            return Err(SpecialError::ZeroDegree);
        }
        if ells.contains(&0) {
            return Err(SpecialError::ZeroNode);
        }
        if labels.len() != d + 1 {
            return Err(SpecialError::LabelCount {
                expected: d + 1,
                got: labels.len(),
            });
        }
        if let Some(l) = labels.iter().find(|l| l.len() != d) {
            return Err(SpecialError::LabelLength {
                label: l.clone(),
                expected: d,
                got: l.len(),
            });
        }
        let mut seen = BTreeSet::new();
        if let Some(l) = labels.iter().find(|l| !seen.insert(*l)) {
            return Err(SpecialError::DuplicateLabel(l.clone()));
        }
        Ok(SpecialPointData { ells, labels })
    }

    /// `{(l), [1], [2]}`.
    pub fn base(ell: usize) -> Result<Self, SpecialError> {
        Self::new(vec![ell], vec![Label(vec![1]), Label(vec![2])])
    }

    pub fn d(&self) -> usize {
        self.ells.len()
    }

    pub fn ells(&self) -> &[usize] {
        &self.ells
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Largest node number used.
    pub fn max_node(&self) -> usize {
        self.ells.iter().copied().max().unwrap_or(0)
    }

    pub fn is_lex_sorted(&self) -> bool {
        self.labels.windows(2).all(|w| w[0] < w[1])
    }

    pub fn sorted(&self) -> SpecialPointData {
        let mut labels = self.labels.clone();
        labels.sort();
        SpecialPointData {
            ells: self.ells.clone(),
            labels,
        }
    }

    /// Nodes renumbered in order of first appearance, labels sorted; two data
    /// differing by a relabeling of nodes have the same canonical form.
    pub fn canonical(&self) -> SpecialPointData {
        let mut map: Vec<(usize, usize)> = Vec::new();
        let ells = self
            .ells
            .iter()
            .map(|&l| match map.iter().find(|(from, _)| *from == l) {
                Some(&(_, to)) => to,
                None => {
                    let to = map.len() + 1;
                    map.push((l, to));
                    to
                }
            })
            .collect();
        SpecialPointData {
            ells,
            labels: self.labels.clone(),
        }
        .sorted()
    }
}

impl fmt::Display for SpecialPointData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{(")?;
        for (k, l) in self.ells.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")?;
        for l in &self.labels {
            write!(f, ",[{l}]")?;
        }
        write!(f, "}}")
    }
}

impl<'de> Deserialize<'de> for SpecialPointData {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            ells: Vec<usize>,
            labels: Vec<Label>,
        }
        let raw = Raw::deserialize(deserializer)?;
        SpecialPointData::new(raw.ells, raw.labels).map_err(serde::de::Error::custom)
    }
}

/// Comparison in the `ell`-ordering: positions with `l_k = ell` decide first,
/// scanned from the last one down, with `2` before `1`; otherwise the first
/// differing position decides, with `1` before `2`.
pub fn ell_cmp(ells: &[usize], ell: usize, u: &Label, v: &Label) -> Ordering {
    for k in (1..=ells.len()).rev() {
        if ells[k - 1] == ell && u.at(k) != v.at(k) {
            return v.at(k).cmp(&u.at(k));
        }
    }
    for k in 1..=ells.len() {
        if u.at(k) != v.at(k) {
            return u.at(k).cmp(&v.at(k));
        }
    }
    Ordering::Equal
}

/// `[u_{j1}] <_ell [u_{j2}]`, label indices 0-based.
pub fn ell_less(r: &SpecialPointData, ell: usize, j1: usize, j2: usize) -> bool {
    ell_cmp(&r.ells, ell, &r.labels[j1], &r.labels[j2]) == Ordering::Less
}

/// Label indices in `ell`-order.
pub fn ell_order(r: &SpecialPointData, ell: usize) -> Result<Vec<usize>, SpecialError> {
    let mut idx: Vec<usize> = (0..r.labels.len()).collect();
    idx.sort_by(|&a, &b| ell_cmp(&r.ells, ell, &r.labels[a], &r.labels[b]));
    for w in idx.windows(2) {
        if ell_cmp(&r.ells, ell, &r.labels[w[0]], &r.labels[w[1]]) != Ordering::Less {
            return Err(SpecialError::OrderIncomplete(
                r.labels[w[0]].clone(),
                r.labels[w[1]].clone(),
                ell,
            ));
        }
    }
    Ok(idx)
}

/// Points over `(r, ell_new)` when the labels of `r` are ordered as `order`
/// (label indices): for `h = 1..=d+1` the labels `[v_1 1], ..., [v_h 1],
/// [v_h 2], ..., [v_{d+1} 2]`, stored sorted.
pub fn extend_with_order(
    r: &SpecialPointData,
    ell_new: usize,
    order: &[usize],
) -> Result<Vec<SpecialPointData>, SpecialError> {
    if ell_new == 0 {
        return Err(SpecialError::ZeroNode);
    }
    let n = r.labels.len();
    let mut seen = vec![false; n];
    if order.len() != n || !order.iter().all(|&j| j < n && !std::mem::replace(&mut seen[j], true)) {
        return Err(SpecialError::BadOrdering {
            expected: n,
            got: order.len(),
        });
    }
    let mut ells = r.ells.clone();
    ells.push(ell_new);
    let v: Vec<&Label> = order.iter().map(|&j| &r.labels[j]).collect();
    Ok((1..=n)
        .map(|h| {
            let mut labels: Vec<Label> = v[..h].iter().map(|l| l.appended(1)).collect();
            labels.extend(v[h - 1..].iter().map(|l| l.appended(2)));
            labels.sort();
            SpecialPointData {
                ells: ells.clone(),
                labels,
            }
        })
        .collect())
}

/// The `d + 1` special points over `(r, ell_new)` under the `ell_new`-ordering.
pub fn extend_special_point(
    r: &SpecialPointData,
    ell_new: usize,
) -> Result<Vec<SpecialPointData>, SpecialError> {
    let order = ell_order(r, ell_new)?;
    extend_with_order(r, ell_new, &order)
}

/// All special points reachable from `{(l), [1], [2]}` when each extension
/// orders labels with `order(r, ell_new)`. Sorted by `(ells, labels)`,
/// duplicates removed.
pub fn enumerate_with<E, F>(d: usize, q: usize, order: F) -> Result<Vec<SpecialPointData>, E>
where
    F: Fn(&SpecialPointData, usize) -> Result<Vec<usize>, E>,
    E: From<SpecialError>,
{
    if d == 0 {
        return Err(SpecialError::ZeroDegree.into());
    }
    let mut layer: BTreeSet<SpecialPointData> = (1..=q)
        .map(SpecialPointData::base)
        .collect::<Result<_, _>>()?;
    for _ in 1..d {
        let mut next = BTreeSet::new();
        for r in &layer {
            for ell in 1..=q {
                let o = order(r, ell)?;
                next.extend(extend_with_order(r, ell, &o)?);
            }
        }
        layer = next;
    }
    Ok(layer.into_iter().collect())
}

/// All constructible special point data for degree `d` and `q` nodes, with
/// literal node numbers.
pub fn enumerate_special_points(d: usize, q: usize) -> Result<Vec<SpecialPointData>, SpecialError> {
    enumerate_with(d, q, ell_order)
}

/// Number of constructible points: `q^d * d!`.
pub fn special_point_count(d: usize, q: usize) -> u128 {
    (1..=d as u128).product::<u128>() * (q as u128).pow(d as u32)
}

/// Canonical forms of `points`, deduplicated and sorted.
pub fn symbolic_classes(points: &[SpecialPointData]) -> Vec<SpecialPointData> {
    points
        .iter()
        .map(SpecialPointData::canonical)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// `a^l = #{k : l_k = l, u_j(k) = 2}` for `l = 1..=q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AVector {
    pub per_node: Vec<u32>,
    pub total: u32,
}

impl AVector {
    /// `a^l`, 1-based node.
    pub fn at(&self, ell: usize) -> u32 {
        self.per_node[ell - 1]
    }

    pub fn le_componentwise(&self, other: &AVector) -> bool {
        self.per_node
            .iter()
            .zip(&other.per_node)
            .all(|(a, b)| a <= b)
    }
}

/// `a`-vector of label `j` (0-based); nodes beyond `q` are not counted.
pub fn a_vector(r: &SpecialPointData, j: usize, q: usize) -> AVector {
    let mut per_node = vec![0u32; q];
    for (k, &ell) in r.ells.iter().enumerate() {
        if r.labels[j].at(k + 1) == 2 && ell <= q {
            per_node[ell - 1] += 1;
        }
    }
    let total = per_node.iter().sum();
    AVector { per_node, total }
}

/// `ceil((|a| - deg L|C_2 + e_{C_2}) / q - 1/2)`.
pub fn b_from_total<S: ExactScalar>(a_total: i64, deg_l_c2: i64, e_c2: &S, q: usize) -> i64 {
    let x = (S::from_int(a_total - deg_l_c2) + e_c2.clone()) / S::from_int(q as i64)
        - S::half_of(1);
    x.ceil_int()
}

/// `b` of label `j` (0-based).
pub fn b_value<S: ExactScalar>(
    r: &SpecialPointData,
    j: usize,
    deg_l_c2: i64,
    e_c2: &S,
    q: usize,
) -> i64 {
    b_from_total(i64::from(a_vector(r, j, q).total), deg_l_c2, e_c2, q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropMainViolation {
    pub item: u8,
    /// Positions (0-based) in the sequence the item is about.
    pub at: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropMainReport {
    pub node: usize,
    pub violations: Vec<PropMainViolation>,
}

impl PropMainReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated_items(&self) -> BTreeSet<u8> {
        self.violations.iter().map(|v| v.item).collect()
    }
}

/// Checks, with the labels taken in their stored order `u` and `v` the
/// `ell`-ordering:
/// 1. `v` is a cyclic rotation of `u`;
/// 2. `a_{u_j} <= a_{u_{j+1}}` componentwise;
/// 3. `a^ell_{v_j} >= a^ell_{v_{j+1}}`;
/// 4. `a^ell_{v_1} - a^ell_{v_{d+1}} <= 1`, with equality iff `ell` occurs in
///    the node tuple;
/// 5. `|a_{u_{j+1}}| - |a_{u_j}| <= 1`.
pub fn check_prop_main(r: &SpecialPointData, ell: usize, q: usize) -> PropMainReport {
    let q = q.max(ell).max(r.max_node());
    let n = r.labels.len();
    let a: Vec<AVector> = (0..n).map(|j| a_vector(r, j, q)).collect();
    let mut violations = Vec::new();

    match ell_order(r, ell) {
        Ok(v) => {
            let start = v[0];
            if !(0..n).all(|i| v[i] == (start + i) % n) {
                violations.push(PropMainViolation {
                    item: 1,
                    at: v.clone(),
                });
            }
            for i in 0..n - 1 {
                if a[v[i]].at(ell) < a[v[i + 1]].at(ell) {
                    violations.push(PropMainViolation {
                        item: 3,
                        at: vec![i, i + 1],
                    });
                }
            }
            let drop = i64::from(a[v[0]].at(ell)) - i64::from(a[v[n - 1]].at(ell));
            if drop > 1 || (drop == 1) != r.ells.contains(&ell) {
                violations.push(PropMainViolation {
                    item: 4,
                    at: vec![0, n - 1],
                });
            }
        }
        Err(_) => violations.push(PropMainViolation {
            item: 1,
            at: Vec::new(),
        }),
    }
    for j in 0..n - 1 {
        if !a[j].le_componentwise(&a[j + 1]) {
            violations.push(PropMainViolation {
                item: 2,
                at: vec![j, j + 1],
            });
        }
        if i64::from(a[j + 1].total) - i64::from(a[j].total) > 1 {
            violations.push(PropMainViolation {
                item: 5,
                at: vec![j, j + 1],
            });
        }
    }
    violations.sort_by_key(|v| v.item);
    PropMainReport {
        node: ell,
        violations,
    }
}
