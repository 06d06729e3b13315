//! Dual-graph model of nodal curves and quasistability of multidegrees.
//!
//! Components are numbered `1..=p`; nodes are an ordered list of unordered
//! pairs `(r, s)` with `r != s`, indexed from 0. Parallel nodes are allowed.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index_set::{IndexSet, MAX_INDEX};
use crate::scalar::ExactScalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("a curve needs at least one component")]
    NoComponents,
    #[error("at most {MAX_INDEX} components are supported, got {0}")]
    TooManyComponents(usize),
    #[error("node {index} = ({r},{s}) references a component outside 1..={p}")]
    NodeOutOfRange {
        index: usize,
        r: usize,
        s: usize,
        p: usize,
    },
    #[error("node {index} joins component {r} to itself (internal nodes are not supported)")]
    InternalNode { index: usize, r: usize },
    #[error("dual graph is disconnected")]
    Disconnected,
    #[error("marked component {marked} outside 1..={p}")]
    MarkedOutOfRange { marked: usize, p: usize },
    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("polarization degree {0} is not an integer")]
    NonIntegralPolarization(String),
    #[error("multidegree has total {md} but the polarization has degree {pol}")]
    DegreeMismatch { md: i64, pol: i64 },
    #[error("subcurve {0} is empty, not proper, or out of range")]
    ImproperSubcurve(IndexSet),
    #[error("no quasistable twist with coefficients up to {bound}")]
    SearchExhausted { bound: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    components: usize,
    nodes: Vec<(usize, usize)>,
    marked: usize,
    neighbors: Vec<IndexSet>,
}

impl DualGraph {
    pub fn new(
        components: usize,
        nodes: Vec<(usize, usize)>,
        marked: usize,
    ) -> Result<Self, CurveError> {
        if components == 0 {
            return Err(CurveError::NoComponents);
        }
        if components > MAX_INDEX {
            return Err(CurveError::TooManyComponents(components));
        }
        let mut neighbors = vec![IndexSet::EMPTY; components + 1];
        for (index, &(r, s)) in nodes.iter().enumerate() {
            let in_range = |c: usize| (1..=components).contains(&c);
            if !in_range(r) || !in_range(s) {
                return Err(CurveError::NodeOutOfRange {
                    index,
                    r,
                    s,
                    p: components,
                });
            }
            if r == s {
                return Err(CurveError::InternalNode { index, r });
            }
            neighbors[r].insert(s);
            neighbors[s].insert(r);
        }
        if !(1..=components).contains(&marked) {
            return Err(CurveError::MarkedOutOfRange {
                marked,
                p: components,
            });
        }
        let g = DualGraph {
            components,
            nodes,
            marked,
            neighbors,
        };
        if !g.is_connected(g.all()) {
            return Err(CurveError::Disconnected);
        }
        Ok(g)
    }

    /// Two components meeting at `q >= 1` nodes, marked point on `C_1`.
    pub fn two_components(q: usize) -> Self {
        assert!(q >= 1);
        DualGraph::new(2, vec![(1, 2); q], 1).expect("two-component graph is valid")
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn marked(&self) -> usize {
        self.marked
    }

    /// Set of all components.
    pub fn all(&self) -> IndexSet {
        IndexSet::full(self.components)
    }

    /// Intersection number `C_r . C_i` on a regular smoothing.
    pub fn intersection(&self, r: usize, i: usize) -> i64 {
        if r == i {
            -(self.nodes.iter().filter(|&&(a, b)| a == r || b == r).count() as i64)
        } else {
            self.nodes
                .iter()
                .filter(|&&(a, b)| (a, b) == (r, i) || (a, b) == (i, r))
                .count() as i64
        }
    }

    /// Whether node `index` has exactly one endpoint in `y`.
    pub fn is_boundary_node(&self, index: usize, y: IndexSet) -> bool {
        let (r, s) = self.nodes[index];
        y.contains(r) != y.contains(s)
    }

    /// `k_Y`: number of nodes joining `y` to its complement.
    pub fn boundary_size(&self, y: IndexSet) -> usize {
        (0..self.nodes.len())
            .filter(|&n| self.is_boundary_node(n, y))
            .count()
    }

    /// Indices of the nodes in `Sigma_Y`.
    pub fn boundary_nodes(&self, y: IndexSet) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&n| self.is_boundary_node(n, y))
            .collect()
    }

    /// Whether the components in `set` span a connected subgraph. The empty set
    /// counts as disconnected.
    pub fn is_connected(&self, set: IndexSet) -> bool {
        let Some(start) = set.min() else {
            return false;
        };
        let mut seen = IndexSet::singleton(start);
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = IndexSet::EMPTY;
            for c in frontier.iter() {
                next = next.union(self.neighbors[c]);
            }
            frontier = next.intersection(set).difference(seen);
            seen = seen.union(frontier);
        }
        seen == set
    }

    /// Proper nonempty subcurves `Y` with `Y` and `Y^c` both connected,
    /// ordered by size and then by member list.
    pub fn admissible_subcurves(&self) -> Vec<Subcurve> {
        let all = self.all();
        let mut out: Vec<Subcurve> = proper_subsets(all)
            .filter(|&y| self.is_connected(y) && self.is_connected(all.difference(y)))
            .map(|members| Subcurve { members })
            .collect();
        out.sort_by(|a, b| a.members.cmp_by_members(&b.members));
        out
    }
}

/// All nonempty proper subsets of `all`.
pub(crate) fn proper_subsets(all: IndexSet) -> impl Iterator<Item = IndexSet> {
    let members = all.to_vec();
    let n = members.len();
    (1u64..(1u64 << n).saturating_sub(1)).map(move |mask| {
        members
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &c)| c)
            .collect()
    })
}

/// A nonempty proper subcurve, given by its components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subcurve {
    members: IndexSet,
}

impl Subcurve {
    pub fn new(g: &DualGraph, members: IndexSet) -> Result<Self, CurveError> {
        if members.is_empty() || members == g.all() || !members.is_subset(g.all()) {
            return Err(CurveError::ImproperSubcurve(members));
        }
        Ok(Subcurve { members })
    }

    pub fn members(&self) -> IndexSet {
        self.members
    }

    pub fn contains(&self, component: usize) -> bool {
        self.members.contains(component)
    }

    pub fn complement(&self, g: &DualGraph) -> Subcurve {
        Subcurve {
            members: self.members.complement(g.components()),
        }
    }

    pub fn k(&self, g: &DualGraph) -> usize {
        g.boundary_size(self.members)
    }
}

impl fmt::Display for Subcurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.members)
    }
}

/// Rational weights `e_1, ..., e_p` summing to an integer degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polarization<S> {
    weights: Vec<S>,
    degree: i64,
}

impl<S: ExactScalar> Polarization<S> {
    pub fn new(weights: Vec<S>) -> Result<Self, CurveError> {
        let total = weights.iter().cloned().fold(S::zero(), |a, b| a + b);
        if !total.is_integral() {
            return Err(CurveError::NonIntegralPolarization(total.to_string()));
        }
        Ok(Polarization {
            degree: total.floor_int(),
            weights,
        })
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// Weight of component `i` (1-based).
    pub fn weight(&self, i: usize) -> &S {
        &self.weights[i - 1]
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `e_Y`.
    pub fn on(&self, y: IndexSet) -> S {
        y.iter()
            .map(|i| self.weights[i - 1].clone())
            .fold(S::zero(), |a, b| a + b)
    }

    fn max_abs_ceil(&self) -> i64 {
        self.weights
            .iter()
            .map(|w| w.abs().ceil_int())
            .max()
            .unwrap_or(0)
    }
}

/// Integer degrees per component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Multidegree {
    degs: Vec<i64>,
}

impl Multidegree {
    pub fn new(degs: Vec<i64>) -> Self {
        Multidegree { degs }
    }

    pub fn degs(&self) -> &[i64] {
        &self.degs
    }

    pub fn total(&self) -> i64 {
        self.degs.iter().sum()
    }

    /// Degree of component `i` (1-based).
    pub fn deg(&self, i: usize) -> i64 {
        self.degs[i - 1]
    }

    /// `deg(I_Y)`.
    pub fn on(&self, y: IndexSet) -> i64 {
        y.iter().map(|i| self.degs[i - 1]).sum()
    }

    pub fn len(&self) -> usize {
        self.degs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degs.is_empty()
    }
}

impl fmt::Display for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, d) in self.degs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Integer coefficients `l_i` of a twister `sum l_i C_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwistVector {
    coeffs: Vec<i64>,
}

impl TwistVector {
    pub fn new(coeffs: Vec<i64>) -> Self {
        TwistVector { coeffs }
    }

    pub fn zero(p: usize) -> Self {
        TwistVector { coeffs: vec![0; p] }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Coefficient of component `i` (1-based).
    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs[i - 1]
    }

    /// Representative with minimum coefficient 0. Twists that differ by a
    /// constant vector act identically.
    pub fn canonical(&self) -> TwistVector {
        let m = self.coeffs.iter().copied().min().unwrap_or(0);
        TwistVector {
            coeffs: self.coeffs.iter().map(|c| c - m).collect(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.coeffs.iter().copied().min().unwrap_or(0) == 0
    }
}

impl fmt::Display for TwistVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Multidegree::new(self.coeffs.clone()))
    }
}

/// Outcome of a quasistability test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stability {
    Quasistable,
    Unstable { witness: Subcurve },
}

impl Stability {
    pub fn is_quasistable(&self) -> bool {
        matches!(self, Stability::Quasistable)
    }

    pub fn witness(&self) -> Option<Subcurve> {
        match self {
            Stability::Quasistable => None,
            Stability::Unstable { witness } => Some(*witness),
        }
    }
}

fn check_lengths<S>(
    g: &DualGraph,
    pol: &Polarization<S>,
    md: &Multidegree,
) -> Result<(), CurveError> {
    let p = g.components();
    if pol.weights.len() != p {
        return Err(CurveError::LengthMismatch {
            what: "polarization",
            expected: p,
            got: pol.weights.len(),
        });
    }
    if md.len() != p {
        return Err(CurveError::LengthMismatch {
            what: "multidegree",
            expected: p,
            got: md.len(),
        });
    }
    Ok(())
}

/// The two-sided inequality for a single subcurve `y`:
/// `-k/2 < deg_Y - e_Y <= k/2` if the marked component lies in `y`,
/// `-k/2 <= deg_Y - e_Y < k/2` otherwise.
pub fn quasistable_over<S: ExactScalar>(
    g: &DualGraph,
    pol: &Polarization<S>,
    md: &Multidegree,
    y: IndexSet,
) -> bool {
    let k = g.boundary_size(y) as i64;
    let excess = S::from_int(md.on(y)) - pol.on(y);
    within_bounds(&excess, k, y.contains(g.marked()))
}

/// `-k/2 < x <= k/2` when `marked_inside`, else `-k/2 <= x < k/2`.
pub fn within_bounds<S: ExactScalar>(x: &S, k: i64, marked_inside: bool) -> bool {
    let half = S::half_of(k);
    let low = -half.clone();
    if marked_inside {
        *x > low && *x <= half
    } else {
        *x >= low && *x < half
    }
}

fn first_violation<S: ExactScalar>(
    g: &DualGraph,
    pol: &Polarization<S>,
    md: &Multidegree,
    subcurves: &[Subcurve],
) -> Stability {
    subcurves
        .iter()
        .find(|y| !quasistable_over(g, pol, md, y.members))
        .map_or(Stability::Quasistable, |&witness| Stability::Unstable {
            witness,
        })
}

/// P-quasistability of `md` against `pol`, checked on the admissible
/// subcurves; the witness is the first violating one in their order.
pub fn is_quasistable<S: ExactScalar>(
    g: &DualGraph,
    pol: &Polarization<S>,
    md: &Multidegree,
) -> Result<Stability, CurveError> {
    check_lengths(g, pol, md)?;
    if md.total() != pol.degree() {
        return Err(CurveError::DegreeMismatch {
            md: md.total(),
            pol: pol.degree(),
        });
    }
    Ok(first_violation(g, pol, md, &g.admissible_subcurves()))
}

/// Multidegree of `md` twisted by `-sum z_r C_r`:
/// `deg_i - sum_r z_r (C_r . C_i)`.
pub fn twist_action(g: &DualGraph, md: &Multidegree, z: &TwistVector) -> Multidegree {
    assert_eq!(md.len(), g.components());
    assert_eq!(z.coeffs.len(), g.components());
    let mut degs = md.degs.clone();
    for &(r, s) in &g.nodes {
        let (zr, zs) = (z.coeffs[r - 1], z.coeffs[s - 1]);
        degs[r - 1] -= zs - zr;
        degs[s - 1] -= zr - zs;
    }
    Multidegree { degs }
}

/// Default coefficient bound for [`quasistable_twist_search`]:
/// `2 (max |e_i| + max |deg_i|) + p`.
pub fn default_search_bound<S: ExactScalar>(pol: &Polarization<S>, md: &Multidegree) -> i64 {
    let max_deg = md.degs.iter().map(|d| d.abs()).max().unwrap_or(0);
    2 * (pol.max_abs_ceil() + max_deg) + md.len() as i64
}

/// Breadth-first search over canonical twist vectors (minimum coefficient 0,
/// maximum `bound`) for one whose action makes `md` quasistable.
pub fn quasistable_twist_search<S: ExactScalar>(
    g: &DualGraph,
    pol: &Polarization<S>,
    md: &Multidegree,
    bound: Option<i64>,
) -> Result<TwistVector, CurveError> {
    is_quasistable(g, pol, md)?;
    let bound = bound.unwrap_or_else(|| default_search_bound(pol, md));
    let subcurves = g.admissible_subcurves();
    let p = g.components();

    let start = TwistVector::zero(p);
    let mut seen: HashSet<TwistVector> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(z) = queue.pop_front() {
        let twisted = twist_action(g, md, &z);
        if first_violation(g, pol, &twisted, &subcurves).is_quasistable() {
            return Ok(z);
        }
        for i in 0..p {
            for step in [1, -1] {
                let mut next = z.coeffs.clone();
                next[i] += step;
                let next = TwistVector { coeffs: next }.canonical();
                if next.coeffs.iter().all(|&c| c <= bound) && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    Err(CurveError::SearchExhausted { bound })
}

/// Every canonical twist with coefficients in `0..=bound` that makes `md`
/// quasistable, in lexicographic order. Exhaustive; meant for small inputs.
pub fn quasistable_twists_within<S: ExactScalar>(
    g: &DualGraph,
    pol: &Polarization<S>,
    md: &Multidegree,
    bound: i64,
) -> Result<Vec<TwistVector>, CurveError> {
    is_quasistable(g, pol, md)?;
    let subcurves = g.admissible_subcurves();
    let p = g.components();
    let mut out = Vec::new();
    let mut coeffs = vec![0i64; p];
    loop {
        let z = TwistVector {
            coeffs: coeffs.clone(),
        };
        if z.is_canonical()
            && first_violation(g, pol, &twist_action(g, md, &z), &subcurves).is_quasistable()
        {
            out.push(z);
        }
        // odometer
        let mut i = p;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if coeffs[i] < bound {
                coeffs[i] += 1;
                break;
            }
            coeffs[i] = 0;
        }
    }
}
