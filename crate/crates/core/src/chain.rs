//! The curve `C(d)`: every node of a base curve replaced by a chain of `d`
//! exceptional rational components, with integer degrees on all components.
//!
//! Exceptional components over node `n` (0-based) are `E_1, ..., E_d`, ordered
//! from the first listed endpoint of the node toward the second. In the
//! expanded dual graph they are numbered `p + n * d + k` for `k = 1..=d`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{
    quasistable_over, CurveError, DualGraph, Multidegree, Polarization,
    Stability, Subcurve,
};
use crate::index_set::{IndexSet, MAX_INDEX};
use crate::scalar::ExactScalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("expected {expected} base degrees, got {got}")]
    BaseDegreeCount { expected: usize, got: usize },
    #[error("expected one chain per node ({expected}), got {got}")]
    ChainCount { expected: usize, got: usize },
    #[error("chain over node {node} has length {got}, expected {expected}")]
    ChainLength {
        node: usize,
        expected: usize,
        got: usize,
    },
    #[error("C(d) would have {0} components, more than the supported {MAX_INDEX}")]
    TooManyComponents(usize),
    #[error("configuration is not admissible: chain over node {node} has a subchain {subchain} of degree {degree}")]
    NotAdmissible {
        node: usize,
        subchain: Subchain,
        degree: i64,
    },
    #[error("chain over node {node} has incomparable maximal degree-1 subchains {first} and {second}")]
    AmbiguousMaximalSubchain {
        node: usize,
        first: Subchain,
        second: Subchain,
    },
    #[error("chain over node {node}: step subchain {next} is not strictly inside {previous}")]
    NestingViolated {
        node: usize,
        previous: Subchain,
        next: Subchain,
    },
    #[error("configuration lives on a different base curve or chain length")]
    ShapeMismatch,
}

/// Positions `start..=end` (1-based) of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subchain {
    pub start: usize,
    pub end: usize,
}

impl Subchain {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.start..=self.end).contains(&k)
    }

    pub fn strictly_inside(&self, outer: &Subchain) -> bool {
        outer.start <= self.start && self.end <= outer.end && self.len() < outer.len()
    }

    fn degree(&self, chain: &[i64]) -> i64 {
        chain[self.start - 1..self.end].iter().sum()
    }
}

impl fmt::Display for Subchain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}..E{}", self.start, self.end)
    }
}

fn subchains(d: usize) -> impl Iterator<Item = Subchain> {
    (1..=d).flat_map(move |start| (start..=d).map(move |end| Subchain { start, end }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMarkedCurve {
    base: DualGraph,
    chain_len: usize,
    base_degs: Vec<i64>,
    chain_degs: Vec<Vec<i64>>,
}

impl ChainMarkedCurve {
    pub fn new(
        base: DualGraph,
        chain_len: usize,
        base_degs: Vec<i64>,
        chain_degs: Vec<Vec<i64>>,
    ) -> Result<Self, ChainError> {
        if base_degs.len() != base.components() {
            return Err(ChainError::BaseDegreeCount {
                expected: base.components(),
                got: base_degs.len(),
            });
        }
        if chain_degs.len() != base.node_count() {
            return Err(ChainError::ChainCount {
                expected: base.node_count(),
                got: chain_degs.len(),
            });
        }
        if let Some((node, c)) = chain_degs
            .iter()
            .enumerate()
            .find(|(_, c)| c.len() != chain_len)
        {
            return Err(ChainError::ChainLength {
                node,
                expected: chain_len,
                got: c.len(),
            });
        }
        Ok(ChainMarkedCurve {
            base,
            chain_len,
            base_degs,
            chain_degs,
        })
    }

    /// All exceptional degrees zero.
    pub fn flat(base: DualGraph, chain_len: usize, base_degs: Vec<i64>) -> Result<Self, ChainError> {
        let chains = vec![vec![0; chain_len]; base.node_count()];
        Self::new(base, chain_len, base_degs, chains)
    }

    pub fn base(&self) -> &DualGraph {
        &self.base
    }

    pub fn chain_len(&self) -> usize {
        self.chain_len
    }

    pub fn base_degs(&self) -> &[i64] {
        &self.base_degs
    }

    pub fn chain_degs(&self) -> &[Vec<i64>] {
        &self.chain_degs
    }

    pub fn total_degree(&self) -> i64 {
        self.base_degs.iter().sum::<i64>() + self.chain_degs.iter().flatten().sum::<i64>()
    }

    pub fn expanded_components(&self) -> usize {
        self.base.components() + self.base.node_count() * self.chain_len
    }

    /// Component number of `E_k` over `node` in the expanded graph.
    pub fn exceptional_index(&self, node: usize, k: usize) -> usize {
        debug_assert!((1..=self.chain_len).contains(&k));
        self.base.components() + node * self.chain_len + k
    }

    /// Dual graph of `C(d)`; the marked point stays on its base component.
    pub fn expanded_graph(&self) -> Result<DualGraph, ChainError> {
        let n = self.expanded_components();
        if n > MAX_INDEX {
            return Err(ChainError::TooManyComponents(n));
        }
        let d = self.chain_len;
        let mut nodes = Vec::new();
        for (idx, &(r, s)) in self.base.nodes().iter().enumerate() {
            if d == 0 {
                nodes.push((r, s));
                continue;
            }
            nodes.push((r, self.exceptional_index(idx, 1)));
            for k in 1..d {
                nodes.push((self.exceptional_index(idx, k), self.exceptional_index(idx, k + 1)));
            }
            nodes.push((self.exceptional_index(idx, d), s));
        }
        Ok(DualGraph::new(n, nodes, self.base.marked())?)
    }

    /// Multidegree on `C(d)` in expanded numbering.
    pub fn expanded_multidegree(&self) -> Multidegree {
        let mut degs = self.base_degs.clone();
        for c in &self.chain_degs {
            degs.extend_from_slice(c);
        }
        Multidegree::new(degs)
    }

    /// Components of `C(d)` lying over the base (not contracted).
    pub fn base_set(&self) -> IndexSet {
        IndexSet::full(self.base.components())
    }
}

/// `e(d)`: base weights on base components, zero on exceptional ones.
pub fn induced_polarization<S: ExactScalar>(
    pol: &Polarization<S>,
    node_count: usize,
    chain_len: usize,
) -> Polarization<S> {
    let mut weights = pol.weights().to_vec();
    weights.extend(std::iter::repeat(S::zero()).take(node_count * chain_len));
    Polarization::new(weights).expect("adding zero weights keeps the degree integral")
}

fn first_inadmissible(c: &ChainMarkedCurve) -> Option<(usize, Subchain, i64)> {
    c.chain_degs.iter().enumerate().find_map(|(node, chain)| {
        subchains(chain.len()).find_map(|w| {
            let deg = w.degree(chain);
            (!(-1..=1).contains(&deg)).then_some((node, w, deg))
        })
    })
}

/// Degree in `{-1, 0, 1}` on every connected subchain of every chain.
pub fn is_admissible(c: &ChainMarkedCurve) -> bool {
    first_inadmissible(c).is_none()
}

/// The inclusion-maximal connected subchain of degree exactly 1, if any.
pub fn maximal_degree_one_subchain(chain: &[i64]) -> Result<Option<Subchain>, (Subchain, Subchain)> {
    let candidates: Vec<Subchain> = subchains(chain.len())
        .filter(|w| w.degree(chain) == 1)
        .collect();
    let maximal: Vec<Subchain> = candidates
        .iter()
        .filter(|w| {
            !candidates
                .iter()
                .any(|o| o != *w && o.start <= w.start && w.end <= o.end)
        })
        .copied()
        .collect();
    match maximal.as_slice() {
        [] => Ok(None),
        [w] => Ok(Some(*w)),
        [a, b, ..] => Err((*a, *b)),
    }
}

/// Multiplicity of each `E_k` in the accumulated twister `Z = sum Z_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwisterZ {
    multiplicities: Vec<Vec<u32>>,
}

impl TwisterZ {
    pub fn multiplicities(&self) -> &[Vec<u32>] {
        &self.multiplicities
    }

    pub fn is_zero(&self) -> bool {
        self.multiplicities.iter().flatten().all(|&m| m == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semistabilization {
    pub twister: TwisterZ,
    pub result: ChainMarkedCurve,
    /// `steps[i][node]`: the subchain `W_{E,i+1}` twisted at step `i + 1`.
    pub steps: Vec<Vec<Option<Subchain>>>,
}

impl Semistabilization {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// Twists by `O(W)` on one chain: components of `W` change by (neighbors in
/// `W`) - 2, chain neighbors just outside `W` gain 1, and a base endpoint
/// adjacent to `W` gains 1.
fn twist_chain(chain: &mut [i64], w: Subchain) -> (i64, i64) {
    let d = chain.len();
    for k in w.start..=w.end {
        let inner = usize::from(k > w.start) + usize::from(k < w.end);
        chain[k - 1] += inner as i64 - 2;
    }
    if w.start > 1 {
        chain[w.start - 2] += 1;
    }
    if w.end < d {
        chain[w.end] += 1;
    }
    (i64::from(w.start == 1), i64::from(w.end == d))
}

/// Repeatedly twists each chain by its maximal degree-1 subchain until none
/// is left, accumulating the twister.
pub fn semistabilize(c: &ChainMarkedCurve) -> Result<Semistabilization, ChainError> {
    if let Some((node, subchain, degree)) = first_inadmissible(c) {
        return Err(ChainError::NotAdmissible {
            node,
            subchain,
            degree,
        });
    }
    let mut cur = c.clone();
    let mut multiplicities = vec![vec![0u32; c.chain_len]; c.chain_degs.len()];
    let mut steps: Vec<Vec<Option<Subchain>>> = Vec::new();
    let mut previous: Vec<Option<Subchain>> = vec![None; c.chain_degs.len()];

    loop {
        let mut step = Vec::with_capacity(cur.chain_degs.len());
        for (node, chain) in cur.chain_degs.iter().enumerate() {
            let w = maximal_degree_one_subchain(chain).map_err(|(first, second)| {
                ChainError::AmbiguousMaximalSubchain {
                    node,
                    first,
                    second,
                }
            })?;
            if let (Some(next), Some(prev)) = (w, previous[node]) {
                if !next.strictly_inside(&prev) {
                    return Err(ChainError::NestingViolated {
                        node,
                        previous: prev,
                        next,
                    });
                }
            }
            if w.is_some() && !steps.is_empty() && previous[node].is_none() {
                // a chain that went quiet cannot wake up again
                return Err(ChainError::NestingViolated {
                    node,
                    previous: Subchain { start: 1, end: 0 },
                    next: w.unwrap(),
                });
            }
            step.push(w);
        }
        if step.iter().all(Option::is_none) {
            break;
        }
        for (node, w) in step.iter().enumerate() {
            let Some(w) = *w else { continue };
            let (r, s) = cur.base.nodes()[node];
            let (to_r, to_s) = twist_chain(&mut cur.chain_degs[node], w);
            cur.base_degs[r - 1] += to_r;
            cur.base_degs[s - 1] += to_s;
            for k in w.start..=w.end {
                multiplicities[node][k - 1] += 1;
            }
        }
        previous = step.clone();
        steps.push(step);
    }

    Ok(Semistabilization {
        twister: TwisterZ { multiplicities },
        result: cur,
        steps,
    })
}

/// Result of checking the hypotheses of the pushforward criterion, plus the
/// conclusion obtained by actually semistabilizing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushforwardCheck {
    pub admissible: bool,
    /// First non-contracted subcurve of `C(d)` (connected, with connected
    /// non-contracted complement) where quasistability fails.
    pub violation: Option<Subcurve>,
    /// Quasistability of the semistabilized configuration on `C(d)`, present
    /// when the hypotheses hold.
    pub conclusion: Option<Stability>,
}

impl PushforwardCheck {
    pub fn hypotheses_hold(&self) -> bool {
        self.admissible && self.violation.is_none()
    }

    /// Hypotheses hold and the semistabilized bundle is quasistable.
    pub fn holds(&self) -> bool {
        self.hypotheses_hold()
            && self
                .conclusion
                .as_ref()
                .is_some_and(Stability::is_quasistable)
    }
}

/// Subcurve data of `C(d)` for one base curve and chain length, shared by
/// every configuration on it.
#[derive(Debug, Clone)]
pub struct PushforwardChecker {
    base: DualGraph,
    chain_len: usize,
    graph: DualGraph,
    subcurves: Vec<Subcurve>,
    /// Indices into `subcurves` of those meeting the base on both sides.
    non_contracted: Vec<usize>,
}

impl PushforwardChecker {
    pub fn new(base: &DualGraph, chain_len: usize) -> Result<Self, ChainError> {
        let c = ChainMarkedCurve::flat(base.clone(), chain_len, vec![0; base.components()])?;
        let graph = c.expanded_graph()?;
        let subcurves = graph.admissible_subcurves();
        let (base_set, all) = (c.base_set(), graph.all());
        let non_contracted = subcurves
            .iter()
            .enumerate()
            .filter(|(_, y)| {
                let y = y.members();
                !y.intersection(base_set).is_empty()
                    && !all.difference(y).intersection(base_set).is_empty()
            })
            .map(|(i, _)| i)
            .collect();
        Ok(PushforwardChecker {
            base: base.clone(),
            chain_len,
            graph,
            subcurves,
            non_contracted,
        })
    }

    fn first_violation<'a, S: ExactScalar>(
        &self,
        mut ys: impl Iterator<Item = &'a Subcurve>,
        pol: &Polarization<S>,
        md: &Multidegree,
    ) -> Option<Subcurve> {
        ys.find(|y| !quasistable_over(&self.graph, pol, md, y.members()))
            .copied()
    }

    /// See [`pushforward_quasistable`]; `c` must live on the same base curve
    /// and chain length.
    pub fn check<S: ExactScalar>(
        &self,
        c: &ChainMarkedCurve,
        pol: &Polarization<S>,
    ) -> Result<PushforwardCheck, ChainError> {
        if c.base != self.base || c.chain_len != self.chain_len {
            return Err(ChainError::ShapeMismatch);
        }
        if pol.len() != c.base.components() {
            return Err(CurveError::LengthMismatch {
                what: "polarization",
                expected: c.base.components(),
                got: pol.len(),
            }
            .into());
        }
        let epol = induced_polarization(pol, c.base.node_count(), c.chain_len);
        let md = c.expanded_multidegree();
        if md.total() != epol.degree() {
            return Err(CurveError::DegreeMismatch {
                md: md.total(),
                pol: epol.degree(),
            }
            .into());
        }
        let violation = self.first_violation(
            self.non_contracted.iter().map(|&i| &self.subcurves[i]),
            &epol,
            &md,
        );
        let admissible = is_admissible(c);
        let conclusion = if admissible && violation.is_none() {
            let semi = semistabilize(c)?;
            let md = semi.result.expanded_multidegree();
            Some(
                self.first_violation(self.subcurves.iter(), &epol, &md)
                    .map_or(Stability::Quasistable, |witness| Stability::Unstable { witness }),
            )
        } else {
            None
        };
        Ok(PushforwardCheck {
            admissible,
            violation,
            conclusion,
        })
    }
}

/// Checks whether `c` is admissible and quasistable (against `e(d)`) over
/// every connected non-contracted subcurve of `C(d)` whose complement is also
/// connected and non-contracted. When it is, the semistabilized configuration
/// is tested for quasistability on all of `C(d)`.
pub fn pushforward_quasistable<S: ExactScalar>(
    c: &ChainMarkedCurve,
    pol: &Polarization<S>,
) -> Result<PushforwardCheck, ChainError> {
    PushforwardChecker::new(&c.base, c.chain_len)?.check(c, pol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::is_quasistable;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn single(d: usize, base: [i64; 2], chain: &[i64]) -> ChainMarkedCurve {
        ChainMarkedCurve::new(
            DualGraph::two_components(1),
            d,
            base.to_vec(),
            vec![chain.to_vec()],
        )
        .unwrap()
    }

    fn pol(ws: &[(i64, i64)]) -> Polarization<Q> {
        Polarization::new(ws.iter().map(|&(n, d)| Q::from_fraction(n, d)).collect()).unwrap()
    }

    #[test]
    fn induced_polarization_examples() {
        let p = pol(&[(1, 2), (1, 2)]);
        assert_eq!(induced_polarization(&p, 1, 0), p);
        let e = induced_polarization(&p, 1, 2);
        assert_eq!(
            e.weights(),
            &[Q::from_fraction(1, 2), Q::from_fraction(1, 2), Q::from_int(0), Q::from_int(0)]
        );
        let p = pol(&[(0, 1), (1, 1)]);
        let e = induced_polarization(&p, 2, 1);
        assert_eq!(e.weights().len(), 4);
        assert_eq!(e.degree(), 1);
        assert_eq!(e.weight(3), &Q::from_int(0));
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(&single(3, [0, 0], &[0, 0, 0])));
        assert!(!is_admissible(&single(2, [0, 0], &[1, 1])));
        assert!(is_admissible(&single(3, [0, 0], &[1, -1, 1])));
        assert!(!is_admissible(&single(3, [0, 0], &[1, 0, 1])));
        assert!(!is_admissible(&single(1, [0, 0], &[-2])));
    }

    #[test]
    fn shape_validation() {
        let g = DualGraph::two_components(2);
        assert!(matches!(
            ChainMarkedCurve::new(g.clone(), 2, vec![0, 0], vec![vec![0, 0]]),
            Err(ChainError::ChainCount { .. })
        ));
        assert!(matches!(
            ChainMarkedCurve::new(g.clone(), 2, vec![0, 0], vec![vec![0, 0], vec![0]]),
            Err(ChainError::ChainLength { node: 1, .. })
        ));
        assert!(matches!(
            ChainMarkedCurve::new(g, 2, vec![0], vec![vec![0, 0], vec![0, 0]]),
            Err(ChainError::BaseDegreeCount { .. })
        ));
    }

    #[test]
    fn expanded_graph_is_a_path_for_one_node() {
        let c = single(2, [0, 0], &[0, 0]);
        let g = c.expanded_graph().unwrap();
        assert_eq!(g.components(), 4);
        assert_eq!(g.nodes(), &[(1, 3), (3, 4), (4, 2)]);
        assert_eq!(g.marked(), 1);
    }

    #[test]
    fn maximal_subchain_cases() {
        assert_eq!(maximal_degree_one_subchain(&[0, 0, 0]).unwrap(), None);
        assert_eq!(
            maximal_degree_one_subchain(&[0, 1, 0]).unwrap(),
            Some(Subchain { start: 1, end: 3 })
        );
        assert_eq!(
            maximal_degree_one_subchain(&[-1, 0, 1, 0]).unwrap(),
            Some(Subchain { start: 2, end: 4 })
        );
        // not admissible, two disjoint maximal pieces
        assert!(maximal_degree_one_subchain(&[1, -2, 1]).is_err());
    }

    #[test]
    fn semistabilize_identity_case() {
        let c = single(3, [2, -1], &[0, 0, 0]);
        let s = semistabilize(&c).unwrap();
        assert!(s.twister.is_zero());
        assert_eq!(s.result, c);
        assert_eq!(s.iterations(), 0);
    }

    #[test]
    fn semistabilize_middle_unit() {
        let c = single(3, [4, -3], &[0, 1, 0]);
        let s = semistabilize(&c).unwrap();
        assert_eq!(
            s.steps,
            vec![
                vec![Some(Subchain { start: 1, end: 3 })],
                vec![Some(Subchain { start: 2, end: 2 })],
            ]
        );
        assert_eq!(s.result.chain_degs(), &[vec![0, -1, 0]]);
        assert_eq!(s.result.base_degs(), &[5, -2]);
        assert_eq!(s.twister.multiplicities(), &[vec![1, 2, 1]]);
        assert_eq!(s.result.total_degree(), c.total_degree());
    }

    #[test]
    fn semistabilize_single_component_chain() {
        let c = single(1, [0, 0], &[1]);
        let s = semistabilize(&c).unwrap();
        assert_eq!(s.result.chain_degs(), &[vec![-1]]);
        assert_eq!(s.result.base_degs(), &[1, 1]);
        assert_eq!(s.twister.multiplicities(), &[vec![1]]);
    }

    #[test]
    fn semistabilize_rejects_inadmissible() {
        let c = single(2, [0, 0], &[1, 1]);
        assert!(matches!(
            semistabilize(&c),
            Err(ChainError::NotAdmissible { node: 0, .. })
        ));
    }

    #[test]
    fn pushforward_examples() {
        let zero = pol(&[(0, 1), (0, 1)]);
        let c = single(1, [0, 0], &[0]);
        let check = pushforward_quasistable(&c, &zero).unwrap();
        assert!(check.holds());

        let c = single(1, [2, -2], &[0]);
        let check = pushforward_quasistable(&c, &zero).unwrap();
        assert!(!check.hypotheses_hold());
        assert_eq!(check.violation.unwrap().members().to_vec(), vec![1]);

        // d = 0 is the base curve itself
        let c = ChainMarkedCurve::new(DualGraph::two_components(2), 0, vec![1, -1], vec![vec![], vec![]])
            .unwrap();
        let check = pushforward_quasistable(&c, &zero).unwrap();
        let base = is_quasistable(c.base(), &zero, &Multidegree::new(vec![1, -1])).unwrap();
        assert_eq!(check.hypotheses_hold(), base.is_quasistable());
    }
}
