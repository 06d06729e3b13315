//! Numerical conditions for extending the degree-`d` Abel map over a
//! boundary point, for local data given either by explicit sections through
//! nodes (any number of components) or by a special point of a two-component
//! curve.
//!
//! Failure of the conditions means the sufficient conditions are not met; it
//! never certifies that no extension exists.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blowup::{a_order, BlowupError, SubsetCollection};
use crate::curve::{
    quasistable_twist_search, within_bounds, CurveError, DualGraph, Multidegree, Polarization,
    TwistVector,
};
use crate::index_set::{IndexSet, MAX_INDEX};
use crate::scalar::ExactScalar;
use crate::special::{
    a_vector, b_from_total, enumerate_with, ell_order, AVector, SpecialError, SpecialPointData,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error("blowup schedule gives a non-smooth collection at {point} for node {node}: {source}")]
    InvalidOrder {
        point: String,
        node: usize,
        source: BlowupError,
    },
    #[error("d must be at least 1")]
    ZeroDegree,
    #[error("q must be at least 1")]
    ZeroNodes,
    #[error("{0} points per chain exceed the supported {MAX_INDEX}")]
    TooManyPoints(usize),
    #[error("section #{index} refers to node {node}, but the curve has {nodes} nodes")]
    SectionNode {
        index: usize,
        node: usize,
        nodes: usize,
    },
    #[error("section #{index} has branch set {set} outside 1..={n}")]
    SectionBranches { index: usize, set: IndexSet, n: usize },
    #[error("m = {m} but {sections} sections were given")]
    SectionCount { m: i64, sections: usize },
    #[error("special point uses node {node} but q = {q}")]
    NodeBeyondQ { node: usize, q: usize },
    #[error("expected {expected} entries for {what}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("multidegree has total {md}, polarization has degree {pol}")]
    DegreeMismatch { md: i64, pol: i64 },
}

/// A section through node `node` (0-based) meeting the first listed endpoint
/// of that node over the generic point `Q_j` iff `j` is in `branches`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectionData {
    pub node: usize,
    pub branches: IndexSet,
}

impl SectionData {
    /// Component containing the section over `Q_j`.
    pub fn component_at(&self, g: &DualGraph, j: usize) -> usize {
        let (r, s) = g.nodes()[self.node];
        if self.branches.contains(j) {
            r
        } else {
            s
        }
    }
}

/// The `d` sections of a two-component special point: section `k` passes
/// through node `l_k` and lies on `C_1` over `Q_j` iff `u_j(k) = 1`.
pub fn sections_of_special_point(r: &SpecialPointData) -> Vec<SectionData> {
    (1..=r.d())
        .map(|k| SectionData {
            node: r.ells()[k - 1] - 1,
            branches: r
                .labels()
                .iter()
                .enumerate()
                .filter(|(_, u)| u.at(k) == 1)
                .map(|(j, _)| j + 1)
                .collect(),
        })
        .collect()
}

/// `a^N_j(Y)`: sections through `node` whose component over `Q_j` lies
/// outside `y`. Independent of `j` when `node` is not on the boundary of `y`.
pub fn compute_a_general(
    g: &DualGraph,
    sections: &[SectionData],
    y: IndexSet,
    j: usize,
    node: usize,
) -> i64 {
    sections
        .iter()
        .filter(|s| s.node == node && !y.contains(s.component_at(g, j)))
        .count() as i64
}

/// Quasistable twists per fiber multidegree, for one curve and polarization.
#[derive(Debug)]
pub struct TwistOracle<'a, S> {
    g: &'a DualGraph,
    pol: &'a Polarization<S>,
    bound: Option<i64>,
    cache: HashMap<Multidegree, TwistVector>,
}

impl<'a, S: ExactScalar> TwistOracle<'a, S> {
    pub fn new(g: &'a DualGraph, pol: &'a Polarization<S>) -> Self {
        TwistOracle {
            g,
            pol,
            bound: None,
            cache: HashMap::new(),
        }
    }

    pub fn with_bound(mut self, bound: i64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn twist(&mut self, md: &Multidegree) -> Result<&TwistVector, CurveError> {
        if !self.cache.contains_key(md) {
            let z = quasistable_twist_search(self.g, self.pol, md, self.bound)?;
            self.cache.insert(md.clone(), z);
        }
        Ok(&self.cache[md])
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }
}

/// Local datum: line bundle multidegree `l_md`, `m` copies of the marked
/// section, and sections through nodes over `S` with `n_points = d + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalProblem<S> {
    g: DualGraph,
    pol: Polarization<S>,
    l_md: Multidegree,
    m: i64,
    sections: Vec<SectionData>,
    n_points: usize,
}

impl<S: ExactScalar> LocalProblem<S> {
    pub fn new(
        g: DualGraph,
        pol: Polarization<S>,
        l_md: Multidegree,
        m: i64,
        sections: Vec<SectionData>,
        n_points: usize,
    ) -> Result<Self, ExtensionError> {
        if n_points < 2 {
            return Err(ExtensionError::ZeroDegree);
        }
        if n_points > MAX_INDEX {
            return Err(ExtensionError::TooManyPoints(n_points));
        }
        for (what, got) in [("polarization", pol.len()), ("multidegree", l_md.len())] {
            if got != g.components() {
                return Err(ExtensionError::Length {
                    what,
                    expected: g.components(),
                    got,
                });
            }
        }
        if l_md.total() != pol.degree() {
            return Err(ExtensionError::DegreeMismatch {
                md: l_md.total(),
                pol: pol.degree(),
            });
        }
        if m != sections.len() as i64 {
            return Err(ExtensionError::SectionCount {
                m,
                sections: sections.len(),
            });
        }
        let full = IndexSet::full(n_points);
        for (index, s) in sections.iter().enumerate() {
            if s.node >= g.node_count() {
                return Err(ExtensionError::SectionNode {
                    index,
                    node: s.node,
                    nodes: g.node_count(),
                });
            }
            if !s.branches.is_subset(full) {
                return Err(ExtensionError::SectionBranches {
                    index,
                    set: s.branches,
                    n: n_points,
                });
            }
        }
        Ok(LocalProblem {
            g,
            pol,
            l_md,
            m,
            sections,
            n_points,
        })
    }

    /// Two components `C_1`, `C_2` meeting at `q` nodes, marked on `C_1`, with
    /// the sections of `r` and `m = d`.
    pub fn from_special_point(
        r: &SpecialPointData,
        q: usize,
        l: [i64; 2],
        pol: Polarization<S>,
    ) -> Result<Self, ExtensionError> {
        if let Some(&node) = r.ells().iter().find(|&&l| l > q) {
            return Err(ExtensionError::NodeBeyondQ { node, q });
        }
        Self::new(
            DualGraph::two_components(q),
            pol,
            Multidegree::new(l.to_vec()),
            r.d() as i64,
            sections_of_special_point(r),
            r.d() + 1,
        )
    }

    pub fn graph(&self) -> &DualGraph {
        &self.g
    }

    pub fn polarization(&self) -> &Polarization<S> {
        &self.pol
    }

    pub fn sections(&self) -> &[SectionData] {
        &self.sections
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn oracle(&self) -> TwistOracle<'_, S> {
        TwistOracle::new(&self.g, &self.pol)
    }

    /// Multidegree of `M_j` over `Q_j`: `L + m P` minus the sections there.
    pub fn fiber_multidegree(&self, j: usize) -> Multidegree {
        let mut degs = self.l_md.degs().to_vec();
        degs[self.g.marked() - 1] += self.m;
        for s in &self.sections {
            degs[s.component_at(&self.g, j) - 1] -= 1;
        }
        Multidegree::new(degs)
    }

    /// `b^N_j(Y)`: for a boundary node, the twist coefficient on its endpoint
    /// outside `y` minus the one on its endpoint inside; `0` otherwise.
    pub fn compute_b_general(
        &self,
        oracle: &mut TwistOracle<'_, S>,
        y: IndexSet,
        node: usize,
        j: usize,
    ) -> Result<i64, ExtensionError> {
        if !self.g.is_boundary_node(node, y) {
            return Ok(0);
        }
        let z = oracle.twist(&self.fiber_multidegree(j))?;
        Ok(boundary_b(&self.g, z, y, node))
    }

    pub fn compute_a(&self, y: IndexSet, j: usize, node: usize) -> i64 {
        compute_a_general(&self.g, &self.sections, y, j, node)
    }

    /// Condition tables for every admissible subcurve containing the marked
    /// component.
    pub fn tables(&self, oracle: &mut TwistOracle<'_, S>) -> Result<Vec<ConditionTable<S>>, ExtensionError> {
        let mut twists = Vec::with_capacity(self.n_points);
        for j in 1..=self.n_points {
            twists.push(oracle.twist(&self.fiber_multidegree(j))?.clone());
        }
        let marked = self.g.marked();
        Ok(self
            .g
            .admissible_subcurves()
            .into_iter()
            .filter(|y| y.contains(marked))
            .map(|y| {
                let y = y.members();
                let mut offset = S::from_int(self.l_md.on(y)) - self.pol.on(y);
                let mut rows = Vec::new();
                for node in 0..self.g.node_count() {
                    if self.g.is_boundary_node(node, y) {
                        let row = (1..=self.n_points)
                            .map(|j| {
                                self.compute_a(y, j, node) - boundary_b(&self.g, &twists[j - 1], y, node)
                            })
                            .collect();
                        rows.push(TableRow { node, values: row });
                    } else {
                        offset = offset + S::from_int(self.compute_a(y, 1, node));
                    }
                }
                ConditionTable {
                    y,
                    k: self.g.boundary_size(y),
                    offset,
                    rows,
                }
            })
            .collect())
    }
}

fn boundary_b(g: &DualGraph, z: &TwistVector, y: IndexSet, node: usize) -> i64 {
    let (r, s) = g.nodes()[node];
    if y.contains(r) {
        z.coeff(s) - z.coeff(r)
    } else {
        z.coeff(r) - z.coeff(s)
    }
}

/// `a - b` per boundary node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub node: usize,
    /// Entry `j - 1` is `a^N_j(Y) - b^N_j(Y)`.
    pub values: Vec<i64>,
}

impl TableRow {
    fn argmin(&self) -> usize {
        // first index attaining the minimum
        let m = *self.values.iter().min().unwrap();
        self.values.iter().position(|&v| v == m).unwrap()
    }

    fn argmax(&self) -> usize {
        let m = *self.values.iter().max().unwrap();
        self.values.iter().position(|&v| v == m).unwrap()
    }
}

/// The data the two conditions need for one subcurve `Y` containing the
/// marked component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionTable<S> {
    pub y: IndexSet,
    pub k: usize,
    /// `deg(L|Y) - e_Y` plus the `j`-independent terms of nodes off the
    /// boundary.
    pub offset: S,
    pub rows: Vec<TableRow>,
}

impl<S: ExactScalar> ConditionTable<S> {
    fn value(&self, choice: &[usize]) -> S {
        let sum: i64 = self
            .rows
            .iter()
            .zip(choice)
            .map(|(row, &j)| row.values[j])
            .sum();
        self.offset.clone() + S::from_int(sum)
    }

    fn admits(&self, choice: &[usize]) -> bool {
        within_bounds(&self.value(choice), self.k as i64, true)
    }

    fn width(&self) -> usize {
        self.rows.first().map_or(0, |r| r.values.len())
    }
}

/// Fast path for a two-component special point: `Y = C_1`, every node on the
/// boundary, `b` from the closed formula.
pub fn two_component_table<S: ExactScalar>(
    a: &[AVector],
    q: usize,
    l: [i64; 2],
    pol: &Polarization<S>,
) -> ConditionTable<S> {
    let e2 = pol.weight(2);
    let b: Vec<i64> = a
        .iter()
        .map(|v| b_from_total(i64::from(v.total), l[1], e2, q))
        .collect();
    let rows = (1..=q)
        .map(|ell| TableRow {
            node: ell - 1,
            values: a
                .iter()
                .zip(&b)
                .map(|(v, &b)| i64::from(v.at(ell)) - b)
                .collect(),
        })
        .collect();
    ConditionTable {
        y: IndexSet::singleton(1),
        k: q,
        offset: S::from_int(l[0]) - pol.weight(1).clone(),
        rows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    /// Every function from nodes to `{1, ..., d+1}`.
    Brute,
    /// Only the per-node minima and maxima.
    Separable,
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckMode::Brute => "brute",
            CheckMode::Separable => "separable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Condition1 {
        y: IndexSet,
        node: usize,
        j1: usize,
        j2: usize,
        difference: i64,
    },
    Condition2 {
        y: IndexSet,
        /// `(node, j)` pairs over the boundary of `y`; 1-based `j`.
        choice: Vec<(usize, usize)>,
        value: String,
        k: usize,
        bound: BoundSide,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Lower,
    Upper,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Condition1 {
                y,
                node,
                j1,
                j2,
                difference,
            } => write!(
                f,
                "Y={y} node {node}: (a-b) at j={j1} and j={j2} differ by {difference}"
            ),
            Witness::Condition2 {
                y,
                choice,
                value,
                k,
                bound,
            } => {
                write!(f, "Y={y} j=(")?;
                for (i, (node, j)) in choice.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{node}:{j}")?;
                }
                let side = match bound {
                    BoundSide::Lower => "at or below -k/2",
                    BoundSide::Upper => "above k/2",
                };
                write!(f, "): value {value} is {side}, k={k}")
            }
        }
    }
}

/// `|T[N][j1] - T[N][j2]| <= 1` for all boundary nodes; first violation.
pub fn check_condition1<S: ExactScalar>(tables: &[ConditionTable<S>]) -> Option<Witness> {
    tables.iter().find_map(|t| {
        t.rows.iter().find_map(|row| {
            let (lo, hi) = (row.argmin(), row.argmax());
            let difference = row.values[hi] - row.values[lo];
            (difference > 1).then(|| {
                let (j1, j2) = (lo.min(hi) + 1, lo.max(hi) + 1);
                Witness::Condition1 {
                    y: t.y,
                    node: row.node,
                    j1,
                    j2,
                    difference,
                }
            })
        })
    })
}

fn condition2_witness<S: ExactScalar>(t: &ConditionTable<S>, choice: &[usize]) -> Witness {
    let value = t.value(choice);
    let bound = if value > S::half_of(t.k as i64) {
        BoundSide::Upper
    } else {
        BoundSide::Lower
    };
    Witness::Condition2 {
        y: t.y,
        choice: t.rows.iter().zip(choice).map(|(r, &j)| (r.node, j + 1)).collect(),
        value: value.to_string(),
        k: t.k,
        bound,
    }
}

/// `-k_Y/2 < offset + sum_N T[N][j(N)] <= k_Y/2` for every choice `j`.
pub fn check_condition2<S: ExactScalar>(
    tables: &[ConditionTable<S>],
    mode: CheckMode,
) -> Option<Witness> {
    tables.iter().find_map(|t| match mode {
        CheckMode::Separable => {
            let low: Vec<usize> = t.rows.iter().map(TableRow::argmin).collect();
            let high: Vec<usize> = t.rows.iter().map(TableRow::argmax).collect();
            [high, low]
                .into_iter()
                .find(|c| !t.admits(c))
                .map(|c| condition2_witness(t, &c))
        }
        CheckMode::Brute => {
            let n = t.rows.len();
            let w = t.width();
            let mut choice = vec![0usize; n];
            loop {
                if !t.admits(&choice) {
                    return Some(condition2_witness(t, &choice));
                }
                let mut i = n;
                loop {
                    if i == 0 {
                        return None;
                    }
                    i -= 1;
                    if choice[i] + 1 < w {
                        choice[i] += 1;
                        break;
                    }
                    choice[i] = 0;
                }
            }
        }
    })
}

/// The inequality for the constant function `h` (1-based); holds whenever `b`
/// comes from the quasistable twist of `M_h`.
pub fn check_generic_bound<S: ExactScalar>(t: &ConditionTable<S>, h: usize) -> bool {
    t.admits(&vec![h - 1; t.rows.len()])
}

/// A step of a blowup schedule at a special point `R` for the next node
/// `l_new`. Labels are indexed in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleBlock {
    /// Diagonals `Delta_{k,d+1}` for `k = d, ..., 1`.
    DiagonalsDescending,
    /// Diagonals `Delta_{k,d+1}` for `k = 1, ..., d`.
    DiagonalsAscending,
    /// `C_{[u_j]} x C_2` for labels in lexicographic order, each followed by
    /// `C_{[u_j]} x C_1`.
    ProductsLex,
    /// As `ProductsLex`, labels in reverse order.
    ProductsReverseLex,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BlowupSchedule {
    /// Diagonals in descending order, then products in lexicographic order;
    /// selected on the command line as `paper`.
    Standard,
    Custom(Vec<ScheduleBlock>),
}

impl BlowupSchedule {
    pub fn blocks(&self) -> Vec<ScheduleBlock> {
        match self {
            BlowupSchedule::Standard => vec![ScheduleBlock::DiagonalsDescending, ScheduleBlock::ProductsLex],
            BlowupSchedule::Custom(b) => b.clone(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            BlowupSchedule::Standard => "paper".to_string(),
            BlowupSchedule::Custom(blocks) => {
                let names: Vec<String> = blocks
                    .iter()
                    .map(|b| serde_json::to_value(b).unwrap().as_str().unwrap().to_string())
                    .collect();
                format!("custom[{}]", names.join(","))
            }
        }
    }
}

/// The collection over `{1, ..., d+1}` the schedule induces at `(r, ell_new)`.
/// Diagonal `k` contributes `(A'_k)^c` with `A'_k = {j : u_j(k) = 1}` when
/// `l_k = ell_new` (skipped if empty or full); the product for label `j`
/// contributes `{j}` then `{j}^c`.
pub fn induced_collection(
    r: &SpecialPointData,
    ell_new: usize,
    schedule: &BlowupSchedule,
) -> Result<SubsetCollection, BlowupError> {
    let d = r.d();
    let n = d + 1;
    let diagonal = |k: usize| -> Option<IndexSet> {
        if r.ells()[k - 1] != ell_new {
            return None;
        }
        let a: IndexSet = r
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, u)| u.at(k) == 1)
            .map(|(j, _)| j + 1)
            .collect();
        let c = a.complement(n);
        (!a.is_empty() && !c.is_empty()).then_some(c)
    };
    let mut sets = Vec::new();
    for block in schedule.blocks() {
        match block {
            ScheduleBlock::DiagonalsDescending => sets.extend((1..=d).rev().filter_map(diagonal)),
            ScheduleBlock::DiagonalsAscending => sets.extend((1..=d).filter_map(diagonal)),
            ScheduleBlock::ProductsLex | ScheduleBlock::ProductsReverseLex => {
                let mut js: Vec<usize> = (1..=n).collect();
                if block == ScheduleBlock::ProductsReverseLex {
                    js.reverse();
                }
                for j in js {
                    let s = IndexSet::singleton(j);
                    sets.push(s);
                    sets.push(s.complement(n));
                }
            }
        }
    }
    SubsetCollection::new(n, sets)
}

/// Label ordering (0-based indices, labels taken in lexicographic order) that
/// the schedule induces at `(r, ell_new)`.
pub fn schedule_order(
    r: &SpecialPointData,
    ell_new: usize,
    schedule: &BlowupSchedule,
) -> Result<Vec<usize>, ExtensionError> {
    let invalid = |source| ExtensionError::InvalidOrder {
        point: r.to_string(),
        node: ell_new,
        source,
    };
    let sorted = r.sorted();
    let col = induced_collection(&sorted, ell_new, schedule).map_err(invalid)?;
    let eta = a_order(&col).map_err(invalid)?;
    // map lexicographic positions back to the stored order of r
    Ok(eta
        .into_iter()
        .map(|j| {
            let label = &sorted.labels()[j - 1];
            r.labels().iter().position(|l| l == label).unwrap()
        })
        .collect())
}

/// Special points reached when every extension uses the ordering induced by
/// `schedule`.
pub fn enumerate_under_schedule(
    d: usize,
    q: usize,
    schedule: &BlowupSchedule,
) -> Result<Vec<SpecialPointData>, ExtensionError> {
    match schedule {
        BlowupSchedule::Standard => enumerate_with(d, q, |r, ell| {
            ell_order(r, ell).map_err(ExtensionError::from)
        }),
        _ => enumerate_with(d, q, |r, ell| schedule_order(r, ell, schedule)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyParams<S> {
    pub d: usize,
    pub q: usize,
    pub l: [i64; 2],
    pub pol: Polarization<S>,
    pub schedule: BlowupSchedule,
    pub mode: CheckMode,
    /// Worker count; `0` or `1` runs sequentially. Never affects the report.
    pub shards: usize,
}

impl<S: ExactScalar> VerifyParams<S> {
    pub fn new(d: usize, q: usize, l: [i64; 2], pol: Polarization<S>) -> Self {
        VerifyParams {
            d,
            q,
            l,
            pol,
            schedule: BlowupSchedule::Standard,
            mode: CheckMode::Separable,
            shards: 1,
        }
    }

    fn validate(&self) -> Result<(), ExtensionError> {
        if self.d == 0 {
            return Err(ExtensionError::ZeroDegree);
        }
        if self.q == 0 {
            return Err(ExtensionError::ZeroNodes);
        }
        if self.d + 1 > MAX_INDEX {
            return Err(ExtensionError::TooManyPoints(self.d + 1));
        }
        if self.pol.len() != 2 {
            return Err(ExtensionError::Length {
                what: "polarization",
                expected: 2,
                got: self.pol.len(),
            });
        }
        let total = self.l[0] + self.l[1];
        if total != self.pol.degree() {
            return Err(ExtensionError::DegreeMismatch {
                md: total,
                pol: self.pol.degree(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportParams {
    pub d: usize,
    pub q: usize,
    #[serde(rename = "L")]
    pub l: [i64; 2],
    pub polarization: Vec<String>,
    pub order: String,
    pub mode: CheckMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub point: SpecialPointData,
    pub condition: u8,
    pub witness: Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionReport {
    pub params: ReportParams,
    pub points: usize,
    pub failures: Vec<Failure>,
    pub verdict: Verdict,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Failures of both conditions at one special point.
pub fn check_point<S: ExactScalar>(
    r: &SpecialPointData,
    q: usize,
    l: [i64; 2],
    pol: &Polarization<S>,
    mode: CheckMode,
) -> Vec<Failure> {
    let a: Vec<AVector> = (0..r.labels().len()).map(|j| a_vector(r, j, q)).collect();
    let table = [two_component_table(&a, q, l, pol)];
    let mut out = Vec::new();
    if let Some(w) = check_condition1(&table) {
        out.push(Failure {
            point: r.clone(),
            condition: 1,
            witness: w,
        });
    }
    if let Some(w) = check_condition2(&table, mode) {
        out.push(Failure {
            point: r.clone(),
            condition: 2,
            witness: w,
        });
    }
    out
}

/// Runs both conditions on the given points; `params.schedule` only labels
/// the report.
pub fn verify_points<S: ExactScalar>(
    points: &[SpecialPointData],
    params: &VerifyParams<S>,
) -> Result<ExtensionReport, ExtensionError> {
    params.validate()?;
    if let Some(&node) = points
        .iter()
        .flat_map(|r| r.ells())
        .find(|&&l| l > params.q)
    {
        return Err(ExtensionError::NodeBeyondQ { node, q: params.q });
    }
    let run = |chunk: &[SpecialPointData]| -> Vec<Failure> {
        chunk
            .iter()
            .flat_map(|r| check_point(r, params.q, params.l, &params.pol, params.mode))
            .collect()
    };
    let failures: Vec<Failure> = if params.shards <= 1 || points.len() < 2 {
        run(points)
    } else {
        let chunk = points.len().div_ceil(params.shards);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(params.shards)
            .build()
            .expect("thread pool");
        pool.install(|| points.par_chunks(chunk).map(run).collect::<Vec<_>>())
            .into_iter()
            .flatten()
            .collect()
    };
    let verdict = if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ExtensionReport {
        params: ReportParams {
            d: params.d,
            q: params.q,
            l: params.l,
            polarization: params.pol.weights().iter().map(|w| w.to_string()).collect(),
            order: params.schedule.name(),
            mode: params.mode,
        },
        points: points.len(),
        failures,
        verdict,
    })
}

/// Enumerates the special points under `params.schedule` and checks both
/// conditions at each of them.
pub fn verify_extension<S: ExactScalar>(
    params: &VerifyParams<S>,
) -> Result<ExtensionReport, ExtensionError> {
    params.validate()?;
    let points = enumerate_under_schedule(params.d, params.q, &params.schedule)?;
    verify_points(&points, params)
}
