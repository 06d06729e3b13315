//! Brute-force oracles and input generators shared by the integration tests.
//! Nothing here calls the library's own stability or ordering logic.

#![allow(dead_code)]

use std::collections::BTreeSet;

use nodal_abel::blowup::SubsetCollection;
use nodal_abel::curve::{DualGraph, Multidegree, Polarization};
use nodal_abel::{IndexSet, Rational};
use rand::Rng;

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn pol(ws: &[Rational]) -> Polarization<Rational> {
    Polarization::new(ws.to_vec()).expect("integral total")
}

pub fn set_of(bits: u64) -> IndexSet {
    IndexSet::from_bits(bits << 1)
}

/// Nodes with exactly one endpoint in `y`.
pub fn cut_size(nodes: &[(usize, usize)], y: u64) -> i64 {
    nodes
        .iter()
        .filter(|&&(r, s)| (y >> (r - 1) & 1) != (y >> (s - 1) & 1))
        .count() as i64
}

/// Inequalities over one subset `y` (bit `i - 1` for component `i`), written
/// with `2x` against `k` to stay in integers times the common denominator.
pub fn oracle_over(
    nodes: &[(usize, usize)],
    marked: usize,
    weights: &[Rational],
    degs: &[i64],
    y: u64,
) -> bool {
    let mut x = Rational::from_integer(0);
    for i in 0..degs.len() {
        if y >> i & 1 == 1 {
            x += Rational::from_integer(degs[i]) - weights[i];
        }
    }
    let two_x = x * 2;
    let k = Rational::from_integer(cut_size(nodes, y));
    if y >> (marked - 1) & 1 == 1 {
        -k < two_x && two_x <= k
    } else {
        -k <= two_x && two_x < k
    }
}

/// Quasistability over every nonempty proper subset.
pub fn oracle_quasistable(
    nodes: &[(usize, usize)],
    p: usize,
    marked: usize,
    weights: &[Rational],
    degs: &[i64],
) -> bool {
    (1u64..(1 << p) - 1).all(|y| oracle_over(nodes, marked, weights, degs, y))
}

/// Connected graph on `p` components: a random spanning tree plus `extra`
/// random nodes.
pub fn random_graph<R: Rng>(rng: &mut R, p: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut nodes: Vec<(usize, usize)> = (2..=p).map(|i| (rng.gen_range(1..i), i)).collect();
    if p >= 2 {
        for _ in 0..extra {
            let r = rng.gen_range(1..=p);
            let mut s = rng.gen_range(1..=p - 1);
            if s >= r {
                s += 1;
            }
            nodes.push((r, s));
        }
    }
    nodes
}

fn connected(p: usize, nodes: &[(usize, usize)]) -> bool {
    let mut reach = 1u64;
    loop {
        let before = reach;
        for &(r, s) in nodes {
            let (br, bs) = (1 << (r - 1), 1 << (s - 1));
            if reach & (br | bs) != 0 {
                reach |= br | bs;
            }
        }
        if reach == before {
            return reach == (1 << p) - 1;
        }
    }
}

fn permutations(p: usize) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut (1..=p).collect(), &mut Vec::new(), &mut out);
    out
}

/// Connected loopless multigraphs on `p` components with at most `max_nodes`
/// nodes, one per isomorphism class.
pub fn connected_multigraphs(p: usize, max_nodes: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (1..=p)
        .flat_map(|r| (r + 1..=p).map(move |s| (r, s)))
        .collect();
    let perms = permutations(p);
    let mut classes: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut out = Vec::new();
    // multisets of pairs as nondecreasing index sequences
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(seq) = stack.pop() {
        let nodes: Vec<(usize, usize)> = seq.iter().map(|&i| pairs[i]).collect();
        if (p == 1 || !nodes.is_empty()) && connected(p, &nodes) {
            let canon = perms
                .iter()
                .map(|pi| {
                    let mut e: Vec<(usize, usize)> = nodes
                        .iter()
                        .map(|&(r, s)| {
                            let (a, b) = (pi[r - 1], pi[s - 1]);
                            (a.min(b), a.max(b))
                        })
                        .collect();
                    e.sort();
                    e
                })
                .min()
                .unwrap();
            if classes.insert(canon) {
                out.push(nodes);
            }
        }
        if seq.len() < max_nodes {
            let from = seq.last().copied().unwrap_or(0);
            for i in from..pairs.len() {
                let mut next = seq.clone();
                next.push(i);
                stack.push(next);
            }
        }
    }
    out
}

/// Polarization weights with denominators dividing `den`, summing to `total`.
pub fn random_weights<R: Rng>(rng: &mut R, p: usize, total: i64, den: i64) -> Vec<Rational> {
    let mut w: Vec<Rational> = (1..p).map(|_| frac(rng.gen_range(-3 * den..=3 * den), den)).collect();
    let rest = Rational::from_integer(total) - w.iter().copied().sum::<Rational>();
    w.push(rest);
    w
}

pub fn graph(p: usize, nodes: &[(usize, usize)], marked: usize) -> DualGraph {
    DualGraph::new(p, nodes.to_vec(), marked).expect("valid graph")
}

pub fn md(degs: &[i64]) -> Multidegree {
    Multidegree::new(degs.to_vec())
}

/// Chart recursion written from scratch: returns the chain of indices and the
/// number of exceptional curves.
pub fn chart_chain(sets: &[u64], ground: u64) -> Option<(Vec<usize>, usize)> {
    if ground.count_ones() == 1 {
        return Some((vec![ground.trailing_zeros() as usize + 1], 0));
    }
    let pos = sets.iter().position(|&s| {
        let t = s & ground;
        t != 0 && t != ground
    })?;
    let a = sets[pos] & ground;
    let (mut u, cu) = chart_chain(&sets[pos + 1..], a)?;
    let (v, cv) = chart_chain(&sets[pos + 1..], ground & !a)?;
    u.extend(v);
    Some((u, cu + cv + 1))
}

/// Subsets as bitmasks (bit `i - 1` for index `i`).
pub fn collection(n: usize, sets: &[u64]) -> SubsetCollection {
    SubsetCollection::new(n, sets.iter().map(|&s| set_of(s)).collect()).expect("valid sets")
}

pub fn separates_all(n: usize, sets: &[u64]) -> bool {
    (0..n).all(|i| {
        (i + 1..n).all(|j| sets.iter().any(|&s| (s >> i & 1) != (s >> j & 1)))
    })
}

/// Chains with every connected subchain of degree in `{-1, 0, 1}`: prefix
/// sums confined to `{0, 1}` or `{-1, 0}`.
pub fn random_admissible_chain<R: Rng>(rng: &mut R, d: usize) -> Vec<i64> {
    let low = if rng.gen_bool(0.5) { 0 } else { -1 };
    let mut prev = 0i64;
    (0..d)
        .map(|_| {
            let next = low + i64::from(rng.gen_bool(0.5));
            let step = next - prev;
            prev = next;
            step
        })
        .collect()
}

/// All admissible chains of length `d`.
pub fn admissible_chains(d: usize) -> Vec<Vec<i64>> {
    let mut out = BTreeSet::new();
    for low in [-1i64, 0] {
        for mask in 0u32..(1 << d) {
            let mut prev = 0;
            let chain: Vec<i64> = (0..d)
                .map(|k| {
                    let next = low + i64::from(mask >> k & 1);
                    let step = next - prev;
                    prev = next;
                    step
                })
                .collect();
            out.insert(chain);
        }
    }
    out.into_iter().collect()
}

/// Sum over every connected subchain lies in `{-1, 0, 1}`.
pub fn chain_admissible(chain: &[i64]) -> bool {
    (0..chain.len()).all(|i| {
        (i..chain.len()).all(|j| (-1..=1).contains(&chain[i..=j].iter().sum::<i64>()))
    })
}

pub fn has_degree_one_subchain(chain: &[i64]) -> bool {
    (0..chain.len()).any(|i| (i..chain.len()).any(|j| chain[i..=j].iter().sum::<i64>() == 1))
}
