//! JSON input formats. Rationals are written as `"num/den"` strings (plain
//! integers are accepted too).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blowup::{normalize_divisor, BlowupDivisor, BlowupError, DivisorKind, SubsetCollection};
use crate::chain::{ChainError, ChainMarkedCurve};
use crate::curve::{CurveError, DualGraph, Multidegree, Polarization};
use crate::extension::{BlowupSchedule, ScheduleBlock};
use crate::index_set::IndexSet;
use crate::scalar::ExactScalar;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error("not an exact rational: {0:?}")]
    BadRational(String),
    #[error("missing field {0:?}")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Text(String),
    Int(i64),
}

impl RationalText {
    pub fn parse<S: ExactScalar>(&self) -> Result<S, IoError> {
        match self {
            RationalText::Int(n) => Ok(S::from_int(*n)),
            RationalText::Text(s) => S::parse_exact(s).ok_or_else(|| IoError::BadRational(s.clone())),
        }
    }
}

/// `{"components", "nodes", "marked", "polarization"?, "multidegree"?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub components: usize,
    pub nodes: Vec<[usize; 2]>,
    pub marked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<Vec<RationalText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multidegree: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveInput<S> {
    pub graph: DualGraph,
    pub polarization: Option<Polarization<S>>,
    pub multidegree: Option<Multidegree>,
}

impl<S: ExactScalar> CurveInput<S> {
    pub fn require_polarization(&self) -> Result<&Polarization<S>, IoError> {
        self.polarization.as_ref().ok_or(IoError::Missing("polarization"))
    }

    pub fn require_multidegree(&self) -> Result<&Multidegree, IoError> {
        self.multidegree.as_ref().ok_or(IoError::Missing("multidegree"))
    }
}

impl CurveFile {
    pub fn build<S: ExactScalar>(&self) -> Result<CurveInput<S>, IoError> {
        let graph = DualGraph::new(
            self.components,
            self.nodes.iter().map(|&[r, s]| (r, s)).collect(),
            self.marked,
        )?;
        let polarization = match &self.polarization {
            Some(ws) => Some(Polarization::new(
                ws.iter().map(RationalText::parse).collect::<Result<_, _>>()?,
            )?),
            None => None,
        };
        Ok(CurveInput {
            graph,
            polarization,
            multidegree: self.multidegree.clone().map(Multidegree::new),
        })
    }
}

pub fn parse_curve<S: ExactScalar>(json: &str) -> Result<CurveInput<S>, IoError> {
    serde_json::from_str::<CurveFile>(json)?.build()
}

/// `{"base": <curve>, "d", "base_degs", "chain_degs": {"<node>": [...]}}`;
/// node keys are 0-based positions in the base node list, missing chains are
/// all zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub base: CurveFile,
    pub d: usize,
    pub base_degs: Vec<i64>,
    #[serde(default)]
    pub chain_degs: BTreeMap<String, Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainInput<S> {
    pub curve: ChainMarkedCurve,
    pub polarization: Option<Polarization<S>>,
}

impl ChainFile {
    pub fn build<S: ExactScalar>(&self) -> Result<ChainInput<S>, IoError> {
        let base: CurveInput<S> = self.base.build()?;
        let nodes = base.graph.node_count();
        let mut chains = vec![vec![0; self.d]; nodes];
        for (key, degs) in &self.chain_degs {
            let idx: usize = key
                .trim()
                .parse()
                .map_err(|_| IoError::Invalid(format!("chain_degs key {key:?} is not a node index")))?;
            if idx >= nodes {
                return Err(IoError::Invalid(format!(
                    "chain_degs key {idx} but the base has {nodes} nodes"
                )));
            }
            chains[idx] = degs.clone();
        }
        let curve = ChainMarkedCurve::new(base.graph, self.d, self.base_degs.clone(), chains)?;
        Ok(ChainInput {
            curve,
            polarization: base.polarization,
        })
    }
}

pub fn parse_chain<S: ExactScalar>(json: &str) -> Result<ChainInput<S>, IoError> {
    serde_json::from_str::<ChainFile>(json)?.build()
}

/// `{"d_plus_1", "sets", "kinds"?}`; kinds are `"x"`, `"y"` or `"diag"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionFile {
    pub d_plus_1: usize,
    pub sets: Vec<IndexSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<DivisorKind>>,
}

impl CollectionFile {
    pub fn build(&self) -> Result<SubsetCollection, IoError> {
        let n = self.d_plus_1;
        let sets = match &self.kinds {
            None => self.sets.clone(),
            Some(kinds) if kinds.len() == self.sets.len() => self
                .sets
                .iter()
                .zip(kinds)
                .map(|(&set, &kind)| normalize_divisor(BlowupDivisor { kind, set }, n))
                .collect(),
            Some(kinds) => {
                return Err(IoError::Invalid(format!(
                    "{} kinds for {} sets",
                    kinds.len(),
                    self.sets.len()
                )))
            }
        };
        Ok(SubsetCollection::new(n, sets)?)
    }
}

pub fn parse_collection(json: &str) -> Result<SubsetCollection, IoError> {
    serde_json::from_str::<CollectionFile>(json)?.build()
}

/// `{"schedule": ["diagonals-descending", "products-lex", ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub schedule: Vec<ScheduleBlock>,
}

pub fn parse_schedule(json: &str) -> Result<BlowupSchedule, IoError> {
    let file: ScheduleFile = serde_json::from_str(json)?;
    if file.schedule.is_empty() {
        return Err(IoError::Invalid("empty schedule".into()));
    }
    Ok(BlowupSchedule::Custom(file.schedule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn curve_round_trip() {
        let json = r#"{"components":2,"nodes":[[1,2]],"marked":1,
                       "polarization":["1/2","-1/2"],"multidegree":[1,-1]}"#;
        let c: CurveInput<Q> = parse_curve(json).unwrap();
        assert_eq!(c.graph.node_count(), 1);
        assert_eq!(c.require_polarization().unwrap().weight(1), &Q::from_fraction(1, 2));
        assert_eq!(c.require_multidegree().unwrap().degs(), &[1, -1]);

        let bare: CurveInput<Q> = parse_curve(r#"{"components":1,"nodes":[],"marked":1}"#).unwrap();
        assert!(matches!(bare.require_polarization(), Err(IoError::Missing(_))));
        assert!(parse_curve::<Q>(r#"{"components":2,"nodes":[[1,2]]}"#).is_err());
        assert!(matches!(
            parse_curve::<Q>(r#"{"components":2,"nodes":[[1,2]],"marked":1,"polarization":["x","0"]}"#),
            Err(IoError::BadRational(_))
        ));
        assert!(matches!(
            parse_curve::<Q>(r#"{"components":2,"nodes":[[1,1]],"marked":1}"#),
            Err(IoError::Curve(_))
        ));
    }

    #[test]
    fn chain_file() {
        let json = r#"{"base":{"components":2,"nodes":[[1,2],[1,2]],"marked":1},
                       "d":2,"base_degs":[0,0],"chain_degs":{"1":[1,0]}}"#;
        let c: ChainInput<Q> = parse_chain(json).unwrap();
        assert_eq!(c.curve.chain_degs(), &[vec![0, 0], vec![1, 0]]);
        let bad = json.replace("\"1\"", "\"2\"");
        assert!(parse_chain::<Q>(&bad).is_err());
        let short = json.replace("[1,0]", "[1]");
        assert!(matches!(parse_chain::<Q>(&short), Err(IoError::Chain(_))));
    }

    #[test]
    fn collection_file_normalizes_kinds() {
        let col = parse_collection(r#"{"d_plus_1":3,"sets":[[2,3],[1,2]],"kinds":["y","diag"]}"#)
            .unwrap();
        let shown: Vec<String> = col.sets().iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, ["{1}", "{1,2}"]);
        assert!(parse_collection(r#"{"d_plus_1":3,"sets":[[1,2,3]]}"#).is_err());
        assert!(parse_collection(r#"{"d_plus_1":3,"sets":[[1]],"kinds":[]}"#).is_err());
    }

    #[test]
    fn schedule_file() {
        let s = parse_schedule(r#"{"schedule":["products-lex","diagonals-descending"]}"#).unwrap();
        assert_eq!(
            s,
            BlowupSchedule::Custom(vec![ScheduleBlock::ProductsLex, ScheduleBlock::DiagonalsDescending])
        );
        assert!(parse_schedule(r#"{"schedule":[]}"#).is_err());
        assert!(parse_schedule(r#"{"schedule":["sideways"]}"#).is_err());
    }
}
