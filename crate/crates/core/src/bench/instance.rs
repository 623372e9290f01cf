//! JSON instance documents.
//!
//! ```json
//! {"means": [0.5, 0.5, 0, 0], "family": {"explicit": [[0, 1], [2, 3]]}}
//! {"means": [...], "family": {"oracle": "spanning_tree", "graph": {"vertices": 4, "edges": [[0, 1], ...]}}}
//! {"means": [...], "family": {"oracle": "matching", "graph": {"left": 2, "right": 2, "edges": [...]}}}
//! {"means": [...], "family": {"oracle": "path", "graph": {"vertices": 5, "edges": [...], "s": 0, "t": 1}}}
//! {"means": [...], "regions": [{"halfspaces": [{"a": [1, -1], "b": 0}]}, {"top_set": [0, 2]},
//!                              {"count_above": {"theta": 0, "j": 2}}, {"points": [[0, 0]]}]}
//! {"means": [...], "ball": {"u": [...], "r": 0.5}}
//! ```
//!
//! Exactly one of `family`, `regions` and `ball` is present. The rivals of a
//! `top_set` region are the sets of the other `top_set` regions in the document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::general::{AnswerRegion, GeneralSampInstance, Halfspace};
use crate::hard::BallCaseConfig;
use crate::model::{ArmSet, BestSetInstance, MeanProfile};
use crate::oracles::{BipartiteGraph, FamilyKind, FamilyOracle, PathGraph, UndirectedGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub means: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<RegionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<BallSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    SpanningTree,
    Matching,
    Path,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<usize>,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionSpec {
    Halfspaces(Vec<HalfspaceSpec>),
    TopSet(Vec<usize>),
    CountAbove { theta: f64, j: usize },
    Points(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub u: Vec<f64>,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
}

/// A parsed, validated instance.
#[derive(Clone, Debug)]
pub enum Instance {
    BestSet(BestSetInstance),
    General(GeneralSampInstance),
    Ball { profile: MeanProfile, config: BallCaseConfig },
}

impl Instance {
    pub fn profile(&self) -> &MeanProfile {
        match self {
            Instance::BestSet(i) => i.profile(),
            Instance::General(i) => i.profile(),
            Instance::Ball { profile, .. } => profile,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Instance::BestSet(_) => "best_set",
            Instance::General(_) => "general",
            Instance::Ball { .. } => "ball",
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl GraphSpec {
    fn need(v: Option<usize>, what: &str) -> Result<usize> {
        v.ok_or_else(|| invalid(format!("graph is missing `{what}`")))
    }
}

impl FamilySpec {
    fn build(&self, n: usize) -> Result<FamilyOracle> {
        let oracle = match (&self.explicit, self.oracle, &self.graph) {
            (Some(sets), None, None) => FamilyOracle::explicit(n, sets.iter().cloned().map(ArmSet::new).collect())?,
            (None, Some(kind), Some(g)) => match kind {
                OracleKind::SpanningTree => FamilyOracle::spanning_tree(UndirectedGraph::new(
                    GraphSpec::need(g.vertices, "vertices")?,
                    g.edges.clone(),
                )?),
                OracleKind::Matching => FamilyOracle::matching(BipartiteGraph::new(
                    GraphSpec::need(g.left, "left")?,
                    GraphSpec::need(g.right, "right")?,
                    g.edges.clone(),
                )?),
                OracleKind::Path => FamilyOracle::path(PathGraph::new(
                    GraphSpec::need(g.vertices, "vertices")?,
                    g.edges.clone(),
                    GraphSpec::need(g.s, "s")?,
                    GraphSpec::need(g.t, "t")?,
                )?),
            },
            _ => return Err(invalid("family needs either `explicit` or both `oracle` and `graph`")),
        };
        if oracle.n_arms() != n {
            return Err(invalid(format!("family has {} arms but {n} means are given", oracle.n_arms())));
        }
        Ok(oracle)
    }
}

impl RegionSpec {
    pub fn from_region(region: &AnswerRegion) -> Self {
        match region {
            AnswerRegion::Polyhedron(hs) => {
                RegionSpec::Halfspaces(hs.iter().map(|h| HalfspaceSpec { a: h.a.clone(), b: h.b }).collect())
            }
            AnswerRegion::TopSet { set, .. } => RegionSpec::TopSet(set.as_slice().to_vec()),
            AnswerRegion::CountAbove { theta, count } => RegionSpec::CountAbove { theta: *theta, j: *count },
            AnswerRegion::Points(ps) => RegionSpec::Points(ps.clone()),
        }
    }
}

fn build_regions(specs: &[RegionSpec]) -> Vec<AnswerRegion> {
    let tops: Vec<ArmSet> = specs
        .iter()
        .filter_map(|s| match s {
            RegionSpec::TopSet(v) => Some(ArmSet::new(v.iter().copied())),
            _ => None,
        })
        .collect();
    specs
        .iter()
        .map(|s| match s {
            RegionSpec::Halfspaces(hs) => {
                AnswerRegion::Polyhedron(hs.iter().map(|h| Halfspace { a: h.a.clone(), b: h.b }).collect())
            }
            RegionSpec::TopSet(v) => {
                let set = ArmSet::new(v.iter().copied());
                AnswerRegion::TopSet { rivals: tops.iter().filter(|t| **t != set).cloned().collect(), set }
            }
            RegionSpec::CountAbove { theta, j } => AnswerRegion::CountAbove { theta: *theta, count: *j },
            RegionSpec::Points(ps) => AnswerRegion::Points(ps.clone()),
        })
        .collect()
}

impl InstanceDoc {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        InstanceDoc::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn explicit(means: Vec<f64>, sets: Vec<Vec<usize>>) -> Self {
        InstanceDoc {
            means,
            family: Some(FamilySpec { explicit: Some(sets), oracle: None, graph: None }),
            regions: None,
            ball: None,
        }
    }

    /// Document for a Best-Set instance; graph families keep their graph.
    pub fn from_best_set(instance: &BestSetInstance) -> Result<Self> {
        let means = instance.means().to_vec();
        let family = instance.family();
        let spec = match family.kind() {
            FamilyKind::StPath => {
                let g = family.path_graph().expect("path family has a graph");
                FamilySpec {
                    explicit: None,
                    oracle: Some(OracleKind::Path),
                    graph: Some(GraphSpec {
                        vertices: Some(g.vertices),
                        edges: g.edges.clone(),
                        s: Some(g.s),
                        t: Some(g.t),
                        ..GraphSpec::default()
                    }),
                }
            }
            _ => FamilySpec {
                explicit: Some(family.members()?.iter().map(|s| s.as_slice().to_vec()).collect()),
                oracle: None,
                graph: None,
            },
        };
        Ok(InstanceDoc { means, family: Some(spec), regions: None, ball: None })
    }

    pub fn from_general(instance: &GeneralSampInstance) -> Self {
        InstanceDoc {
            means: instance.profile().means().to_vec(),
            family: None,
            regions: Some(instance.regions().iter().map(RegionSpec::from_region).collect()),
            ball: None,
        }
    }

    pub fn build(&self) -> Result<Instance> {
        let profile = MeanProfile::new(self.means.clone())?;
        let n = profile.n();
        match (&self.family, &self.regions, &self.ball) {
            (Some(f), None, None) => Ok(Instance::BestSet(BestSetInstance::new(profile, f.build(n)?)?)),
            (None, Some(r), None) => Ok(Instance::General(GeneralSampInstance::new(profile, build_regions(r))?)),
            (None, None, Some(b)) => {
                if b.u.len() != n {
                    return Err(invalid(format!("ball centre has {} coordinates, {n} means given", b.u.len())));
                }
                let mut config = BallCaseConfig::new(b.u.clone(), b.r)?;
                config.c1 = b.c1.unwrap_or(config.c1);
                config.c2 = b.c2.unwrap_or(config.c2);
                let dist = profile.means().iter().zip(&b.u).map(|(x, u)| (x - u).powi(2)).sum::<f64>().sqrt();
                if dist > 1e-12 && dist < b.r * (1.0 - 1e-9) {
                    return Err(invalid(format!("mean profile is at distance {dist} from the centre, inside radius {}", b.r)));
                }
                Ok(Instance::Ball { profile, config })
            }
            _ => Err(invalid("instance needs exactly one of `family`, `regions` or `ball`")),
        }
    }
}

/// Read and validate an instance file.
pub fn load_instance(path: &Path) -> Result<Instance> {
    InstanceDoc::load(path)?.build()
}
