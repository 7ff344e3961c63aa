//! JSON problem files: named objects cross-referenced by name.
//!
//! ```json
//! {
//!   "version": "1",
//!   "spaces":   { "S": { "points": [0, 1, 3] } },
//!   "measures": { "P": { "space": "S", "weights": [0.2, 0.3, 0.5] } },
//!   "variables": { "Z": { "space": "S", "values": [1, -2, 4] } },
//!   "ambiguity_sets": { "M": { "kind": "avar", "alpha": 0.5, "reference": "P" } }
//! }
//! ```
//!
//! Every object is validated when the file is loaded, so a loaded
//! [`Document`] only holds well-formed objects.

use std::collections::BTreeMap;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::ambiguity::AmbiguitySet;
use crate::composite::RectangularSpec;
use crate::dp::{MultistageProblem, Stage};
use crate::error::{Error, Result};
use crate::measure::{
    tree_filtration, DiscreteMeasure, Filtration, FiniteSpace, Partition, RandomVariable,
    ScenarioTree,
};
use crate::transport::{MultistageBoundSpec, TreeModel};

pub const VERSION: &str = "1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    version: String,
    #[serde(default)]
    spaces: BTreeMap<String, RawSpace>,
    #[serde(default)]
    measures: BTreeMap<String, RawMeasure>,
    #[serde(default)]
    variables: BTreeMap<String, RawVariable>,
    #[serde(default)]
    ambiguity_sets: BTreeMap<String, RawSet>,
    #[serde(default)]
    partitions: BTreeMap<String, RawPartition>,
    #[serde(default)]
    filtrations: BTreeMap<String, RawFiltration>,
    #[serde(default)]
    trees: BTreeMap<String, RawTree>,
    #[serde(default)]
    rectangular: BTreeMap<String, RawRectangular>,
    #[serde(default)]
    composites: BTreeMap<String, RawComposite>,
    #[serde(default)]
    problems: BTreeMap<String, RawProblem>,
    #[serde(default)]
    tree_models: BTreeMap<String, RawTreeModel>,
    #[serde(default)]
    bounds: BTreeMap<String, RawBound>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    size: Option<usize>,
    points: Option<Vec<f64>>,
    metric: Option<Vec<Vec<f64>>>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    space: Option<String>,
    weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariable {
    space: Option<String>,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSet {
    FiniteFamily {
        #[serde(default)]
        measures: Vec<String>,
        /// All point masses of this space.
        simplex: Option<String>,
    },
    Avar {
        alpha: f64,
        reference: String,
    },
    Moment {
        space: String,
        psi: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    WassersteinBall {
        center: String,
        radius: f64,
        space: Option<String>,
    },
    WassersteinIntersection {
        centers: Vec<String>,
        radii: Vec<f64>,
        space: Option<String>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartition {
    space: String,
    atoms: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiltration {
    partitions: Option<Vec<String>>,
    tree: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTree {
    branching: Option<Vec<usize>>,
    parents: Option<Vec<Option<usize>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRectangular {
    stages: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComposite {
    set: String,
    filtration: String,
    reference: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStage {
    set: String,
    costs: Vec<Vec<f64>>,
    feasible: Option<Vec<Vec<Vec<usize>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    first_costs: Vec<f64>,
    first_feasible: Option<Vec<usize>>,
    #[serde(default)]
    stages: Vec<RawStage>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTreeModel {
    stage_points: Vec<Vec<f64>>,
    first: Vec<f64>,
    #[serde(default)]
    kernels: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    center: String,
    variable: String,
    radii: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBound {
    epsilon: Vec<f64>,
    kappa: Vec<f64>,
    weights: Vec<f64>,
    lipschitz: f64,
    model: Option<String>,
    variable: Option<String>,
    sweep: Option<RawSweep>,
}

/// Radius sweep of a single Wasserstein ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub center: String,
    pub variable: String,
    pub radii: Vec<f64>,
}

/// Multistage bound parameters with optional model and variable for the
/// empirical check, and an optional single-ball sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry {
    pub spec: MultistageBoundSpec,
    pub model: Option<String>,
    pub variable: Option<String>,
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeEntry {
    pub set: String,
    pub filtration: String,
    pub reference: String,
}

/// A measure or variable together with the space it lives on, if declared.
#[derive(Debug, Clone, PartialEq)]
pub struct Placed<T> {
    pub space: Option<String>,
    pub value: T,
}

/// Validated contents of a problem file.
#[derive(Debug, Clone, Default)]
pub struct Document {
    /// SHA-256 of the file bytes, hex.
    pub digest: String,
    pub spaces: BTreeMap<String, FiniteSpace>,
    pub measures: BTreeMap<String, Placed<DiscreteMeasure>>,
    pub variables: BTreeMap<String, Placed<RandomVariable>>,
    pub sets: BTreeMap<String, AmbiguitySet>,
    pub partitions: BTreeMap<String, Partition>,
    pub filtrations: BTreeMap<String, Filtration>,
    pub trees: BTreeMap<String, ScenarioTree>,
    pub rectangular: BTreeMap<String, RectangularSpec>,
    pub composites: BTreeMap<String, CompositeEntry>,
    pub problems: BTreeMap<String, MultistageProblem>,
    pub tree_models: BTreeMap<String, TreeModel>,
    pub bounds: BTreeMap<String, BoundEntry>,
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &'static str, name: &str) -> Result<&'a T> {
    map.get(name).ok_or_else(|| Error::UnknownName {
        kind,
        name: name.to_string(),
    })
}

/// Prefixes an error with the object it came from.
fn within<T>(kind: &str, name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::UnknownName { .. } | Error::Schema(_) => e,
        other => Error::Schema(format!("{kind} '{name}': {other}")),
    })
}

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Document {
    /// Parses and validates a problem file. Syntax errors carry line and
    /// column.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if raw.version != VERSION {
            return Err(Error::Schema(format!(
                "unsupported version '{}', expected '{VERSION}'",
                raw.version
            )));
        }
        let mut doc = Document {
            digest: digest(text.as_bytes()),
            ..Default::default()
        };
        for (name, s) in raw.spaces {
            let space = within("space", &name, build_space(s))?;
            doc.spaces.insert(name, space);
        }
        for (name, m) in raw.measures {
            let r = (|| {
                let value = DiscreteMeasure::probability(m.weights)?;
                if let Some(s) = &m.space {
                    value.ensure_len(lookup(&doc.spaces, "space", s)?.len())?;
                }
                Ok(Placed {
                    space: m.space,
                    value,
                })
            })();
            let placed = within("measure", &name, r)?;
            doc.measures.insert(name, placed);
        }
        for (name, v) in raw.variables {
            let r = (|| {
                let value = RandomVariable::new(v.values)?;
                if let Some(s) = &v.space {
                    value.ensure_len(lookup(&doc.spaces, "space", s)?.len())?;
                }
                Ok(Placed {
                    space: v.space,
                    value,
                })
            })();
            let placed = within("variable", &name, r)?;
            doc.variables.insert(name, placed);
        }
        for (name, s) in raw.ambiguity_sets {
            let set = within("ambiguity set", &name, doc.build_set(s))?;
            doc.sets.insert(name, set);
        }
        for (name, p) in raw.partitions {
            let r = (|| {
                let n = lookup(&doc.spaces, "space", &p.space)?.len();
                Partition::new(n, p.atoms)
            })();
            let part = within("partition", &name, r)?;
            doc.partitions.insert(name, part);
        }
        for (name, t) in raw.trees {
            let r = match (t.branching, t.parents) {
                (Some(b), None) => ScenarioTree::uniform(&b),
                (None, Some(p)) => ScenarioTree::from_parents(&p),
                _ => Err(Error::Schema(
                    "give exactly one of 'branching' and 'parents'".into(),
                )),
            };
            let tree = within("tree", &name, r)?;
            doc.trees.insert(name, tree);
        }
        for (name, f) in raw.filtrations {
            let r = match (f.partitions, f.tree) {
                (Some(parts), None) => parts
                    .iter()
                    .map(|p| lookup(&doc.partitions, "partition", p).cloned())
                    .collect::<Result<Vec<_>>>()
                    .and_then(Filtration::new),
                (None, Some(t)) => lookup(&doc.trees, "tree", &t).and_then(tree_filtration),
                _ => Err(Error::Schema(
                    "give exactly one of 'partitions' and 'tree'".into(),
                )),
            };
            let filt = within("filtration", &name, r)?;
            doc.filtrations.insert(name, filt);
        }
        for (name, r) in raw.rectangular {
            let res = r
                .stages
                .iter()
                .map(|s| lookup(&doc.sets, "ambiguity set", s).cloned())
                .collect::<Result<Vec<_>>>()
                .and_then(RectangularSpec::new);
            let spec = within("rectangular spec", &name, res)?;
            doc.rectangular.insert(name, spec);
        }
        for (name, c) in raw.composites {
            let r = (|| {
                let set = lookup(&doc.sets, "ambiguity set", &c.set)?;
                let f = lookup(&doc.filtrations, "filtration", &c.filtration)?;
                let p = &lookup(&doc.measures, "measure", &c.reference)?.value;
                if f.space_len() != set.len() || p.len() != set.len() {
                    return Err(Error::DimensionMismatch {
                        expected: set.len(),
                        found: if p.len() != set.len() {
                            p.len()
                        } else {
                            f.space_len()
                        },
                    });
                }
                Ok(CompositeEntry {
                    set: c.set,
                    filtration: c.filtration,
                    reference: c.reference,
                })
            })();
            let entry = within("composite", &name, r)?;
            doc.composites.insert(name, entry);
        }
        for (name, p) in raw.problems {
            let prob = within("problem", &name, doc.build_problem(p))?;
            doc.problems.insert(name, prob);
        }
        for (name, m) in raw.tree_models {
            let r = (|| {
                let first = DiscreteMeasure::probability(m.first)?;
                let kernels = m
                    .kernels
                    .into_iter()
                    .map(|stage| {
                        stage
                            .into_iter()
                            .map(DiscreteMeasure::probability)
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                TreeModel::new(m.stage_points, first, kernels)
            })();
            let model = within("tree model", &name, r)?;
            doc.tree_models.insert(name, model);
        }
        for (name, b) in raw.bounds {
            let r = (|| {
                let spec = MultistageBoundSpec::new(b.epsilon, b.kappa, b.weights, b.lipschitz)?;
                if let Some(m) = &b.model {
                    let model = lookup(&doc.tree_models, "tree model", m)?;
                    if model.horizon() != spec.horizon() {
                        return Err(Error::DimensionMismatch {
                            expected: model.horizon(),
                            found: spec.horizon(),
                        });
                    }
                }
                if let Some(v) = &b.variable {
                    lookup(&doc.variables, "variable", v)?;
                    if b.model.is_none() {
                        return Err(Error::Schema("'variable' needs a 'model'".into()));
                    }
                }
                let sweep = match b.sweep {
                    Some(s) => {
                        let center = lookup(&doc.measures, "measure", &s.center)?;
                        if center.space.is_none() {
                            return Err(Error::Schema(format!(
                                "sweep center '{}' needs a metric space",
                                s.center
                            )));
                        }
                        lookup(&doc.variables, "variable", &s.variable)?;
                        if s.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                            return Err(Error::Schema("sweep radii must be nonnegative".into()));
                        }
                        Some(Sweep {
                            center: s.center,
                            variable: s.variable,
                            radii: s.radii,
                        })
                    }
                    None => None,
                };
                Ok(BoundEntry {
                    spec,
                    model: b.model,
                    variable: b.variable,
                    sweep,
                })
            })();
            let entry = within("bound", &name, r)?;
            doc.bounds.insert(name, entry);
        }
        Ok(doc)
    }

    fn measure_space(&self, measure: &str, explicit: Option<&String>) -> Result<FiniteSpace> {
        let m = lookup(&self.measures, "measure", measure)?;
        let name = explicit
            .or(m.space.as_ref())
            .ok_or_else(|| Error::Schema(format!("measure '{measure}' has no space; name one")))?;
        let space = lookup(&self.spaces, "space", name)?.clone();
        m.value.ensure_len(space.len())?;
        Ok(space)
    }

    fn build_set(&self, raw: RawSet) -> Result<AmbiguitySet> {
        match raw {
            RawSet::FiniteFamily { measures, simplex } => match simplex {
                Some(space) if measures.is_empty() => Ok(AmbiguitySet::simplex(
                    lookup(&self.spaces, "space", &space)?.len(),
                )),
                Some(_) => Err(Error::Schema(
                    "give either 'measures' or 'simplex', not both".into(),
                )),
                None => AmbiguitySet::finite_family(
                    measures
                        .iter()
                        .map(|m| Ok(lookup(&self.measures, "measure", m)?.value.clone()))
                        .collect::<Result<Vec<_>>>()?,
                ),
            },
            RawSet::Avar { alpha, reference } => {
                AmbiguitySet::avar(alpha, self.measure(&reference)?.clone())
            }
            RawSet::Moment { space, psi, b } => AmbiguitySet::moment(
                lookup(&self.spaces, "space", &space)?.clone(),
                psi.into_iter()
                    .map(RandomVariable::new)
                    .collect::<Result<Vec<_>>>()?,
                b,
            ),
            RawSet::WassersteinBall {
                center,
                radius,
                space,
            } => {
                let s = self.measure_space(&center, space.as_ref())?;
                AmbiguitySet::wasserstein_ball(self.measure(&center)?.clone(), radius, s)
            }
            RawSet::WassersteinIntersection {
                centers,
                radii,
                space,
            } => {
                let first = centers
                    .first()
                    .ok_or_else(|| Error::Schema("no centers".into()))?;
                let s = self.measure_space(first, space.as_ref())?;
                let cs = centers
                    .iter()
                    .map(|c| self.measure(c).cloned())
                    .collect::<Result<Vec<_>>>()?;
                AmbiguitySet::wasserstein_intersection(cs, radii, s)
            }
        }
    }

    fn build_problem(&self, raw: RawProblem) -> Result<MultistageProblem> {
        let first_feasible = raw
            .first_feasible
            .unwrap_or_else(|| (0..raw.first_costs.len()).collect());
        let mut prev = raw.first_costs.len();
        let mut stages = Vec::with_capacity(raw.stages.len());
        for s in raw.stages {
            let set = lookup(&self.sets, "ambiguity set", &s.set)?.clone();
            let actions = s.costs.len();
            let stage = match s.feasible {
                Some(feasible) => Stage {
                    set,
                    costs: s.costs,
                    feasible,
                },
                None => Stage::unconstrained(set, s.costs, prev),
            };
            stages.push(stage);
            prev = actions;
        }
        MultistageProblem::new(raw.first_costs, first_feasible, stages)
    }

    pub fn measure(&self, name: &str) -> Result<&DiscreteMeasure> {
        lookup(&self.measures, "measure", name).map(|p| &p.value)
    }

    pub fn measure_entry(&self, name: &str) -> Result<&Placed<DiscreteMeasure>> {
        lookup(&self.measures, "measure", name)
    }

    pub fn variable(&self, name: &str) -> Result<&RandomVariable> {
        lookup(&self.variables, "variable", name).map(|p| &p.value)
    }

    pub fn set(&self, name: &str) -> Result<&AmbiguitySet> {
        lookup(&self.sets, "ambiguity set", name)
    }

    pub fn space(&self, name: &str) -> Result<&FiniteSpace> {
        lookup(&self.spaces, "space", name)
    }

    pub fn partition(&self, name: &str) -> Result<&Partition> {
        lookup(&self.partitions, "partition", name)
    }

    pub fn filtration(&self, name: &str) -> Result<&Filtration> {
        lookup(&self.filtrations, "filtration", name)
    }

    pub fn rectangular_spec(&self, name: &str) -> Result<&RectangularSpec> {
        lookup(&self.rectangular, "rectangular spec", name)
    }

    pub fn composite(&self, name: &str) -> Result<&CompositeEntry> {
        lookup(&self.composites, "composite", name)
    }

    pub fn problem(&self, name: &str) -> Result<&MultistageProblem> {
        lookup(&self.problems, "problem", name)
    }

    pub fn tree_model(&self, name: &str) -> Result<&TreeModel> {
        lookup(&self.tree_models, "tree model", name)
    }

    pub fn bound(&self, name: &str) -> Result<&BoundEntry> {
        lookup(&self.bounds, "bound", name)
    }
}

fn build_space(s: RawSpace) -> Result<FiniteSpace> {
    let mut space = match (s.size, s.points) {
        (_, Some(points)) => {
            if s.metric.is_some() {
                return Err(Error::Schema("give 'points' or 'metric', not both".into()));
            }
            if s.size.is_some_and(|n| n != points.len()) {
                return Err(Error::Schema("'size' disagrees with 'points'".into()));
            }
            FiniteSpace::on_line(&points)?
        }
        (Some(n), None) => {
            let space = FiniteSpace::new(n)?;
            match s.metric {
                Some(m) => space.with_metric(m)?,
                None => space,
            }
        }
        (None, None) => match s.metric {
            Some(m) => FiniteSpace::new(m.len())?.with_metric(m)?,
            None => {
                return Err(Error::Schema(
                    "space needs 'size', 'points' or 'metric'".into(),
                ))
            }
        },
    };
    if let Some(labels) = s.labels {
        space = space.with_labels(labels)?;
    }
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
      "version": "1",
      "spaces": { "S": { "points": [0, 1, 3] } },
      "measures": { "P": { "space": "S", "weights": [0.2, 0.3, 0.5] } },
      "variables": { "Z": { "space": "S", "values": [1, -2, 4] } },
      "ambiguity_sets": {
        "A": { "kind": "avar", "alpha": 0.5, "reference": "P" },
        "W": { "kind": "wasserstein_ball", "center": "P", "radius": 0.1 },
        "F": { "kind": "finite_family", "simplex": "S" }
      }
    }"#;

    #[test]
    fn loads_and_resolves() {
        let doc = Document::parse(SMALL).unwrap();
        assert_eq!(doc.set("A").unwrap().kind_name(), "avar");
        assert_eq!(doc.set("F").unwrap().len(), 3);
        assert_eq!(doc.digest.len(), 64);
        assert!(matches!(
            doc.set("nope"),
            Err(Error::UnknownName {
                kind: "ambiguity set",
                ..
            })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = Document::parse("{\n  \"version\": \"1\",\n  oops\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn dangling_reference() {
        let text = SMALL.replace("\"reference\": \"P\"", "\"reference\": \"Q\"");
        assert!(matches!(
            Document::parse(&text),
            Err(Error::UnknownName {
                kind: "measure",
                ..
            })
        ));
    }

    #[test]
    fn bad_metric_is_rejected() {
        let text = r#"{ "version": "1", "spaces": { "S": { "metric": [[0, 1, 5], [1, 0, 1], [5, 1, 0]] } } }"#;
        let msg = Document::parse(text).unwrap_err().to_string();
        assert!(msg.contains("triangle"), "{msg}");
    }
}
