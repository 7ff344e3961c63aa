//! Finite probability spaces: measures, random variables, partitions,
//! filtrations and scenario trees.
//!
//! Outcomes are identified by index `0..n`; labels are decorative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOL;

/// A finite outcome space `{0, …, n-1}` with an optional ground metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    n: usize,
    labels: Option<Vec<String>>,
    metric: Option<Vec<Vec<f64>>>,
}

impl FiniteSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMeasure(
                "space must have at least one outcome".into(),
            ));
        }
        Ok(Self {
            n,
            labels: None,
            metric: None,
        })
    }

    /// Points on the real line with the distance `|x - y|`.
    pub fn on_line(points: &[f64]) -> Result<Self> {
        let metric = points
            .iter()
            .map(|x| points.iter().map(|y| (x - y).abs()).collect())
            .collect();
        Self::new(points.len())?.with_metric(metric)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Attaches a ground metric after checking symmetry, zero diagonal,
    /// nonnegativity and the triangle inequality.
    pub fn with_metric(mut self, metric: Vec<Vec<f64>>) -> Result<Self> {
        let n = self.n;
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMetric(format!("metric must be {n}x{n}")));
        }
        for i in 0..n {
            if metric[i][i].abs() > TOL {
                return Err(Error::InvalidMetric(format!(
                    "d({i},{i}) = {} != 0",
                    metric[i][i]
                )));
            }
            for j in 0..n {
                let d = metric[i][j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "d({i},{j}) = {d} is not a nonnegative real"
                    )));
                }
                if (d - metric[j][i]).abs() > TOL {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
                }
                for k in 0..n {
                    if metric[i][k] > d + metric[j][k] + TOL {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})"
                        )));
                    }
                }
            }
        }
        self.metric = Some(metric);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn metric(&self) -> Option<&[Vec<f64>]> {
        self.metric.as_deref()
    }

    pub fn has_metric(&self) -> bool {
        self.metric.is_some()
    }

    /// Ground distance; panics when the space carries no metric.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.as_ref().expect("space has no metric")[i][j]
    }

    pub fn diameter(&self) -> f64 {
        self.metric
            .as_ref()
            .map(|m| m.iter().flatten().cloned().fold(0.0, f64::max))
            .unwrap_or(0.0)
    }
}

/// Nonnegative finite mass per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("empty weight vector".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidMeasure(format!(
                "weight {i} = {w} is not a nonnegative real"
            )));
        }
        Ok(Self { weights })
    }

    /// A measure whose total mass is 1 within `1e-9`.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        let m = Self::new(weights)?;
        m.ensure_probability()?;
        Ok(m)
    }

    /// Builds a probability from weights that may carry round-off (tiny
    /// negatives, mass off by a few ulps). Used for LP outputs.
    pub(crate) fn from_solver(weights: Vec<f64>) -> Self {
        let clipped: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let weights = if total > 0.0 {
            clipped.into_iter().map(|w| w / total).collect()
        } else {
            clipped
        };
        Self { weights }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn dirac(n: usize, at: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= TOL
    }

    pub fn ensure_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::InvalidMeasure(format!(
                "total mass {} is not 1",
                self.mass()
            )))
        }
    }

    pub fn ensure_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.len(),
            })
        }
    }

    /// Mass of a set of outcomes.
    pub fn mass_of(&self, outcomes: &[usize]) -> f64 {
        outcomes.iter().map(|&i| self.weights[i]).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let total = self.mass();
        if total <= 0.0 {
            return Err(Error::InvalidMeasure(
                "cannot normalize a zero measure".into(),
            ));
        }
        Ok(Self {
            weights: self.weights.iter().map(|w| w / total).collect(),
        })
    }

    /// `(1 - s) * self + s * other`.
    pub fn mix(&self, other: &Self, s: f64) -> Self {
        Self {
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (1.0 - s) * a + s * b)
                .collect(),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > TOL).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Real value per outcome. User input is finite; conditional functionals may
/// produce `-inf` on atoms no admissible measure can reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomVariable {
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidVariable("empty value vector".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidVariable(format!(
                "value {i} = {v} is not finite"
            )));
        }
        Ok(Self { values })
    }

    /// Allows `-inf` entries (never `+inf` or NaN).
    pub(crate) fn extended(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| !v.is_nan() && *v != f64::INFINITY));
        Self { values }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn indicator(n: usize, set: &[usize]) -> Self {
        let mut values = vec![0.0; n];
        for &i in set {
            values[i] = 1.0;
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.len(),
            })
        }
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn shift(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + a).collect(),
        }
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }

    /// `max_i |self(i) - other(i)|`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Disjoint cover of `{0, …, n-1}` by nonempty atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    n: usize,
    atoms: Vec<Vec<usize>>,
    atom_of: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, atoms: Vec<Vec<usize>>) -> Result<Self> {
        let mut atom_of = vec![usize::MAX; n];
        for (a, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err(Error::InvalidPartition(format!("atom {a} is empty")));
            }
            for &i in atom {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "outcome {i} out of range 0..{n}"
                    )));
                }
                if atom_of[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "outcome {i} appears in two atoms"
                    )));
                }
                atom_of[i] = a;
            }
        }
        if let Some(i) = atom_of.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "outcome {i} is not covered"
            )));
        }
        Ok(Self { n, atoms, atom_of })
    }

    /// `{Ω}`.
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            atoms: vec![(0..n).collect()],
            atom_of: vec![0; n],
        }
    }

    /// Every outcome its own atom.
    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            atoms: (0..n).map(|i| vec![i]).collect(),
            atom_of: (0..n).collect(),
        }
    }

    /// Atoms of consecutive blocks of the given sizes.
    pub fn blocks(sizes: &[usize]) -> Self {
        let mut atoms = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for &s in sizes {
            atoms.push((next..next + s).collect());
            next += s;
        }
        Self::new(next, atoms).expect("blocks are a partition")
    }

    pub fn space_len(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_of(&self, outcome: usize) -> usize {
        self.atom_of[outcome]
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn is_singletons(&self) -> bool {
        self.atoms.len() == self.n
    }

    /// Expands per-atom values to a per-outcome variable.
    pub fn expand(&self, per_atom: &[f64]) -> RandomVariable {
        RandomVariable::extended(self.atom_of.iter().map(|&a| per_atom[a]).collect())
    }

    /// Whether `z` is constant on every atom (within `1e-9`).
    pub fn is_measurable(&self, z: &RandomVariable) -> bool {
        self.atoms.iter().all(|atom| {
            let v0 = z.values()[atom[0]];
            atom.iter().all(|&i| (z.values()[i] - v0).abs() <= TOL)
        })
    }
}

/// True iff every atom of `fine` lies inside a single atom of `coarse`.
pub fn refines(fine: &Partition, coarse: &Partition) -> Result<bool> {
    if fine.n != coarse.n {
        return Err(Error::DimensionMismatch {
            expected: coarse.n,
            found: fine.n,
        });
    }
    Ok(fine.atoms.iter().all(|atom| {
        let target = coarse.atom_of[atom[0]];
        atom.iter().all(|&i| coarse.atom_of[i] == target)
    }))
}

/// Increasing sequence of partitions starting from the trivial one.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    stages: Vec<Partition>,
}

impl Filtration {
    pub fn new(stages: Vec<Partition>) -> Result<Self> {
        let first = stages
            .first()
            .ok_or_else(|| Error::InvalidFiltration("no stages".into()))?;
        if !first.is_trivial() {
            return Err(Error::InvalidFiltration(
                "first stage must be the trivial partition".into(),
            ));
        }
        for (t, pair) in stages.windows(2).enumerate() {
            if !refines(&pair[1], &pair[0])? {
                return Err(Error::InvalidFiltration(format!(
                    "stage {} does not refine stage {}",
                    t + 2,
                    t + 1
                )));
            }
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Partition] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn space_len(&self) -> usize {
        self.stages[0].space_len()
    }

    /// Whether the last stage separates every outcome (`F_T = F`).
    pub fn is_complete(&self) -> bool {
        self.stages.last().is_some_and(Partition::is_singletons)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// 1-based stage; the root sits at stage 1.
    pub stage: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub label: Option<String>,
}

/// Staged scenario tree. Leaves, enumerated depth-first, are the scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree {
    nodes: Vec<TreeNode>,
    leaves: Vec<usize>,
    depth: usize,
}

impl ScenarioTree {
    /// Builds a tree from a parent list; node 0 must be the unique root.
    /// Children keep the order in which they appear in the list.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        if parents.is_empty() {
            return Err(Error::InvalidTree("no nodes".into()));
        }
        if parents[0].is_some() {
            return Err(Error::InvalidTree("node 0 must be the root".into()));
        }
        let mut nodes: Vec<TreeNode> = parents
            .iter()
            .map(|&parent| TreeNode {
                stage: 0,
                parent,
                children: Vec::new(),
                label: None,
            })
            .collect();
        for (i, p) in parents.iter().enumerate().skip(1) {
            match p {
                None => {
                    return Err(Error::InvalidTree(format!(
                        "node {i} has no parent; only node 0 may be a root"
                    )))
                }
                Some(p) if *p >= parents.len() || *p == i => {
                    return Err(Error::InvalidTree(format!(
                        "node {i} has invalid parent {p}"
                    )))
                }
                Some(p) => nodes[*p].children.push(i),
            }
        }
        // assign stages by traversal; catches cycles and disconnected nodes
        nodes[0].stage = 1;
        let mut stack = vec![0usize];
        let mut seen = 1;
        while let Some(v) = stack.pop() {
            let children = nodes[v].children.clone();
            for c in children {
                if nodes[c].stage != 0 {
                    return Err(Error::InvalidTree(format!("node {c} reached twice")));
                }
                nodes[c].stage = nodes[v].stage + 1;
                seen += 1;
                stack.push(c);
            }
        }
        if seen != nodes.len() {
            return Err(Error::InvalidTree(
                "tree is not connected (cycle or orphan)".into(),
            ));
        }
        Self::finish(nodes)
    }

    /// Full tree where every node at depth `t` has `branching[t]` children.
    pub fn uniform(branching: &[usize]) -> Result<Self> {
        if branching.contains(&0) {
            return Err(Error::InvalidTree(
                "branching factors must be positive".into(),
            ));
        }
        let mut parents = vec![None];
        let mut level = vec![0usize];
        for &b in branching {
            let mut next = Vec::with_capacity(level.len() * b);
            for &v in &level {
                for _ in 0..b {
                    parents.push(Some(v));
                    next.push(parents.len() - 1);
                }
            }
            level = next;
        }
        Self::from_parents(&parents)
    }

    fn finish(nodes: Vec<TreeNode>) -> Result<Self> {
        let depth = nodes.iter().map(|n| n.stage).max().unwrap_or(1);
        let mut leaves = Vec::new();
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            if nodes[v].children.is_empty() {
                if nodes[v].stage != depth {
                    return Err(Error::InvalidTree(format!(
                        "leaf {v} sits at stage {} but the tree has depth {depth}",
                        nodes[v].stage
                    )));
                }
                leaves.push(v);
            } else {
                stack.extend(nodes[v].children.iter().rev());
            }
        }
        Ok(Self {
            nodes,
            leaves,
            depth,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Option<String>>) -> Result<Self> {
        if labels.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                found: labels.len(),
            });
        }
        for (node, label) in self.nodes.iter_mut().zip(labels) {
            node.label = label;
        }
        Ok(self)
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    /// Leaves in depth-first order; scenario `k` is `leaves()[k]`.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    /// Number of stages `T` (the root is stage 1, leaves stage `T`).
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Ancestor of `node` at `stage` (`stage ≤ node.stage`).
    pub fn ancestor_at(&self, mut node: usize, stage: usize) -> usize {
        while self.nodes[node].stage > stage {
            node = self.nodes[node].parent.expect("non-root has parent");
        }
        node
    }

    /// Scenario indices below `node`.
    pub fn scenarios_below(&self, node: usize) -> Vec<usize> {
        let stage = self.nodes[node].stage;
        (0..self.leaves.len())
            .filter(|&k| self.ancestor_at(self.leaves[k], stage) == node)
            .collect()
    }

    /// Nodes of one stage in depth-first order.
    pub fn stage_nodes(&self, stage: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            if self.nodes[v].stage == stage {
                out.push(v);
            } else if self.nodes[v].stage < stage {
                stack.extend(self.nodes[v].children.iter().rev());
            }
        }
        out
    }
}

/// Filtration on the leaves: stage `t` groups scenarios by their stage-`t`
/// ancestor.
pub fn tree_filtration(tree: &ScenarioTree) -> Result<Filtration> {
    let n = tree.leaves.len();
    let mut stages = Vec::with_capacity(tree.depth);
    for t in 1..=tree.depth {
        let atoms = tree
            .stage_nodes(t)
            .into_iter()
            .map(|v| tree.scenarios_below(v))
            .collect();
        stages.push(Partition::new(n, atoms)?);
    }
    Filtration::new(stages)
}

/// `E_Q[Z] = Σ Z(i) Q(i)`.
pub fn expectation(z: &RandomVariable, q: &DiscreteMeasure) -> Result<f64> {
    z.ensure_len(q.len())?;
    q.ensure_probability()?;
    if !z.is_finite() {
        return Err(Error::InvalidVariable(
            "expectation of a non-finite variable".into(),
        ));
    }
    Ok(dot(z.values(), q.weights()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-atom `Q`-mean of `Z`; `-inf` on atoms with `Q(Υ) = 0`.
pub fn conditional_expectation(
    z: &RandomVariable,
    q: &DiscreteMeasure,
    g: &Partition,
) -> Result<RandomVariable> {
    z.ensure_len(q.len())?;
    z.ensure_len(g.space_len())?;
    q.ensure_probability()?;
    if !z.is_finite() {
        return Err(Error::InvalidVariable(
            "conditional expectation of a non-finite variable".into(),
        ));
    }
    let per_atom: Vec<f64> = g
        .atoms()
        .iter()
        .map(|atom| {
            let mass = q.mass_of(atom);
            if mass > 0.0 {
                atom.iter()
                    .map(|&i| q.weights()[i] * z.values()[i])
                    .sum::<f64>()
                    / mass
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    Ok(g.expand(&per_atom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::new(v.to_vec()).unwrap()
    }

    #[test]
    fn expectation_examples() {
        let z = rv(&[1.0, 2.0, 3.0, 4.0]);
        assert!((expectation(&z, &DiscreteMeasure::uniform(4)).unwrap() - 2.5).abs() < 1e-12);
        let q = DiscreteMeasure::probability(vec![0.2, 0.5, 0.3]).unwrap();
        assert!((expectation(&RandomVariable::constant(3, 7.5), &q).unwrap() - 7.5).abs() < 1e-12);
        assert!((expectation(&rv(&[1.0, 0.0, 0.0]), &q).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn expectation_rejects_non_probability() {
        let q = DiscreteMeasure::new(vec![0.5, 0.6]).unwrap();
        assert!(matches!(
            expectation(&rv(&[1.0, 2.0]), &q),
            Err(Error::InvalidMeasure(_))
        ));
    }

    #[test]
    fn conditional_expectation_examples() {
        let z = rv(&[1.0, 2.0, 3.0, 4.0]);
        let g = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let c = conditional_expectation(&z, &DiscreteMeasure::uniform(4), &g).unwrap();
        assert_eq!(c.values(), &[1.5, 1.5, 3.5, 3.5]);

        let c = conditional_expectation(&z, &DiscreteMeasure::uniform(4), &Partition::trivial(4))
            .unwrap();
        assert!(c.values().iter().all(|v| (v - 2.5).abs() < 1e-12));

        let q = DiscreteMeasure::probability(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let c = conditional_expectation(&z, &q, &g).unwrap();
        assert_eq!(c.values()[..2], [1.5, 1.5]);
        assert!(c.values()[2..].iter().all(|v| *v == f64::NEG_INFINITY));
    }

    #[test]
    fn refines_examples() {
        let n = 3;
        assert!(refines(&Partition::singletons(n), &Partition::trivial(n)).unwrap());
        assert!(!refines(&Partition::trivial(n), &Partition::singletons(n)).unwrap());
        let a = Partition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        let b = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        assert!(!refines(&a, &b).unwrap());
        assert!(refines(&Partition::trivial(2), &Partition::trivial(3)).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1, 3]]).is_err());
    }

    #[test]
    fn filtration_validation() {
        let p2 = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(Filtration::new(vec![
            Partition::trivial(4),
            p2.clone(),
            Partition::singletons(4)
        ])
        .is_ok());
        assert!(Filtration::new(vec![p2.clone()]).is_err());
        let crossing = Partition::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        assert!(Filtration::new(vec![Partition::trivial(4), p2, crossing]).is_err());
    }

    #[test]
    fn tree_filtration_binary() {
        let tree = ScenarioTree::uniform(&[2, 2]).unwrap();
        let f = tree_filtration(&tree).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.stages()[0].atoms(), &[vec![0, 1, 2, 3]]);
        assert_eq!(f.stages()[1].atoms(), &[vec![0, 1], vec![2, 3]]);
        assert!(f.stages()[2].is_singletons());
    }

    #[test]
    fn tree_filtration_chain_and_ternary() {
        let chain = ScenarioTree::from_parents(&[None, Some(0), Some(1)]).unwrap();
        let f = tree_filtration(&chain).unwrap();
        assert_eq!(f.len(), 3);
        assert!(f.stages().iter().all(|p| p.atoms() == [vec![0]]));

        let tree = ScenarioTree::uniform(&[3, 3]).unwrap();
        let f = tree_filtration(&tree).unwrap();
        assert_eq!(tree.leaves().len(), 9);
        assert_eq!(f.stages()[1].atom_count(), 3);
        assert!(f.stages()[1].atoms().iter().all(|a| a.len() == 3));
    }

    #[test]
    fn malformed_trees() {
        assert!(ScenarioTree::from_parents(&[None, None]).is_err());
        assert!(ScenarioTree::from_parents(&[None, Some(0), Some(0), Some(1)]).is_err()); // leaf depths differ
        assert!(ScenarioTree::from_parents(&[None, Some(2), Some(1)]).is_err());
        // cycle
    }

    #[test]
    fn metric_validation() {
        let ok = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(FiniteSpace::new(2).unwrap().with_metric(ok).is_ok());
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(FiniteSpace::new(2).unwrap().with_metric(asym).is_err());
        let tri = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        assert!(FiniteSpace::new(3).unwrap().with_metric(tri).is_err());
    }
}
