//! Composite (nested) multistage functionals.
//!
//! `𝔯(Z) = R_{|F_1}(R_{|F_2}(… R_{|F_T}(Z)))` over a filtration, the
//! rectangular backward recursion over per-stage ambiguity sets, the static
//! product supremum `R`, and the induced set whose static worst case
//! reproduces `𝔯` for two stages.

use std::collections::HashSet;

use serde::Serialize;

use crate::ambiguity::{AmbiguitySet, Kind};
use crate::conditional::conditional_robust;
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Filtration, Partition, RandomVariable, ScenarioTree};
use crate::rng::SplitMix64;
use crate::TOL;

/// Default cap on enumerated products, selectors and vertex tuples.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Per-stage ambiguity sets on independent stage spaces.
///
/// Scenarios of the product space are enumerated lexicographically with the
/// first stage varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangularSpec {
    stages: Vec<AmbiguitySet>,
}

impl RectangularSpec {
    pub fn new(stages: Vec<AmbiguitySet>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidProblem(
                "rectangular spec needs at least one stage".into(),
            ));
        }
        let count = stages.iter().map(|s| s.len() as u128).product::<u128>();
        if count > ENUMERATION_CAP {
            return Err(Error::CapExceeded {
                what: "product scenarios".into(),
                count,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[AmbiguitySet] {
        &self.stages
    }

    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.stages.iter().map(AmbiguitySet::len).collect()
    }

    pub fn scenario_count(&self) -> usize {
        self.sizes().iter().product()
    }

    /// Stage outcomes of a scenario index.
    pub fn tuple(&self, mut index: usize) -> Vec<usize> {
        let sizes = self.sizes();
        let mut out = vec![0; sizes.len()];
        for t in (0..sizes.len()).rev() {
            out[t] = index % sizes[t];
            index /= sizes[t];
        }
        out
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        tuple
            .iter()
            .zip(self.sizes())
            .fold(0, |acc, (x, n)| acc * n + x)
    }

    /// Levels `0..=T`: level `k` groups scenarios by their first `k` stages.
    pub fn filtration(&self) -> Filtration {
        let sizes = self.sizes();
        let total = self.scenario_count();
        let mut stages = Vec::with_capacity(sizes.len() + 1);
        let mut block = total;
        stages.push(Partition::trivial(total));
        for n in &sizes {
            block /= n;
            stages.push(Partition::blocks(&vec![block; total / block]));
        }
        Filtration::new(stages).expect("prefix partitions refine")
    }

    /// `Q_1 × … × Q_T` on the product space.
    pub fn product(&self, marginals: &[&DiscreteMeasure]) -> DiscreteMeasure {
        let weights = (0..self.scenario_count())
            .map(|i| {
                self.tuple(i)
                    .iter()
                    .zip(marginals)
                    .map(|(&x, q)| q.weights()[x])
                    .product()
            })
            .collect();
        DiscreteMeasure::from_solver(weights)
    }

    /// All products of stage generators as one finite family.
    pub fn product_family(&self) -> Result<AmbiguitySet> {
        let gens = self
            .stages
            .iter()
            .map(AmbiguitySet::generators)
            .collect::<Result<Vec<_>>>()?;
        let count = gens.iter().map(|g| g.len() as u128).product::<u128>();
        if count > ENUMERATION_CAP {
            return Err(Error::CapExceeded {
                what: "product vertices".into(),
                count,
                cap: ENUMERATION_CAP,
            });
        }
        let mut members = Vec::with_capacity(count as usize);
        for_each_tuple(&gens.iter().map(Vec::len).collect::<Vec<_>>(), |pick| {
            let marg: Vec<&DiscreteMeasure> =
                pick.iter().enumerate().map(|(t, &k)| &gens[t][k]).collect();
            members.push(self.product(&marg));
        });
        AmbiguitySet::finite_family(members)
    }

    fn check_variable(&self, z: &RandomVariable) -> Result<()> {
        z.ensure_len(self.scenario_count())?;
        if !z.is_finite() {
            return Err(Error::InvalidVariable(
                "composite evaluation needs a finite variable".into(),
            ));
        }
        Ok(())
    }

    /// The same spec with stages reordered: stage `k` of the result is stage
    /// `perm[k]` of `self`; `z` is re-indexed to match.
    pub fn permuted(&self, perm: &[usize], z: &RandomVariable) -> Result<(Self, RandomVariable)> {
        let t = self.horizon();
        let mut seen = vec![false; t];
        if perm.len() != t
            || perm
                .iter()
                .any(|&k| k >= t || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::InvalidProblem(format!(
                "{perm:?} is not a permutation of 0..{t}"
            )));
        }
        let spec = Self::new(perm.iter().map(|&k| self.stages[k].clone()).collect())?;
        let mut values = vec![0.0; z.len()];
        for (i, v) in values.iter_mut().enumerate() {
            let new_tuple = spec.tuple(i);
            let mut old = vec![0; t];
            for (k, &src) in perm.iter().enumerate() {
                old[src] = new_tuple[k];
            }
            *v = z.values()[self.index(&old)];
        }
        Ok((spec, RandomVariable::new(values)?))
    }
}

/// Calls `f` on every tuple of `0..sizes[t]`, last coordinate fastest.
fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut pick = vec![0; sizes.len()];
    loop {
        f(&pick);
        let mut t = sizes.len();
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            pick[t] += 1;
            if pick[t] < sizes[t] {
                break;
            }
            pick[t] = 0;
        }
    }
}

/// Result of a filtration fold.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeValue {
    pub value: f64,
    /// `R_{|F_k}(…)` for each level `k`, first level first.
    pub stage_values: Vec<RandomVariable>,
}

/// Folds [`conditional_robust`] backward over `f`. An unreachable atom at any
/// level aborts the evaluation.
pub fn composite_functional(
    set: &AmbiguitySet,
    f: &Filtration,
    z: &RandomVariable,
    p: &DiscreteMeasure,
) -> Result<CompositeValue> {
    if f.space_len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            found: f.space_len(),
        });
    }
    let mut current = z.clone();
    let mut stage_values = Vec::with_capacity(f.len());
    for (k, g) in f.stages().iter().enumerate().rev() {
        let c = conditional_robust(set, &current, g, p)?;
        if let Some(atom) = c.first_unreachable() {
            return Err(Error::UnreachableAtom { stage: k + 1, atom });
        }
        current = c.values;
        stage_values.push(current.clone());
    }
    stage_values.reverse();
    let value = current.values()[0];
    Ok(CompositeValue {
        value,
        stage_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominance {
    pub static_value: f64,
    pub composite_value: f64,
    pub holds: bool,
}

/// `R(Z) ≤ 𝔯(Z)`.
pub fn composite_dominates_static(
    set: &AmbiguitySet,
    f: &Filtration,
    z: &RandomVariable,
    p: &DiscreteMeasure,
) -> Result<Dominance> {
    let static_value = set.robust_expectation(z)?.0;
    let composite_value = composite_functional(set, f, z, p)?.value;
    Ok(Dominance {
        static_value,
        composite_value,
        holds: static_value <= composite_value + TOL,
    })
}

/// Value of the rectangular recursion with its stagewise tables.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedValue {
    pub value: f64,
    /// `tables[t]` holds `Z_t` indexed by scenario prefixes of length `t`;
    /// `tables[T]` is `Z` and `tables[0]` the single value.
    pub tables: Vec<Vec<f64>>,
}

/// `Z_{t-1}(h) = sup_{Q ∈ M_t} E_Q[Z_t(h, ·)]`, folded backward from `Z_T = Z`.
pub fn rectangular_nested(spec: &RectangularSpec, z: &RandomVariable) -> Result<NestedValue> {
    spec.check_variable(z)?;
    let sizes = spec.sizes();
    let t_max = sizes.len();
    let mut tables = vec![Vec::new(); t_max + 1];
    tables[t_max] = z.values().to_vec();
    for t in (1..=t_max).rev() {
        let n = sizes[t - 1];
        let next: Vec<f64> = tables[t]
            .chunks(n)
            .map(|block| {
                let v = RandomVariable::new(block.to_vec())?;
                spec.stages[t - 1].robust_expectation(&v).map(|(r, _)| r)
            })
            .collect::<Result<_>>()?;
        tables[t - 1] = next;
    }
    Ok(NestedValue {
        value: tables[0][0],
        tables,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equivalence {
    pub nested: f64,
    pub composite: f64,
    pub difference: f64,
    pub holds: bool,
}

/// Compares the rectangular recursion with the filtration fold over the
/// product family of stage vertices.
pub fn rectangular_equivalence_check(
    spec: &RectangularSpec,
    z: &RandomVariable,
    p: &DiscreteMeasure,
) -> Result<Equivalence> {
    let nested = rectangular_nested(spec, z)?.value;
    let family = spec.product_family()?;
    let composite = composite_functional(&family, &spec.filtration(), z, p)?.value;
    let difference = (nested - composite).abs();
    Ok(Equivalence {
        nested,
        composite,
        difference,
        holds: difference <= 1e-7,
    })
}

/// Static supremum over product measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticValue {
    pub value: f64,
    /// Set when the value comes from coordinate ascent rather than an
    /// exhaustive vertex scan (a lower bound on the true supremum).
    pub heuristic: bool,
}

fn product_expectation(
    spec: &RectangularSpec,
    marginals: &[&DiscreteMeasure],
    z: &RandomVariable,
) -> f64 {
    // nested weighted sums: cheaper than materializing the product measure
    let sizes = spec.sizes();
    let mut current = z.values().to_vec();
    for t in (0..sizes.len()).rev() {
        let q = marginals[t].weights();
        current = current
            .chunks(sizes[t])
            .map(|block| block.iter().zip(q).map(|(v, w)| v * w).sum())
            .collect();
    }
    current[0]
}

/// `sup E_{Q_1 × … × Q_T}[Z]` over `Q_t ∈ M_t`.
///
/// Exact scan of all vertex tuples when there are at most `cap` of them;
/// otherwise alternating coordinate maximization with restarts.
pub fn static_rectangular(spec: &RectangularSpec, z: &RandomVariable) -> Result<StaticValue> {
    static_rectangular_capped(spec, z, ENUMERATION_CAP)
}

pub fn static_rectangular_capped(
    spec: &RectangularSpec,
    z: &RandomVariable,
    cap: u128,
) -> Result<StaticValue> {
    spec.check_variable(z)?;
    let gens: Option<Vec<Vec<DiscreteMeasure>>> = spec
        .stages
        .iter()
        .map(|s| match s.generators() {
            Ok(g) => Ok(Some(g)),
            Err(Error::CapExceeded { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    if let Some(gens) = gens {
        let count = gens.iter().map(|g| g.len() as u128).product::<u128>();
        if count <= cap {
            return Ok(StaticValue {
                value: static_rectangular_exact(spec, &gens, z)?,
                heuristic: false,
            });
        }
    }
    Ok(StaticValue {
        value: coordinate_ascent(spec, z, 8)?,
        heuristic: true,
    })
}

/// Exact scan over tuples of precomputed stage generators.
pub fn static_rectangular_exact(
    spec: &RectangularSpec,
    gens: &[Vec<DiscreteMeasure>],
    z: &RandomVariable,
) -> Result<f64> {
    spec.check_variable(z)?;
    if gens.len() != spec.horizon() {
        return Err(Error::DimensionMismatch {
            expected: spec.horizon(),
            found: gens.len(),
        });
    }
    let mut best = f64::NEG_INFINITY;
    for_each_tuple(&gens.iter().map(Vec::len).collect::<Vec<_>>(), |pick| {
        let marg: Vec<&DiscreteMeasure> =
            pick.iter().enumerate().map(|(t, &k)| &gens[t][k]).collect();
        best = best.max(product_expectation(spec, &marg, z));
    });
    Ok(best)
}

fn coordinate_ascent(spec: &RectangularSpec, z: &RandomVariable, restarts: usize) -> Result<f64> {
    let sizes = spec.sizes();
    let mut rng = SplitMix64::new(crate::rng::DEFAULT_SEED);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..restarts {
        let mut marg = spec
            .stages
            .iter()
            .map(|s| s.sample_member(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        let mut value = f64::NEG_INFINITY;
        for _sweep in 0..200 {
            let before = value;
            for t in 0..sizes.len() {
                let mut c = vec![0.0; sizes[t]];
                for i in 0..spec.scenario_count() {
                    let tup = spec.tuple(i);
                    let w: f64 = (0..sizes.len())
                        .filter(|&s| s != t)
                        .map(|s| marg[s].weights()[tup[s]])
                        .product();
                    c[tup[t]] += w * z.values()[i];
                }
                let (v, q) = spec.stages[t].robust_expectation(&RandomVariable::new(c)?)?;
                marg[t] = q;
                value = v;
            }
            if value <= before + 1e-13 {
                break;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationReport {
    pub permutations: Vec<Vec<usize>>,
    pub static_values: Vec<f64>,
    pub nested_values: Vec<f64>,
    /// All static values agree with the identity order within `1e-9`.
    pub static_invariant: bool,
    /// Some nested value differs from the identity order by more than `1e-9`.
    pub nested_changed: bool,
}

/// Recomputes `R` and `𝔯` under each stage permutation.
pub fn permutation_invariance_check(
    spec: &RectangularSpec,
    z: &RandomVariable,
    permutations: &[Vec<usize>],
) -> Result<PermutationReport> {
    let base_static = static_rectangular(spec, z)?.value;
    let base_nested = rectangular_nested(spec, z)?.value;
    let mut rep = PermutationReport {
        permutations: permutations.to_vec(),
        static_values: Vec::new(),
        nested_values: Vec::new(),
        static_invariant: true,
        nested_changed: false,
    };
    for perm in permutations {
        let (ps, pz) = spec.permuted(perm, z)?;
        let s = static_rectangular(&ps, &pz)?.value;
        let n = rectangular_nested(&ps, &pz)?.value;
        rep.static_invariant &= (s - base_static).abs() <= TOL;
        rep.nested_changed |= (n - base_nested).abs() > TOL;
        rep.static_values.push(s);
        rep.nested_values.push(n);
    }
    Ok(rep)
}

/// Two-stage induced family: products built from a first-stage member and a
/// selector choosing a second-stage member per first-stage outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedSet {
    /// Distinct measures (within `1e-12`).
    pub measures: Vec<DiscreteMeasure>,
    /// Number of (member, selector) pairs enumerated: `m₁·m₂ⁿ`.
    pub pre_dedup_count: u128,
    /// Constant-selector products `Q₁ × Q₂`.
    pub family1: Vec<DiscreteMeasure>,
}

impl InducedSet {
    fn max_over(ms: &[DiscreteMeasure], z: &RandomVariable) -> f64 {
        ms.iter()
            .map(|q| {
                q.weights()
                    .iter()
                    .zip(z.values())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max E_Q[Z]` over the induced family.
    pub fn max_expectation(&self, z: &RandomVariable) -> f64 {
        Self::max_over(&self.measures, z)
    }

    /// `max E_Q[Z]` over the constant-selector products.
    pub fn family1_max(&self, z: &RandomVariable) -> f64 {
        Self::max_over(&self.family1, z)
    }
}

fn finite_members(set: &AmbiguitySet, stage: usize) -> Result<&[DiscreteMeasure]> {
    match set.kind() {
        Kind::FiniteFamily { measures } => Ok(measures),
        _ => Err(Error::InvalidProblem(format!(
            "induced set needs finite families; stage {stage} is {}",
            set.kind_name()
        ))),
    }
}

fn quantize(q: &DiscreteMeasure) -> Vec<i64> {
    q.weights()
        .iter()
        .map(|w| (w * 1e12).round() as i64)
        .collect()
}

/// Enumerates the induced set of a two-stage spec with finite-family stages.
pub fn induced_set(spec: &RectangularSpec) -> Result<InducedSet> {
    induced_set_capped(spec, ENUMERATION_CAP)
}

pub fn induced_set_capped(spec: &RectangularSpec, cap: u128) -> Result<InducedSet> {
    if spec.horizon() != 2 {
        return Err(Error::InvalidProblem(format!(
            "induced set is built for two stages, got {}",
            spec.horizon()
        )));
    }
    let first = finite_members(&spec.stages[0], 1)?;
    let second = finite_members(&spec.stages[1], 2)?;
    let n = spec.stages[0].len();
    let (m1, m2) = (first.len() as u128, second.len() as u128);
    let count = (m2 as f64).powi(n as i32) * m1 as f64;
    if count > cap as f64 {
        return Err(Error::CapExceeded {
            what: "induced-set selectors".into(),
            count: if count >= u128::MAX as f64 {
                u128::MAX
            } else {
                count as u128
            },
            cap,
        });
    }
    let pre_dedup_count = m1 * m2.pow(n as u32);
    let mut seen = HashSet::new();
    let mut measures = Vec::new();
    let sizes = vec![second.len(); n];
    for q1 in first {
        for_each_tuple(&sizes, |selector| {
            let mut w = vec![0.0; spec.scenario_count()];
            for (i, wi) in w.iter_mut().enumerate() {
                let tup = spec.tuple(i);
                *wi = q1.weights()[tup[0]] * second[selector[tup[0]]].weights()[tup[1]];
            }
            let q = DiscreteMeasure::from_solver(w);
            if seen.insert(quantize(&q)) {
                measures.push(q);
            }
        });
    }
    let mut family1 = Vec::new();
    for q1 in first {
        for q2 in second {
            family1.push(spec.product(&[q1, q2]));
        }
    }
    Ok(InducedSet {
        measures,
        pre_dedup_count,
        family1,
    })
}

/// Scenario tree with an ambiguity set over the children of every inner node.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryDependentSpec {
    tree: ScenarioTree,
    node_sets: Vec<Option<AmbiguitySet>>,
}

impl HistoryDependentSpec {
    pub fn new(tree: ScenarioTree, node_sets: Vec<Option<AmbiguitySet>>) -> Result<Self> {
        if node_sets.len() != tree.nodes().len() {
            return Err(Error::DimensionMismatch {
                expected: tree.nodes().len(),
                found: node_sets.len(),
            });
        }
        for (i, (node, set)) in tree.nodes().iter().zip(&node_sets).enumerate() {
            match (node.children.is_empty(), set) {
                (true, None) => {}
                (false, Some(s)) if s.len() == node.children.len() => {}
                (false, Some(s)) => {
                    return Err(Error::InvalidTree(format!(
                        "node {i} has {} children but its set has {} outcomes",
                        node.children.len(),
                        s.len()
                    )))
                }
                (false, None) => {
                    return Err(Error::InvalidTree(format!(
                        "inner node {i} has no ambiguity set"
                    )))
                }
                (true, Some(_)) => {
                    return Err(Error::InvalidTree(format!(
                        "leaf {i} carries an ambiguity set"
                    )))
                }
            }
        }
        Ok(Self { tree, node_sets })
    }

    pub fn tree(&self) -> &ScenarioTree {
        &self.tree
    }

    pub fn node_set(&self, node: usize) -> Option<&AmbiguitySet> {
        self.node_sets[node].as_ref()
    }
}

/// Backward recursion on a tree; `z` is indexed by leaf order. Returns the
/// root value and the value at every node.
pub fn history_nested(spec: &HistoryDependentSpec, z: &RandomVariable) -> Result<(f64, Vec<f64>)> {
    let tree = &spec.tree;
    z.ensure_len(tree.leaves().len())?;
    let mut value = vec![f64::NAN; tree.nodes().len()];
    for (k, &leaf) in tree.leaves().iter().enumerate() {
        value[leaf] = z.values()[k];
    }
    for stage in (1..tree.depth()).rev() {
        for node in tree.stage_nodes(stage) {
            let children = &tree.node(node).children;
            let v = RandomVariable::new(children.iter().map(|&c| value[c]).collect())?;
            let set = spec.node_sets[node].as_ref().expect("validated inner node");
            value[node] = set.robust_expectation(&v)?.0;
        }
    }
    Ok((value[0], value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::new(v.to_vec()).unwrap()
    }

    fn dm(w: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::probability(w.to_vec()).unwrap()
    }

    /// Strict-gap instance: uniform first stage, point masses second stage,
    /// Z(a,u)=1, Z(a,v)=0, Z(b,u)=0, Z(b,v)=1.
    fn gap_instance() -> (RectangularSpec, RandomVariable) {
        let spec = RectangularSpec::new(vec![
            AmbiguitySet::singleton(DiscreteMeasure::uniform(2)).unwrap(),
            AmbiguitySet::simplex(2),
        ])
        .unwrap();
        (spec, rv(&[1.0, 0.0, 0.0, 1.0]))
    }

    #[test]
    fn indexing_round_trips() {
        let spec =
            RectangularSpec::new(vec![AmbiguitySet::simplex(2), AmbiguitySet::simplex(3)]).unwrap();
        assert_eq!(spec.scenario_count(), 6);
        for i in 0..6 {
            assert_eq!(spec.index(&spec.tuple(i)), i);
        }
        assert_eq!(spec.tuple(4), vec![1, 1]);
        let f = spec.filtration();
        assert_eq!(f.len(), 3);
        assert_eq!(f.stages()[1].atoms(), &[vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn trivial_then_singletons_is_static() {
        let m = AmbiguitySet::avar(0.4, dm(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let f = Filtration::new(vec![Partition::trivial(4), Partition::singletons(4)]).unwrap();
        let z = rv(&[2.0, -1.0, 4.0, 0.0]);
        let c = composite_functional(&m, &f, &z, &DiscreteMeasure::uniform(4)).unwrap();
        assert!((c.value - m.robust_expectation(&z).unwrap().0).abs() < 1e-9);
    }

    #[test]
    fn simplex_composite_is_max() {
        let f = Filtration::new(vec![
            Partition::trivial(4),
            Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap(),
            Partition::singletons(4),
        ])
        .unwrap();
        let z = rv(&[1.0, 5.0, 2.0, 7.0]);
        let c = composite_functional(
            &AmbiguitySet::simplex(4),
            &f,
            &z,
            &DiscreteMeasure::uniform(4),
        )
        .unwrap();
        assert_eq!(c.value, 7.0);
        assert_eq!(c.stage_values[1].values(), &[5.0, 5.0, 7.0, 7.0]);
    }

    #[test]
    fn singleton_composite_is_expectation() {
        let p = dm(&[0.1, 0.2, 0.3, 0.4]);
        let f = Filtration::new(vec![
            Partition::trivial(4),
            Partition::new(4, vec![vec![0, 3], vec![1, 2]]).unwrap(),
            Partition::singletons(4),
        ])
        .unwrap();
        let z = rv(&[1.0, 5.0, 2.0, 7.0]);
        let d =
            composite_dominates_static(&AmbiguitySet::singleton(p.clone()).unwrap(), &f, &z, &p)
                .unwrap();
        assert!((d.composite_value - (0.1 + 1.0 + 0.6 + 2.8)).abs() < 1e-12);
        assert!((d.composite_value - d.static_value).abs() < 1e-12);
    }

    #[test]
    fn unreachable_atom_aborts() {
        let q = dm(&[0.5, 0.5, 0.0, 0.0]);
        let f = Filtration::new(vec![Partition::trivial(4), Partition::singletons(4)]).unwrap();
        let err = composite_functional(
            &AmbiguitySet::singleton(q.clone()).unwrap(),
            &f,
            &rv(&[1.0; 4]),
            &q,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnreachableAtom { stage: 2, atom: 2 }));
    }

    #[test]
    fn rectangular_avar_example() {
        let stage = AmbiguitySet::avar(0.5, DiscreteMeasure::uniform(2)).unwrap();
        let spec = RectangularSpec::new(vec![stage.clone(), stage]).unwrap();
        let n = rectangular_nested(&spec, &rv(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(n.tables[1], vec![2.0, 4.0]);
        assert_eq!(n.value, 4.0);
        let single =
            RectangularSpec::new(vec![
                AmbiguitySet::avar(0.5, DiscreteMeasure::uniform(2)).unwrap()
            ])
            .unwrap();
        assert_eq!(
            rectangular_nested(&single, &rv(&[1.0, 3.0])).unwrap().value,
            3.0
        );
    }

    #[test]
    fn rectangular_singletons_give_product_expectation() {
        let p1 = dm(&[0.3, 0.7]);
        let p2 = dm(&[0.2, 0.5, 0.3]);
        let spec = RectangularSpec::new(vec![
            AmbiguitySet::singleton(p1.clone()).unwrap(),
            AmbiguitySet::singleton(p2.clone()).unwrap(),
        ])
        .unwrap();
        let z = rv(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let mut direct = 0.0;
        for i in 0..2 {
            for j in 0..3 {
                direct += p1.weights()[i] * p2.weights()[j] * z.values()[3 * i + j];
            }
        }
        assert!((rectangular_nested(&spec, &z).unwrap().value - direct).abs() < 1e-12);
    }

    #[test]
    fn strict_gap_and_induced_set() {
        let (spec, z) = gap_instance();
        let nested = rectangular_nested(&spec, &z).unwrap().value;
        let stat = static_rectangular(&spec, &z).unwrap();
        assert_eq!(nested, 1.0);
        assert_eq!(stat.value, 0.5);
        assert!(!stat.heuristic);
        let ind = induced_set(&spec).unwrap();
        assert_eq!(ind.pre_dedup_count, 4);
        assert!((ind.max_expectation(&z) - nested).abs() < 1e-12);
        assert!((ind.family1_max(&z) - stat.value).abs() < 1e-12);
        let eq = rectangular_equivalence_check(&spec, &z, &DiscreteMeasure::uniform(4)).unwrap();
        assert!(eq.holds, "{eq:?}");
    }

    #[test]
    fn induced_set_counts() {
        let spec = RectangularSpec::new(vec![
            AmbiguitySet::finite_family(vec![dm(&[0.5, 0.5]), dm(&[0.2, 0.8])]).unwrap(),
            AmbiguitySet::finite_family(vec![
                dm(&[1.0, 0.0, 0.0]),
                dm(&[0.0, 1.0, 0.0]),
                dm(&[0.3, 0.3, 0.4]),
            ])
            .unwrap(),
        ])
        .unwrap();
        let ind = induced_set(&spec).unwrap();
        assert_eq!(ind.pre_dedup_count, 18);
        assert_eq!(ind.family1.len(), 6);
        for q in &ind.family1 {
            assert!(ind.measures.iter().any(|m| m.max_abs_diff(q) < 1e-12));
        }
        let one = RectangularSpec::new(vec![
            spec.stages()[0].clone(),
            AmbiguitySet::singleton(dm(&[0.3, 0.3, 0.4])).unwrap(),
        ])
        .unwrap();
        let ind = induced_set(&one).unwrap();
        assert_eq!(ind.measures.len(), ind.family1.len());
        assert!(matches!(
            induced_set_capped(&spec, 10),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn permutation_swap_witness() {
        let (spec, z) = gap_instance();
        let rep = permutation_invariance_check(&spec, &z, &[vec![1, 0]]).unwrap();
        assert!(rep.static_invariant);
        assert!(rep.nested_changed);
        assert_eq!(rep.nested_values, vec![0.5]);
    }

    #[test]
    fn symmetric_z_keeps_nested_value() {
        let spec =
            RectangularSpec::new(vec![AmbiguitySet::simplex(2), AmbiguitySet::simplex(2)]).unwrap();
        let z = rv(&[1.0, 2.0, 2.0, 3.0]);
        let rep = permutation_invariance_check(&spec, &z, &[vec![1, 0]]).unwrap();
        assert!(rep.static_invariant && !rep.nested_changed);
        assert_eq!(static_rectangular(&spec, &z).unwrap().value, 3.0);
    }

    #[test]
    fn heuristic_static_matches_exact_on_small_instance() {
        let spec = RectangularSpec::new(vec![
            AmbiguitySet::avar(0.3, dm(&[0.2, 0.5, 0.3])).unwrap(),
            AmbiguitySet::avar(0.6, DiscreteMeasure::uniform(3)).unwrap(),
        ])
        .unwrap();
        let z = rv(&[3.0, -1.0, 0.0, 2.0, 5.0, 1.0, -2.0, 0.5, 4.0]);
        let exact = static_rectangular(&spec, &z).unwrap();
        let approx = static_rectangular_capped(&spec, &z, 0).unwrap();
        assert!(!exact.heuristic && approx.heuristic);
        assert!(approx.value <= exact.value + 1e-9);
        assert!((approx.value - exact.value).abs() < 1e-6);
    }

    #[test]
    fn history_nested_on_tree() {
        let tree = ScenarioTree::uniform(&[2, 2]).unwrap();
        let mut sets = vec![None; tree.nodes().len()];
        sets[0] = Some(AmbiguitySet::singleton(DiscreteMeasure::uniform(2)).unwrap());
        for node in tree.stage_nodes(2) {
            sets[node] = Some(AmbiguitySet::simplex(2));
        }
        let spec = HistoryDependentSpec::new(tree, sets).unwrap();
        let (v, _) = history_nested(&spec, &rv(&[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(v, 1.0);
    }
}
