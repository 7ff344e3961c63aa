//! Randomized invariant batteries and shipped witnesses.
//!
//! Each criterion draws from its own stream derived from the seed, so the
//! draws of one criterion do not depend on which others run.

pub mod gen;
pub mod witnesses;

use serde::Serialize;

use crate::ambiguity::{dominates_all, AmbiguitySet, Kind};
use crate::composite::{
    composite_dominates_static, composite_functional, induced_set, permutation_invariance_check,
    rectangular_equivalence_check, rectangular_nested, static_rectangular,
};
use crate::conditional::{
    atom_max, conditional_avar_nested, conditional_robust, conditional_strict_monotonicity_check,
    has_property_p, tower_upper_bound_check,
};
use crate::dp::{
    compare_min_static_vs_min_nested, enumeration_check, verify_optimality_necessity,
    weak_duality_check, POLICY_CAP,
};
use crate::error::Result;
use crate::measure::{DiscreteMeasure, FiniteSpace, Partition, RandomVariable};
use crate::risk_static::{avar_dual, avar_primal, check_axioms, AvarSpec};
use crate::rng::{SplitMix64, DEFAULT_SEED};
use crate::transport::{
    ball_gap_sweep, kantorovich_dual, kr_bound_check, multistage_bound,
    multistage_bound_empirical_check, wasserstein_1, MultistageBoundSpec, TreeModel,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces the default trial count of every criterion.
    pub trials: Option<usize>,
    /// Replaces the default tolerance of every criterion.
    pub tolerance: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            trials: None,
            tolerance: None,
        }
    }
}

impl VerifyOptions {
    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    fn stream(&self, id: usize) -> SplitMix64 {
        SplitMix64::new(self.seed ^ (id as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)).fork()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub trials: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub failures: usize,
    pub detail: Vec<String>,
    pub warnings: Vec<String>,
}

impl CriterionResult {
    fn new(id: usize, name: &'static str, tolerance: f64) -> Self {
        Self {
            id,
            name,
            passed: true,
            trials: 0,
            tolerance,
            max_residual: 0.0,
            failures: 0,
            detail: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Records one comparison: `residual` must not exceed the tolerance.
    fn observe(&mut self, residual: f64) {
        self.trials += 1;
        if residual.is_nan() || residual > self.tolerance {
            self.failures += 1;
            self.passed = false;
        }
        if residual.is_nan() {
            self.max_residual = f64::NAN;
        } else if !self.max_residual.is_nan() {
            self.max_residual = self.max_residual.max(residual);
        }
    }

    /// Records a boolean requirement that is not a residual.
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.passed = false;
            self.failures += 1;
            self.detail.push(what());
        }
    }

    fn fail_with(mut self, e: crate::Error) -> Self {
        self.passed = false;
        self.failures += 1;
        self.detail.push(format!("error: {e}"));
        self
    }

    fn vacuous_warning(&mut self, planned: usize) {
        if planned == 0 {
            self.warnings
                .push("zero trials requested: randomized part is vacuous".into());
        }
    }
}

type Criterion = fn(&VerifyOptions) -> CriterionResult;

/// All criteria in order.
pub const CRITERIA: [(usize, &str, Criterion); 12] = [
    (1, "avar primal equals dual", criterion_1),
    (2, "coherence axioms and Lipschitz bound", criterion_2),
    (3, "property (P) gives atom maxima", criterion_3),
    (4, "static value below conditional tower", criterion_4),
    (5, "composite dominates static", criterion_5),
    (
        6,
        "rectangular recursion equals composite fold",
        criterion_6,
    ),
    (7, "induced set reproduces nested value", criterion_7),
    (8, "stage permutations", criterion_8),
    (9, "reference measure dominance and minimality", criterion_9),
    (10, "strict monotonicity propagates", criterion_10),
    (11, "transport distances and bounds", criterion_11),
    (12, "dynamic programming oracles", criterion_12),
];

/// Runs the criteria whose ids are listed (all when `only` is empty).
pub fn run(opts: &VerifyOptions, only: &[usize]) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|(id, _, _)| only.is_empty() || only.contains(id))
        .map(|(_, _, f)| f(opts))
        .collect()
}

fn guard(
    mut r: CriterionResult,
    body: impl FnOnce(&mut CriterionResult) -> Result<()>,
) -> CriterionResult {
    match body(&mut r) {
        Ok(()) => r,
        Err(e) => r.fail_with(e),
    }
}

pub fn criterion_1(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(500);
    let base = CriterionResult::new(1, CRITERIA[0].1, opts.tol(1e-7));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(1);
        for _ in 0..n_trials {
            let n = rng.int(1, 20);
            let alpha = if rng.bernoulli(0.1) {
                0.0
            } else {
                rng.range(0.0, 0.99)
            };
            let p = gen::sparse_measure(&mut rng, n, 0.2);
            let z = gen::variable(&mut rng, n, 10.0);
            let spec = AvarSpec::new(alpha, p)?;
            let (primal, _) = avar_primal(&spec, &z)?;
            let dual = avar_dual(&spec, &z)?;
            r.observe((primal - dual).abs());
        }
        Ok(())
    })
}

pub fn criterion_2(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(500);
    let base = CriterionResult::new(2, CRITERIA[1].1, opts.tol(1e-7));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(2);
        for kind in 0..4 {
            let n = rng.int(3, 6);
            let set = gen::set_of_kind(&mut rng, kind, n);
            let rep = check_axioms(&set, n_trials, &mut rng)?;
            for v in [
                rep.subadditivity,
                rep.monotonicity,
                rep.translation,
                rep.homogeneity,
                rep.lipschitz,
            ] {
                r.observe(v);
            }
            r.detail.push(format!(
                "{}: {} trials, max violation {:e}",
                set.kind_name(),
                rep.trials,
                rep.max_violation()
            ));
        }
        r.trials = 4 * n_trials;
        Ok(())
    })
}

/// Sets for the property-(P) battery, cycling through kinds that have it
/// and kinds that usually do not.
fn property_p_instance(rng: &mut SplitMix64, round: usize) -> Result<(AmbiguitySet, Partition)> {
    let n = rng.int(2, 6);
    let set = match round % 5 {
        0 => AmbiguitySet::simplex(n),
        1 => {
            let mut ms: Vec<DiscreteMeasure> =
                (0..n).map(|i| DiscreteMeasure::dirac(n, i)).collect();
            ms.push(gen::positive_measure(rng, n));
            AmbiguitySet::finite_family(ms)?
        }
        2 => {
            let k = rng.int(1, 3);
            gen::finite_family(rng, n, k)
        }
        3 => {
            let pts = gen::line_points(rng, n);
            AmbiguitySet::wasserstein_ball(
                gen::positive_measure(rng, n),
                rng.range(0.0, 3.0),
                FiniteSpace::on_line(&pts)?,
            )?
        }
        _ => gen::avar_set(rng, n),
    };
    Ok((set, gen::partition(rng, n)))
}

/// AVaR set with a partition whose atoms have reference mass at most `α`
/// (outcomes heavier than `α` sit alone).
fn small_atom_avar(rng: &mut SplitMix64) -> Result<(AmbiguitySet, Partition)> {
    let n = rng.int(3, 8);
    let p = gen::sparse_measure(rng, n, 0.15);
    let alpha = rng.range(0.3, 0.95);
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut atoms: Vec<Vec<usize>> = Vec::new();
    let mut mass = f64::INFINITY;
    for w in order {
        let pw = p.weights()[w];
        if mass + pw <= alpha {
            atoms.last_mut().unwrap().push(w);
            mass += pw;
        } else {
            atoms.push(vec![w]);
            mass = pw;
        }
    }
    Ok((AmbiguitySet::avar(alpha, p)?, Partition::new(n, atoms)?))
}

/// Random probability with the same support as `mu`.
fn perturbed_on_support(rng: &mut SplitMix64, mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let w: Vec<f64> = mu
        .weights()
        .iter()
        .map(|&m| {
            if m > crate::TOL {
                rng.range(0.05, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    DiscreteMeasure::probability(w.into_iter().map(|x| x / total).collect())
}

fn atom_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

pub fn criterion_3(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(200);
    let base = CriterionResult::new(3, CRITERIA[2].1, opts.tol(1e-9));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(3);
        let mut with_p = 0;
        let mut avar_cases = 0;
        for round in 0..n_trials {
            let (set, g) = if round % 2 == 0 {
                avar_cases += 1;
                let (set, g) = small_atom_avar(&mut rng)?;
                let ok = has_property_p(&set, &g)?;
                r.require(ok, || {
                    format!("round {round}: AVaR set with atoms of mass <= alpha lacks (P)")
                });
                (set, g)
            } else {
                property_p_instance(&mut rng, round / 2)?
            };
            if !has_property_p(&set, &g)? {
                continue;
            }
            with_p += 1;
            let n = set.len();
            let z = gen::variable(&mut rng, n, 5.0);
            let mu = set.reference_measure()?.normalized;
            let got = conditional_robust(&set, &z, &g, &mu)?;
            r.observe(atom_gap(&got.per_atom, &atom_max(&z, &g, &mu)));
            let p2 = perturbed_on_support(&mut rng, &mu)?;
            let again = conditional_robust(&set, &z, &g, &p2)?;
            r.observe(atom_gap(&again.per_atom, &got.per_atom));
            r.observe(atom_gap(&atom_max(&z, &g, &p2), &got.per_atom));
        }
        r.detail.push(format!(
            "{with_p} of {n_trials} instances have property (P); {avar_cases} AVaR small-atom cases"
        ));
        if n_trials > 0 && with_p == 0 {
            r.require(false, || "no instance had property (P)".into());
        }
        Ok(())
    })
}

pub fn criterion_4(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(500);
    let base = CriterionResult::new(4, CRITERIA[3].1, opts.tol(1e-9));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(4);
        for i in 0..n_trials {
            let n = rng.int(2, 7);
            let set = gen::set_of_kind(&mut rng, i, n);
            let g = gen::partition(&mut rng, n);
            let z = gen::variable(&mut rng, n, 5.0);
            let p = set.reference_measure()?.normalized;
            let t = tower_upper_bound_check(&set, &z, &g, &p)?;
            r.observe((t.lhs - t.rhs).max(0.0));
        }
        Ok(())
    })
}

pub fn criterion_5(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(500);
    let base = CriterionResult::new(5, CRITERIA[4].1, opts.tol(1e-9));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(5);
        for i in 0..n_trials {
            let n = rng.int(2, 7);
            let set = gen::set_of_kind(&mut rng, i, n);
            let f = {
                let k = rng.int(2, 4);
                gen::filtration(&mut rng, n, k)
            };
            let z = gen::variable(&mut rng, n, 5.0);
            let p = set.reference_measure()?.normalized;
            let d = composite_dominates_static(&set, &f, &z, &p)?;
            r.observe((d.static_value - d.composite_value).max(0.0));
        }
        let (spec, z) = witnesses::rectangular_gap();
        let family = spec.product_family()?;
        let p = spec.product(&[&DiscreteMeasure::uniform(2), &DiscreteMeasure::uniform(2)]);
        let composite = composite_functional(&family, &spec.filtration(), &z, &p)?.value;
        let stat = family.robust_expectation(&z)?.0;
        r.detail
            .push(format!("witness: composite {composite}, static {stat}"));
        r.require(composite - stat >= 1e-3, || {
            format!("witness gap {} below 1e-3", composite - stat)
        });
        Ok(())
    })
}

pub fn criterion_6(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(100);
    let base = CriterionResult::new(6, CRITERIA[5].1, opts.tol(1e-7));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(6);
        for _ in 0..n_trials {
            let spec = {
                let k = rng.int(1, 3);
                gen::rectangular(&mut rng, k, 3)
            }?;
            let z = gen::variable(&mut rng, spec.scenario_count(), 5.0);
            let refs = spec
                .stages()
                .iter()
                .map(|s| s.reference_measure().map(|m| m.normalized))
                .collect::<Result<Vec<_>>>()?;
            let p = spec.product(&refs.iter().collect::<Vec<_>>());
            let e = rectangular_equivalence_check(&spec, &z, &p)?;
            r.observe(e.difference);
        }
        Ok(())
    })
}

pub fn criterion_7(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(50);
    let base = CriterionResult::new(7, CRITERIA[6].1, opts.tol(1e-9));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(7);
        for _ in 0..n_trials {
            let spec = gen::finite_rectangular(&mut rng)?;
            let z = gen::variable(&mut rng, spec.scenario_count(), 5.0);
            let induced = induced_set(&spec)?;
            let nested = rectangular_nested(&spec, &z)?.value;
            r.observe((induced.max_expectation(&z) - nested).abs());
            let stat = static_rectangular(&spec, &z)?;
            r.require(!stat.heuristic, || {
                "static value fell back to coordinate ascent".into()
            });
            r.observe((induced.family1_max(&z) - stat.value).abs());
            let m1 = match spec.stages()[0].kind() {
                Kind::FiniteFamily { measures } => measures.len() as u128,
                _ => unreachable!("finite stages"),
            };
            let m2 = match spec.stages()[1].kind() {
                Kind::FiniteFamily { measures } => measures.len() as u128,
                _ => unreachable!("finite stages"),
            };
            let expected = m1 * m2.pow(spec.stages()[0].len() as u32);
            r.require(induced.pre_dedup_count == expected, || {
                format!("pre-dedup count {} != {expected}", induced.pre_dedup_count)
            });
        }
        Ok(())
    })
}

fn permutations(t: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..left.len() {
            let x = left.remove(i);
            prefix.push(x);
            rec(prefix, left, out);
            prefix.pop();
            left.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..t).collect(), &mut out);
    out
}

pub fn criterion_8(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(100);
    let base = CriterionResult::new(8, CRITERIA[7].1, opts.tol(1e-9));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(8);
        for _ in 0..n_trials {
            let spec = {
                let k = rng.int(2, 3);
                gen::rectangular(&mut rng, k, 3)
            }?;
            let z = gen::variable(&mut rng, spec.scenario_count(), 5.0);
            let perms = permutations(spec.horizon());
            let rep = permutation_invariance_check(&spec, &z, &perms)?;
            let base_value = rep.static_values[0];
            for v in &rep.static_values {
                r.observe((v - base_value).abs());
            }
        }
        let (spec, z) = witnesses::rectangular_gap();
        let rep = permutation_invariance_check(&spec, &z, &[vec![0, 1], vec![1, 0]])?;
        let change = (rep.nested_values[1] - rep.nested_values[0]).abs();
        r.detail.push(format!(
            "witness: nested {} -> {} under swap, static {} -> {}",
            rep.nested_values[0], rep.nested_values[1], rep.static_values[0], rep.static_values[1]
        ));
        r.require(change >= 1e-3, || {
            format!("witness nested change {change} below 1e-3")
        });
        Ok(())
    })
}

pub fn criterion_9(opts: &VerifyOptions) -> CriterionResult {
    let pairs = opts.trials(1000);
    let base = CriterionResult::new(9, CRITERIA[8].1, opts.tol(1e-9));
    guard(base, |r| {
        r.vacuous_warning(pairs);
        let mut rng = opts.stream(9);
        for i in 0..12 {
            let n = rng.int(2, 6);
            let set = gen::set_of_kind(&mut rng, i, n);
            let rm = set.reference_measure()?;
            let ok = dominates_all(&rm, &set, pairs, &mut rng)?;
            r.require(ok, || {
                format!(
                    "instance {i} ({}): some Q(A) exceeds mu(A)",
                    set.kind_name()
                )
            });
            for w in 0..n {
                let witness = &rm.witnesses[w];
                r.require(set.contains(witness, 1e-9)?, || {
                    format!("instance {i}: witness for outcome {w} is not a member")
                });
                r.observe((witness.weights()[w] - rm.mu.weights()[w]).abs());
                let (lp_value, _) =
                    set.robust_expectation_lp(&RandomVariable::indicator(n, &[w]))?;
                r.observe((lp_value - rm.mu.weights()[w]).abs());
            }
        }
        Ok(())
    })
}

fn strict_set(rng: &mut SplitMix64, round: usize) -> Result<AmbiguitySet> {
    let n = rng.int(2, 5);
    Ok(match round % 3 {
        0 => {
            let k = rng.int(1, 4);
            gen::positive_family(rng, n, k)
        }
        1 => AmbiguitySet::singleton(gen::positive_measure(rng, n))?,
        _ => {
            // emptying outcome w costs at least P(w) times its nearest-neighbour
            // distance; stay below the cheapest such cost
            let pts = gen::line_points(rng, n);
            let center = gen::positive_measure(rng, n);
            let space = FiniteSpace::on_line(&pts)?;
            let cheapest = (0..n)
                .map(|w| {
                    let near = (0..n)
                        .filter(|&j| j != w)
                        .map(|j| space.distance(w, j))
                        .fold(f64::INFINITY, f64::min);
                    center.weights()[w] * near
                })
                .fold(f64::INFINITY, f64::min);
            let radius = cheapest * rng.range(0.0, 0.9);
            AmbiguitySet::wasserstein_ball(center, radius, space)?
        }
    })
}

pub fn criterion_10(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(200);
    let base = CriterionResult::new(10, CRITERIA[9].1, opts.tol(1e-9));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(10);
        for round in 0..6 {
            let set = strict_set(&mut rng, round)?;
            let mu = set.reference_measure()?.normalized;
            let sm = set.is_strictly_monotone(&mu)?;
            r.require(sm.strict && sm.epsilon > 0.0, || {
                format!(
                    "round {round}: {} is not strictly monotone",
                    set.kind_name()
                )
            });
            if let (Some(w), Some(q)) = (sm.outcome, &sm.witness) {
                r.require(set.contains(q, 1e-9)?, || {
                    format!("round {round}: certificate witness not a member")
                });
                r.observe((q.weights()[w] - sm.epsilon).abs());
                let (v, _) = set.min_mass(w)?;
                r.observe((v - sm.epsilon).abs());
            }
            let g = gen::partition(&mut rng, set.len());
            let rep = conditional_strict_monotonicity_check(&set, &g, &mu, n_trials, &mut rng)?;
            r.require(rep.applicable, || {
                format!("round {round}: check not applicable")
            });
            r.require(rep.violations == 0, || {
                format!("round {round}: {} violations", rep.violations)
            });
            r.trials += rep.trials;
        }
        Ok(())
    })
}

fn random_metric_space(rng: &mut SplitMix64, n: usize) -> Result<FiniteSpace> {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.range(0.0, 3.0), rng.range(0.0, 3.0)))
        .collect();
    let d = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                .collect()
        })
        .collect();
    FiniteSpace::new(n)?.with_metric(d)
}

/// Same transition law after every history.
fn stagewise_independent(rng: &mut SplitMix64, sizes: &[usize]) -> Result<TreeModel> {
    let points = sizes.iter().map(|&n| gen::line_points(rng, n)).collect();
    let first = gen::positive_measure(rng, sizes[0]);
    let mut kernels = Vec::new();
    let mut histories = 1;
    for t in 1..sizes.len() {
        histories *= sizes[t - 1];
        let k = gen::positive_measure(rng, sizes[t]);
        kernels.push(vec![k; histories]);
    }
    TreeModel::new(points, first, kernels)
}

pub fn criterion_11(opts: &VerifyOptions) -> CriterionResult {
    let n_triples = opts.trials(200);
    let n_trees = opts.trials(20);
    let base = CriterionResult::new(11, CRITERIA[10].1, opts.tol(1e-7));
    guard(base, |r| {
        r.vacuous_warning(n_triples);
        let mut rng = opts.stream(11);
        for _ in 0..n_triples {
            let n = rng.int(2, 6);
            let space = random_metric_space(&mut rng, n)?;
            let p = gen::sparse_measure(&mut rng, n, 0.2);
            let q = gen::sparse_measure(&mut rng, n, 0.2);
            let s = gen::sparse_measure(&mut rng, n, 0.2);
            let (pq, plan) = wasserstein_1(&p, &q, &space)?;
            let (qp, _) = wasserstein_1(&q, &p, &space)?;
            let (qs, _) = wasserstein_1(&q, &s, &space)?;
            let (ps, _) = wasserstein_1(&p, &s, &space)?;
            let (pp, _) = wasserstein_1(&p, &p, &space)?;
            r.observe((ps - pq - qs).max(0.0));
            r.observe((pq - qp).abs());
            r.observe(pp.abs());
            r.observe((-pq).max(0.0));
            r.observe((kantorovich_dual(&p, &q, &space)? - pq).abs());
            let marg = plan
                .row_sums()
                .iter()
                .zip(p.weights())
                .chain(plan.col_sums().iter().zip(q.weights()))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            r.observe(marg);
            let z = gen::variable(&mut rng, n, 3.0);
            let kr = kr_bound_check(&p, &q, &space, &z)?;
            r.observe((kr.lhs - kr.rhs).max(0.0));
        }
        let radii: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        for _ in 0..n_trees {
            let n = rng.int(2, 6);
            let space = random_metric_space(&mut rng, n)?;
            let z = gen::variable(&mut rng, n, 3.0);
            let sweep = ball_gap_sweep(&gen::positive_measure(&mut rng, n), &radii, &space, &z)?;
            for b in sweep {
                r.observe((b.gap.abs() - b.bound).max(0.0));
            }
        }
        for k in 0..n_trees {
            let sizes: Vec<usize> = match k % 3 {
                0 => vec![rng.int(2, 3), rng.int(2, 3)],
                1 => vec![2, 2, 2],
                _ => vec![rng.int(2, 3)],
            };
            let model = gen::tree_model(&mut rng, &sizes)?;
            let w: Vec<f64> = sizes.iter().map(|_| rng.range(0.5, 2.0)).collect();
            let kappa = model.kernel_moduli(&w)?;
            let z = gen::variable(&mut rng, model.scenario_count(), 3.0);
            let l = model.lipschitz_certificate(&z, &w)?;
            let eps: Vec<f64> = sizes.iter().map(|_| rng.range(0.0, 0.4)).collect();
            let spec = MultistageBoundSpec::new(eps, kappa, w, l)?;
            let e = multistage_bound_empirical_check(&model, &spec, &z)?;
            r.observe((e.gap - e.bound).max(0.0));
        }
        for k in 0..n_trees.min(5) {
            let sizes = if k % 2 == 0 {
                vec![2, 3]
            } else {
                vec![2, 2, 2]
            };
            let model = stagewise_independent(&mut rng, &sizes)?;
            let w: Vec<f64> = sizes.iter().map(|_| rng.range(0.5, 2.0)).collect();
            let z = gen::variable(&mut rng, model.scenario_count(), 3.0);
            let l = model.lipschitz_certificate(&z, &w)?;
            let eps: Vec<f64> = sizes.iter().map(|_| rng.range(0.0, 0.4)).collect();
            let simple = l * eps.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>();
            let spec = MultistageBoundSpec::new(eps, vec![0.0; sizes.len()], w, l)?;
            let bound = multistage_bound(&spec);
            r.require(bound == simple, || {
                format!("kappa = 0 bound {bound} != {simple}")
            });
            let e = multistage_bound_empirical_check(&model, &spec, &z)?;
            r.observe((e.gap - e.bound).max(0.0));
        }
        Ok(())
    })
}

pub fn criterion_12(opts: &VerifyOptions) -> CriterionResult {
    let n_trials = opts.trials(50);
    let base = CriterionResult::new(12, CRITERIA[11].1, opts.tol(1e-9));
    guard(base, |r| {
        r.vacuous_warning(n_trials);
        let mut rng = opts.stream(12);
        for i in 0..n_trials {
            let horizon = rng.int(1, 3);
            let prob = gen::multistage_problem(&mut rng, horizon, false)?;
            let e = enumeration_check(&prob, POLICY_CAP)?;
            r.observe(e.difference);
            let c = compare_min_static_vs_min_nested(&prob)?;
            r.observe((c.min_static - c.min_nested).max(0.0));
            let w = weak_duality_check(&prob)?;
            r.observe((w.dual - w.primal).max(0.0));
            if i % 5 == 0 {
                let horizon = rng.int(2, 3);
                let strict = gen::multistage_problem(&mut rng, horizon, true)?;
                let rep = verify_optimality_necessity(&strict)?;
                r.require(rep.applicable, || {
                    format!("instance {i}: strict sets not recognised")
                });
                r.require(rep.sufficiency, || {
                    format!("instance {i}: argmin policy not optimal")
                });
                r.require(rep.violations.is_empty(), || {
                    format!(
                        "instance {i}: {} necessity violations",
                        rep.violations.len()
                    )
                });
            }
        }
        let witness = witnesses::dp_gap();
        let c = compare_min_static_vs_min_nested(&witness)?;
        r.detail.push(format!(
            "witness: min static {}, min nested {}, argmins differ: {}",
            c.min_static, c.min_nested, c.argmins_differ
        ));
        r.require(
            c.min_nested - c.min_static >= 1e-3 && c.argmins_differ,
            || "witness does not separate the two minima".into(),
        );
        let moment_tol = opts.tol(1e-7);
        for _ in 0..n_trials {
            let n = rng.int(3, 7);
            let set = gen::moment_set(&mut rng, n);
            let z = gen::variable(&mut rng, n, 5.0);
            let (primal, q) = set.robust_expectation(&z)?;
            let dual = set.moment_dual_value(&z)?;
            let gap = (primal - dual).abs();
            r.require(gap <= moment_tol, || format!("moment dual gap {gap:e}"));
            let m = set.moment_count().unwrap_or(0);
            let support = q.weights().iter().filter(|&&w| w > 1e-12).count();
            r.require(support <= m + 1, || {
                format!("maximizer support {support} > {}", m + 1)
            });
        }
        Ok(())
    })
}

/// Conditional functional against nested conditional AVaR on the shipped
/// discrepancy witness.
pub fn conditional_discrepancy_check() -> Result<(Vec<f64>, Vec<f64>)> {
    let (spec, z, g) = witnesses::conditional_discrepancy();
    let set = AmbiguitySet::avar(spec.alpha(), spec.reference().clone())?;
    let a = conditional_robust(&set, &z, &g, spec.reference())?.per_atom;
    let b = conditional_avar_nested(&spec, &z, &g)?.per_atom;
    Ok((a, b))
}
