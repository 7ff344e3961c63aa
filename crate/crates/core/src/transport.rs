//! Order-1 Wasserstein distance on finite metric spaces and the transport
//! bounds built on Kantorovich–Rubinstein duality.

use serde::Serialize;

use crate::ambiguity::AmbiguitySet;
use crate::composite::{history_nested, HistoryDependentSpec};
use crate::error::{Error, Result};
use crate::lp::{self, Direction, LinearProgram, LpStatus, Sense};
use crate::measure::{dot, DiscreteMeasure, FiniteSpace, RandomVariable, ScenarioTree};
use crate::TOL;

/// Coupling of two measures with its transport cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    /// `plan[i][j]`: mass moved from outcome `i` to outcome `j`.
    pub plan: Vec<Vec<f64>>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.plan.first().map_or(0, Vec::len);
        (0..n)
            .map(|j| self.plan.iter().map(|r| r[j]).sum())
            .collect()
    }
}

fn check_pair(p: &DiscreteMeasure, q: &DiscreteMeasure, space: &FiniteSpace) -> Result<()> {
    if !space.has_metric() {
        return Err(Error::InvalidMetric(
            "transport needs a metric space".into(),
        ));
    }
    for m in [p, q] {
        m.ensure_len(space.len())?;
        m.ensure_probability()?;
    }
    Ok(())
}

/// `W1(P, Q)` and an optimal plan, from the transportation LP.
pub fn wasserstein_1(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    space: &FiniteSpace,
) -> Result<(f64, TransportPlan)> {
    check_pair(p, q, space)?;
    let n = space.len();
    let cost: Vec<f64> = (0..n * n).map(|k| space.distance(k / n, k % n)).collect();
    let mut lp = LinearProgram::new(Direction::Minimize, cost);
    for i in 0..n {
        let mut row = vec![0.0; n * n];
        row[i * n..(i + 1) * n].fill(1.0);
        lp.constrain(row, Sense::Eq, p.weights()[i]);
    }
    for j in 0..n {
        let row = (0..n * n)
            .map(|k| if k % n == j { 1.0 } else { 0.0 })
            .collect();
        lp.constrain(row, Sense::Eq, q.weights()[j]);
    }
    let sol = lp::solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Infeasible("transportation problem".into()));
    }
    let plan: Vec<Vec<f64>> = sol
        .primal
        .chunks(n)
        .map(|r| r.iter().map(|v| v.max(0.0)).collect())
        .collect();
    let value = sol.value.max(0.0);
    Ok((value, TransportPlan { plan, cost: value }))
}

/// `max Σ f(i)(P(i) - Q(i))` over potentials with `f(i) - f(j) ≤ d(i,j)`.
pub fn kantorovich_dual(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    space: &FiniteSpace,
) -> Result<f64> {
    check_pair(p, q, space)?;
    let n = space.len();
    let obj = (0..n).map(|i| p.weights()[i] - q.weights()[i]).collect();
    let mut lp = LinearProgram::new(Direction::Maximize, obj);
    for i in 0..n {
        lp.free(i);
    }
    // pin the additive constant
    lp.bound(0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                row[j] = -1.0;
                lp.constrain(row, Sense::Le, space.distance(i, j));
            }
        }
    }
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        _ => Err(Error::Infeasible("Kantorovich potential program".into())),
    }
}

/// `max_{d(i,j) > 0} |Z(i) - Z(j)| / d(i,j)`; `+inf` when two outcomes at
/// distance zero carry different values.
pub fn lipschitz_constant(z: &RandomVariable, space: &FiniteSpace) -> Result<f64> {
    z.ensure_len(space.len())?;
    if !space.has_metric() {
        return Err(Error::InvalidMetric(
            "Lipschitz constant needs a metric".into(),
        ));
    }
    let v = z.values();
    let mut l: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let d = space.distance(i, j);
            let dz = (v[i] - v[j]).abs();
            if d > 0.0 {
                l = l.max(dz / d);
            } else if dz > TOL {
                return Ok(f64::INFINITY);
            }
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrCheck {
    /// `|E_Q Z - E_P Z|`
    pub lhs: f64,
    /// `L_Z · W1(Q, P)`
    pub rhs: f64,
    pub lipschitz: f64,
    pub holds: bool,
    /// The Lipschitz constant is infinite, so the bound says nothing.
    pub vacuous: bool,
}

pub fn kr_bound_check(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    space: &FiniteSpace,
    z: &RandomVariable,
) -> Result<KrCheck> {
    let lipschitz = lipschitz_constant(z, space)?;
    let (w, _) = wasserstein_1(p, q, space)?;
    let lhs = (dot(z.values(), q.weights()) - dot(z.values(), p.weights())).abs();
    let rhs = if lipschitz.is_infinite() {
        f64::INFINITY
    } else {
        lipschitz * w
    };
    Ok(KrCheck {
        lhs,
        rhs,
        lipschitz,
        holds: lhs <= rhs + TOL,
        vacuous: lipschitz.is_infinite(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallGap {
    pub epsilon: f64,
    /// `sup_{W1(Q,P) ≤ ε} E_Q Z - E_P Z`
    pub gap: f64,
    /// `L_Z · ε`
    pub bound: f64,
    pub holds: bool,
}

pub fn ball_robust_gap_check(
    center: &DiscreteMeasure,
    epsilon: f64,
    space: &FiniteSpace,
    z: &RandomVariable,
) -> Result<BallGap> {
    let lipschitz = lipschitz_constant(z, space)?;
    let ball = AmbiguitySet::wasserstein_ball(center.clone(), epsilon, space.clone())?;
    let robust = ball.robust_expectation(z)?.0;
    let gap = robust - dot(z.values(), center.weights());
    let bound = if lipschitz.is_infinite() {
        f64::INFINITY
    } else {
        lipschitz * epsilon
    };
    Ok(BallGap {
        epsilon,
        gap,
        bound,
        holds: gap.abs() <= bound + TOL,
    })
}

/// [`ball_robust_gap_check`] over a grid of radii.
pub fn ball_gap_sweep(
    center: &DiscreteMeasure,
    radii: &[f64],
    space: &FiniteSpace,
    z: &RandomVariable,
) -> Result<Vec<BallGap>> {
    radii
        .iter()
        .map(|&e| ball_robust_gap_check(center, e, space, z))
        .collect()
}

/// Per-stage radii `ε_t`, transition moduli `κ_t`, weights `w_t` and the
/// Lipschitz constant `L_Z` of `|Z(ξ) - Z(ξ̃)| ≤ L_Z Σ_t w_t d_t(ξ_t, ξ̃_t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultistageBoundSpec {
    pub epsilon: Vec<f64>,
    pub kappa: Vec<f64>,
    pub weights: Vec<f64>,
    pub lipschitz: f64,
}

impl MultistageBoundSpec {
    pub fn new(
        epsilon: Vec<f64>,
        kappa: Vec<f64>,
        weights: Vec<f64>,
        lipschitz: f64,
    ) -> Result<Self> {
        let t = epsilon.len();
        if t == 0 || kappa.len() != t || weights.len() != t {
            return Err(Error::InvalidProblem(
                "epsilon, kappa and weights need one entry per stage".into(),
            ));
        }
        let bad = |v: &f64| !(v.is_finite() && *v >= 0.0);
        if epsilon.iter().any(bad) || kappa.iter().any(bad) || bad(&lipschitz) {
            return Err(Error::InvalidProblem(
                "radii, moduli and L_Z must be nonnegative reals".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidProblem(
                "stage weights must be positive".into(),
            ));
        }
        Ok(Self {
            epsilon,
            kappa,
            weights,
            lipschitz,
        })
    }

    pub fn horizon(&self) -> usize {
        self.epsilon.len()
    }
}

/// `L_Z Σ_t ε_t w_t Π_{s>t} (1 + w_s κ_s)`.
pub fn multistage_bound(spec: &MultistageBoundSpec) -> f64 {
    let t_max = spec.horizon();
    let mut total = 0.0;
    for t in 0..t_max {
        let tail: f64 = (t + 1..t_max)
            .map(|s| 1.0 + spec.weights[s] * spec.kappa[s])
            .product();
        total += spec.epsilon[t] * spec.weights[t] * tail;
    }
    spec.lipschitz * total
}

/// Reference process on a full scenario tree: stage `t` outcomes are points
/// on the real line, stage 1 has law `first`, and each history of length
/// `t-1` carries its own transition law over stage `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    stage_points: Vec<Vec<f64>>,
    first: DiscreteMeasure,
    /// `kernels[t-2][h]`: law of stage `t` after history `h` (lexicographic).
    kernels: Vec<Vec<DiscreteMeasure>>,
}

impl TreeModel {
    pub fn new(
        stage_points: Vec<Vec<f64>>,
        first: DiscreteMeasure,
        kernels: Vec<Vec<DiscreteMeasure>>,
    ) -> Result<Self> {
        let t_max = stage_points.len();
        if t_max == 0 || kernels.len() + 1 != t_max {
            return Err(Error::InvalidTree(
                "need one kernel table per stage after the first".into(),
            ));
        }
        for pts in &stage_points {
            FiniteSpace::on_line(pts)?;
        }
        first.ensure_len(stage_points[0].len())?;
        first.ensure_probability()?;
        let mut histories = 1usize;
        for t in 1..t_max {
            histories *= stage_points[t - 1].len();
            if kernels[t - 1].len() != histories {
                return Err(Error::DimensionMismatch {
                    expected: histories,
                    found: kernels[t - 1].len(),
                });
            }
            for k in &kernels[t - 1] {
                k.ensure_len(stage_points[t].len())?;
                k.ensure_probability()?;
            }
        }
        Ok(Self {
            stage_points,
            first,
            kernels,
        })
    }

    pub fn horizon(&self) -> usize {
        self.stage_points.len()
    }

    pub fn stage_points(&self) -> &[Vec<f64>] {
        &self.stage_points
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.stage_points.iter().map(Vec::len).collect()
    }

    pub fn scenario_count(&self) -> usize {
        self.sizes().iter().product()
    }

    /// Stage outcome indices of a history (or scenario) index of length `len`.
    pub fn history(&self, mut index: usize, len: usize) -> Vec<usize> {
        let sizes = self.sizes();
        let mut out = vec![0; len];
        for t in (0..len).rev() {
            out[t] = index % sizes[t];
            index /= sizes[t];
        }
        out
    }

    /// `Σ_{s} w_s |x_s - x̃_s|` over the common prefix of two histories.
    pub fn history_distance(&self, a: &[usize], b: &[usize], weights: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(s, (&i, &j))| {
                weights[s] * (self.stage_points[s][i] - self.stage_points[s][j]).abs()
            })
            .sum()
    }

    pub fn stage_space(&self, t: usize) -> FiniteSpace {
        FiniteSpace::on_line(&self.stage_points[t]).expect("validated points")
    }

    /// Law of stage `t` (0-based) after history index `h`.
    pub fn kernel(&self, t: usize, h: usize) -> &DiscreteMeasure {
        if t == 0 {
            &self.first
        } else {
            &self.kernels[t - 1][h]
        }
    }

    /// Reference probability of every scenario.
    pub fn scenario_probabilities(&self) -> Vec<f64> {
        let t_max = self.horizon();
        let sizes = self.sizes();
        (0..self.scenario_count())
            .map(|i| {
                let path = self.history(i, t_max);
                let mut prob = 1.0;
                let mut h = 0usize;
                for t in 0..t_max {
                    prob *= self.kernel(t, h).weights()[path[t]];
                    h = h * sizes[t] + path[t];
                }
                prob
            })
            .collect()
    }

    /// Smallest `κ_t` making each stage kernel Lipschitz in the history:
    /// `max_{h ≠ h'} W1(P^h, P^{h'}) / D(h, h')`.
    pub fn kernel_moduli(&self, weights: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0];
        let sizes = self.sizes();
        let mut histories = 1usize;
        for t in 1..self.horizon() {
            histories *= sizes[t - 1];
            let space = self.stage_space(t);
            let mut k: f64 = 0.0;
            for a in 0..histories {
                for b in a + 1..histories {
                    let w = wasserstein_1(self.kernel(t, a), self.kernel(t, b), &space)?.0;
                    let d =
                        self.history_distance(&self.history(a, t), &self.history(b, t), weights);
                    if d > 0.0 {
                        k = k.max(w / d);
                    } else if w > TOL {
                        k = f64::INFINITY;
                    }
                }
            }
            out.push(k);
        }
        Ok(out)
    }

    /// Balls of radius `ε_t + κ_t D(h, h')` around every `P^{h'}`, intersected,
    /// at each inner node.
    pub fn ambiguity_tree(&self, spec: &MultistageBoundSpec) -> Result<HistoryDependentSpec> {
        let t_max = self.horizon();
        if spec.horizon() != t_max {
            return Err(Error::DimensionMismatch {
                expected: t_max,
                found: spec.horizon(),
            });
        }
        let sizes = self.sizes();
        let tree = ScenarioTree::uniform(&sizes)?;
        let mut sets = vec![None; tree.nodes().len()];
        for t in 0..t_max {
            let nodes = tree.stage_nodes(t + 1);
            let space = self.stage_space(t);
            let histories = nodes.len();
            for (h, &node) in nodes.iter().enumerate() {
                let set = if t == 0 {
                    AmbiguitySet::wasserstein_ball(
                        self.first.clone(),
                        spec.epsilon[0],
                        space.clone(),
                    )?
                } else {
                    let mine = self.history(h, t);
                    let mut centers = Vec::with_capacity(histories);
                    let mut radii = Vec::with_capacity(histories);
                    for other in 0..histories {
                        centers.push(self.kernel(t, other).clone());
                        let d =
                            self.history_distance(&mine, &self.history(other, t), &spec.weights);
                        radii.push(spec.epsilon[t] + spec.kappa[t] * d);
                    }
                    AmbiguitySet::wasserstein_intersection(centers, radii, space.clone())?
                };
                sets[node] = Some(set);
            }
        }
        HistoryDependentSpec::new(tree, sets)
    }

    /// Rejects `z` unless `|Z(ξ) - Z(ξ̃)| ≤ L_Z Σ_t w_t d_t(ξ_t, ξ̃_t)` for all pairs.
    pub fn check_lipschitz(&self, z: &RandomVariable, spec: &MultistageBoundSpec) -> Result<()> {
        z.ensure_len(self.scenario_count())?;
        let t_max = self.horizon();
        let v = z.values();
        for a in 0..v.len() {
            let pa = self.history(a, t_max);
            for b in a + 1..v.len() {
                let pb = self.history(b, t_max);
                let rhs = spec.lipschitz * self.history_distance(&pa, &pb, &spec.weights);
                let lhs = (v[a] - v[b]).abs();
                if lhs > rhs + TOL {
                    return Err(Error::LipschitzViolation {
                        first: a,
                        second: b,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        Ok(())
    }

    /// Smallest `L_Z` certifying `z` against the weights.
    pub fn lipschitz_certificate(&self, z: &RandomVariable, weights: &[f64]) -> Result<f64> {
        z.ensure_len(self.scenario_count())?;
        let t_max = self.horizon();
        let v = z.values();
        let mut l: f64 = 0.0;
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                let d = self.history_distance(
                    &self.history(a, t_max),
                    &self.history(b, t_max),
                    weights,
                );
                let dz = (v[a] - v[b]).abs();
                if d > 0.0 {
                    l = l.max(dz / d);
                } else if dz > TOL {
                    return Ok(f64::INFINITY);
                }
            }
        }
        Ok(l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalBound {
    pub nested: f64,
    pub expectation: f64,
    pub gap: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates the nested functional on the ball tree and compares
/// `|𝔯(Z) - E_P Z|` with [`multistage_bound`]. The Lipschitz certificate of
/// `z` and the kernel moduli `κ_t` are verified first.
pub fn multistage_bound_empirical_check(
    model: &TreeModel,
    spec: &MultistageBoundSpec,
    z: &RandomVariable,
) -> Result<EmpiricalBound> {
    model.check_lipschitz(z, spec)?;
    let moduli = model.kernel_moduli(&spec.weights)?;
    for (t, (&need, &have)) in moduli.iter().zip(&spec.kappa).enumerate().skip(1) {
        if need > have + TOL {
            return Err(Error::InvalidProblem(format!(
                "stage {} transitions move by {need} per unit of history distance, above kappa = {have}",
                t + 1
            )));
        }
    }
    let tree = model.ambiguity_tree(spec)?;
    let (nested, _) = history_nested(&tree, z)?;
    let expectation = dot(z.values(), &model.scenario_probabilities());
    let gap = (nested - expectation).abs();
    let bound = multistage_bound(spec);
    Ok(EmpiricalBound {
        nested,
        expectation,
        gap,
        bound,
        holds: gap <= bound + 1e-7,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(w: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::probability(w.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let space = FiniteSpace::on_line(&[0.0, 1.0, 3.0]).unwrap();
        let (d, _) = wasserstein_1(
            &DiscreteMeasure::dirac(3, 0),
            &DiscreteMeasure::dirac(3, 2),
            &space,
        )
        .unwrap();
        assert!((d - 3.0).abs() < 1e-12);

        let two = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        let (d, plan) = wasserstein_1(&dm(&[0.5, 0.5]), &dm(&[1.0, 0.0]), &two).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!((plan.col_sums()[0] - 1.0).abs() < 1e-12);
        assert!((plan.row_sums()[1] - 0.5).abs() < 1e-12);

        let p = dm(&[0.2, 0.3, 0.5]);
        let (d, plan) = wasserstein_1(&p, &p, &space).unwrap();
        assert!(d.abs() < 1e-12);
        for i in 0..3 {
            assert!((plan.plan[i][i] - p.weights()[i]).abs() < 1e-12);
        }
        assert!(
            (kantorovich_dual(&dm(&[0.5, 0.5]), &dm(&[1.0, 0.0]), &two).unwrap() - 0.5).abs()
                < 1e-9
        );
    }

    #[test]
    fn missing_metric() {
        let plain = FiniteSpace::new(2).unwrap();
        assert!(matches!(
            wasserstein_1(
                &DiscreteMeasure::uniform(2),
                &DiscreteMeasure::uniform(2),
                &plain
            ),
            Err(Error::InvalidMetric(_))
        ));
    }

    #[test]
    fn kr_trivial_cases() {
        let space = FiniteSpace::on_line(&[0.0, 1.0, 2.0]).unwrap();
        let p = dm(&[0.2, 0.3, 0.5]);
        let q = dm(&[0.6, 0.3, 0.1]);
        let c = kr_bound_check(&p, &q, &space, &RandomVariable::constant(3, 4.0)).unwrap();
        assert!(c.lhs < 1e-12);
        assert!(c.holds);
        let z = RandomVariable::new(vec![0.0, 2.0, 1.0]).unwrap();
        let same = kr_bound_check(&p, &p, &space, &z).unwrap();
        assert!(same.lhs.abs() < 1e-12 && same.rhs.abs() < 1e-9);
        let c = kr_bound_check(&p, &q, &space, &z).unwrap();
        assert_eq!(c.lipschitz, 2.0);
        assert!(c.holds);
    }

    #[test]
    fn zero_distance_pair_is_vacuous() {
        let space = FiniteSpace::new(2)
            .unwrap()
            .with_metric(vec![vec![0.0, 0.0], vec![0.0, 0.0]])
            .unwrap();
        let z = RandomVariable::new(vec![0.0, 1.0]).unwrap();
        let c = kr_bound_check(&DiscreteMeasure::uniform(2), &dm(&[1.0, 0.0]), &space, &z).unwrap();
        assert!(c.vacuous && c.rhs.is_infinite());
    }

    #[test]
    fn ball_gap_saturates() {
        let space = FiniteSpace::on_line(&[0.0, 1.0, 2.0]).unwrap();
        let p = dm(&[0.5, 0.3, 0.2]);
        let z = RandomVariable::new(vec![0.0, 1.0, 3.0]).unwrap();
        assert!(
            ball_robust_gap_check(&p, 0.0, &space, &z)
                .unwrap()
                .gap
                .abs()
                < 1e-12
        );
        let big = ball_robust_gap_check(&p, 2.0, &space, &z).unwrap();
        let mean = 0.3 + 0.6;
        assert!((big.gap - (3.0 - mean)).abs() < 1e-9);
        assert!(big.holds);
        let sweep = ball_gap_sweep(&p, &[0.0, 0.1, 0.5, 1.0, 2.0], &space, &z).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].gap >= w[0].gap - 1e-12);
        }
    }

    #[test]
    fn bound_formula() {
        let spec =
            MultistageBoundSpec::new(vec![0.1, 0.2], vec![0.0, 0.5], vec![1.0, 1.0], 1.0).unwrap();
        assert!((multistage_bound(&spec) - 0.35).abs() < 1e-15);
        let flat =
            MultistageBoundSpec::new(vec![0.1, 0.2, 0.3], vec![0.0; 3], vec![1.0, 2.0, 0.5], 2.0)
                .unwrap();
        assert!((multistage_bound(&flat) - 2.0 * (0.1 + 0.4 + 0.15)).abs() < 1e-15);
        let one = MultistageBoundSpec::new(vec![0.3], vec![7.0], vec![2.0], 1.5).unwrap();
        assert!((multistage_bound(&one) - 0.9).abs() < 1e-15);
        assert!(MultistageBoundSpec::new(vec![0.1], vec![0.0], vec![0.0], 1.0).is_err());
    }

    fn small_model() -> TreeModel {
        TreeModel::new(
            vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]],
            dm(&[0.4, 0.6]),
            vec![vec![dm(&[0.2, 0.5, 0.3]), dm(&[0.1, 0.4, 0.5])]],
        )
        .unwrap()
    }

    #[test]
    fn empirical_bound_small_tree() {
        let model = small_model();
        let w = vec![1.0, 1.0];
        let kappa = model.kernel_moduli(&w).unwrap();
        let z = RandomVariable::new(vec![0.0, 1.0, 1.5, 0.5, 1.0, 2.0]).unwrap();
        let l = model.lipschitz_certificate(&z, &w).unwrap();
        let spec = MultistageBoundSpec::new(vec![0.1, 0.2], kappa, w, l).unwrap();
        let r = multistage_bound_empirical_check(&model, &spec, &z).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.gap > 0.0);

        let zero =
            MultistageBoundSpec::new(vec![0.0, 0.0], spec.kappa.clone(), spec.weights.clone(), l)
                .unwrap();
        let r = multistage_bound_empirical_check(&model, &zero, &z).unwrap();
        assert!(r.gap < 1e-9, "{r:?}");
    }

    #[test]
    fn empirical_rejects_bad_certificates() {
        let model = small_model();
        let z = RandomVariable::new(vec![0.0, 1.0, 1.5, 0.5, 1.0, 2.0]).unwrap();
        let spec =
            MultistageBoundSpec::new(vec![0.1, 0.2], vec![0.0, 10.0], vec![1.0, 1.0], 0.1).unwrap();
        assert!(matches!(
            multistage_bound_empirical_check(&model, &spec, &z),
            Err(Error::LipschitzViolation { .. })
        ));
        let spec =
            MultistageBoundSpec::new(vec![0.1, 0.2], vec![0.0, 0.0], vec![1.0, 1.0], 5.0).unwrap();
        assert!(matches!(
            multistage_bound_empirical_check(&model, &spec, &z),
            Err(Error::InvalidProblem(_))
        ));
    }
}
