//! Finite multistage programs under rectangular ambiguity: backward
//! induction, policy evaluation, and exhaustive policy enumeration.
//!
//! Stage 1 is deterministic (a single outcome). Stages `2..=T` draw `ξ_t`
//! from a finite space with its own ambiguity set. A node of the scenario
//! tree at stage `t` is identified by its prefix `(ξ_2, …, ξ_t)`, indexed
//! lexicographically with `ξ_2` slowest; stage 1 has the single node `0`.

use serde::Serialize;

use crate::ambiguity::AmbiguitySet;
use crate::composite::{
    rectangular_nested, static_rectangular, static_rectangular_exact, RectangularSpec,
};
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, RandomVariable};

/// Default cap on enumerated policies.
pub const POLICY_CAP: u128 = 100_000;

/// Data of one random stage `t ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub set: AmbiguitySet,
    /// `costs[x][ξ]` for action `x` and outcome `ξ`.
    pub costs: Vec<Vec<f64>>,
    /// `feasible[x_prev][ξ]`: allowed actions after `x_prev` when `ξ` occurs.
    pub feasible: Vec<Vec<Vec<usize>>>,
}

impl Stage {
    /// Every action allowed after every predecessor.
    pub fn unconstrained(set: AmbiguitySet, costs: Vec<Vec<f64>>, prev_actions: usize) -> Self {
        let n = set.len();
        let all: Vec<usize> = (0..costs.len()).collect();
        Self {
            set,
            costs,
            feasible: vec![vec![all; n]; prev_actions],
        }
    }

    pub fn actions(&self) -> usize {
        self.costs.len()
    }

    pub fn outcomes(&self) -> usize {
        self.set.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistageProblem {
    first_costs: Vec<f64>,
    first_feasible: Vec<usize>,
    stages: Vec<Stage>,
}

fn normalize_actions(
    list: &[usize],
    actions: usize,
    what: impl Fn() -> String,
) -> Result<Vec<usize>> {
    let mut v = list.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.is_empty() {
        return Err(Error::InvalidProblem(format!(
            "{}: no feasible action",
            what()
        )));
    }
    if let Some(&a) = v.iter().find(|&&a| a >= actions) {
        return Err(Error::InvalidProblem(format!(
            "{}: action {a} out of range ({actions} actions)",
            what()
        )));
    }
    Ok(v)
}

impl MultistageProblem {
    /// `first_costs[x]` is `f_1(x)`; `first_feasible` lists `X_1`.
    pub fn new(
        first_costs: Vec<f64>,
        first_feasible: Vec<usize>,
        mut stages: Vec<Stage>,
    ) -> Result<Self> {
        if first_costs.is_empty() {
            return Err(Error::InvalidProblem(
                "stage 1 needs at least one action".into(),
            ));
        }
        if first_costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProblem("stage 1 costs must be finite".into()));
        }
        let first_feasible =
            normalize_actions(&first_feasible, first_costs.len(), || "stage 1".into())?;
        let mut prev = first_costs.len();
        for (k, st) in stages.iter_mut().enumerate() {
            let t = k + 2;
            let n = st.outcomes();
            if st.costs.is_empty() {
                return Err(Error::InvalidProblem(format!(
                    "stage {t} needs at least one action"
                )));
            }
            for row in &st.costs {
                if row.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: row.len(),
                    });
                }
                if row.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidProblem(format!(
                        "stage {t} costs must be finite"
                    )));
                }
            }
            if st.feasible.len() != prev {
                return Err(Error::InvalidProblem(format!(
                    "stage {t} feasibility table has {} rows, expected one per stage-{} action ({prev})",
                    st.feasible.len(),
                    t - 1
                )));
            }
            let actions = st.actions();
            for (x, row) in st.feasible.iter_mut().enumerate() {
                if row.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: row.len(),
                    });
                }
                for (xi, list) in row.iter_mut().enumerate() {
                    *list = normalize_actions(list, actions, || {
                        format!("stage {t} after action {x} with outcome {xi}")
                    })?;
                }
            }
            prev = actions;
        }
        Ok(Self {
            first_costs,
            first_feasible,
            stages,
        })
    }

    pub fn horizon(&self) -> usize {
        self.stages.len() + 1
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn first_costs(&self) -> &[f64] {
        &self.first_costs
    }

    pub fn first_feasible(&self) -> &[usize] {
        &self.first_feasible
    }

    /// `|X_t|` for `t = 1..=T`.
    pub fn action_counts(&self) -> Vec<usize> {
        std::iter::once(self.first_costs.len())
            .chain(self.stages.iter().map(Stage::actions))
            .collect()
    }

    /// `|Ξ_t|` for `t = 1..=T` (stage 1 has one outcome).
    pub fn outcome_counts(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.stages.iter().map(Stage::outcomes))
            .collect()
    }

    /// Number of tree nodes at each stage.
    pub fn node_counts(&self) -> Vec<usize> {
        let mut out = vec![1usize];
        for st in &self.stages {
            out.push(out.last().unwrap() * st.outcomes());
        }
        out
    }

    pub fn scenario_count(&self) -> usize {
        *self.node_counts().last().unwrap()
    }

    /// Cost of action `x` at stage `t` (1-based) under outcome `xi`.
    pub fn cost(&self, t: usize, x: usize, xi: usize) -> f64 {
        if t == 1 {
            self.first_costs[x]
        } else {
            self.stages[t - 2].costs[x][xi]
        }
    }

    /// Allowed actions at stage `t` after `x_prev` under `xi`.
    pub fn allowed(&self, t: usize, x_prev: usize, xi: usize) -> &[usize] {
        if t == 1 {
            &self.first_feasible
        } else {
            &self.stages[t - 2].feasible[x_prev][xi]
        }
    }

    /// Product spec of stages `2..=T`; `None` when `T = 1`.
    pub fn rectangular_spec(&self) -> Result<Option<RectangularSpec>> {
        if self.stages.is_empty() {
            return Ok(None);
        }
        RectangularSpec::new(self.stages.iter().map(|s| s.set.clone()).collect()).map(Some)
    }

    /// Number of policies, saturating at `u128::MAX`.
    pub fn policy_count(&self) -> u128 {
        let t_max = self.horizon();
        // below[t][x_prev][xi]: policies of the subtree of a stage-t node
        let mut below: Vec<Vec<Vec<u128>>> = vec![Vec::new(); t_max + 1];
        for t in (1..=t_max).rev() {
            let prev = if t == 1 {
                1
            } else {
                self.action_counts()[t - 2]
            };
            let n = self.outcome_counts()[t - 1];
            let mut table = vec![vec![0u128; n]; prev];
            for (x_prev, row) in table.iter_mut().enumerate() {
                for (xi, cell) in row.iter_mut().enumerate() {
                    let mut total: u128 = 0;
                    for &a in self.allowed(t, x_prev, xi) {
                        let mut prod: u128 = 1;
                        if t < t_max {
                            for child in &below[t + 1][a] {
                                prod = prod.saturating_mul(*child);
                            }
                        }
                        total = total.saturating_add(prod);
                    }
                    *cell = total;
                }
            }
            below[t] = table;
        }
        below[1][0][0]
    }
}

/// Action per tree node: `actions[t-1][prefix]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Policy {
    pub actions: Vec<Vec<usize>>,
}

impl Policy {
    pub fn first_action(&self) -> usize {
        self.actions[0][0]
    }
}

/// `V_t(x_{t-1}, ξ_t)` and `𝒱_{t+1}(x_t)` tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueFunctions {
    /// `v[t-1][x_prev][ξ]`; stage 1 is `v[0][0][0]`.
    pub v: Vec<Vec<Vec<f64>>>,
    /// `cost_to_go[t-1][x]` is `𝒱_{t+1}(x)`; zero at `t = T`.
    pub cost_to_go: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpSolution {
    pub value: f64,
    pub policy: Policy,
    pub values: ValueFunctions,
}

/// First action minimizing `score`, scanning in increasing index order.
fn argmin(allowed: &[usize], score: impl Fn(usize) -> f64) -> (usize, f64) {
    let mut best = (allowed[0], score(allowed[0]));
    for &a in &allowed[1..] {
        let s = score(a);
        if s < best.1 - 1e-12 * (1.0 + s.abs()) {
            best = (a, s);
        }
    }
    best
}

/// Backward induction with robust stage expectations; the policy takes the
/// smallest minimizing action at every node.
pub fn solve_dp(prob: &MultistageProblem) -> Result<DpSolution> {
    let values = value_functions(prob, |t, v| {
        prob.stages[t - 2].set.robust_expectation(v).map(|(r, _)| r)
    })?;
    let policy = extract_policy(prob, &values);
    Ok(DpSolution {
        value: values.v[0][0][0],
        policy,
        values,
    })
}

/// Backward induction where `expect(t, V_t(x, ·))` gives the stage-`t`
/// expectation operator (`t ≥ 2`).
fn value_functions(
    prob: &MultistageProblem,
    expect: impl Fn(usize, &RandomVariable) -> Result<f64>,
) -> Result<ValueFunctions> {
    let t_max = prob.horizon();
    let actions = prob.action_counts();
    let outcomes = prob.outcome_counts();
    let mut v = vec![Vec::new(); t_max];
    let mut ctg = vec![Vec::new(); t_max];
    for t in (1..=t_max).rev() {
        ctg[t - 1] = if t == t_max {
            vec![0.0; actions[t - 1]]
        } else {
            v[t].iter()
                .map(|row: &Vec<f64>| expect(t + 1, &RandomVariable::new(row.clone())?))
                .collect::<Result<Vec<f64>>>()?
        };
        let prev = if t == 1 { 1 } else { actions[t - 2] };
        let c = &ctg[t - 1];
        v[t - 1] = (0..prev)
            .map(|x_prev| {
                (0..outcomes[t - 1])
                    .map(|xi| argmin(prob.allowed(t, x_prev, xi), |a| prob.cost(t, a, xi) + c[a]).1)
                    .collect()
            })
            .collect();
    }
    Ok(ValueFunctions { v, cost_to_go: ctg })
}

fn extract_policy(prob: &MultistageProblem, vf: &ValueFunctions) -> Policy {
    let counts = prob.node_counts();
    let outcomes = prob.outcome_counts();
    let mut actions: Vec<Vec<usize>> = Vec::with_capacity(counts.len());
    for t in 1..=prob.horizon() {
        let row = (0..counts[t - 1])
            .map(|prefix| {
                let xi = prefix % outcomes[t - 1];
                let x_prev = if t == 1 {
                    0
                } else {
                    actions[t - 2][prefix / outcomes[t - 1]]
                };
                let c = &vf.cost_to_go[t - 1];
                argmin(prob.allowed(t, x_prev, xi), |a| prob.cost(t, a, xi) + c[a]).0
            })
            .collect();
        actions.push(row);
    }
    Policy { actions }
}

/// Largest `|V_t - min{f_t + 𝒱_{t+1}}|` and `|𝒱_{t+1} - sup E_Q V_{t+1}|` over all entries.
pub fn bellman_residual(prob: &MultistageProblem, vf: &ValueFunctions) -> Result<f64> {
    let fresh = value_functions(prob, |t, v| {
        prob.stages[t - 2].set.robust_expectation(v).map(|(r, _)| r)
    })?;
    let mut worst: f64 = 0.0;
    for (a, b) in
        vf.v.iter()
            .flatten()
            .flatten()
            .zip(fresh.v.iter().flatten().flatten())
    {
        worst = worst.max((a - b).abs());
    }
    for (a, b) in vf
        .cost_to_go
        .iter()
        .flatten()
        .zip(fresh.cost_to_go.iter().flatten())
    {
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

/// `Z^π` over the scenarios of stages `2..=T`: the summed stage costs along
/// each path. Rejects policies with infeasible or out-of-shape entries.
pub fn policy_costs(prob: &MultistageProblem, pi: &Policy) -> Result<RandomVariable> {
    let counts = prob.node_counts();
    let outcomes = prob.outcome_counts();
    let t_max = prob.horizon();
    if pi.actions.len() != t_max {
        return Err(Error::DimensionMismatch {
            expected: t_max,
            found: pi.actions.len(),
        });
    }
    for t in 1..=t_max {
        let row = &pi.actions[t - 1];
        if row.len() != counts[t - 1] {
            return Err(Error::DimensionMismatch {
                expected: counts[t - 1],
                found: row.len(),
            });
        }
        for (prefix, &a) in row.iter().enumerate() {
            let xi = prefix % outcomes[t - 1];
            let x_prev = if t == 1 {
                0
            } else {
                pi.actions[t - 2][prefix / outcomes[t - 1]]
            };
            if prob.allowed(t, x_prev, xi).binary_search(&a).is_err() {
                return Err(Error::InvalidProblem(format!(
                    "policy action {a} at stage {t}, node {prefix} is infeasible"
                )));
            }
        }
    }
    let scenarios = counts[t_max - 1];
    let values = (0..scenarios)
        .map(|s| {
            let mut total = 0.0;
            let mut stride = scenarios;
            for t in 1..=t_max {
                stride /= outcomes[t - 1];
                let prefix = s / stride;
                total += prob.cost(t, pi.actions[t - 1][prefix], prefix % outcomes[t - 1]);
            }
            total
        })
        .collect();
    RandomVariable::new(values)
}

/// `𝔯(Z^π)` by the rectangular recursion.
pub fn nested_policy_value(prob: &MultistageProblem, pi: &Policy) -> Result<f64> {
    let z = policy_costs(prob, pi)?;
    match prob.rectangular_spec()? {
        Some(spec) => Ok(rectangular_nested(&spec, &z)?.value),
        None => Ok(z.values()[0]),
    }
}

/// `R(Z^π)`, the supremum over product measures.
pub fn static_policy_value(prob: &MultistageProblem, pi: &Policy) -> Result<f64> {
    let z = policy_costs(prob, pi)?;
    match prob.rectangular_spec()? {
        Some(spec) => Ok(static_rectangular(&spec, &z)?.value),
        None => Ok(z.values()[0]),
    }
}

/// Calls `visit` on every feasible policy in a fixed order (stage-major,
/// actions ascending, last node varying fastest).
pub fn for_each_policy(
    prob: &MultistageProblem,
    cap: u128,
    mut visit: impl FnMut(&Policy) -> Result<()>,
) -> Result<()> {
    let count = prob.policy_count();
    if count > cap {
        return Err(Error::CapExceeded {
            what: "policies".into(),
            count,
            cap,
        });
    }
    let counts = prob.node_counts();
    let outcomes = prob.outcome_counts();
    let nodes: Vec<(usize, usize)> = (1..=prob.horizon())
        .flat_map(|t| (0..counts[t - 1]).map(move |p| (t, p)))
        .collect();
    let mut pi = Policy {
        actions: counts.iter().map(|&c| vec![0; c]).collect(),
    };
    fn rec(
        prob: &MultistageProblem,
        nodes: &[(usize, usize)],
        outcomes: &[usize],
        k: usize,
        pi: &mut Policy,
        visit: &mut dyn FnMut(&Policy) -> Result<()>,
    ) -> Result<()> {
        let Some(&(t, prefix)) = nodes.get(k) else {
            return visit(pi);
        };
        let xi = prefix % outcomes[t - 1];
        let x_prev = if t == 1 {
            0
        } else {
            pi.actions[t - 2][prefix / outcomes[t - 1]]
        };
        for &a in prob.allowed(t, x_prev, xi) {
            pi.actions[t - 1][prefix] = a;
            rec(prob, nodes, outcomes, k + 1, pi, visit)?;
        }
        Ok(())
    }
    rec(prob, &nodes, &outcomes, 0, &mut pi, &mut visit)
}

/// Caches stage generators so the static value of many policies is cheap.
struct StaticEvaluator {
    spec: Option<RectangularSpec>,
    gens: Option<Vec<Vec<DiscreteMeasure>>>,
}

impl StaticEvaluator {
    fn new(prob: &MultistageProblem) -> Result<Self> {
        let spec = prob.rectangular_spec()?;
        let gens = match &spec {
            Some(s) => {
                let g = s
                    .stages()
                    .iter()
                    .map(|set| set.generators())
                    .collect::<Result<Vec<_>>>();
                match g {
                    Ok(g)
                        if g.iter().map(|v| v.len() as u128).product::<u128>()
                            <= crate::composite::ENUMERATION_CAP =>
                    {
                        Some(g)
                    }
                    Ok(_) | Err(Error::CapExceeded { .. }) => None,
                    Err(e) => return Err(e),
                }
            }
            None => None,
        };
        Ok(Self { spec, gens })
    }

    /// `(R(Z), heuristic)`
    fn eval(&self, z: &RandomVariable) -> Result<(f64, bool)> {
        match (&self.spec, &self.gens) {
            (None, _) => Ok((z.values()[0], false)),
            (Some(spec), Some(g)) => Ok((static_rectangular_exact(spec, g, z)?, false)),
            (Some(spec), None) => {
                let s = static_rectangular(spec, z)?;
                Ok((s.value, s.heuristic))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerationCheck {
    pub policies: usize,
    pub dp_value: f64,
    pub enumerated_min: f64,
    pub difference: f64,
    pub holds: bool,
}

/// `solve_dp` against the minimum of `𝔯(Z^π)` over all policies.
pub fn enumeration_check(prob: &MultistageProblem, cap: u128) -> Result<EnumerationCheck> {
    let dp = solve_dp(prob)?;
    let mut best = f64::INFINITY;
    let mut policies = 0usize;
    for_each_policy(prob, cap, |pi| {
        policies += 1;
        best = best.min(nested_policy_value(prob, pi)?);
        Ok(())
    })?;
    let difference = (dp.value - best).abs();
    Ok(EnumerationCheck {
        policies,
        dp_value: dp.value,
        enumerated_min: best,
        difference,
        holds: difference <= 1e-9,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinComparison {
    pub policies: usize,
    /// `min_π R(Z^π)`
    pub min_static: f64,
    /// `min_π 𝔯(Z^π)`
    pub min_nested: f64,
    /// First policy (enumeration order) attaining each minimum.
    pub static_argmin: Policy,
    pub nested_argmin: Policy,
    /// The sets of minimizing policies (within `1e-9`) differ.
    pub argmins_differ: bool,
    /// Some static value came from coordinate ascent.
    pub heuristic: bool,
    pub holds: bool,
}

/// Exhaustive comparison of `min R(Z^π)` and `min 𝔯(Z^π)`.
pub fn compare_min_static_vs_min_nested(prob: &MultistageProblem) -> Result<MinComparison> {
    compare_min_static_vs_min_nested_capped(prob, POLICY_CAP)
}

pub fn compare_min_static_vs_min_nested_capped(
    prob: &MultistageProblem,
    cap: u128,
) -> Result<MinComparison> {
    let evaluator = StaticEvaluator::new(prob)?;
    let mut rows: Vec<(Policy, f64, f64)> = Vec::new();
    let mut heuristic = false;
    for_each_policy(prob, cap, |pi| {
        let z = policy_costs(prob, pi)?;
        let (s, h) = evaluator.eval(&z)?;
        heuristic |= h;
        rows.push((pi.clone(), s, nested_policy_value(prob, pi)?));
        Ok(())
    })?;
    let min_static = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let min_nested = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let static_set: Vec<bool> = rows.iter().map(|r| r.1 <= min_static + 1e-9).collect();
    let nested_set: Vec<bool> = rows.iter().map(|r| r.2 <= min_nested + 1e-9).collect();
    let static_argmin = rows[static_set.iter().position(|&b| b).unwrap()].0.clone();
    let nested_argmin = rows[nested_set.iter().position(|&b| b).unwrap()].0.clone();
    Ok(MinComparison {
        policies: rows.len(),
        min_static,
        min_nested,
        static_argmin,
        nested_argmin,
        argmins_differ: static_set != nested_set,
        heuristic,
        holds: min_static <= min_nested + 1e-9,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakDuality {
    /// `max_Q min_π E_Q[Z^π]` over product vertex tuples.
    pub dual: f64,
    /// `min_π R(Z^π)`
    pub primal: f64,
    pub vertex_tuples: usize,
    pub holds: bool,
}

/// Interchanging min and max can only lower the value.
///
/// For a fixed product measure the inner minimum is a risk-neutral DP.
pub fn weak_duality_check(prob: &MultistageProblem) -> Result<WeakDuality> {
    let cmp = compare_min_static_vs_min_nested(prob)?;
    let Some(spec) = prob.rectangular_spec()? else {
        let v = solve_dp(prob)?.value;
        return Ok(WeakDuality {
            dual: v,
            primal: cmp.min_static,
            vertex_tuples: 1,
            holds: v <= cmp.min_static + 1e-9,
        });
    };
    let gens = spec
        .stages()
        .iter()
        .map(|s| s.generators())
        .collect::<Result<Vec<_>>>()?;
    let count = gens.iter().map(|g| g.len() as u128).product::<u128>();
    if count > crate::composite::ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "product vertex tuples".into(),
            count,
            cap: crate::composite::ENUMERATION_CAP,
        });
    }
    let mut dual = f64::NEG_INFINITY;
    let mut pick = vec![0usize; gens.len()];
    loop {
        let vf = value_functions(prob, |t, v| {
            Ok(crate::measure::dot(
                v.values(),
                gens[t - 2][pick[t - 2]].weights(),
            ))
        })?;
        dual = dual.max(vf.v[0][0][0]);
        let mut k = gens.len();
        loop {
            if k == 0 {
                return Ok(WeakDuality {
                    dual,
                    primal: cmp.min_static,
                    vertex_tuples: count as usize,
                    holds: dual <= cmp.min_static + 1e-9,
                });
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < gens[k].len() {
                break;
            }
            pick[k] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessityViolation {
    pub policy: usize,
    pub stage: usize,
    pub node: usize,
    pub action: usize,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessityReport {
    /// Every stage set is strictly monotone against its reference measure.
    pub applicable: bool,
    pub optimal_value: f64,
    /// The extracted argmin policy attains the optimum.
    pub sufficiency: bool,
    pub optimal_policies: usize,
    pub violations: Vec<NecessityViolation>,
    pub note: Option<String>,
}

/// Checks that every optimal policy picks a stage-wise argmin at every
/// node reachable under the reference measures.
pub fn verify_optimality_necessity(prob: &MultistageProblem) -> Result<NecessityReport> {
    verify_optimality_necessity_capped(prob, POLICY_CAP)
}

pub fn verify_optimality_necessity_capped(
    prob: &MultistageProblem,
    cap: u128,
) -> Result<NecessityReport> {
    let dp = solve_dp(prob)?;
    let sufficiency = (nested_policy_value(prob, &dp.policy)? - dp.value).abs() <= 1e-9;
    let mut reach: Vec<Vec<bool>> = Vec::new();
    let mut applicable = true;
    for st in &prob.stages {
        let mu = st.set.reference_measure()?.normalized;
        applicable &= st.set.is_strictly_monotone(&mu)?.strict;
        reach.push(mu.weights().iter().map(|&w| w > crate::TOL).collect());
    }
    let mut rep = NecessityReport {
        applicable,
        optimal_value: dp.value,
        sufficiency,
        optimal_policies: 0,
        violations: Vec::new(),
        note: None,
    };
    if !applicable {
        rep.note = Some("some stage set is not strictly monotone; necessity not checked".into());
        return Ok(rep);
    }
    let counts = prob.node_counts();
    let outcomes = prob.outcome_counts();
    let mut index = 0usize;
    for_each_policy(prob, cap, |pi| {
        index += 1;
        if nested_policy_value(prob, pi)? > dp.value + 1e-9 {
            return Ok(());
        }
        rep.optimal_policies += 1;
        let mut reachable = vec![vec![true]];
        for t in 1..=prob.horizon() {
            if t > 1 {
                let row = (0..counts[t - 1])
                    .map(|p| {
                        reachable[t - 2][p / outcomes[t - 1]] && reach[t - 2][p % outcomes[t - 1]]
                    })
                    .collect();
                reachable.push(row);
            }
            for prefix in 0..counts[t - 1] {
                if !reachable[t - 1][prefix] {
                    continue;
                }
                let xi = prefix % outcomes[t - 1];
                let x_prev = if t == 1 {
                    0
                } else {
                    pi.actions[t - 2][prefix / outcomes[t - 1]]
                };
                let a = pi.actions[t - 1][prefix];
                let excess = prob.cost(t, a, xi) + dp.values.cost_to_go[t - 1][a]
                    - dp.values.v[t - 1][x_prev][xi];
                if excess > 1e-9 {
                    rep.violations.push(NecessityViolation {
                        policy: index - 1,
                        stage: t,
                        node: prefix,
                        action: a,
                        excess,
                    });
                }
            }
        }
        Ok(())
    })?;
    Ok(rep)
}

/// `(π, R(Z^π), 𝔯(Z^π))` for every policy in enumeration order.
pub fn policy_values(prob: &MultistageProblem, cap: u128) -> Result<Vec<(Policy, f64, f64)>> {
    let evaluator = StaticEvaluator::new(prob)?;
    let mut out = Vec::new();
    for_each_policy(prob, cap, |pi| {
        let z = policy_costs(prob, pi)?;
        let s = evaluator.eval(&z)?.0;
        out.push((pi.clone(), s, nested_policy_value(prob, pi)?));
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(w: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::probability(w.to_vec()).unwrap()
    }

    /// Copy-the-guess instance: the stage-2 action must be repeated at stage
    /// 3, which pays 1 when the stage-3 outcome matches it.
    fn matching() -> MultistageProblem {
        let s2 = Stage::unconstrained(
            AmbiguitySet::singleton(DiscreteMeasure::uniform(2)).unwrap(),
            vec![vec![0.0, 0.0], vec![0.1, 0.1]],
            1,
        );
        let s3 = Stage {
            set: AmbiguitySet::simplex(2),
            costs: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            feasible: vec![vec![vec![0], vec![0]], vec![vec![1], vec![1]]],
        };
        MultistageProblem::new(vec![0.0], vec![0], vec![s2, s3]).unwrap()
    }

    #[test]
    fn single_stage_is_plain_minimum() {
        let p = MultistageProblem::new(vec![3.0, 1.0, 1.0, 2.0], vec![0, 1, 2, 3], vec![]).unwrap();
        let s = solve_dp(&p).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.policy.first_action(), 1);
        let p = MultistageProblem::new(vec![3.0, 1.0, 1.0, 2.0], vec![0, 3], vec![]).unwrap();
        assert_eq!(solve_dp(&p).unwrap().value, 2.0);
    }

    #[test]
    fn two_stage_simplex_is_min_max() {
        let costs = vec![vec![4.0, 1.0], vec![2.0, 3.0]];
        let s2 = Stage::unconstrained(AmbiguitySet::simplex(2), costs.clone(), 1);
        let p = MultistageProblem::new(vec![0.0], vec![0], vec![s2]).unwrap();
        // oracle: min over 4 policies of max over 2 scenarios
        let mut best = f64::INFINITY;
        for a in 0..2 {
            for b in 0..2 {
                best = best.min(costs[a][0].max(costs[b][1]));
            }
        }
        let s = solve_dp(&p).unwrap();
        assert_eq!(s.value, best);
        assert_eq!(p.policy_count(), 4);
        assert_eq!(s.policy.actions[1], vec![1, 0]);
        assert!(enumeration_check(&p, POLICY_CAP).unwrap().holds);
    }

    #[test]
    fn risk_neutral_matches_enumeration() {
        let s2 = Stage::unconstrained(
            AmbiguitySet::singleton(dm(&[0.3, 0.7])).unwrap(),
            vec![vec![1.0, 5.0], vec![2.0, 2.5], vec![0.0, 9.0]],
            2,
        );
        let s3 = Stage {
            set: AmbiguitySet::singleton(dm(&[0.6, 0.4])).unwrap(),
            costs: vec![vec![1.0, 2.0], vec![3.0, 0.5]],
            feasible: vec![
                vec![vec![0], vec![0, 1]],
                vec![vec![0, 1], vec![1]],
                vec![vec![1], vec![0, 1]],
            ],
        };
        let p = MultistageProblem::new(vec![1.0, 0.5], vec![0, 1], vec![s2, s3]).unwrap();
        let mut oracle = f64::INFINITY;
        let probs = [0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4];
        for_each_policy(&p, POLICY_CAP, |pi| {
            let z = policy_costs(&p, pi)?;
            oracle = oracle.min(crate::measure::dot(z.values(), &probs));
            Ok(())
        })
        .unwrap();
        let s = solve_dp(&p).unwrap();
        assert!((s.value - oracle).abs() < 1e-12);
        assert!((nested_policy_value(&p, &s.policy).unwrap() - s.value).abs() < 1e-12);
        assert!((static_policy_value(&p, &s.policy).unwrap() - s.value).abs() < 1e-12);
        assert!(bellman_residual(&p, &s.values).unwrap() < 1e-12);
        let rep = verify_optimality_necessity(&p).unwrap();
        assert!(
            rep.applicable && rep.sufficiency && rep.violations.is_empty(),
            "{rep:?}"
        );
    }

    #[test]
    fn constant_costs_add_up() {
        let s2 = Stage::unconstrained(AmbiguitySet::simplex(3), vec![vec![2.0; 3]], 1);
        let s3 = Stage::unconstrained(AmbiguitySet::simplex(2), vec![vec![0.5; 2]], 1);
        let p = MultistageProblem::new(vec![1.0], vec![0], vec![s2, s3]).unwrap();
        let s = solve_dp(&p).unwrap();
        assert!((nested_policy_value(&p, &s.policy).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn history_dependent_gap() {
        let p = matching();
        let cmp = compare_min_static_vs_min_nested(&p).unwrap();
        assert_eq!(cmp.policies, 4);
        assert!((cmp.min_nested - 1.0).abs() < 1e-12);
        assert!((cmp.min_static - 0.55).abs() < 1e-12);
        assert!(cmp.argmins_differ);
        assert_eq!(cmp.nested_argmin.actions[1], vec![0, 0]);
        assert_eq!(cmp.static_argmin.actions[1], vec![0, 1]);
        assert!(weak_duality_check(&p).unwrap().holds);
        let rep = verify_optimality_necessity(&p).unwrap();
        assert!(!rep.applicable && rep.sufficiency);
    }

    #[test]
    fn load_time_rejections() {
        let s2 = Stage {
            set: AmbiguitySet::simplex(2),
            costs: vec![vec![0.0, 0.0]],
            feasible: vec![vec![vec![0], vec![]]],
        };
        assert!(matches!(
            MultistageProblem::new(vec![0.0], vec![0], vec![s2]),
            Err(Error::InvalidProblem(_))
        ));
        let s2 = Stage {
            set: AmbiguitySet::simplex(2),
            costs: vec![vec![0.0, 0.0]],
            feasible: vec![vec![vec![0], vec![3]]],
        };
        assert!(MultistageProblem::new(vec![0.0], vec![0], vec![s2]).is_err());
        let p = matching();
        let bad = Policy {
            actions: vec![vec![0], vec![0, 1], vec![1, 1, 1, 1]],
        };
        assert!(nested_policy_value(&p, &bad).is_err());
    }

    #[test]
    fn enumeration_cap() {
        let p = matching();
        assert!(matches!(
            compare_min_static_vs_min_nested_capped(&p, 3),
            Err(Error::CapExceeded {
                count: 4,
                cap: 3,
                ..
            })
        ));
    }
}
