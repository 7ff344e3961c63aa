//! Library side of the `dro` subcommands: each function evaluates named
//! objects of a loaded [`Document`] and returns a [`Report`].

use serde_json::{json, Map, Value};

use crate::ambiguity::{AmbiguitySet, Kind};
use crate::composite::{
    composite_dominates_static, composite_functional, induced_set, rectangular_equivalence_check,
    rectangular_nested, static_rectangular,
};
use crate::conditional::{
    conditional_avar_nested, conditional_robust, has_property_p, tower_upper_bound_check,
};
use crate::dp::{
    bellman_residual, compare_min_static_vs_min_nested, enumeration_check, solve_dp,
    weak_duality_check, POLICY_CAP,
};
use crate::error::{Error, Result};
use crate::measure::{expectation, DiscreteMeasure, RandomVariable};
use crate::problem::Document;
use crate::report::{matrix, measure, num, nums, Report, Table};
use crate::risk_static::{avar_dual, avar_primal, check_axioms, AvarSpec};
use crate::rng::SplitMix64;
use crate::transport::{
    ball_gap_sweep, kantorovich_dual, multistage_bound, multistage_bound_empirical_check,
    wasserstein_1,
};
use crate::verify::{self, VerifyOptions};

/// Tolerance used by command checks unless overridden.
pub const CHECK_TOL: f64 = 1e-7;

fn with_doc(command: &str, doc: &Document) -> Report {
    let mut r = Report::new(command);
    r.input_digest = Some(doc.digest.clone());
    r
}

/// `sup_{Q ∈ M} E_Q[Z]` with a maximizing member.
pub fn eval_static(doc: &Document, variable: &str, set: &str) -> Result<Report> {
    let z = doc.variable(variable)?;
    let m = doc.set(set)?;
    let (value, argmax) = m.robust_expectation(z)?;
    let mut r = with_doc("eval-static", doc);
    r.arg("variable", variable).arg("set", set);
    r.set("kind", m.kind_name())
        .set("value", num(value))
        .set("argmax", measure(&argmax));
    let attained = expectation(z, &argmax)?;
    r.check_residual("argmax attains value", (attained - value).abs(), CHECK_TOL);
    r.check(
        "argmax is a member",
        m.contains(&argmax, CHECK_TOL)?,
        None,
        None,
    );
    Ok(r)
}

/// Reference measure for conditional evaluation: the named one, else the
/// AVaR reference, else the normalized mass suprema of the set.
fn conditional_reference(
    doc: &Document,
    set: &AmbiguitySet,
    reference: Option<&str>,
) -> Result<DiscreteMeasure> {
    if let Some(name) = reference {
        return doc.measure(name).cloned();
    }
    match set.kind() {
        Kind::AVaRSet { reference, .. } => Ok(reference.clone()),
        _ => Ok(set.reference_measure()?.normalized),
    }
}

/// Per-atom conditional values; `nested_avar` switches to the per-atom AVaR
/// under the conditional reference law (AVaR sets only).
pub fn eval_conditional(
    doc: &Document,
    variable: &str,
    set: &str,
    partition: &str,
    reference: Option<&str>,
    nested_avar: bool,
) -> Result<Report> {
    let z = doc.variable(variable)?;
    let m = doc.set(set)?;
    let g = doc.partition(partition)?;
    let p = conditional_reference(doc, m, reference)?;
    let mut r = with_doc("eval-conditional", doc);
    r.arg("variable", variable)
        .arg("set", set)
        .arg("partition", partition)
        .arg("nested_avar", nested_avar);
    if let Some(name) = reference {
        r.arg("reference", name);
    }
    let value = if nested_avar {
        let Kind::AVaRSet { alpha, reference } = m.kind() else {
            return Err(Error::InvalidProblem(format!(
                "--nested-avar needs an avar set; '{set}' is {}",
                m.kind_name()
            )));
        };
        conditional_avar_nested(&AvarSpec::new(*alpha, reference.clone())?, z, g)?
    } else {
        conditional_robust(m, z, g, &p)?
    };
    let property_p = has_property_p(m, g)?;
    r.set(
        "mode",
        if nested_avar {
            "nested_avar"
        } else {
            "conditional_robust"
        },
    )
    .set("atoms", json!(g.atoms()))
    .set("per_atom", nums(&value.per_atom))
    .set("values", nums(value.values.values()))
    .set("te_holds", value.te_holds)
    .set("property_p", property_p)
    .set("reference", measure(&p));
    if !value.te_holds {
        r.warnings.push(format!(
            "atom {} is unreachable: no member charges it",
            value.first_unreachable().unwrap_or(0)
        ));
    }
    if !nested_avar && value.te_holds {
        let t = tower_upper_bound_check(m, z, g, &p)?;
        r.set("tower", json!({ "lhs": num(t.lhs), "rhs": num(t.rhs) }));
        r.check_residual(
            "static value below tower",
            (t.lhs - t.rhs).max(0.0),
            CHECK_TOL,
        );
    }
    Ok(r)
}

/// Composite fold (for a `composites` entry) or rectangular recursion (for a
/// `rectangular` entry). `induced` adds the two-stage induced family.
pub fn eval_composite(doc: &Document, variable: &str, spec: &str, induced: bool) -> Result<Report> {
    let z = doc.variable(variable)?;
    let mut r = with_doc("eval-composite", doc);
    r.arg("variable", variable)
        .arg("spec", spec)
        .arg("induced_set", induced);
    if let Ok(entry) = doc.composite(spec) {
        if induced {
            return Err(Error::InvalidProblem(
                "--induced-set needs a rectangular spec".into(),
            ));
        }
        let set = doc.set(&entry.set)?;
        let f = doc.filtration(&entry.filtration)?;
        let p = doc.measure(&entry.reference)?;
        let c = composite_functional(set, f, z, p)?;
        let d = composite_dominates_static(set, f, z, p)?;
        r.set("mode", "composite")
            .set("value", num(c.value))
            .set(
                "stage_values",
                Value::Array(c.stage_values.iter().map(|v| nums(v.values())).collect()),
            )
            .set("static_value", num(d.static_value));
        r.check_residual(
            "composite dominates static",
            (d.static_value - d.composite_value).max(0.0),
            CHECK_TOL,
        );
        return Ok(r);
    }
    let rect = doc.rectangular_spec(spec)?;
    let nested = rectangular_nested(rect, z)?;
    let eq =
        rectangular_equivalence_check(rect, z, &DiscreteMeasure::uniform(rect.scenario_count()))?;
    let stat = static_rectangular(rect, z)?;
    r.set("mode", "rectangular")
        .set("value", num(nested.value))
        .set(
            "tables",
            Value::Array(nested.tables.iter().map(|t| nums(t)).collect()),
        )
        .set("composite_value", num(eq.composite))
        .set("static_value", num(stat.value));
    r.check_residual("recursion equals composite fold", eq.difference, CHECK_TOL);
    r.check_residual(
        "static below nested",
        (stat.value - nested.value).max(0.0),
        CHECK_TOL,
    );
    if induced {
        let ind = induced_set(rect)?;
        let best = ind.max_expectation(z);
        r.set(
            "induced_set",
            json!({
                "pre_dedup_count": count(ind.pre_dedup_count),
                "distinct": ind.measures.len(),
                "family1": ind.family1.len(),
                "max_expectation": num(best),
                "family1_max": num(ind.family1_max(z)),
                "measures": Value::Array(ind.measures.iter().map(measure).collect()),
            }),
        );
        r.check_residual(
            "induced family reproduces nested value",
            (best - nested.value).abs(),
            CHECK_TOL,
        );
    }
    Ok(r)
}

/// Counts beyond `u64` are written as decimal strings.
fn count(n: u128) -> Value {
    u64::try_from(n).map_or_else(|_| Value::String(n.to_string()), Value::from)
}

/// Backward induction with optional enumeration oracle.
pub fn solve(doc: &Document, problem: &str, enumerate: bool) -> Result<Report> {
    let prob = doc.problem(problem)?;
    let sol = solve_dp(prob)?;
    let mut r = with_doc("solve", doc);
    r.arg("problem", problem).arg("enumerate", enumerate);
    r.set("value", num(sol.value))
        .set("first_action", sol.policy.first_action())
        .set("policy", json!(sol.policy.actions))
        .set(
            "cost_to_go",
            Value::Array(sol.values.cost_to_go.iter().map(|c| nums(c)).collect()),
        )
        .set(
            "value_functions",
            Value::Array(sol.values.v.iter().map(|v| matrix(v)).collect()),
        )
        .set("node_counts", json!(prob.node_counts()));
    r.check_residual(
        "Bellman residual",
        bellman_residual(prob, &sol.values)?,
        CHECK_TOL,
    );
    if enumerate {
        let e = enumeration_check(prob, POLICY_CAP)?;
        let c = compare_min_static_vs_min_nested(prob)?;
        r.set(
            "enumeration",
            json!({
                "policies": e.policies,
                "enumerated_min": num(e.enumerated_min),
                "min_static": num(c.min_static),
                "min_nested": num(c.min_nested),
                "static_argmin": c.static_argmin.actions,
                "nested_argmin": c.nested_argmin.actions,
                "argmins_differ": c.argmins_differ,
            }),
        );
        r.check_residual("DP equals enumerated minimum", e.difference, CHECK_TOL);
        r.check_residual(
            "min static below min nested",
            (c.min_static - c.min_nested).max(0.0),
            CHECK_TOL,
        );
        if c.heuristic {
            r.warnings
                .push("static values of non-finite stage sets come from vertex sampling".into());
        }
    }
    Ok(r)
}

/// `W1(P, Q)` with an optimal plan and the Kantorovich dual value.
pub fn wasserstein(doc: &Document, from: &str, to: &str, space: Option<&str>) -> Result<Report> {
    let p = doc.measure_entry(from)?;
    let q = doc.measure_entry(to)?;
    let space_name = space
        .map(str::to_string)
        .or_else(|| p.space.clone())
        .or_else(|| q.space.clone())
        .ok_or_else(|| Error::Schema(format!("no space for '{from}'; pass --space")))?;
    let s = doc.space(&space_name)?;
    let (w, plan) = wasserstein_1(&p.value, &q.value, s)?;
    let dual = kantorovich_dual(&p.value, &q.value, s)?;
    let mut r = with_doc("wasserstein", doc);
    r.arg("from", from).arg("to", to).arg("space", space_name);
    r.set("distance", num(w))
        .set("plan", matrix(&plan.plan))
        .set("dual", num(dual));
    r.check_residual("primal equals dual", (w - dual).abs(), CHECK_TOL);
    let marg = plan
        .row_sums()
        .iter()
        .zip(p.value.weights())
        .chain(plan.col_sums().iter().zip(q.value.weights()))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    r.check_residual("plan marginals", marg, CHECK_TOL);
    Ok(r)
}

/// Multistage bound formula, empirical check and single-ball sweep.
pub fn bounds(doc: &Document, name: &str) -> Result<Report> {
    let entry = doc.bound(name)?;
    let mut r = with_doc("bounds", doc);
    r.arg("bound", name);
    r.set("bound", num(multistage_bound(&entry.spec)));
    if let (Some(m), Some(v)) = (&entry.model, &entry.variable) {
        let model = doc.tree_model(m)?;
        let z = doc.variable(v)?;
        let e = multistage_bound_empirical_check(model, &entry.spec, z)?;
        r.set(
            "empirical",
            json!({
                "nested": num(e.nested),
                "expectation": num(e.expectation),
                "gap": num(e.gap),
            }),
        );
        r.check(
            "multistage gap within bound",
            e.holds,
            Some((e.gap - e.bound).max(0.0)),
            None,
        );
    }
    let mut table = Table {
        header: ["epsilon", "gap", "bound", "holds"]
            .map(String::from)
            .to_vec(),
        rows: Vec::new(),
    };
    if let Some(s) = &entry.sweep {
        let center = doc.measure_entry(&s.center)?;
        let space = doc.space(center.space.as_deref().expect("validated on load"))?;
        let z = doc.variable(&s.variable)?;
        let rows = ball_gap_sweep(&center.value, &s.radii, space, z)?;
        let mut worst = 0.0f64;
        let mut all = true;
        for g in &rows {
            table.rows.push(vec![
                num(g.epsilon),
                num(g.gap),
                num(g.bound),
                Value::Bool(g.holds),
            ]);
            worst = worst.max(g.gap.abs() - g.bound);
            all &= g.holds;
        }
        r.set(
            "sweep",
            Value::Array(
                rows.iter()
                    .map(|g| {
                        json!({
                            "epsilon": num(g.epsilon),
                            "gap": num(g.gap),
                            "bound": num(g.bound),
                            "holds": g.holds,
                        })
                    })
                    .collect(),
            ),
        );
        r.check(
            "single-ball gap within bound",
            all,
            Some(worst.max(0.0)),
            None,
        );
    }
    r.table = Some(table);
    Ok(r)
}

/// Default trials of the per-file battery.
pub const FILE_TRIALS: usize = 50;

/// Runs the acceptance batteries.
pub fn verify_builtin(opts: &VerifyOptions, only: &[usize]) -> Report {
    let mut r = Report::new("verify");
    r.arg("builtin", true).arg("seed", opts.seed);
    if let Some(t) = opts.trials {
        r.arg("trials", t);
    }
    if let Some(t) = opts.tolerance {
        r.arg("tolerance", num(t));
    }
    if !only.is_empty() {
        r.arg("criteria", json!(only));
    }
    let mut criteria = Vec::new();
    for c in verify::run(opts, only) {
        criteria.push(json!({
            "id": c.id,
            "name": c.name,
            "trials": c.trials,
            "failures": c.failures,
            "tolerance": num(c.tolerance),
            "max_residual": num(c.max_residual),
            "detail": c.detail,
        }));
        r.check(
            &format!("criterion {}: {}", c.id, c.name),
            c.passed,
            Some(c.max_residual),
            None,
        );
        r.warnings.extend(
            c.warnings
                .iter()
                .map(|w| format!("criterion {}: {w}", c.id)),
        );
    }
    r.set("criteria", Value::Array(criteria));
    r
}

fn random_variable(rng: &mut SplitMix64, n: usize) -> RandomVariable {
    RandomVariable::new((0..n).map(|_| rng.range(-5.0, 5.0)).collect()).expect("finite")
}

/// Invariant battery over the objects of a file: axioms and dual forms of
/// every set, dominance of every composite, recursion identities of every
/// rectangular spec, oracles of every problem and every bound.
pub fn verify_file(doc: &Document, opts: &VerifyOptions) -> Result<Report> {
    let trials = opts.trials.unwrap_or(FILE_TRIALS);
    let tol = opts.tolerance.unwrap_or(CHECK_TOL);
    let mut rng = SplitMix64::new(opts.seed);
    let mut r = with_doc("verify", doc);
    r.arg("seed", opts.seed)
        .arg("trials", trials)
        .arg("tolerance", num(tol));
    if trials == 0 {
        r.warnings
            .push("zero trials requested: randomized checks are vacuous".into());
    }
    let mut summary = Map::new();
    for (name, set) in &doc.sets {
        let ax = check_axioms(set, trials, &mut rng)?;
        r.check_residual(&format!("set {name}: axioms"), ax.max_violation(), tol);
        let mut dual_gap = 0.0f64;
        for _ in 0..trials {
            let z = random_variable(&mut rng, set.len());
            let lp = set.robust_expectation_lp(&z)?.0;
            let direct = set.robust_expectation(&z)?.0;
            dual_gap = dual_gap.max((lp - direct).abs());
            match set.kind() {
                Kind::AVaRSet { alpha, reference } => {
                    let spec = AvarSpec::new(*alpha, reference.clone())?;
                    let (pv, _) = avar_primal(&spec, &z)?;
                    dual_gap = dual_gap
                        .max((pv - avar_dual(&spec, &z)?).abs())
                        .max((pv - direct).abs());
                }
                Kind::MomentSet { .. } => {
                    dual_gap = dual_gap.max((set.moment_dual_value(&z)? - direct).abs());
                }
                _ => {}
            }
        }
        r.check_residual(&format!("set {name}: closed form equals LP"), dual_gap, tol);
        summary.insert(name.clone(), json!(set.kind_name()));
    }
    r.set("sets", Value::Object(summary));
    for (name, c) in &doc.composites {
        let set = doc.set(&c.set)?;
        let f = doc.filtration(&c.filtration)?;
        let p = doc.measure(&c.reference)?;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let z = random_variable(&mut rng, set.len());
            match composite_dominates_static(set, f, &z, p) {
                Ok(d) => worst = worst.max(d.static_value - d.composite_value),
                Err(Error::UnreachableAtom { stage, atom }) => {
                    r.warnings.push(format!(
                        "composite {name}: unreachable atom {atom} at stage {stage}"
                    ));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        r.check_residual(
            &format!("composite {name}: dominates static"),
            worst.max(0.0),
            tol,
        );
    }
    for (name, spec) in &doc.rectangular {
        let uniform = DiscreteMeasure::uniform(spec.scenario_count());
        let mut eq = 0.0f64;
        let mut order = 0.0f64;
        for _ in 0..trials {
            let z = random_variable(&mut rng, spec.scenario_count());
            let e = rectangular_equivalence_check(spec, &z, &uniform)?;
            eq = eq.max(e.difference);
            let s = static_rectangular(spec, &z)?;
            order = order.max(s.value - e.nested);
        }
        r.check_residual(
            &format!("rectangular {name}: recursion equals fold"),
            eq,
            tol,
        );
        r.check_residual(
            &format!("rectangular {name}: static below nested"),
            order.max(0.0),
            tol,
        );
    }
    for (name, prob) in &doc.problems {
        let sol = solve_dp(prob)?;
        r.check_residual(
            &format!("problem {name}: Bellman residual"),
            bellman_residual(prob, &sol.values)?,
            tol,
        );
        if prob.policy_count() <= POLICY_CAP {
            let e = enumeration_check(prob, POLICY_CAP)?;
            r.check_residual(
                &format!("problem {name}: DP equals enumeration"),
                e.difference,
                tol,
            );
            match weak_duality_check(prob) {
                Ok(w) => r.check_residual(
                    &format!("problem {name}: weak duality"),
                    (w.dual - w.primal).max(0.0),
                    tol,
                ),
                Err(Error::CapExceeded { .. }) => r.warnings.push(format!(
                    "problem {name}: too many vertex tuples for weak duality"
                )),
                Err(e) => return Err(e),
            }
        } else {
            r.warnings.push(format!(
                "problem {name}: {} policies exceed the enumeration cap",
                prob.policy_count()
            ));
        }
    }
    for (name, b) in &doc.bounds {
        if let (Some(m), Some(v)) = (&b.model, &b.variable) {
            let e =
                multistage_bound_empirical_check(doc.tree_model(m)?, &b.spec, doc.variable(v)?)?;
            r.check(
                &format!("bound {name}: multistage gap"),
                e.holds,
                Some((e.gap - e.bound).max(0.0)),
                None,
            );
        }
    }
    Ok(r)
}
