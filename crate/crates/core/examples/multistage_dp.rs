//! Backward induction for a three-stage problem with rectangular ambiguity,
//! checked against exhaustive policy enumeration, the static product value
//! and the dual bound.

use dro_nested::ambiguity::AmbiguitySet;
use dro_nested::dp::{
    compare_min_static_vs_min_nested, enumeration_check, solve_dp, verify_optimality_necessity,
    weak_duality_check, MultistageProblem, Stage, POLICY_CAP,
};
use dro_nested::measure::DiscreteMeasure;
use dro_nested::Result;

fn main() -> Result<()> {
    // stage 1 picks a capacity, stage 2 sees demand and may top up,
    // stage 3 pays for shortage
    let demand = AmbiguitySet::finite_family(vec![
        DiscreteMeasure::probability(vec![0.5, 0.5])?,
        DiscreteMeasure::probability(vec![0.2, 0.8])?,
    ])?;
    let shock = AmbiguitySet::finite_family(vec![
        DiscreteMeasure::probability(vec![0.7, 0.3])?,
        DiscreteMeasure::probability(vec![0.4, 0.6])?,
    ])?;
    let prob = MultistageProblem::new(
        vec![0.0, 1.0],
        vec![0, 1],
        vec![
            Stage::unconstrained(demand, vec![vec![0.0, 0.0], vec![0.6, 0.6]], 2),
            Stage {
                set: shock,
                costs: vec![vec![0.0, 3.0], vec![0.0, 0.5]],
                // a top-up or an initial capacity allows the cheap response
                feasible: vec![vec![vec![0], vec![0]], vec![vec![0, 1], vec![0, 1]]],
            },
        ],
    )?;

    let sol = solve_dp(&prob)?;
    println!(
        "optimal value {:.4}, policy {:?}",
        sol.value, sol.policy.actions
    );
    println!("cost-to-go by stage {:?}", sol.values.cost_to_go);

    let e = enumeration_check(&prob, POLICY_CAP)?;
    println!(
        "{} policies, enumerated minimum {:.4}",
        e.policies, e.enumerated_min
    );
    let c = compare_min_static_vs_min_nested(&prob)?;
    println!(
        "min static {:.4} <= min nested {:.4}; argmins {:?} / {:?}",
        c.min_static, c.min_nested, c.static_argmin.actions, c.nested_argmin.actions
    );
    let w = weak_duality_check(&prob)?;
    println!(
        "dual {:.4} <= primal {:.4} over {} vertex tuples",
        w.dual, w.primal, w.vertex_tuples
    );
    let n = verify_optimality_necessity(&prob)?;
    println!(
        "necessity applicable {}, {} optimal policies, {} violations",
        n.applicable,
        n.optimal_policies,
        n.violations.len()
    );
    assert!(e.holds && c.holds && w.holds && n.violations.is_empty());
    Ok(())
}
