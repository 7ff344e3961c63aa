//! Order-1 Wasserstein distances and the bounds they give: the
//! Kantorovich-Rubinstein estimate, a single ball sweep, and the multistage
//! bound on a small tree whose transitions drift with the history.

use dro_nested::measure::{DiscreteMeasure, FiniteSpace, RandomVariable};
use dro_nested::transport::{
    ball_gap_sweep, kantorovich_dual, kr_bound_check, multistage_bound,
    multistage_bound_empirical_check, wasserstein_1, MultistageBoundSpec, TreeModel,
};
use dro_nested::Result;

fn main() -> Result<()> {
    let space = FiniteSpace::on_line(&[0.0, 1.0, 2.0, 4.0])?;
    let p = DiscreteMeasure::probability(vec![0.4, 0.3, 0.2, 0.1])?;
    let q = DiscreteMeasure::probability(vec![0.1, 0.2, 0.3, 0.4])?;
    let (w, plan) = wasserstein_1(&p, &q, &space)?;
    println!(
        "W1 = {w:.4}, dual = {:.4}",
        kantorovich_dual(&p, &q, &space)?
    );
    for row in &plan.plan {
        println!("  {row:?}");
    }

    let z = RandomVariable::new(vec![0.0, 0.5, 1.5, 2.0])?;
    let kr = kr_bound_check(&p, &q, &space, &z)?;
    println!("|E_Q Z - E_P Z| = {:.4} <= L W1 = {:.4}", kr.lhs, kr.rhs);

    println!("epsilon   gap  bound");
    for g in ball_gap_sweep(&p, &[0.0, 0.25, 0.5, 1.0, 2.0, 4.0], &space, &z)? {
        println!("{:7.2} {:5.3} {:6.3}", g.epsilon, g.gap, g.bound);
        assert!(g.holds);
    }

    // second-stage law leans toward the first-stage outcome
    let model = TreeModel::new(
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        DiscreteMeasure::uniform(2),
        vec![vec![
            DiscreteMeasure::probability(vec![0.75, 0.25])?,
            DiscreteMeasure::probability(vec![0.25, 0.75])?,
        ]],
    )?;
    let sum = RandomVariable::new(vec![0.0, 1.0, 1.0, 2.0])?;
    let spec = MultistageBoundSpec::new(vec![0.1, 0.2], vec![0.0, 0.5], vec![1.0, 1.0], 1.0)?;
    println!("kernel moduli {:?}", model.kernel_moduli(&spec.weights)?);
    let e = multistage_bound_empirical_check(&model, &spec, &sum)?;
    println!(
        "nested {:.4}, mean {:.4}, gap {:.4} <= bound {:.4}",
        e.nested,
        e.expectation,
        e.gap,
        multistage_bound(&spec)
    );
    assert!(e.holds);
    Ok(())
}
