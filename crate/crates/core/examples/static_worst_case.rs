//! Worst-case expectation of one loss under each kind of ambiguity set,
//! with the maximizing measure, the dominating reference measure and the
//! strict monotonicity constant.

use dro_nested::ambiguity::AmbiguitySet;
use dro_nested::measure::{DiscreteMeasure, FiniteSpace, RandomVariable};
use dro_nested::Result;

fn main() -> Result<()> {
    let points = [0.0, 1.0, 2.0, 3.0];
    let space = FiniteSpace::on_line(&points)?;
    let p = DiscreteMeasure::probability(vec![0.4, 0.3, 0.2, 0.1])?;
    let loss = RandomVariable::new(vec![-1.0, 0.5, 2.0, 6.0])?;

    let mean: f64 = points.iter().zip(p.weights()).map(|(x, w)| x * w).sum();
    let sets = [
        (
            "finite family",
            AmbiguitySet::finite_family(vec![
                p.clone(),
                DiscreteMeasure::probability(vec![0.25; 4])?,
            ])?,
        ),
        ("avar 0.8", AmbiguitySet::avar(0.8, p.clone())?),
        (
            "mean pinned",
            AmbiguitySet::moment(
                space.clone(),
                vec![RandomVariable::new(points.to_vec())?],
                vec![mean],
            )?,
        ),
        (
            "ball 0.3",
            AmbiguitySet::wasserstein_ball(p.clone(), 0.3, space)?,
        ),
    ];

    let baseline: f64 = loss
        .values()
        .iter()
        .zip(p.weights())
        .map(|(z, w)| z * w)
        .sum();
    println!("E_P[Z] = {baseline:.4}");
    for (name, set) in &sets {
        let (value, q) = set.robust_expectation(&loss)?;
        let mu = set.reference_measure()?;
        let strict = set.is_strictly_monotone(&p)?;
        println!(
            "{name:>14}: R(Z) = {value:.4} at Q = {:?}; mu mass {:.3}; strict {} (eps {:.3})",
            q.weights(),
            mu.mu.mass(),
            strict.strict,
            strict.epsilon
        );
        assert!(value >= baseline - 1e-9, "every set contains P");
    }
    Ok(())
}
