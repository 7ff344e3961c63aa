//! Average value-at-risk: the quantile formula against the density dual,
//! across levels, plus a randomized check of the coherence axioms.

use dro_nested::ambiguity::AmbiguitySet;
use dro_nested::measure::{DiscreteMeasure, RandomVariable};
use dro_nested::risk_static::{avar_dual, avar_primal, check_axioms, AvarSpec};
use dro_nested::rng::{SplitMix64, DEFAULT_SEED};
use dro_nested::Result;

fn main() -> Result<()> {
    let z = RandomVariable::new(vec![1.0, 2.0, 3.0, 4.0])?;
    let p = DiscreteMeasure::uniform(4);
    println!("alpha   primal    tau   dual");
    for alpha in [0.0, 0.25, 0.5, 0.75, 0.8, 0.95] {
        let spec = AvarSpec::new(alpha, p.clone())?;
        let (primal, tau) = avar_primal(&spec, &z)?;
        let dual = avar_dual(&spec, &z)?;
        println!("{alpha:5.2} {primal:8.4} {tau:6.2} {dual:6.4}");
        assert!((primal - dual).abs() < 1e-9);
    }

    let set = AmbiguitySet::avar(0.5, p)?;
    let report = check_axioms(&set, 500, &mut SplitMix64::new(DEFAULT_SEED))?;
    println!("axiom battery over {} trials: {report:?}", report.trials);
    assert!(report.holds(1e-7));
    Ok(())
}
