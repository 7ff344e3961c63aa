//! Conditional worst-case values on the atoms of a partition: the atom
//! maxima under property (P), an unreachable atom, and the gap between the
//! conditional functional and nested conditional AVaR.

use dro_nested::ambiguity::AmbiguitySet;
use dro_nested::conditional::{
    conditional_avar_nested, conditional_robust, has_property_p, tower_upper_bound_check,
};
use dro_nested::measure::{DiscreteMeasure, Partition, RandomVariable};
use dro_nested::risk_static::AvarSpec;
use dro_nested::Result;

fn main() -> Result<()> {
    let p = DiscreteMeasure::uniform(4);
    let z = RandomVariable::new(vec![1.0, 5.0, 2.0, 7.0])?;
    let halves = Partition::blocks(&[2, 2]);

    for alpha in [0.5, 0.3] {
        let set = AmbiguitySet::avar(alpha, p.clone())?;
        let robust = conditional_robust(&set, &z, &halves, &p)?;
        let nested = conditional_avar_nested(&AvarSpec::new(alpha, p.clone())?, &z, &halves)?;
        let tower = tower_upper_bound_check(&set, &z, &halves, &p)?;
        println!(
            "alpha {alpha}: property (P) {}, conditional {:?}, nested AVaR {:?}, R(Z) {:.4} <= {:.4}",
            has_property_p(&set, &halves)?,
            robust.per_atom,
            nested.per_atom,
            tower.lhs,
            tower.rhs
        );
    }

    // no member charges the second half
    let front = AmbiguitySet::finite_family(vec![
        DiscreteMeasure::probability(vec![0.5, 0.5, 0.0, 0.0])?,
        DiscreteMeasure::dirac(4, 1),
    ])?;
    let c = conditional_robust(&front, &z, &halves, &p)?;
    println!(
        "front-only family: {:?}, te holds {}, first unreachable atom {:?}",
        c.per_atom,
        c.te_holds,
        c.first_unreachable()
    );
    assert_eq!(c.per_atom[1], f64::NEG_INFINITY);
    Ok(())
}
