//! Small fixed instances exhibiting strict gaps.

use crate::ambiguity::AmbiguitySet;
use crate::composite::RectangularSpec;
use crate::dp::{MultistageProblem, Stage};
use crate::measure::{DiscreteMeasure, Partition, RandomVariable};
use crate::risk_static::AvarSpec;

/// Uniform first stage, free second stage, `Z = [1, 0, 0, 1]`.
///
/// The nested value is 1 (the second stage matches each first-stage
/// outcome) while every product measure averages to 1/2.
pub fn rectangular_gap() -> (RectangularSpec, RandomVariable) {
    let spec = RectangularSpec::new(vec![
        AmbiguitySet::singleton(DiscreteMeasure::uniform(2)).expect("uniform"),
        AmbiguitySet::simplex(2),
    ])
    .expect("two small stages");
    (
        spec,
        RandomVariable::new(vec![1.0, 0.0, 0.0, 1.0]).expect("finite"),
    )
}

/// AVaR set at level 0.3 over four equally likely outcomes, split in halves,
/// with `Z = [1, 5, 2, 7]`: the conditional functional returns the atom
/// maxima `[5, 7]`, the nested conditional AVaR `[27/7, 39/7]`.
pub fn conditional_discrepancy() -> (AvarSpec, RandomVariable, Partition) {
    let spec = AvarSpec::new(0.3, DiscreteMeasure::uniform(4)).expect("level in range");
    let z = RandomVariable::new(vec![1.0, 5.0, 2.0, 7.0]).expect("finite");
    (spec, z, Partition::blocks(&[2, 2]))
}

/// Three stages: a free guess at stage 2 (guessing 1 costs 0.1) that stage 3
/// must repeat, paying 1 when the stage-3 outcome equals the guess. The
/// stage-3 set is the full simplex.
///
/// Every policy has nested value at least 1, since the worst case reacts to
/// the guess. Product measures cannot react: guessing differently on the
/// two stage-2 outcomes gives `R = 0.55`.
pub fn dp_gap() -> MultistageProblem {
    let s2 = Stage::unconstrained(
        AmbiguitySet::singleton(DiscreteMeasure::uniform(2)).expect("uniform"),
        vec![vec![0.0, 0.0], vec![0.1, 0.1]],
        1,
    );
    let s3 = Stage {
        set: AmbiguitySet::simplex(2),
        costs: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        feasible: vec![vec![vec![0], vec![0]], vec![vec![1], vec![1]]],
    };
    MultistageProblem::new(vec![0.0], vec![0], vec![s2, s3]).expect("valid witness")
}
