//! Conditional robust functionals on finite partitions.
//!
//! On an atom `Υ` the conditional value is the supremum, over members with
//! `Q(Υ) > 0`, of the conditional mean of `Z` on `Υ`. Atoms no member charges
//! get `-inf`. The law-invariant alternative (AVaR of the conditional law on
//! each atom) is provided by [`conditional_avar_nested`]; the two differ in
//! general.

use serde::Serialize;

use crate::ambiguity::{AmbiguitySet, Kind};
use crate::error::{Error, Result};
use crate::lp::{self, Affine, Direction, Fractional, LpStatus, Sense};
use crate::measure::{DiscreteMeasure, Partition, RandomVariable};
use crate::risk_static::{avar_primal, AvarSpec};
use crate::rng::SplitMix64;
use crate::TOL;

/// Per-atom conditional values, possibly `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalValue {
    pub per_atom: Vec<f64>,
    /// The per-atom values spread over outcomes.
    pub values: RandomVariable,
    /// `false` iff some atom is unreachable, i.e. carries `-inf`.
    pub te_holds: bool,
}

impl ConditionalValue {
    fn from_atoms(g: &Partition, per_atom: Vec<f64>) -> Self {
        let te_holds = per_atom.iter().all(|v| v.is_finite());
        let values = g.expand(&per_atom);
        Self {
            per_atom,
            values,
            te_holds,
        }
    }

    /// Index of the first `-inf` atom, if any.
    pub fn first_unreachable(&self) -> Option<usize> {
        self.per_atom.iter().position(|v| *v == f64::NEG_INFINITY)
    }
}

fn validate(set: &AmbiguitySet, z: &RandomVariable, g: &Partition) -> Result<()> {
    z.ensure_len(set.len())?;
    if g.space_len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            found: g.space_len(),
        });
    }
    if !z.is_finite() {
        return Err(Error::InvalidVariable(
            "conditional functional needs a finite variable".into(),
        ));
    }
    Ok(())
}

/// `R_{|G}(Z)`: per atom, `sup { E_Q[Z 1_Υ] / Q(Υ) : Q ∈ M, Q(Υ) > 0 }`.
///
/// Finite families scan their members (a ratio of affine functions over a
/// polytope peaks at a vertex); other kinds solve a Charnes–Cooper LP. The
/// reference `p` is validated but does not enter the values: atoms are
/// judged reachable by the members of `set`, not by `p`.
pub fn conditional_robust(
    set: &AmbiguitySet,
    z: &RandomVariable,
    g: &Partition,
    p: &DiscreteMeasure,
) -> Result<ConditionalValue> {
    validate(set, z, g)?;
    p.ensure_len(set.len())?;
    p.ensure_probability()?;
    match set.kind() {
        Kind::FiniteFamily { measures } => {
            let per_atom = g
                .atoms()
                .iter()
                .map(|atom| {
                    let mut best = f64::NEG_INFINITY;
                    for q in measures {
                        let mass = q.mass_of(atom);
                        if mass > 0.0 {
                            let num: f64 =
                                atom.iter().map(|&w| q.weights()[w] * z.values()[w]).sum();
                            best = best.max(num / mass);
                        }
                    }
                    best
                })
                .collect();
            Ok(ConditionalValue::from_atoms(g, per_atom))
        }
        _ => conditional_robust_lp(set, z, g),
    }
}

/// Charnes–Cooper route of [`conditional_robust`], valid for every kind.
pub fn conditional_robust_lp(
    set: &AmbiguitySet,
    z: &RandomVariable,
    g: &Partition,
) -> Result<ConditionalValue> {
    validate(set, z, g)?;
    let poly = set.polytope();
    let mut per_atom = Vec::with_capacity(g.atom_count());
    for atom in g.atoms() {
        let mut masked = vec![0.0; set.len()];
        for &w in atom {
            masked[w] = z.values()[w];
        }
        let num = Affine::linear(poly.objective_for(&masked));
        let den = Affine::linear(poly.mass_row(atom));
        let v = match lp::solve_linear_fractional(&num, &den, &poly.lp)? {
            Fractional::Optimal { value, .. } => value,
            Fractional::Unreachable => f64::NEG_INFINITY,
        };
        per_atom.push(v);
    }
    Ok(ConditionalValue::from_atoms(g, per_atom))
}

/// Property (P): on every atom, each outcome charged by some member can carry
/// all of the atom's mass under some member.
///
/// Decided per (atom, outcome) by maximizing `q(ω̄)` with the rest of the
/// atom forced to zero. Outcomes no member charges are null for the whole
/// set and are skipped.
pub fn has_property_p(set: &AmbiguitySet, g: &Partition) -> Result<bool> {
    if g.space_len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            found: g.space_len(),
        });
    }
    let mu = set.reference_measure()?.mu;
    let poly = set.polytope();
    for atom in g.atoms() {
        for &target in atom {
            if mu.weights()[target] <= TOL {
                continue;
            }
            let mut lp = poly
                .lp
                .with_objective(Direction::Maximize, poly.mass_row(&[target]));
            for &other in atom.iter().filter(|&&w| w != target) {
                lp.constrain(poly.mass_row(&[other]), Sense::Eq, 0.0);
            }
            let sol = lp::solve(&lp)?;
            if sol.status != LpStatus::Optimal || sol.value <= TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Per-atom AVaR of `Z` under the conditional reference law `P(· | Υ)`.
pub fn conditional_avar_nested(
    spec: &AvarSpec,
    z: &RandomVariable,
    g: &Partition,
) -> Result<ConditionalValue> {
    let p = spec.reference();
    z.ensure_len(p.len())?;
    if g.space_len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: g.space_len(),
        });
    }
    let mut per_atom = Vec::with_capacity(g.atom_count());
    for atom in g.atoms() {
        let mass = p.mass_of(atom);
        if mass <= 0.0 {
            per_atom.push(f64::NEG_INFINITY);
            continue;
        }
        let cond =
            DiscreteMeasure::from_solver(atom.iter().map(|&w| p.weights()[w] / mass).collect());
        let local = RandomVariable::new(atom.iter().map(|&w| z.values()[w]).collect())?;
        let (v, _) = avar_primal(&AvarSpec::new(spec.alpha(), cond)?, &local)?;
        per_atom.push(v);
    }
    Ok(ConditionalValue::from_atoms(g, per_atom))
}

/// Both sides of `R(Z) ≤ R(R_{|G}(Z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TowerCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn tower_upper_bound_check(
    set: &AmbiguitySet,
    z: &RandomVariable,
    g: &Partition,
    p: &DiscreteMeasure,
) -> Result<TowerCheck> {
    let cond = conditional_robust(set, z, g, p)?;
    if let Some(atom) = cond.first_unreachable() {
        return Err(Error::UnreachableAtom { stage: 1, atom });
    }
    let lhs = set.robust_expectation(z)?.0;
    let rhs = set.robust_expectation(&cond.values)?.0;
    Ok(TowerCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrictMonotonicityReport {
    /// Whether the set is strictly monotone, i.e. the check ran.
    pub applicable: bool,
    pub epsilon: f64,
    pub trials: usize,
    pub violations: usize,
    pub note: Option<String>,
}

/// Samples `Z' = Z + γ 1_A` with `A` a random set of `P`-positive outcomes
/// and `γ ∈ [0.1, 1]`. The conditional value must not decrease anywhere and
/// must rise by at least `γε` on every atom meeting `A`.
pub fn conditional_strict_monotonicity_check(
    set: &AmbiguitySet,
    g: &Partition,
    p: &DiscreteMeasure,
    trials: usize,
    rng: &mut SplitMix64,
) -> Result<StrictMonotonicityReport> {
    let sm = set.is_strictly_monotone(p)?;
    if !sm.strict {
        return Ok(StrictMonotonicityReport {
            applicable: false,
            epsilon: 0.0,
            trials: 0,
            violations: 0,
            note: Some(format!(
                "set is not strictly monotone (outcome {} can get zero mass); check skipped",
                sm.outcome.map_or("?".into(), |w| w.to_string())
            )),
        });
    }
    let n = set.len();
    let positive = p.support();
    let mut violations = 0;
    for _ in 0..trials {
        let z = RandomVariable::new((0..n).map(|_| rng.range(-5.0, 5.0)).collect())?;
        let mut a: Vec<usize> = positive
            .iter()
            .copied()
            .filter(|_| rng.bernoulli(0.4))
            .collect();
        if a.is_empty() {
            a.push(positive[rng.index(positive.len())]);
        }
        let gamma = rng.range(0.1, 1.0);
        let bumped = z.add(&RandomVariable::indicator(n, &a).scale(gamma));
        let before = conditional_robust(set, &z, g, p)?;
        let after = conditional_robust(set, &bumped, g, p)?;
        let mut ok = true;
        for (k, atom) in g.atoms().iter().enumerate() {
            let (b, c) = (before.per_atom[k], after.per_atom[k]);
            if b == f64::NEG_INFINITY && c == f64::NEG_INFINITY {
                continue;
            }
            if c < b - TOL {
                ok = false;
            }
            if atom.iter().any(|w| a.contains(w)) && c - b < gamma * sm.epsilon - TOL {
                ok = false;
            }
        }
        if !ok {
            violations += 1;
        }
    }
    Ok(StrictMonotonicityReport {
        applicable: true,
        epsilon: sm.epsilon,
        trials,
        violations,
        note: None,
    })
}

/// Maximum of `Z` over the outcomes of each atom with positive `P` mass.
pub fn atom_max(z: &RandomVariable, g: &Partition, p: &DiscreteMeasure) -> Vec<f64> {
    g.atoms()
        .iter()
        .map(|atom| {
            atom.iter()
                .filter(|&&w| p.weights()[w] > 0.0)
                .map(|&w| z.values()[w])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FiniteSpace;

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::new(v.to_vec()).unwrap()
    }

    fn halves() -> Partition {
        Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap()
    }

    #[test]
    fn simplex_gives_atom_max() {
        let m = AmbiguitySet::simplex(4);
        let p = DiscreteMeasure::uniform(4);
        let z = rv(&[1.0, 5.0, 2.0, 7.0]);
        let c = conditional_robust(&m, &z, &halves(), &p).unwrap();
        assert_eq!(c.values.values(), &[5.0, 5.0, 7.0, 7.0]);
        assert!(c.te_holds);
        let l = conditional_robust_lp(&m, &z, &halves()).unwrap();
        for (a, b) in l.per_atom.iter().zip(&c.per_atom) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(has_property_p(&m, &halves()).unwrap());
    }

    #[test]
    fn trivial_partition_is_robust_expectation() {
        let m = AmbiguitySet::avar(
            0.3,
            DiscreteMeasure::probability(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
        )
        .unwrap();
        let p = DiscreteMeasure::uniform(4);
        let z = rv(&[3.0, -1.0, 2.0, 0.5]);
        let c = conditional_robust(&m, &z, &Partition::trivial(4), &p).unwrap();
        let r = m.robust_expectation(&z).unwrap().0;
        assert!((c.per_atom[0] - r).abs() < 1e-9);
    }

    #[test]
    fn avar_set_with_small_atoms() {
        let p = DiscreteMeasure::uniform(4);
        let m = AmbiguitySet::avar(0.5, p.clone()).unwrap();
        let z = rv(&[1.0, 5.0, 2.0, 7.0]);
        let c = conditional_robust(&m, &z, &halves(), &p).unwrap();
        for (got, want) in c.values.values().iter().zip([5.0, 5.0, 7.0, 7.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        assert!(has_property_p(&m, &halves()).unwrap());
    }

    #[test]
    fn property_p_fails_for_singleton() {
        let m = AmbiguitySet::singleton(DiscreteMeasure::uniform(4)).unwrap();
        assert!(!has_property_p(&m, &halves()).unwrap());
    }

    #[test]
    fn unreachable_atom_is_neg_inf() {
        let q = DiscreteMeasure::probability(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let m = AmbiguitySet::singleton(q.clone()).unwrap();
        let c = conditional_robust(&m, &rv(&[1.0, 2.0, 3.0, 4.0]), &halves(), &q).unwrap();
        assert_eq!(c.per_atom, vec![1.5, f64::NEG_INFINITY]);
        assert!(!c.te_holds);
        let a = AmbiguitySet::avar(0.2, q.clone()).unwrap();
        let c = conditional_robust(&a, &rv(&[1.0, 2.0, 3.0, 4.0]), &halves(), &q).unwrap();
        assert_eq!(c.per_atom[1], f64::NEG_INFINITY);
    }

    #[test]
    fn nested_avar_examples() {
        let p = DiscreteMeasure::uniform(4);
        let z = rv(&[1.0, 5.0, 2.0, 7.0]);
        let mean = conditional_avar_nested(&AvarSpec::new(0.0, p.clone()).unwrap(), &z, &halves())
            .unwrap();
        assert_eq!(mean.values.values(), &[3.0, 3.0, 4.5, 4.5]);
        let half = conditional_avar_nested(&AvarSpec::new(0.5, p.clone()).unwrap(), &z, &halves())
            .unwrap();
        assert_eq!(half.values.values(), &[5.0, 5.0, 7.0, 7.0]);
        let g = Partition::trivial(2);
        let top = conditional_avar_nested(
            &AvarSpec::new(0.99, DiscreteMeasure::uniform(2)).unwrap(),
            &rv(&[1.0, 4.0]),
            &g,
        )
        .unwrap();
        assert!((top.per_atom[0] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn nested_and_conditional_disagree() {
        // same level 0.3: the set concentrates on the atom maximum while the
        // nested AVaR at conditional level 0.3 cannot
        let p = DiscreteMeasure::uniform(4);
        let z = rv(&[1.0, 5.0, 2.0, 7.0]);
        let m = AmbiguitySet::avar(0.3, p.clone()).unwrap();
        let c = conditional_robust(&m, &z, &halves(), &p).unwrap();
        let nested =
            conditional_avar_nested(&AvarSpec::new(0.3, p).unwrap(), &z, &halves()).unwrap();
        for (got, want) in c.per_atom.iter().zip([5.0, 7.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        // two equally likely points: the density cap 1/0.7 puts mass 0.5/0.7 on the larger one
        let oracle = |lo: f64, hi: f64| hi * (0.5 / 0.7) + lo * (1.0 - 0.5 / 0.7);
        assert!((nested.per_atom[0] - oracle(1.0, 5.0)).abs() < 1e-12);
        assert!((nested.per_atom[1] - oracle(2.0, 7.0)).abs() < 1e-12);
        assert!((nested.per_atom[0] - 27.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn tower_bound_on_ball() {
        let space = FiniteSpace::on_line(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let p = DiscreteMeasure::uniform(4);
        let m = AmbiguitySet::wasserstein_ball(p.clone(), 0.3, space).unwrap();
        let t = tower_upper_bound_check(&m, &rv(&[2.0, -1.0, 0.5, 3.0]), &halves(), &p).unwrap();
        assert!(t.holds, "{t:?}");
    }

    #[test]
    fn strict_monotonicity_propagates() {
        let m = AmbiguitySet::finite_family(vec![
            DiscreteMeasure::probability(vec![0.5, 0.5]).unwrap(),
            DiscreteMeasure::probability(vec![0.7, 0.3]).unwrap(),
        ])
        .unwrap();
        let p = DiscreteMeasure::uniform(2);
        let mut rng = SplitMix64::new(42);
        for g in [Partition::trivial(2), Partition::singletons(2)] {
            let rep = conditional_strict_monotonicity_check(&m, &g, &p, 200, &mut rng).unwrap();
            assert!(rep.applicable);
            assert_eq!(rep.violations, 0);
        }
        let rep = conditional_strict_monotonicity_check(
            &AmbiguitySet::simplex(2),
            &Partition::trivial(2),
            &p,
            200,
            &mut rng,
        )
        .unwrap();
        assert!(!rep.applicable);
        assert!(rep.note.is_some());
    }
}
