//! Average Value-at-Risk in primal and dual form, and a randomized check of
//! the coherence axioms for any ambiguity set.

use serde::Serialize;

use crate::ambiguity::AmbiguitySet;
use crate::error::{Error, Result};
use crate::lp::{self, Direction, LinearProgram, LpStatus, Sense};
use crate::measure::{DiscreteMeasure, RandomVariable};
use crate::rng::SplitMix64;

/// AVaR level and reference probability.
#[derive(Debug, Clone, PartialEq)]
pub struct AvarSpec {
    alpha: f64,
    reference: DiscreteMeasure,
}

impl AvarSpec {
    pub fn new(alpha: f64, reference: DiscreteMeasure) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAmbiguity(format!(
                "AVaR level {alpha} outside [0, 1]"
            )));
        }
        reference.ensure_probability()?;
        Ok(Self { alpha, reference })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn reference(&self) -> &DiscreteMeasure {
        &self.reference
    }
}

/// `inf_τ τ + (1-α)⁻¹ E[Z - τ]₊` and the smallest minimizing `τ`.
///
/// The objective is convex and piecewise linear with kinks at the values of
/// `Z` on positive-mass outcomes, so scanning those values suffices. At
/// `α = 1` the result is the maximum of `Z` over positive-mass outcomes.
pub fn avar_primal(spec: &AvarSpec, z: &RandomVariable) -> Result<(f64, f64)> {
    let p = spec.reference.weights();
    z.ensure_len(p.len())?;
    if !z.is_finite() {
        return Err(Error::InvalidVariable(
            "AVaR needs a finite variable".into(),
        ));
    }
    let support: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let mut taus: Vec<f64> = support.iter().map(|&i| z.values()[i]).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    if spec.alpha >= 1.0 {
        let top = *taus.last().expect("probability has positive mass");
        return Ok((top, top));
    }
    let k = 1.0 / (1.0 - spec.alpha);
    let objective = |tau: f64| -> f64 {
        tau + k * support
            .iter()
            .map(|&i| p[i] * (z.values()[i] - tau).max(0.0))
            .sum::<f64>()
    };
    let mut best = (f64::INFINITY, f64::NAN);
    for tau in taus {
        let v = objective(tau);
        if v < best.0 - 1e-12 * (1.0 + v.abs()) {
            best = (v, tau);
        }
    }
    Ok((best.0, best.1))
}

/// `sup { E_P[ζZ] : 0 ≤ ζ ≤ (1-α)⁻¹, E_P[ζ] = 1 }` by LP over densities.
pub fn avar_dual(spec: &AvarSpec, z: &RandomVariable) -> Result<f64> {
    let p = spec.reference.weights();
    let n = p.len();
    z.ensure_len(n)?;
    let cap = if spec.alpha >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - spec.alpha)
    };
    let obj: Vec<f64> = (0..n).map(|i| p[i] * z.values()[i]).collect();
    let mut lp = LinearProgram::new(Direction::Maximize, obj);
    lp.constrain(p.to_vec(), Sense::Eq, 1.0);
    for i in 0..n {
        lp.bound(i, 0.0, cap);
    }
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        _ => Err(Error::Infeasible("AVaR density program".into())),
    }
}

/// Largest violation of each coherence axiom over a randomized battery.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AxiomReport {
    pub trials: usize,
    pub subadditivity: f64,
    pub monotonicity: f64,
    pub translation: f64,
    pub homogeneity: f64,
    /// `max(0, |R(Z') - R(Z)| - ‖Z' - Z‖∞)`.
    pub lipschitz: f64,
}

impl AxiomReport {
    pub fn max_violation(&self) -> f64 {
        self.subadditivity
            .max(self.monotonicity)
            .max(self.translation)
            .max(self.homogeneity)
            .max(self.lipschitz)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

fn random_variable(rng: &mut SplitMix64, n: usize, scale: f64) -> RandomVariable {
    RandomVariable::new((0..n).map(|_| rng.range(-scale, scale)).collect()).expect("finite")
}

/// Subadditivity, monotonicity, translation equivariance, positive
/// homogeneity and the sup-norm Lipschitz bound of `Z ↦ sup_M E_Q[Z]`.
pub fn check_axioms(
    set: &AmbiguitySet,
    trials: usize,
    rng: &mut SplitMix64,
) -> Result<AxiomReport> {
    let n = set.len();
    let r = |z: &RandomVariable| set.robust_expectation(z).map(|(v, _)| v);
    let mut rep = AxiomReport {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let z = random_variable(rng, n, 5.0);
        let y = random_variable(rng, n, 5.0);
        let rz = r(&z)?;
        let ry = r(&y)?;

        rep.subadditivity = rep.subadditivity.max(r(&z.add(&y))? - rz - ry);

        let bump = RandomVariable::new((0..n).map(|_| rng.range(0.0, 2.0)).collect())?;
        rep.monotonicity = rep.monotonicity.max(rz - r(&z.add(&bump))?);

        let a = rng.range(-3.0, 3.0);
        rep.translation = rep.translation.max((r(&z.shift(a))? - rz - a).abs());

        let lambda = rng.range(0.0, 4.0);
        rep.homogeneity = rep
            .homogeneity
            .max((r(&z.scale(lambda))? - lambda * rz).abs());

        rep.lipschitz = rep.lipschitz.max((ry - rz).abs() - y.sup_distance(&z));
    }
    for v in [
        &mut rep.subadditivity,
        &mut rep.monotonicity,
        &mut rep.translation,
        &mut rep.homogeneity,
        &mut rep.lipschitz,
    ] {
        *v = v.max(0.0);
    }
    Ok(rep)
}

/// AVaR at level `alpha` as the closed-form value only.
pub fn avar(alpha: f64, reference: &DiscreteMeasure, z: &RandomVariable) -> Result<f64> {
    avar_primal(&AvarSpec::new(alpha, reference.clone())?, z).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FiniteSpace;

    fn z1234() -> RandomVariable {
        RandomVariable::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    fn spec(alpha: f64) -> AvarSpec {
        AvarSpec::new(alpha, DiscreteMeasure::uniform(4)).unwrap()
    }

    /// Independent oracle: dense τ grid over [min Z, max Z].
    fn grid_avar(alpha: f64, p: &[f64], z: &[f64]) -> f64 {
        let lo = z.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let steps = 30_000;
        (0..=steps)
            .map(|s| {
                let tau = lo + (hi - lo) * s as f64 / steps as f64;
                tau + p
                    .iter()
                    .zip(z)
                    .map(|(pi, zi)| pi * (zi - tau).max(0.0))
                    .sum::<f64>()
                    / (1.0 - alpha)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn avar_examples() {
        let (v, tau) = avar_primal(&spec(0.5), &z1234()).unwrap();
        assert_eq!(v, 3.5);
        assert_eq!(tau, 2.0, "ties resolve to the smallest tau");
        assert!((grid_avar(0.5, &[0.25; 4], &[1.0, 2.0, 3.0, 4.0]) - 3.5).abs() < 1e-9);
        assert!((avar_dual(&spec(0.5), &z1234()).unwrap() - 3.5).abs() < 1e-9);

        let (v, _) = avar_primal(&spec(0.0), &z1234()).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
        assert!((avar_dual(&spec(0.0), &z1234()).unwrap() - 2.5).abs() < 1e-9);

        let (v, tau) = avar_primal(&spec(0.8), &z1234()).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        assert_eq!(tau, 4.0);
        assert!((avar_dual(&spec(0.8), &z1234()).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn alpha_one_is_max_over_support() {
        let p = DiscreteMeasure::probability(vec![0.5, 0.5, 0.0]).unwrap();
        let s = AvarSpec::new(1.0, p).unwrap();
        let z = RandomVariable::new(vec![1.0, 2.0, 9.0]).unwrap();
        assert_eq!(avar_primal(&s, &z).unwrap().0, 2.0);
        assert!((avar_dual(&s, &z).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn level_out_of_range() {
        assert!(AvarSpec::new(1.5, DiscreteMeasure::uniform(2)).is_err());
        assert!(AvarSpec::new(-0.1, DiscreteMeasure::uniform(2)).is_err());
    }

    #[test]
    fn axioms_on_avar_set() {
        let m = AmbiguitySet::avar(0.5, DiscreteMeasure::uniform(4)).unwrap();
        let rep = check_axioms(&m, 500, &mut SplitMix64::new(42)).unwrap();
        assert!(rep.holds(1e-7), "{rep:?}");
    }

    #[test]
    fn axioms_on_singleton_and_zero_ball() {
        let p = DiscreteMeasure::probability(vec![0.1, 0.6, 0.3]).unwrap();
        let single = AmbiguitySet::singleton(p.clone()).unwrap();
        let rep = check_axioms(&single, 200, &mut SplitMix64::new(1)).unwrap();
        assert!(rep.holds(1e-12), "{rep:?}");

        let ball =
            AmbiguitySet::wasserstein_ball(p, 0.0, FiniteSpace::on_line(&[0.0, 1.0, 3.0]).unwrap())
                .unwrap();
        let mut rng = SplitMix64::new(2);
        for _ in 0..20 {
            let z = RandomVariable::new((0..3).map(|_| rng.range(-1.0, 1.0)).collect()).unwrap();
            let a = single.robust_expectation(&z).unwrap().0;
            let b = ball.robust_expectation(&z).unwrap().0;
            assert!((a - b).abs() < 1e-9);
        }
    }
}
