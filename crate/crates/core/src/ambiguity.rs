//! Ambiguity sets: finite families, AVaR density sets, moment sets and
//! order-1 Wasserstein balls over finite spaces.
//!
//! Every set is a polytope of probability vectors. Suprema of linear
//! objectives are answered by a vertex scan (finite families), a closed form
//! (AVaR) or a linear program over the set's constraint system.

use crate::error::{Error, Result};
use crate::lp::{self, Direction, LinearProgram, LpStatus, Sense};
use crate::measure::{dot, DiscreteMeasure, FiniteSpace, RandomVariable};
use crate::risk_static::{avar_primal, AvarSpec};
use crate::rng::SplitMix64;
use crate::TOL;

/// Default cap on basis subsets examined by [`AmbiguitySet::generators`].
pub const VERTEX_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    /// Convex hull of the listed probability measures.
    FiniteFamily { measures: Vec<DiscreteMeasure> },
    /// Measures with density `0 ≤ ζ ≤ 1/(1-α)` against `reference`.
    AVaRSet {
        alpha: f64,
        reference: DiscreteMeasure,
    },
    /// Probability measures on `support` with `E_Q[psi_i] = b_i`.
    MomentSet {
        support: FiniteSpace,
        psi: Vec<RandomVariable>,
        b: Vec<f64>,
    },
    /// `{Q : W1(Q, center) ≤ radius}` on a metric space.
    WassersteinBall {
        center: DiscreteMeasure,
        radius: f64,
        space: FiniteSpace,
    },
    /// Intersection of several Wasserstein balls on one space.
    WassersteinIntersection {
        centers: Vec<DiscreteMeasure>,
        radii: Vec<f64>,
        space: FiniteSpace,
    },
}

/// A validated ambiguity set.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySet {
    kind: Kind,
    n: usize,
}

/// Feasible region in auxiliary variables plus the linear map to `q`.
pub(crate) struct Polytope {
    pub lp: LinearProgram,
    /// `q[ω] = Σ_k map[ω][k] · x[k]`
    pub map: Vec<Vec<f64>>,
}

impl Polytope {
    pub fn objective_for(&self, z: &[f64]) -> Vec<f64> {
        let vars = self.lp.vars();
        (0..vars)
            .map(|k| self.map.iter().zip(z).map(|(row, zi)| row[k] * zi).sum())
            .collect()
    }

    pub fn q_of(&self, x: &[f64]) -> Vec<f64> {
        self.map.iter().map(|row| dot(row, x)).collect()
    }

    /// Coefficient vector of `Σ_{ω ∈ set} q(ω)`.
    pub fn mass_row(&self, set: &[usize]) -> Vec<f64> {
        let mut row = vec![0.0; self.lp.vars()];
        for &w in set {
            for (r, m) in row.iter_mut().zip(&self.map[w]) {
                *r += m;
            }
        }
        row
    }
}

/// Per-outcome mass suprema `µ(ω) = sup_Q Q(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMeasure {
    pub mu: DiscreteMeasure,
    pub normalized: DiscreteMeasure,
    /// For each outcome, a member attaining `µ(ω)`.
    pub witnesses: Vec<DiscreteMeasure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrictMonotonicity {
    pub strict: bool,
    /// `min_{P(ω)>0} inf_Q Q(ω)`.
    pub epsilon: f64,
    /// Outcome attaining `epsilon`.
    pub outcome: Option<usize>,
    /// Member attaining `epsilon` at `outcome`.
    pub witness: Option<DiscreteMeasure>,
}

fn check_probability(q: &DiscreteMeasure, n: usize, what: &str) -> Result<()> {
    q.ensure_len(n)?;
    q.ensure_probability()
        .map_err(|e| Error::InvalidAmbiguity(format!("{what}: {e}")))
}

impl AmbiguitySet {
    pub fn finite_family(measures: Vec<DiscreteMeasure>) -> Result<Self> {
        let Some(first) = measures.first() else {
            return Err(Error::InvalidAmbiguity("finite family is empty".into()));
        };
        let n = first.len();
        for (k, q) in measures.iter().enumerate() {
            check_probability(q, n, &format!("family member {k}"))?;
        }
        Ok(Self {
            kind: Kind::FiniteFamily { measures },
            n,
        })
    }

    /// All point masses on `n` outcomes: the whole probability simplex.
    pub fn simplex(n: usize) -> Self {
        Self::finite_family((0..n).map(|i| DiscreteMeasure::dirac(n, i)).collect())
            .expect("point masses are probabilities")
    }

    pub fn singleton(p: DiscreteMeasure) -> Result<Self> {
        Self::finite_family(vec![p])
    }

    pub fn avar(alpha: f64, reference: DiscreteMeasure) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidAmbiguity(format!(
                "AVaR level {alpha} outside [0, 1)"
            )));
        }
        let n = reference.len();
        check_probability(&reference, n, "AVaR reference")?;
        Ok(Self {
            kind: Kind::AVaRSet { alpha, reference },
            n,
        })
    }

    /// Moment set on an explicit support grid; feasibility is certified by an LP.
    pub fn moment(support: FiniteSpace, psi: Vec<RandomVariable>, b: Vec<f64>) -> Result<Self> {
        let n = support.len();
        if psi.len() != b.len() {
            return Err(Error::InvalidAmbiguity(format!(
                "{} moment functions but {} targets",
                psi.len(),
                b.len()
            )));
        }
        for f in &psi {
            f.ensure_len(n)?;
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidAmbiguity("non-finite moment target".into()));
        }
        let set = Self {
            kind: Kind::MomentSet { support, psi, b },
            n,
        };
        set.ensure_nonempty("moment constraints")?;
        Ok(set)
    }

    pub fn wasserstein_ball(
        center: DiscreteMeasure,
        radius: f64,
        space: FiniteSpace,
    ) -> Result<Self> {
        let n = space.len();
        if !space.has_metric() {
            return Err(Error::InvalidAmbiguity(
                "Wasserstein ball needs a metric space".into(),
            ));
        }
        check_probability(&center, n, "ball center")?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidAmbiguity(format!(
                "radius {radius} must be a nonnegative real"
            )));
        }
        Ok(Self {
            kind: Kind::WassersteinBall {
                center,
                radius,
                space,
            },
            n,
        })
    }

    pub fn wasserstein_intersection(
        centers: Vec<DiscreteMeasure>,
        radii: Vec<f64>,
        space: FiniteSpace,
    ) -> Result<Self> {
        let n = space.len();
        if !space.has_metric() {
            return Err(Error::InvalidAmbiguity(
                "Wasserstein balls need a metric space".into(),
            ));
        }
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::InvalidAmbiguity("need one radius per center".into()));
        }
        for (k, c) in centers.iter().enumerate() {
            check_probability(c, n, &format!("center {k}"))?;
        }
        if radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidAmbiguity(
                "radii must be nonnegative reals".into(),
            ));
        }
        let set = Self {
            kind: Kind::WassersteinIntersection {
                centers,
                radii,
                space,
            },
            n,
        };
        set.ensure_nonempty("ball intersection")?;
        Ok(set)
    }

    fn ensure_nonempty(&self, what: &str) -> Result<()> {
        let poly = self.polytope();
        let sol = lp::solve(&poly.lp)?;
        if sol.status == LpStatus::Infeasible {
            return Err(Error::InvalidAmbiguity(format!(
                "{what} admit no probability measure"
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// Number of outcomes of the underlying space.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::FiniteFamily { .. } => "finite_family",
            Kind::AVaRSet { .. } => "avar",
            Kind::MomentSet { .. } => "moment",
            Kind::WassersteinBall { .. } => "wasserstein_ball",
            Kind::WassersteinIntersection { .. } => "wasserstein_intersection",
        }
    }

    /// Number of moment constraints, for moment sets.
    pub fn moment_count(&self) -> Option<usize> {
        match &self.kind {
            Kind::MomentSet { psi, .. } => Some(psi.len()),
            _ => None,
        }
    }

    pub(crate) fn polytope(&self) -> Polytope {
        let n = self.n;
        match &self.kind {
            Kind::FiniteFamily { measures } => {
                let k = measures.len();
                let mut lp = LinearProgram::feasibility(k);
                lp.constrain(vec![1.0; k], Sense::Eq, 1.0);
                let map = (0..n)
                    .map(|w| measures.iter().map(|q| q.weights()[w]).collect())
                    .collect();
                Polytope { lp, map }
            }
            Kind::AVaRSet { alpha, reference } => {
                let mut lp = LinearProgram::feasibility(n);
                lp.constrain(vec![1.0; n], Sense::Eq, 1.0);
                for (w, p) in reference.weights().iter().enumerate() {
                    lp.bound(w, 0.0, p / (1.0 - alpha));
                }
                Polytope {
                    lp,
                    map: identity(n),
                }
            }
            Kind::MomentSet { psi, b, .. } => {
                let mut lp = LinearProgram::feasibility(n);
                lp.constrain(vec![1.0; n], Sense::Eq, 1.0);
                for (f, bi) in psi.iter().zip(b) {
                    lp.constrain(f.values().to_vec(), Sense::Eq, *bi);
                }
                Polytope {
                    lp,
                    map: identity(n),
                }
            }
            Kind::WassersteinBall {
                center,
                radius,
                space,
            } => {
                // plan π[i][j] at index i*n + j; q = column sums
                let mut lp = LinearProgram::feasibility(n * n);
                for i in 0..n {
                    let mut row = vec![0.0; n * n];
                    row[i * n..(i + 1) * n].fill(1.0);
                    lp.constrain(row, Sense::Eq, center.weights()[i]);
                }
                let cost: Vec<f64> = (0..n * n).map(|k| space.distance(k / n, k % n)).collect();
                lp.constrain(cost, Sense::Le, *radius);
                let map = (0..n)
                    .map(|j| {
                        (0..n * n)
                            .map(|k| if k % n == j { 1.0 } else { 0.0 })
                            .collect()
                    })
                    .collect();
                Polytope { lp, map }
            }
            Kind::WassersteinIntersection {
                centers,
                radii,
                space,
            } => {
                // q first, then one plan per center
                let blocks = centers.len();
                let vars = n + blocks * n * n;
                let mut lp = LinearProgram::feasibility(vars);
                let mut total = vec![0.0; vars];
                total[..n].fill(1.0);
                lp.constrain(total, Sense::Eq, 1.0);
                for (k, (c, r)) in centers.iter().zip(radii).enumerate() {
                    let base = n + k * n * n;
                    for i in 0..n {
                        let mut row = vec![0.0; vars];
                        row[base + i * n..base + (i + 1) * n].fill(1.0);
                        lp.constrain(row, Sense::Eq, c.weights()[i]);
                    }
                    for j in 0..n {
                        let mut row = vec![0.0; vars];
                        for i in 0..n {
                            row[base + i * n + j] = 1.0;
                        }
                        row[j] = -1.0;
                        lp.constrain(row, Sense::Eq, 0.0);
                    }
                    let mut cost = vec![0.0; vars];
                    for i in 0..n {
                        for j in 0..n {
                            cost[base + i * n + j] = space.distance(i, j);
                        }
                    }
                    lp.constrain(cost, Sense::Le, *r);
                }
                let map = (0..n)
                    .map(|j| {
                        let mut row = vec![0.0; vars];
                        row[j] = 1.0;
                        row
                    })
                    .collect();
                Polytope { lp, map }
            }
        }
    }

    fn check_variable(&self, z: &RandomVariable) -> Result<()> {
        z.ensure_len(self.n)?;
        if !z.is_finite() {
            return Err(Error::InvalidVariable(
                "robust expectation needs a finite variable".into(),
            ));
        }
        Ok(())
    }

    /// `sup_{Q ∈ M} E_Q[Z]` and a maximizing member.
    ///
    /// Finite families are scanned (first maximal member wins); AVaR sets use
    /// the closed form with a greedy maximizer; moment sets and Wasserstein
    /// balls solve an LP.
    pub fn robust_expectation(&self, z: &RandomVariable) -> Result<(f64, DiscreteMeasure)> {
        self.check_variable(z)?;
        match &self.kind {
            Kind::FiniteFamily { measures } => {
                let mut best = (f64::NEG_INFINITY, 0);
                for (k, q) in measures.iter().enumerate() {
                    let v = dot(z.values(), q.weights());
                    if v > best.0 {
                        best = (v, k);
                    }
                }
                Ok((best.0, measures[best.1].clone()))
            }
            Kind::AVaRSet { alpha, reference } => {
                let spec = AvarSpec::new(*alpha, reference.clone())?;
                let (value, _) = avar_primal(&spec, z)?;
                Ok((value, avar_greedy(*alpha, reference, z.values())))
            }
            _ => self.robust_expectation_lp(z),
        }
    }

    /// The LP route of [`Self::robust_expectation`], valid for every kind.
    pub fn robust_expectation_lp(&self, z: &RandomVariable) -> Result<(f64, DiscreteMeasure)> {
        self.check_variable(z)?;
        let (value, q) = self.maximize_linear(z.values())?;
        Ok((value, q))
    }

    /// `max Σ c(ω) q(ω)` over the set by LP.
    pub(crate) fn maximize_linear(&self, c: &[f64]) -> Result<(f64, DiscreteMeasure)> {
        let poly = self.polytope();
        let lp = poly
            .lp
            .with_objective(Direction::Maximize, poly.objective_for(c));
        let sol = lp::solve(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok((
                sol.value,
                DiscreteMeasure::from_solver(poly.q_of(&sol.primal)),
            )),
            LpStatus::Infeasible => Err(Error::Infeasible(format!(
                "{} set is empty",
                self.kind_name()
            ))),
            LpStatus::Unbounded => Err(Error::Infeasible("unbounded measure polytope".into())),
        }
    }

    /// Extreme points of the set (projected to measures, deduplicated).
    pub fn generators(&self) -> Result<Vec<DiscreteMeasure>> {
        self.generators_capped(VERTEX_CAP)
    }

    pub fn generators_capped(&self, cap: u128) -> Result<Vec<DiscreteMeasure>> {
        if let Kind::FiniteFamily { measures } = &self.kind {
            return Ok(measures.clone());
        }
        let poly = self.polytope();
        let verts = lp::vertices(&poly.lp, cap).map_err(|e| match e {
            lp::LpError::EnumerationCap { count, cap } => Error::CapExceeded {
                what: format!("vertices of {} set", self.kind_name()),
                count,
                cap,
            },
            other => Error::Lp(other),
        })?;
        let mut out: Vec<DiscreteMeasure> = Vec::new();
        for v in verts {
            let q = DiscreteMeasure::from_solver(poly.q_of(&v));
            if !out.iter().any(|p| p.max_abs_diff(&q) <= 1e-12) {
                out.push(q);
            }
        }
        Ok(out)
    }

    /// Whether `q` belongs to the set within `tol`.
    pub fn contains(&self, q: &DiscreteMeasure, tol: f64) -> Result<bool> {
        q.ensure_len(self.n)?;
        if (q.mass() - 1.0).abs() > tol {
            return Ok(false);
        }
        if let Kind::AVaRSet { alpha, reference } = &self.kind {
            return Ok(q
                .weights()
                .iter()
                .zip(reference.weights())
                .all(|(w, p)| *w >= -tol && *w <= p / (1.0 - alpha) + tol));
        }
        // minimize the total deviation |q_map x − q| over the polytope
        let poly = self.polytope();
        let vars = poly.lp.vars();
        let n = self.n;
        let mut lp = poly.lp.clone();
        lp.objective = vec![0.0; vars];
        lp.objective.extend(std::iter::repeat_n(1.0, 2 * n));
        lp.lower.extend(std::iter::repeat_n(0.0, 2 * n));
        lp.upper.extend(std::iter::repeat_n(f64::INFINITY, 2 * n));
        for c in lp.constraints.iter_mut() {
            c.coeffs.extend(std::iter::repeat_n(0.0, 2 * n));
        }
        for w in 0..n {
            let mut row = poly.map[w].clone();
            row.extend(std::iter::repeat_n(0.0, 2 * n));
            row[vars + w] = 1.0;
            row[vars + n + w] = -1.0;
            lp.constrain(row, Sense::Eq, q.weights()[w]);
        }
        let sol = lp::solve(&lp)?;
        Ok(sol.is_optimal() && sol.value <= tol)
    }

    /// Minimum of `q(ω)` over the set and a minimizer.
    pub fn min_mass(&self, outcome: usize) -> Result<(f64, DiscreteMeasure)> {
        match &self.kind {
            Kind::FiniteFamily { measures } => {
                let mut best = 0;
                for (k, q) in measures.iter().enumerate() {
                    if q.weights()[outcome] < measures[best].weights()[outcome] {
                        best = k;
                    }
                }
                Ok((measures[best].weights()[outcome], measures[best].clone()))
            }
            _ => {
                let mut c = vec![0.0; self.n];
                c[outcome] = -1.0;
                let (v, q) = self.maximize_linear(&c)?;
                Ok((-v, q))
            }
        }
    }

    /// Maximum of `q(ω)` over the set and a maximizer.
    pub fn max_mass(&self, outcome: usize) -> Result<(f64, DiscreteMeasure)> {
        match &self.kind {
            Kind::FiniteFamily { measures } => {
                let mut best = 0;
                for (k, q) in measures.iter().enumerate() {
                    if q.weights()[outcome] > measures[best].weights()[outcome] {
                        best = k;
                    }
                }
                Ok((measures[best].weights()[outcome], measures[best].clone()))
            }
            Kind::AVaRSet { alpha, reference } => {
                let z = RandomVariable::indicator(self.n, &[outcome]);
                let q = avar_greedy(*alpha, reference, z.values());
                let cap = reference.weights()[outcome] / (1.0 - alpha);
                Ok((cap.min(1.0), q))
            }
            _ => {
                let mut c = vec![0.0; self.n];
                c[outcome] = 1.0;
                self.maximize_linear(&c)
            }
        }
    }

    /// The smallest measure dominating every member: `µ(ω) = sup_Q Q(ω)`.
    pub fn reference_measure(&self) -> Result<ReferenceMeasure> {
        let mut mu = Vec::with_capacity(self.n);
        let mut witnesses = Vec::with_capacity(self.n);
        for w in 0..self.n {
            let (v, q) = self.max_mass(w)?;
            mu.push(v.max(0.0));
            witnesses.push(q);
        }
        let mu = DiscreteMeasure::new(mu)?;
        let normalized = mu.normalized()?;
        Ok(ReferenceMeasure {
            mu,
            normalized,
            witnesses,
        })
    }

    /// A random member: a mixture of two maximizers of random linear
    /// objectives (or of two listed measures for finite families).
    pub fn sample_member(&self, rng: &mut SplitMix64) -> Result<DiscreteMeasure> {
        let vertex = |rng: &mut SplitMix64| -> Result<DiscreteMeasure> {
            match &self.kind {
                Kind::FiniteFamily { measures } => Ok(measures[rng.index(measures.len())].clone()),
                _ => {
                    let c: Vec<f64> = (0..self.n).map(|_| rng.range(-1.0, 1.0)).collect();
                    Ok(self.maximize_linear(&c)?.1)
                }
            }
        };
        let a = vertex(rng)?;
        if rng.bernoulli(0.25) {
            return Ok(a);
        }
        let b = vertex(rng)?;
        Ok(a.mix(&b, rng.uniform()))
    }

    /// Singleton-atom test of strict monotonicity with respect to `p`.
    pub fn is_strictly_monotone(&self, p: &DiscreteMeasure) -> Result<StrictMonotonicity> {
        p.ensure_len(self.n)?;
        p.ensure_probability()?;
        let mut out = StrictMonotonicity {
            strict: true,
            epsilon: f64::INFINITY,
            outcome: None,
            witness: None,
        };
        let mut consider = |v: f64, w: usize, q: &DiscreteMeasure| {
            let v = v.max(0.0);
            if v < out.epsilon {
                out.epsilon = v;
                out.outcome = Some(w);
                out.witness = Some(q.clone());
            }
        };
        match &self.kind {
            // member-major scan: the first listed member that starves an outcome
            Kind::FiniteFamily { measures } => {
                for q in measures {
                    for w in p.support() {
                        consider(q.weights()[w], w, q);
                    }
                }
            }
            _ => {
                for w in p.support() {
                    let (v, q) = self.min_mass(w)?;
                    consider(v, w, &q);
                }
            }
        }
        out.strict = out.epsilon > TOL;
        if !out.strict {
            out.epsilon = 0.0;
        }
        Ok(out)
    }

    /// Value of the dual of the moment problem,
    /// `min λ₀ + Σ bᵢλᵢ  s.t.  λ₀ + Σ λᵢψᵢ(ω) ≥ Z(ω)` over free `λ`.
    pub fn moment_dual_value(&self, z: &RandomVariable) -> Result<f64> {
        let Kind::MomentSet { psi, b, .. } = &self.kind else {
            return Err(Error::InvalidAmbiguity(
                "moment dual needs a moment set".into(),
            ));
        };
        self.check_variable(z)?;
        let m = psi.len();
        let mut obj = vec![1.0];
        obj.extend_from_slice(b);
        let mut lp = LinearProgram::new(Direction::Minimize, obj);
        for k in 0..=m {
            lp.free(k);
        }
        for w in 0..self.n {
            let mut row = vec![1.0];
            row.extend(psi.iter().map(|f| f.values()[w]));
            lp.constrain(row, Sense::Ge, z.values()[w]);
        }
        let sol = lp::solve(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.value),
            _ => Err(Error::Infeasible("moment dual is not solvable".into())),
        }
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect()
}

/// Maximizer of `E_Q[z]` over the AVaR set: fill the largest values first up
/// to the density cap.
pub(crate) fn avar_greedy(alpha: f64, reference: &DiscreteMeasure, z: &[f64]) -> DiscreteMeasure {
    let n = z.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
    let mut q = vec![0.0; n];
    let mut left = 1.0;
    for i in order {
        let take = (reference.weights()[i] / (1.0 - alpha)).min(left);
        q[i] = take;
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    DiscreteMeasure::from_solver(q)
}

/// Checks `Q(A) ≤ µ(A) + 1e-9` on `trials` random pairs of a member `Q` and
/// an outcome set `A`.
pub fn dominates_all(
    result: &ReferenceMeasure,
    set: &AmbiguitySet,
    trials: usize,
    rng: &mut SplitMix64,
) -> Result<bool> {
    let n = set.len();
    for _ in 0..trials {
        let q = set.sample_member(rng)?;
        let a: Vec<usize> = (0..n).filter(|_| rng.bernoulli(0.5)).collect();
        if q.mass_of(&a) > result.mu.mass_of(&a) + TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(w: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::probability(w.to_vec()).unwrap()
    }

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::new(v.to_vec()).unwrap()
    }

    #[test]
    fn finite_family_vertex_scan() {
        let m = AmbiguitySet::finite_family(vec![dm(&[1.0, 0.0]), dm(&[0.0, 1.0])]).unwrap();
        let (v, q) = m.robust_expectation(&rv(&[3.0, 5.0])).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(q.weights(), &[0.0, 1.0]);
        let (vl, _) = m.robust_expectation_lp(&rv(&[3.0, 5.0])).unwrap();
        assert!((vl - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_radius_ball_pins_center() {
        let space = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        let m = AmbiguitySet::wasserstein_ball(dm(&[1.0, 0.0]), 0.0, space).unwrap();
        let (v, _) = m.robust_expectation(&rv(&[1.0, 9.0])).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_set_endpoint_maximizer() {
        // mean 0.3 on {0, 0.5, 1}; convex Z = ξ² is maximized by mass on the endpoints
        let support = FiniteSpace::on_line(&[0.0, 0.5, 1.0]).unwrap();
        let m = AmbiguitySet::moment(support, vec![rv(&[0.0, 0.5, 1.0])], vec![0.3]).unwrap();
        let z = rv(&[0.0, 0.25, 1.0]);
        let (v, q) = m.robust_expectation(&z).unwrap();
        assert!((v - 0.3).abs() < 1e-9);
        assert!((q.weights()[0] - 0.7).abs() < 1e-9);
        assert!(q.weights()[1].abs() < 1e-9);
        assert!((q.weights()[2] - 0.3).abs() < 1e-9);
        assert!((m.moment_dual_value(&z).unwrap() - v).abs() < 1e-7);
    }

    #[test]
    fn infeasible_moment_set_rejected() {
        let support = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        let err = AmbiguitySet::moment(support, vec![rv(&[0.0, 1.0])], vec![2.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidAmbiguity(_)));
    }

    #[test]
    fn avar_closed_form_matches_lp() {
        let m = AmbiguitySet::avar(0.5, DiscreteMeasure::uniform(4)).unwrap();
        let z = rv(&[1.0, 2.0, 3.0, 4.0]);
        let (v, q) = m.robust_expectation(&z).unwrap();
        let (vl, _) = m.robust_expectation_lp(&z).unwrap();
        assert!((v - 3.5).abs() < 1e-12);
        assert!((vl - 3.5).abs() < 1e-9);
        assert!((expectation_of(&q, &z) - 3.5).abs() < 1e-12);
        assert!(m.contains(&q, 1e-9).unwrap());
    }

    fn expectation_of(q: &DiscreteMeasure, z: &RandomVariable) -> f64 {
        q.weights().iter().zip(z.values()).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn reference_measure_examples() {
        let m =
            AmbiguitySet::finite_family(vec![dm(&[0.5, 0.5, 0.0]), dm(&[0.0, 0.5, 0.5])]).unwrap();
        let r = m.reference_measure().unwrap();
        assert_eq!(r.mu.weights(), &[0.5, 0.5, 0.5]);
        for w in r.normalized.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }

        let p = dm(&[0.2, 0.3, 0.5]);
        let r = AmbiguitySet::singleton(p.clone())
            .unwrap()
            .reference_measure()
            .unwrap();
        assert_eq!(r.mu, p);
        assert_eq!(r.normalized, p);

        let m = AmbiguitySet::avar(0.5, DiscreteMeasure::uniform(4)).unwrap();
        let r = m.reference_measure().unwrap();
        assert_eq!(r.mu.weights(), &[0.5; 4]);
        assert!((r.mu.mass() - 2.0).abs() < 1e-12);
        for (w, q) in r.witnesses.iter().enumerate() {
            assert!((q.weights()[w] - 0.5).abs() < 1e-12);
            assert!(m.contains(q, 1e-9).unwrap());
        }
    }

    #[test]
    fn dominance_sampling() {
        let mut rng = SplitMix64::new(42);
        let sets = [
            AmbiguitySet::finite_family(vec![dm(&[0.5, 0.5, 0.0]), dm(&[0.0, 0.5, 0.5])]).unwrap(),
            AmbiguitySet::singleton(dm(&[0.2, 0.3, 0.5])).unwrap(),
            AmbiguitySet::avar(0.5, DiscreteMeasure::uniform(4)).unwrap(),
        ];
        for m in &sets {
            let r = m.reference_measure().unwrap();
            assert!(dominates_all(&r, m, 1000, &mut rng).unwrap());
        }
    }

    #[test]
    fn strict_monotonicity_examples() {
        let p = DiscreteMeasure::uniform(2);
        let m = AmbiguitySet::finite_family(vec![dm(&[0.5, 0.5]), dm(&[0.9, 0.1])]).unwrap();
        let s = m.is_strictly_monotone(&p).unwrap();
        assert!(s.strict);
        assert!((s.epsilon - 0.1).abs() < 1e-12);

        let m = AmbiguitySet::simplex(2);
        let s = m.is_strictly_monotone(&p).unwrap();
        assert!(!s.strict);
        assert_eq!(s.outcome, Some(1));
        assert_eq!(s.witness.unwrap().weights(), &[1.0, 0.0]);
    }

    #[test]
    fn moment_set_not_strictly_monotone() {
        // one moment constraint: a vertex has at most two support points out of four
        let support = FiniteSpace::on_line(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let m = AmbiguitySet::moment(support, vec![rv(&[0.0, 1.0, 2.0, 3.0])], vec![1.5]).unwrap();
        let s = m
            .is_strictly_monotone(&DiscreteMeasure::uniform(4))
            .unwrap();
        assert!(!s.strict);
        let w = s.witness.unwrap();
        assert!(w.weights()[s.outcome.unwrap()].abs() < 1e-9);
        assert!(m.contains(&w, 1e-9).unwrap());
    }

    #[test]
    fn generators_of_avar_set() {
        let m = AmbiguitySet::avar(0.5, DiscreteMeasure::uniform(4)).unwrap();
        let g = m.generators().unwrap();
        // vertices put density 2 on exactly two outcomes
        assert_eq!(g.len(), 6);
        for q in &g {
            assert_eq!(q.support().len(), 2);
        }
    }

    #[test]
    fn ball_contains_center_and_argmax() {
        let space = FiniteSpace::on_line(&[0.0, 1.0, 2.0]).unwrap();
        let m = AmbiguitySet::wasserstein_ball(dm(&[0.2, 0.5, 0.3]), 0.4, space).unwrap();
        assert!(m.contains(&dm(&[0.2, 0.5, 0.3]), 1e-9).unwrap());
        assert!(!m.contains(&dm(&[0.0, 0.0, 1.0]), 1e-9).unwrap());
        let (_, q) = m.robust_expectation(&rv(&[0.0, 1.0, 5.0])).unwrap();
        assert!(m.contains(&q, 1e-7).unwrap());
    }

    #[test]
    fn validation_errors() {
        assert!(AmbiguitySet::finite_family(vec![]).is_err());
        assert!(
            AmbiguitySet::finite_family(vec![DiscreteMeasure::new(vec![0.5, 0.2]).unwrap()])
                .is_err()
        );
        assert!(AmbiguitySet::avar(1.0, DiscreteMeasure::uniform(2)).is_err());
        let plain = FiniteSpace::new(2).unwrap();
        assert!(AmbiguitySet::wasserstein_ball(DiscreteMeasure::uniform(2), 0.1, plain).is_err());
    }
}
