//! Random instances for the verification batteries.

use crate::ambiguity::AmbiguitySet;
use crate::composite::RectangularSpec;
use crate::dp::{MultistageProblem, Stage};
use crate::error::Result;
use crate::measure::{DiscreteMeasure, Filtration, FiniteSpace, Partition, RandomVariable};
use crate::rng::SplitMix64;
use crate::transport::TreeModel;

/// Strictly positive probability vector.
pub fn positive_measure(rng: &mut SplitMix64, n: usize) -> DiscreteMeasure {
    let w: Vec<f64> = rng.simplex(n).into_iter().map(|x| x + 0.02).collect();
    let total: f64 = w.iter().sum();
    DiscreteMeasure::probability(w.into_iter().map(|x| x / total).collect())
        .expect("positive simplex point")
}

/// Probability vector where each outcome is zeroed with probability `zero`
/// (at least one outcome keeps mass).
pub fn sparse_measure(rng: &mut SplitMix64, n: usize, zero: f64) -> DiscreteMeasure {
    let mut w = rng.simplex(n);
    let keep = rng.index(n);
    for (i, x) in w.iter_mut().enumerate() {
        if i != keep && rng.bernoulli(zero) {
            *x = 0.0;
        }
    }
    let total: f64 = w.iter().sum();
    DiscreteMeasure::probability(w.into_iter().map(|x| x / total).collect())
        .expect("nonzero simplex point")
}

pub fn variable(rng: &mut SplitMix64, n: usize, scale: f64) -> RandomVariable {
    RandomVariable::new((0..n).map(|_| rng.range(-scale, scale)).collect()).expect("finite")
}

/// Sorted distinct points on the line, spaced at least 0.1 apart.
pub fn line_points(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += rng.range(0.1, 1.5);
            x
        })
        .collect()
}

/// Random partition into between 1 and `n` atoms.
pub fn partition(rng: &mut SplitMix64, n: usize) -> Partition {
    let k = rng.int(1, n);
    let mut labels: Vec<usize> = (0..n)
        .map(|i| if i < k { i } else { rng.index(k) })
        .collect();
    rng.shuffle(&mut labels);
    let atoms = (0..k)
        .map(|a| (0..n).filter(|&i| labels[i] == a).collect())
        .collect();
    Partition::new(n, atoms).expect("every label is used")
}

/// Trivial partition followed by `levels - 1` random refinements.
pub fn filtration(rng: &mut SplitMix64, n: usize, levels: usize) -> Filtration {
    let mut stages = vec![Partition::trivial(n)];
    for _ in 1..levels {
        let last = stages.last().unwrap();
        let mut atoms = Vec::new();
        for atom in last.atoms() {
            let k = rng.int(1, atom.len().min(3));
            let mut labels: Vec<usize> = (0..atom.len())
                .map(|i| if i < k { i } else { rng.index(k) })
                .collect();
            rng.shuffle(&mut labels);
            for a in 0..k {
                atoms.push(
                    atom.iter()
                        .zip(&labels)
                        .filter(|(_, &l)| l == a)
                        .map(|(&w, _)| w)
                        .collect(),
                );
            }
        }
        stages.push(Partition::new(n, atoms).expect("refinement of a partition"));
    }
    Filtration::new(stages).expect("nested refinements")
}

pub fn finite_family(rng: &mut SplitMix64, n: usize, members: usize) -> AmbiguitySet {
    let mut ms: Vec<DiscreteMeasure> = vec![positive_measure(rng, n)];
    while ms.len() < members {
        ms.push(sparse_measure(rng, n, 0.3));
    }
    AmbiguitySet::finite_family(ms).expect("probability members")
}

/// Finite family of strictly positive members.
pub fn positive_family(rng: &mut SplitMix64, n: usize, members: usize) -> AmbiguitySet {
    AmbiguitySet::finite_family((0..members).map(|_| positive_measure(rng, n)).collect())
        .expect("probability members")
}

pub fn avar_set(rng: &mut SplitMix64, n: usize) -> AmbiguitySet {
    AmbiguitySet::avar(rng.range(0.0, 0.9), positive_measure(rng, n)).expect("level in range")
}

/// Mean (and sometimes second moment) pinned at those of a positive measure,
/// so the set is nonempty and charges every outcome.
pub fn moment_set(rng: &mut SplitMix64, n: usize) -> AmbiguitySet {
    let pts = line_points(rng, n);
    let p = positive_measure(rng, n);
    let mut psi = vec![RandomVariable::new(pts.clone()).unwrap()];
    if n >= 4 && rng.bernoulli(0.5) {
        psi.push(RandomVariable::new(pts.iter().map(|x| x * x).collect()).unwrap());
    }
    let b = psi
        .iter()
        .map(|f| f.values().iter().zip(p.weights()).map(|(a, w)| a * w).sum())
        .collect();
    AmbiguitySet::moment(FiniteSpace::on_line(&pts).unwrap(), psi, b).expect("contains p")
}

pub fn wasserstein_set(rng: &mut SplitMix64, n: usize) -> AmbiguitySet {
    let pts = line_points(rng, n);
    let radius = rng.range(0.0, 0.6);
    AmbiguitySet::wasserstein_ball(
        positive_measure(rng, n),
        radius,
        FiniteSpace::on_line(&pts).unwrap(),
    )
    .expect("valid ball")
}

/// One of the four kinds, by index.
pub fn set_of_kind(rng: &mut SplitMix64, kind: usize, n: usize) -> AmbiguitySet {
    match kind % 4 {
        0 => {
            let k = rng.int(1, 4);
            finite_family(rng, n, k)
        }
        1 => avar_set(rng, n),
        2 => moment_set(rng, n),
        _ => wasserstein_set(rng, n),
    }
}

/// Small stage sets suited to vertex enumeration.
pub fn stage_set(rng: &mut SplitMix64, n: usize) -> AmbiguitySet {
    match rng.index(5) {
        0 => {
            let k = rng.int(1, 3);
            finite_family(rng, n, k)
        }
        1 => avar_set(rng, n),
        2 => AmbiguitySet::simplex(n),
        3 => moment_set(rng, n),
        _ => wasserstein_set(rng, n),
    }
}

pub fn rectangular(
    rng: &mut SplitMix64,
    horizon: usize,
    max_size: usize,
) -> Result<RectangularSpec> {
    RectangularSpec::new(
        (0..horizon)
            .map(|_| {
                let n = rng.int(2, max_size);
                stage_set(rng, n)
            })
            .collect(),
    )
}

/// Two-stage spec with finite-family stages.
pub fn finite_rectangular(rng: &mut SplitMix64) -> Result<RectangularSpec> {
    let n1 = rng.int(2, 3);
    let n2 = rng.int(2, 3);
    let a = {
        let k = rng.int(1, 3);
        finite_family(rng, n1, k)
    };
    let b = {
        let k = rng.int(1, 3);
        finite_family(rng, n2, k)
    };
    RectangularSpec::new(vec![a, b])
}

/// Full tree with history-dependent reference transitions on line points.
pub fn tree_model(rng: &mut SplitMix64, sizes: &[usize]) -> Result<TreeModel> {
    let points = sizes.iter().map(|&n| line_points(rng, n)).collect();
    let first = positive_measure(rng, sizes[0]);
    let mut kernels = Vec::new();
    let mut histories = 1;
    for t in 1..sizes.len() {
        histories *= sizes[t - 1];
        kernels.push(
            (0..histories)
                .map(|_| sparse_measure(rng, sizes[t], 0.2))
                .collect(),
        );
    }
    TreeModel::new(points, first, kernels)
}

/// Random problem; `strict` draws stage sets that are strictly monotone.
pub fn multistage_problem(
    rng: &mut SplitMix64,
    horizon: usize,
    strict: bool,
) -> Result<MultistageProblem> {
    let a1 = rng.int(1, 2);
    let first_costs: Vec<f64> = (0..a1).map(|_| rng.range(0.0, 3.0)).collect();
    let mut stages = Vec::new();
    let mut prev = a1;
    for _ in 1..horizon {
        let n = rng.int(2, 3);
        let actions = rng.int(1, 2);
        let set = if strict {
            match rng.index(3) {
                0 => {
                    let k = rng.int(1, 3);
                    positive_family(rng, n, k)
                }
                1 => AmbiguitySet::singleton(positive_measure(rng, n))?,
                _ => AmbiguitySet::avar(0.0, positive_measure(rng, n))?,
            }
        } else {
            stage_set(rng, n)
        };
        let costs = (0..actions)
            .map(|_| (0..n).map(|_| rng.range(-2.0, 4.0)).collect())
            .collect();
        let feasible = (0..prev)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let mut allowed: Vec<usize> =
                            (0..actions).filter(|_| rng.bernoulli(0.7)).collect();
                        if allowed.is_empty() {
                            allowed.push(rng.index(actions));
                        }
                        allowed
                    })
                    .collect()
            })
            .collect();
        stages.push(Stage {
            set,
            costs,
            feasible,
        });
        prev = actions;
    }
    MultistageProblem::new(first_costs, (0..a1).collect(), stages)
}
