//! Nested evaluation: the composite fold over a filtration, the stagewise
//! recursion of a rectangular set, the static product value it dominates,
//! the induced family, and sensitivity to the stage order.

use dro_nested::ambiguity::AmbiguitySet;
use dro_nested::composite::{
    composite_functional, induced_set, permutation_invariance_check, rectangular_equivalence_check,
    rectangular_nested, static_rectangular, RectangularSpec,
};
use dro_nested::measure::{tree_filtration, DiscreteMeasure, RandomVariable, ScenarioTree};
use dro_nested::Result;

fn main() -> Result<()> {
    let tree = ScenarioTree::uniform(&[2, 2])?;
    let f = tree_filtration(&tree)?;
    let z = RandomVariable::new(vec![1.0, 5.0, 2.0, 7.0])?;
    let simplex = AmbiguitySet::simplex(4);
    let fold = composite_functional(&simplex, &f, &z, &DiscreteMeasure::uniform(4))?;
    println!("composite fold over the simplex: {}", fold.value);
    for (k, level) in fold.stage_values.iter().enumerate() {
        println!("  level {}: {:?}", k + 1, level.values());
    }

    // the first stage is a fair coin, the second reacts to it
    let spec = RectangularSpec::new(vec![
        AmbiguitySet::singleton(DiscreteMeasure::uniform(2))?,
        AmbiguitySet::simplex(2),
    ])?;
    let diagonal = RandomVariable::new(vec![1.0, 0.0, 0.0, 1.0])?;
    let nested = rectangular_nested(&spec, &diagonal)?;
    let stat = static_rectangular(&spec, &diagonal)?;
    let eq = rectangular_equivalence_check(&spec, &diagonal, &DiscreteMeasure::uniform(4))?;
    println!(
        "nested {} (tables {:?}), composite {}, static {}",
        nested.value, nested.tables, eq.composite, stat.value
    );

    let ind = induced_set(&spec)?;
    println!(
        "induced family: {} selector products, {} distinct, best {} vs constant selectors {}",
        ind.pre_dedup_count,
        ind.measures.len(),
        ind.max_expectation(&diagonal),
        ind.family1_max(&diagonal)
    );

    let swapped = permutation_invariance_check(&spec, &diagonal, &[vec![1, 0]])?;
    println!(
        "after swapping stages: nested {:?}, static {:?}",
        swapped.nested_values, swapped.static_values
    );
    assert!(swapped.static_invariant && swapped.nested_changed);
    Ok(())
}
