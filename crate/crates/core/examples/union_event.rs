//! P(Z_1(t) ≥ a_1 t or Z_2(t) ≥ a_2 t) from three separately twisted
//! estimators, combined by inclusion–exclusion.

use compound_hawkes::estimate::{estimate_union, StoppingRule, UnionCombination};
use compound_hawkes::model::{bivariate, MarkRegime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = bivariate(MarkRegime::Random)?;
    let rule = StoppingRule::with_epsilon(0.05);
    for t in [2.0, 5.0, 10.0] {
        let u = estimate_union(
            &spec,
            &[8.0, 9.0],
            t,
            &rule,
            3,
            UnionCombination::InclusionExclusion,
        )?;
        let [a, b, ab] = &u.parts;
        println!(
            "t={t:>4}: P(A)={:.3e} P(B)={:.3e} P(A∩B)={:.3e} → P(A∪B)={:.3e} ± {:.1e}",
            a.estimate, b.estimate, ab.estimate, u.estimate, u.std_err
        );
    }
    Ok(())
}
