// Builds the data for which the gradient bounds become equalities and
// measures how close the solver gets to the constants.

use parabound::verify::{attainment_ratio_hom, attainment_ratio_nonhom, ExtremalSpec};
use parabound::{Exponent, KernelWorkspace, ProblemSpec, QuadratureConfig};

fn main() -> parabound::Result<()> {
    let q = QuadratureConfig::default();
    let heat = KernelWorkspace::new(ProblemSpec::heat(1, 10.0)?)?;

    println!("initial data, x0 = 0, t0 = 1");
    for p in ["1.5", "2", "4", "inf"] {
        let spec = ExtremalSpec::new(vec![0.0], 1.0, p.parse()?, vec![1.0], 0.0);
        println!("  p = {p:<4} ratio {:.10}", attainment_ratio_hom(&spec, &heat, &q)?);
    }

    println!("\nsource, p = 4 (> n + 2)");
    let spec = ExtremalSpec::new(vec![0.0], 1.0, Exponent::new(4.0)?, vec![1.0], 0.0);
    println!("  ratio {:.10}", attainment_ratio_nonhom(&spec, &heat, &q)?);

    println!("\nsource, p = inf: tanh-mollified sign data approach the constant");
    for eps in [0.3, 0.1, 0.03, 0.01] {
        let spec = ExtremalSpec::new(vec![0.0], 1.0, Exponent::INFINITY, vec![1.0], eps);
        println!("  eps = {eps:<5} ratio {:.8}", attainment_ratio_nonhom(&spec, &heat, &q)?);
    }
    Ok(())
}
