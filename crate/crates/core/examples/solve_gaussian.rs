// Solves the homogeneous problem for Gaussian initial data and compares
// with the closed-form convolution of two Gaussians.

use parabound::solver::evaluate_hom;
use parabound::{KernelWorkspace, ProblemSpec, QuadratureConfig, SourceFunction, SpdMatrix};

fn main() -> parabound::Result<()> {
    let (a, b, c) = (0.7, 0.5, -0.4);
    let w = KernelWorkspace::new(ProblemSpec::new(SpdMatrix::from_rows(&[vec![a]])?, vec![b], c, 4.0)?)?;
    // phi(y) = exp(-(y - 0.3)^2 / (4 s))
    let (center, s) = (0.3, 0.2);
    let phi = SourceFunction::gaussian(vec![center], s, 1.0)?;
    let q = QuadratureConfig::default();

    println!("{:>6} {:>6} {:>22} {:>22} {:>10}", "x", "t", "u", "exact", "rel err");
    for t in [0.1, 0.5, 2.0] {
        for x in [-1.0, 0.0, 0.8] {
            let u = evaluate_hom(&w, &phi, &[x], t, &q)?.u;
            // convolution of Gaussians: variances add
            let v = a * t + s;
            let exact = (c * t).exp() * (s / v).sqrt() * (-(x + b * t - center).powi(2) / (4.0 * v)).exp();
            println!("{x:>6} {t:>6} {u:>22.15e} {exact:>22.15e} {:>10.2e}", (u - exact).abs() / exact);
        }
    }
    Ok(())
}
