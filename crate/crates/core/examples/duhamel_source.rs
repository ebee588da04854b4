// Nonhomogeneous problem with zero initial data: a constant source and a
// box-shaped source, evaluated through the Duhamel integral.

use parabound::sharp::c_dir;
use parabound::solver::evaluate_nonhom;
use parabound::{Exponent, KernelWorkspace, ProblemSpec, QuadratureConfig, SourceFunction};

fn main() -> parabound::Result<()> {
    let q = QuadratureConfig::default();
    let spec = ProblemSpec::heat(2, 5.0)?.with_drift(vec![1.0, 0.0])?;
    for c in [-0.5, 0.0, 0.5] {
        let w = KernelWorkspace::new(spec.with_reaction(c)?)?;
        let one = SourceFunction::constant(2, 1.0)?;
        let t = 0.7;
        let u = evaluate_nonhom(&w, &one, &[0.2, -0.1], t, &q)?.u;
        let exact = if c == 0.0 { t } else { (c * t).exp_m1() / c };
        println!("f = 1, c = {c:+}: u = {u:.14}  exact {exact:.14}");
    }

    let w = KernelWorkspace::new(spec)?;
    let f = SourceFunction::box_indicator(vec![-0.5, -0.5], vec![0.5, 0.5], 1.0)?;
    let (x, t, l) = ([0.4, 0.1], 1.0, [1.0, 0.0]);
    let sol = evaluate_nonhom(&w, &f, &x, t, &q)?;
    let measured = sol.directional(&l).abs();
    println!("\nbox source: u = {:.10}, du/dx1 = {:.10}", sol.u, sol.grad[0]);
    for p in [5.0, 8.0, f64::INFINITY] {
        let p = Exponent::new(p)?;
        let bound = c_dir(&w, p, &l, t)?.value * f.lp_norm_spacetime(p, t)?.value;
        println!("  p = {p:<4} bound {bound:.10}  ratio {:.4}", measured / bound);
    }
    Ok(())
}
