// Tabulates the sharp constants of both gradient bounds and shows that they
// do not depend on the drift.

use parabound::sharp::{c_max, evaluate, k_dir, k_max};
use parabound::{BoundKind, BoundQuery, Direction, Exponent, KernelWorkspace, ProblemSpec, SpdMatrix};

fn main() -> parabound::Result<()> {
    let heat = KernelWorkspace::new(ProblemSpec::heat(1, 10.0)?)?;
    println!("unit heat equation, n = 1, t = 1");
    for p in ["1", "2", "4", "8", "inf"] {
        let p: Exponent = p.parse()?;
        let k = k_dir(&heat, p, &[1.0], 1.0)?.value;
        let c = if p.is_infinite() || p.value() > 3.0 {
            format!("{:.10}", c_max(&heat, p, 1.0)?.value)
        } else {
            "(needs p > n + 2)".into()
        };
        println!("  p = {p:<4} K = {k:.10}   C = {c}");
    }

    let a = SpdMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 0.4]])?;
    let w = KernelWorkspace::new(ProblemSpec::new(a, vec![0.0, 0.0], 0.2, 10.0)?)?;
    let p = Exponent::new(4.0)?;
    let best = k_max(&w, p, 0.5)?;
    println!("\nanisotropic n = 2, p = 4, t = 0.5");
    println!("  max over directions: {:.10}", best.value);
    println!("  maximizing direction: {:?}", best.maximizing_direction.unwrap());
    println!("  factors: {:?}", best.factors);

    let drifted = w.with_drift(vec![3.0, -2.0])?;
    let query = BoundQuery {
        p,
        direction: Direction::Unit(vec![0.6, 0.8]),
        t: 0.5,
        kind: BoundKind::Homogeneous,
    };
    let (k0, k1) = (evaluate(&w, &query)?.value, evaluate(&drifted, &query)?.value);
    println!("  drift b = 0: {k0:.16}\n  drift b = (3, -2): {k1:.16}");
    Ok(())
}
