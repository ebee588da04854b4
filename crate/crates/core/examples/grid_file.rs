// Writes sampled initial data to a grid file, reads it back and solves with
// it. The hat is a product of 1D hats, so `u` factorises and can be checked
// with two 1D sums.

use parabound::solver::{evaluate_hom, Grid};
use parabound::{KernelWorkspace, ProblemSpec, QuadratureConfig, SourceFunction};

fn main() -> parabound::Result<()> {
    let hat = |y: &[f64]| (1.0 - y[0].abs()).max(0.0) * (1.0 - y[1].abs()).max(0.0);
    // nodes at multiples of 0.25 on [-1, 1]^2 represent the hat exactly
    let grid = Grid::sample(vec![9, 9], vec![-1.0, -1.0], vec![0.25, 0.25], hat)?;
    let path = std::env::temp_dir().join("parabound_hat.pbgr");
    grid.save(&path)?;
    let loaded = Grid::load(&path)?;
    println!("wrote and reread {} ({} samples)", path.display(), loaded.values().len());

    let w = KernelWorkspace::new(ProblemSpec::heat(2, 5.0)?)?;
    let q = QuadratureConfig::default();
    let phi = SourceFunction::grid(loaded);
    let t = 0.3;
    // 1D heat flow of the hat by a fine midpoint sum
    let u1 = |x: f64| {
        let m = 200_000;
        let h = 2.0 / m as f64;
        (0..m)
            .map(|i| {
                let y = -1.0 + (i as f64 + 0.5) * h;
                (1.0 - y.abs()) * (-(x - y).powi(2) / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt()
            })
            .sum::<f64>()
            * h
    };
    for x in [[0.0, 0.0], [0.5, -0.25], [1.5, 1.0]] {
        let u = evaluate_hom(&w, &phi, &x, t, &q)?;
        println!("x = {x:?}: u = {:.10}, product of 1D sums = {:.10}", u.u, u1(x[0]) * u1(x[1]));
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
