// Evaluates the fundamental solution of an anisotropic problem with drift
// and reaction, and checks that its total mass is `e^{ct}`.

use parabound::{KernelWorkspace, ProblemSpec, SpdMatrix};

fn main() -> parabound::Result<()> {
    let a = SpdMatrix::from_rows(&[vec![1.5, 0.4], vec![0.4, 0.5]])?;
    let spec = ProblemSpec::new(a, vec![0.7, -1.2], -0.3, 5.0)?;
    let w = KernelWorkspace::new(spec)?;

    let t = 0.8;
    for x in [[0.0, 0.0], [-0.56, 0.96], [1.0, -0.5]] {
        let g = w.eval_g(&x, t)?;
        let grad = w.eval_grad_g(&x, t)?;
        println!("G({x:?}, {t}) = {g:.6e}   grad = [{:.6e}, {:.6e}]", grad[0], grad[1]);
    }
    // the kernel peaks where x + t b = 0
    println!("peak at x = -t b = [{:.2}, {:.2}]", -t * 0.7, t * 1.2);

    // mass by a midpoint sum on a box around the peak
    let (h, half) = (0.02, 14.0);
    let m = (2.0 * half / h) as usize;
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            let x = [-0.56 - half + (i as f64 + 0.5) * h, 0.96 - half + (j as f64 + 0.5) * h];
            sum += w.eval_g(&x, t)?;
        }
    }
    println!("mass: sum {:.12}  exact e^(ct) {:.12}", sum * h * h, w.mass(t)?);

    let symbol = w.fourier_symbol(&[0.3, -0.2], t)?;
    println!("Fourier symbol at (0.3, -0.2): {:.6} {:+.6}i", symbol.re, symbol.im);
    Ok(())
}
