use shs_core::grid::{TangentialGrid, VerticalGrid};
use shs_core::grid::field::SpectralField;
use shs_core::resolvent::dirichlet::weak_dirichlet_solve;
use shs_core::C64;
use std::sync::Arc;

fn main() {
    let coeff = [0.3f64, -0.2, 0.45, 0.17];
    let (cx, cz) = (5.44, 4.14);
    for (n, nz) in [(32usize, 512usize), (64, 1024), (128, 1024)] {
        let g = Arc::new(TangentialGrid::new(1, n, 2.0 * std::f64::consts::PI).unwrap());
        let v = Arc::new(VerticalGrid::uniform(nz, 16.0).unwrap());
        let f = SpectralField::from_fn(g.clone(), v.clone(), 2, |c, x, z| {
            let w = (-1.5f64 * (z - 4.0) * (z - 4.0)).exp();
            let val = match c {
                0 => coeff[0] * x[0].sin() + coeff[1] * (2.0 * x[0]).cos(),
                _ => coeff[2] * x[0].cos() + coeff[3],
            };
            C64::new(val * w, 0.0)
        });
        let wd = weak_dirichlet_solve(&f).unwrap();
        let phi_grad = SpectralField::from_fn(g.clone(), v.clone(), 2, |c, x, z| {
            let p = (-((x[0] - cx) * (x[0] - cx) + (z - cz) * (z - cz)) / 0.5).exp();
            let d = match c {
                0 => -2.0 * (x[0] - cx) / 0.5 * p,
                _ => -2.0 * (z - cz) / 0.5 * p,
            };
            C64::new(d, 0.0)
        });
        let lhs = wd.gradient.bilinear_pairing(&phi_grad);
        let rhs = f.bilinear_pairing(&phi_grad);
        println!("n={n} nz={nz}: lhs {:.8e} rhs {:.8e} diff {:.3e}", lhs.re, rhs.re, (lhs - rhs).norm());
    }
}
