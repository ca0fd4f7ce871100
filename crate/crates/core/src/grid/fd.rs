//! Vertical finite differences on the cell-centred uniform grid: 4th-order
//! central stencils in the interior, one-sided 4th-order stencils at the
//! ends, and polynomial extrapolation of traces to the boundary `z = 0`.
//!
//! Stencil coefficients come from exact degree-4 polynomial fits through
//! five nodes, solved once per geometry by Gaussian elimination, so every
//! coefficient set is reproducible.

use super::field::SpectralField;
use crate::C64;

/// Solves the small Vandermonde system giving weights `c_i` with
/// `sum_i c_i p(o_i) = p^{(order)}(x0)` exact for polynomials of degree
/// `< offsets.len()`; offsets and `x0` in node units.
pub fn fd_weights(offsets: &[f64], x0: f64, order: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (j, &o) in offsets.iter().enumerate() {
        let t = o - x0;
        for k in 0..n {
            a[k][j] = t.powi(k as i32);
        }
    }
    for (k, row) in a.iter_mut().enumerate() {
        row[n] = if k == order { (1..=order).product::<usize>() as f64 } else { 0.0 };
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        for k in col..=n {
            a[col][k] /= p;
        }
        for row in 0..n {
            if row != col && a[row][col] != 0.0 {
                let f = a[row][col];
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n]).collect()
}

fn apply_stencil(line: &[C64], out: &mut [C64], h: f64, order: usize, points: usize) {
    let n = line.len();
    let half = points / 2;
    let scale = 1.0 / h.powi(order as i32);
    let offsets: Vec<f64> = (0..points).map(|k| k as f64 - half as f64).collect();
    let central: Vec<f64> = fd_weights(&offsets, 0.0, order);
    for i in half..n - half {
        let mut acc = C64::default();
        for (k, c) in central.iter().enumerate() {
            acc += *c * line[i + k - half];
        }
        out[i] = acc * scale;
    }
    let oneside: Vec<f64> = (0..points).map(|k| k as f64).collect();
    for i in 0..half {
        let w = fd_weights(&oneside, i as f64, order);
        let mut acc = C64::default();
        for (k, c) in w.iter().enumerate() {
            acc += *c * line[k];
        }
        out[i] = acc * scale;
    }
    for i in (n - half)..n {
        let neg: Vec<f64> = (0..points).map(|k| -(k as f64)).collect();
        let w = fd_weights(&neg, -((n - 1 - i) as f64), order);
        let mut acc = C64::default();
        for (k, c) in w.iter().enumerate() {
            acc += *c * line[n - 1 - k];
        }
        out[i] = acc * scale;
    }
}

/// 4th-order vertical derivative of the given order (1 or 2) of every
/// component and tangential index (5-point stencils).
pub fn vertical_derivative(field: &SpectralField, order: usize) -> SpectralField {
    vertical_derivative_acc(field, order, 5)
}

/// Vertical derivative with a chosen stencil width (5 points for 4th
/// order, 7 points for 6th).
pub fn vertical_derivative_acc(field: &SpectralField, order: usize, points: usize) -> SpectralField {
    assert!(field.vgrid.is_uniform(), "vertical FD requires the uniform rule");
    let h = field.vgrid.spacing();
    let mut out = field.clone();
    let nz = field.nz();
    let mut buf = vec![C64::default(); nz];
    for c in 0..field.ncomp() {
        for p in 0..field.grid.modes() {
            apply_stencil(field.line(c, p), &mut buf, h, order, points);
            out.line_mut(c, p).copy_from_slice(&buf);
        }
    }
    out
}

/// Extrapolated boundary values at `z = 0` (`order = 0`) or one-sided
/// derivatives there, per tangential index, 4th order from the first five
/// cell-centred nodes at offsets `1/2, 3/2, ...`.
pub fn boundary_trace(field: &SpectralField, comp: usize, order: usize) -> Vec<C64> {
    boundary_trace_acc(field, comp, order, 6)
}

/// Boundary trace with a chosen number of extrapolation nodes.
pub fn boundary_trace_acc(
    field: &SpectralField,
    comp: usize,
    order: usize,
    points: usize,
) -> Vec<C64> {
    assert!(field.vgrid.is_uniform());
    let h = field.vgrid.spacing();
    let offsets: Vec<f64> = (0..points).map(|k| k as f64 + 0.5).collect();
    let w = fd_weights(&offsets, 0.0, order);
    let scale = 1.0 / h.powi(order as i32);
    let modes = field.grid.modes();
    let mut out = vec![C64::default(); modes];
    for (p, o) in out.iter_mut().enumerate() {
        let line = field.line(comp, p);
        let mut acc = C64::default();
        for (k, c) in w.iter().enumerate() {
            acc += *c * line[k];
        }
        *o = acc * scale;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{TangentialGrid, VerticalGrid};
    use std::sync::Arc;

    #[test]
    fn weights_reproduce_classic_stencils() {
        let c = fd_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 0.0, 1);
        let want = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in c.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = fd_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 0.0, 2);
        let want = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in c.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_converges_at_fourth_order() {
        let g = Arc::new(TangentialGrid::new(1, 8, 2.0 * std::f64::consts::PI).unwrap());
        let f = |z: f64| (1.3 * z).sin();
        let fp = |z: f64| 1.3 * (1.3 * z).cos();
        let errs: Vec<f64> = [64usize, 128]
            .iter()
            .map(|&nz| {
                let v = Arc::new(VerticalGrid::uniform(nz, 2.0).unwrap());
                let field =
                    SpectralField::from_fn(g.clone(), v.clone(), 1, |_, _, z| C64::new(f(z), 0.0));
                let d = vertical_derivative(&field, 1);
                (0..nz)
                    .map(|k| (d.at(0, 0, k).re - fp(v.nodes()[k])).abs())
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 3.7, "rate {rate} errs {errs:?}");
    }

    #[test]
    fn boundary_trace_extrapolation() {
        let g = Arc::new(TangentialGrid::new(1, 8, 2.0 * std::f64::consts::PI).unwrap());
        let v = Arc::new(VerticalGrid::uniform(256, 2.0).unwrap());
        let field = SpectralField::from_fn(g, v, 1, |_, x, z| {
            C64::new((x[0].cos() + 2.0) * (-1.7 * z).exp(), 0.0)
        });
        let val = boundary_trace(&field, 0, 0);
        let der = boundary_trace(&field, 0, 1);
        for p in 0..4 {
            let x = field.grid.point(p)[0];
            let want_v = x.cos() + 2.0;
            assert!((val[p].re - want_v).abs() < 1e-9);
            assert!((der[p].re + 1.7 * want_v).abs() < 1e-6, "{} vs {}", der[p].re, -1.7 * want_v);
        }
    }
}
