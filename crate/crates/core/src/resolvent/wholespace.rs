//! Whole-space heat resolvents with reflection and the interior solution
//! operator `W_1(lambda)`.

use crate::error::{Result, ShsError};
use crate::grid::field::{Layout, SpectralField};
use crate::grid::fullspace::{ExtField, Parity};
use crate::C64;

pub use crate::grid::fullspace::whole_space_resolvent;

/// Precomputed full-space spectrum of the parity-extended interior datum,
/// so that repeated resolvent applications (one per contour node) cost one
/// diagonal division plus an inverse FFT each.
pub struct W1Precomp {
    hat: ExtField,
    mu: f64,
}

/// Per-mode maximum of the spectral divergence of the extension, relative
/// to the field scale. Requires tangential traces that decay at the
/// boundary (the extension is reflected); use
/// [`interior_divergence_defect`] otherwise.
pub fn divergence_defect(f: &SpectralField) -> Result<f64> {
    let ext = ExtField::extend_odd_even(f, false)?;
    let hat = ext.forward_full();
    let div = spectral_divergence(&hat);
    let scale = hat.max_abs().max(1e-300);
    Ok(div.max_abs() / scale)
}

/// Divergence defect measured without any extension: spectral tangential
/// derivatives plus 6th-order vertical differences, sup over the interior
/// (a 4-node margin at each wall), relative to the gradient scale.
pub fn interior_divergence_defect(f: &SpectralField) -> Result<f64> {
    let d = f.grid.dim();
    let spec = f.forward_tangential()?;
    let dz = crate::grid::fd::vertical_derivative_acc(&spec, 1, 7);
    let modes = spec.grid.modes();
    let nz = spec.nz();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for p in 0..modes {
        if spec.grid.is_nyquist(p) {
            continue;
        }
        let xi = spec.grid.xi(p);
        for iz in 4..nz.saturating_sub(4) {
            let mut div = dz.at(d - 1, p, iz);
            scale = scale.max(dz.at(d - 1, p, iz).norm());
            for c in 0..d - 1 {
                div += C64::new(0.0, xi[c]) * spec.at(c, p, iz);
                scale = scale.max((C64::new(0.0, xi[c]) * spec.at(c, p, iz)).norm());
            }
            worst = worst.max(div.norm());
        }
    }
    Ok(worst / scale.max(1e-300))
}

/// Spectral divergence of a `d`-component spectral extension.
pub fn spectral_divergence(hat: &ExtField) -> ExtField {
    let d = hat.grid.dim();
    let modes = hat.grid.modes();
    let nzz = 2 * hat.nz;
    let mut div = ExtField::zeros(hat.grid.clone(), hat.nz, hat.x_max, 1);
    div.set_spectral(true);
    for p in 0..modes {
        if hat.grid.is_nyquist(p) {
            continue;
        }
        for m in 0..nzz {
            if hat.is_vertical_nyquist(m) {
                continue;
            }
            let fr = hat.full_frequency(p, m);
            let mut acc = C64::default();
            for c in 0..d {
                let axis_freq = if c < d - 1 { fr[c] } else { fr[2] };
                acc += C64::new(0.0, axis_freq) * hat.values()[hat.idx(c, p, m)];
            }
            let i = div.idx(0, p, m);
            div.values_mut()[i] = acc;
        }
    }
    div
}

impl W1Precomp {
    /// Builds the extension spectrum of `f` (odd tangential components, even
    /// normal component) after checking per-mode solenoidality.
    pub fn new(f: &SpectralField, mu: f64, div_tol: f64) -> Result<Self> {
        f.expect_layout(Layout::PhysicalTangential)?;
        let d = f.grid.dim();
        if f.ncomp() != d {
            return Err(ShsError::InvalidParam(format!("W1 expects a {d}-component field")));
        }
        let defect = interior_divergence_defect(f)?;
        if defect > div_tol {
            return Err(ShsError::NonSolenoidal(defect));
        }
        let ext = ExtField::extend_odd_even(f, false)?;
        Ok(Self { hat: ext.forward_full(), mu })
    }

    /// Skips the solenoidality gate (used by probes on generic data).
    pub fn new_unchecked(f: &SpectralField, mu: f64) -> Result<Self> {
        f.expect_layout(Layout::PhysicalTangential)?;
        let ext = ExtField::extend_odd_even(f, false)?;
        Ok(Self { hat: ext.forward_full(), mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Full-space spectrum of `w_1 = (lambda - mu Delta)^{-1} f^{ext}`.
    pub fn apply_spectral(&self, lambda: C64) -> ExtField {
        let mut hat = self.hat.clone();
        let mu = self.mu;
        hat.apply_multiplier(|fr| {
            let k2 = fr[0] * fr[0] + fr[1] * fr[1] + fr[2] * fr[2];
            1.0 / (lambda + mu * k2)
        });
        hat
    }

    /// Restricted physical solution on the half-space grid.
    pub fn apply(&self, lambda: C64) -> Result<SpectralField> {
        self.apply_spectral(lambda).inverse_full().restrict()
    }
}

/// Tangential stress data of a spectral whole-space velocity field:
/// `s_j = mu (d_d w_j + d_j w_d)`, `j < d`, returned as a `d-1`-component
/// spectral extension (the volumetric `S_3(lambda)` datum feeding the
/// boundary-corrector compensation).
pub fn tangential_stress_spectral(hat: &ExtField, mu: f64) -> ExtField {
    let d = hat.grid.dim();
    let modes = hat.grid.modes();
    let nzz = 2 * hat.nz;
    let mut out = ExtField::zeros(hat.grid.clone(), hat.nz, hat.x_max, d - 1);
    out.set_spectral(true);
    for p in 0..modes {
        if hat.grid.is_nyquist(p) {
            continue;
        }
        let xi = hat.grid.xi(p);
        for m in 0..nzz {
            if hat.is_vertical_nyquist(m) {
                continue;
            }
            let zeta = hat.zeta(m);
            for j in 0..d - 1 {
                let wj = hat.values()[hat.idx(j, p, m)];
                let wd = hat.values()[hat.idx(d - 1, p, m)];
                let s = mu * (C64::new(0.0, zeta) * wj + C64::new(0.0, xi[j]) * wd);
                let i = out.idx(j, p, m);
                out.values_mut()[i] = s;
            }
        }
    }
    out
}

/// Boundary traces (per tangential mode) of the tangential stress of a
/// spectral whole-space field, evaluated exactly from the interpolant.
pub fn tangential_stress_trace(hat: &ExtField, mu: f64) -> Vec<Vec<C64>> {
    let d = hat.grid.dim();
    let modes = hat.grid.modes();
    let mut out = vec![vec![C64::default(); modes]; d - 1];
    for j in 0..d - 1 {
        let dwj = hat.eval_at_z(j, 0.0, 1);
        let wd = hat.eval_at_z(d - 1, 0.0, 0);
        for p in 0..modes {
            let xi = hat.grid.xi(p);
            out[j][p] = mu * (dwj[p] + C64::new(0.0, xi[j]) * wd[p]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{TangentialGrid, VerticalGrid};
    use std::sync::Arc;

    fn grids(n: usize, nz: usize, xmax: f64) -> (Arc<TangentialGrid>, Arc<VerticalGrid>) {
        (
            Arc::new(TangentialGrid::new(1, n, 2.0 * std::f64::consts::PI).unwrap()),
            Arc::new(VerticalGrid::uniform(nz, xmax).unwrap()),
        )
    }

    #[test]
    fn zero_input_gives_zero() {
        let (g, v) = grids(8, 16, 8.0);
        let f = SpectralField::zeros(g, v, 1, Layout::PhysicalTangential);
        let out = whole_space_resolvent(&f, Parity::Odd, C64::new(1.0, 0.5), 1.0).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn single_mode_is_diagonal() {
        // A field equal to one full-space mode pair (even-compatible: zero
        // slope at both walls) maps to mode / (lambda + mu |k|^2).
        let (g, v) = grids(16, 32, 8.0);
        let kx = 2.0;
        let kz = std::f64::consts::PI * 3.0 / 8.0;
        let f = SpectralField::from_fn(g.clone(), v.clone(), 1, |_, x, z| {
            C64::new((kx * x[0]).cos() * (kz * z).cos(), 0.0)
        });
        let lambda = C64::new(0.8, 1.1);
        let mu = 1.3;
        let out = whole_space_resolvent(&f, Parity::Even, lambda, mu).unwrap();
        let expect = 1.0 / (lambda + mu * (kx * kx + kz * kz));
        let mut max_err: f64 = 0.0;
        for p in 0..g.modes() {
            let x = g.point(p)[0];
            for (k, &z) in v.nodes().iter().enumerate() {
                let want = expect * (kx * x).cos() * (kz * z).cos();
                max_err = max_err.max((out.at(0, p, k) - want).norm());
            }
        }
        assert!(max_err < 1e-12, "max err {max_err}");
    }

    #[test]
    fn odd_parity_forces_zero_boundary_values() {
        let (g, v) = grids(16, 128, 8.0);
        let f = SpectralField::from_fn(g, v, 1, |_, x, z| {
            C64::new(x[0].sin() * (-1.5 * (z - 4.0) * (z - 4.0)).exp(), 0.0)
        });
        let out = whole_space_resolvent(&f, Parity::Odd, C64::new(2.0, 0.7), 1.0).unwrap();
        let tr = crate::grid::fd::boundary_trace(&out, 0, 0);
        let scale = out.max_abs();
        let worst = tr.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-9 * scale.max(1e-30), "boundary value {worst}");
    }
}
