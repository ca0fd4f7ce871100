//! Reflection extensions of half-space fields to the whole space and the
//! full-space FFT machinery built on the extended grid.
//!
//! The extended vertical grid doubles the cell-centred half-space grid to
//! `z_j = -X + (j + 1/2) h`, `j = 0, ..., 2 nz - 1`, and is periodised with
//! period `2 X`. Every reflection image `-j x_d` of a cell-centred node is
//! again a node, so the degree-2 extension is evaluated exactly.

use super::field::{Layout, SpectralField};
use super::{fft, TangentialGrid};
use crate::error::{Result, ShsError};
use crate::C64;
use std::sync::Arc;

/// Parity of a component under reflection across `x_d = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
    /// Degree-2 reflection `sum_j a_j f(x', -j x_d)` over the odd dilations
    /// `j in {1, 3, 5}` with `(a_1, a_3, a_5) = (3, -3, 1)`, the unique
    /// solution of `sum_j (-j)^k a_j = 1`, `k = 0, 1, 2`. Odd dilations map
    /// the cell-centred grid onto itself, so the extension is exact on grid
    /// nodes and reproduces polynomials of degree at most 2 across the
    /// boundary.
    Reflect2,
}

pub const REFLECT2_DILATION: [usize; 3] = [1, 3, 5];
pub const REFLECT2_COEFF: [f64; 3] = [3.0, -3.0, 1.0];

/// Field on the reflected whole-space grid.
#[derive(Debug, Clone)]
pub struct ExtField {
    pub grid: Arc<TangentialGrid>,
    /// Half-space vertical count; the extended grid has `2 * nz` nodes.
    pub nz: usize,
    pub h: f64,
    pub x_max: f64,
    ncomp: usize,
    tangential_spectral: bool,
    vertical_spectral: bool,
    values: Vec<C64>,
}

impl ExtField {
    pub fn zeros(grid: Arc<TangentialGrid>, nz: usize, x_max: f64, ncomp: usize) -> Self {
        let h = x_max / nz as f64;
        let values = vec![C64::default(); ncomp * grid.modes() * 2 * nz];
        Self { grid, nz, h, x_max, ncomp, tangential_spectral: false, vertical_spectral: false, values }
    }

    /// Marks the layout of freshly written spectral data.
    pub fn set_spectral(&mut self, spectral: bool) {
        self.tangential_spectral = spectral;
        self.vertical_spectral = spectral;
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn is_spectral(&self) -> bool {
        self.tangential_spectral && self.vertical_spectral
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    #[inline]
    pub fn idx(&self, comp: usize, mode: usize, j: usize) -> usize {
        (comp * self.grid.modes() + mode) * (2 * self.nz) + j
    }

    /// Physical vertical coordinate of extended index `j`.
    pub fn z(&self, j: usize) -> f64 {
        -self.x_max + (j as f64 + 0.5) * self.h
    }

    /// Signed vertical frequency index of extended FFT index `m`.
    pub fn zeta_index(&self, m: usize) -> i64 {
        let n = 2 * self.nz as i64;
        let m = m as i64;
        if m <= n / 2 - 1 {
            m
        } else {
            m - n
        }
    }

    /// Vertical frequency of extended FFT index `m`.
    pub fn zeta(&self, m: usize) -> f64 {
        std::f64::consts::PI * self.zeta_index(m) as f64 / self.x_max
    }

    pub fn is_vertical_nyquist(&self, m: usize) -> bool {
        self.zeta_index(m) == -(self.nz as i64)
    }

    /// Builds the extension of a physical half-space field, one parity per
    /// component.
    pub fn extend(field: &SpectralField, parity: &[Parity]) -> Result<Self> {
        field.expect_layout(Layout::PhysicalTangential)?;
        if !field.vgrid.is_uniform() {
            return Err(ShsError::GridMismatch(
                "reflection extension requires the uniform vertical rule".into(),
            ));
        }
        if parity.len() != field.ncomp() {
            return Err(ShsError::InvalidParam("one parity per component required".into()));
        }
        let nz = field.nz();
        let mut out = Self::zeros(
            field.grid.clone(),
            nz,
            field.vgrid.x_max(),
            field.ncomp(),
        );
        let modes = field.grid.modes();
        for c in 0..field.ncomp() {
            for p in 0..modes {
                let line = field.line(c, p);
                for k in 0..nz {
                    // z > 0 half: node k sits at extended index nz + k.
                    let i_plus = out.idx(c, p, nz + k);
                    out.values[i_plus] = line[k];
                    // z < 0 half: extended index nz - 1 - k mirrors node k.
                    let v = match parity[c] {
                        Parity::Odd => -line[k],
                        Parity::Even => line[k],
                        Parity::Reflect2 => {
                            // The image j (k + 1/2) h of a cell-centred node
                            // is node j k + (j - 1)/2 for odd j; beyond the
                            // grid the (decaying) field is taken as zero.
                            let sample = |node: usize| -> C64 {
                                if node < nz {
                                    line[node]
                                } else {
                                    C64::default()
                                }
                            };
                            let mut acc = C64::default();
                            for (&j, &a) in REFLECT2_DILATION.iter().zip(&REFLECT2_COEFF) {
                                acc += a * sample(j * k + (j - 1) / 2);
                            }
                            acc
                        }
                    };
                    let i_minus = out.idx(c, p, nz - 1 - k);
                    out.values[i_minus] = v;
                }
            }
        }
        Ok(out)
    }

    /// Odd/even pattern of the operator `e[f]`: components `1..d-1` odd and
    /// component `d` even, or the dual pattern (even tangential, odd normal)
    /// used by the divergence compensation.
    pub fn extend_odd_even(field: &SpectralField, dual: bool) -> Result<Self> {
        let d = field.grid.dim();
        if field.ncomp() != d {
            return Err(ShsError::InvalidParam(format!(
                "odd/even extension expects a {d}-component field"
            )));
        }
        let mut parity = vec![if dual { Parity::Even } else { Parity::Odd }; d - 1];
        parity.push(if dual { Parity::Odd } else { Parity::Even });
        Self::extend(field, &parity)
    }

    /// Restricts the physical extended field back to the half-space grid.
    pub fn restrict(&self) -> Result<SpectralField> {
        if self.tangential_spectral || self.vertical_spectral {
            return Err(ShsError::LayoutMismatch { expected: "physical", got: "spectral" });
        }
        let vg = Arc::new(super::VerticalGrid::uniform(self.nz, self.x_max)?);
        let mut out = SpectralField::zeros(
            self.grid.clone(),
            vg,
            self.ncomp,
            Layout::PhysicalTangential,
        );
        let modes = self.grid.modes();
        for c in 0..self.ncomp {
            for p in 0..modes {
                for k in 0..self.nz {
                    *out.at_mut(c, p, k) = self.values[self.idx(c, p, self.nz + k)];
                }
            }
        }
        Ok(out)
    }

    fn vertical_pass(&mut self, fwd: bool) {
        let lines = self.ncomp * self.grid.modes();
        let len = 2 * self.nz;
        fft::transform_strided(
            &mut self.values,
            (0..lines).map(|l| l * len),
            len,
            1,
            fwd,
        );
    }

    fn tangential_pass(&mut self, fwd: bool) {
        let modes = self.grid.modes();
        let nzz = 2 * self.nz;
        let n = self.grid.n();
        match self.grid.dim_tangential() {
            1 => {
                for c in 0..self.ncomp {
                    for j in 0..nzz {
                        let base = c * modes * nzz + j;
                        fft::transform_strided(
                            &mut self.values,
                            std::iter::once(base),
                            n,
                            nzz,
                            fwd,
                        );
                    }
                }
            }
            _ => {
                for c in 0..self.ncomp {
                    let bases: Vec<usize> = (0..n)
                        .flat_map(|k0| (0..nzz).map(move |j| (k0 * n) * nzz + j))
                        .map(|o| c * modes * nzz + o)
                        .collect();
                    fft::transform_strided(&mut self.values, bases.into_iter(), n, nzz, fwd);
                    let bases: Vec<usize> = (0..n)
                        .flat_map(|k1| (0..nzz).map(move |j| k1 * nzz + j))
                        .map(|o| c * modes * nzz + o)
                        .collect();
                    fft::transform_strided(&mut self.values, bases.into_iter(), n, n * nzz, fwd);
                }
            }
        }
    }

    /// Full-space forward FFT (tangential axes and periodised vertical).
    pub fn forward_full(&self) -> Self {
        let mut out = self.clone();
        if !out.tangential_spectral {
            out.tangential_pass(true);
            out.tangential_spectral = true;
        }
        if !out.vertical_spectral {
            out.vertical_pass(true);
            out.vertical_spectral = true;
        }
        out
    }

    /// From full spectral layout: inverse-transforms the vertical axis only
    /// and restricts to the half grid, leaving the tangential axes spectral.
    pub fn restrict_spectral_tangential(&self) -> Result<SpectralField> {
        assert!(self.is_spectral());
        let mut half = self.clone();
        half.vertical_pass(false);
        half.vertical_spectral = false;
        let vg = Arc::new(super::VerticalGrid::uniform(self.nz, self.x_max)?);
        let mut out = SpectralField::zeros(
            self.grid.clone(),
            vg,
            self.ncomp,
            Layout::SpectralTangential,
        );
        let modes = self.grid.modes();
        for c in 0..self.ncomp {
            for p in 0..modes {
                for k in 0..self.nz {
                    *out.at_mut(c, p, k) = half.values[half.idx(c, p, self.nz + k)];
                }
            }
        }
        Ok(out)
    }

    /// Full-space inverse FFT.
    pub fn inverse_full(&self) -> Self {
        let mut out = self.clone();
        if out.vertical_spectral {
            out.vertical_pass(false);
            out.vertical_spectral = false;
        }
        if out.tangential_spectral {
            out.tangential_pass(false);
            out.tangential_spectral = false;
        }
        out
    }

    /// Full frequency vector `(xi_1 [, xi_2], zeta)` of a spectral sample.
    #[inline]
    pub fn full_frequency(&self, mode: usize, m: usize) -> [f64; 3] {
        let xi = self.grid.xi(mode);
        [xi[0], xi[1], self.zeta(m)]
    }

    /// `|xi|^2` of a spectral sample.
    #[inline]
    pub fn full_freq_sq(&self, mode: usize, m: usize) -> f64 {
        let f = self.full_frequency(mode, m);
        f[0] * f[0] + f[1] * f[1] + f[2] * f[2]
    }

    /// Applies a scalar multiplier `m(xi, zeta)` to every spectral sample of
    /// every component. Nyquist samples (any axis) are annihilated.
    pub fn apply_multiplier(&mut self, mut mult: impl FnMut([f64; 3]) -> C64) {
        assert!(self.is_spectral(), "apply_multiplier requires full spectral layout");
        let modes = self.grid.modes();
        let nzz = 2 * self.nz;
        for c in 0..self.ncomp {
            for p in 0..modes {
                let nyq_t = self.grid.is_nyquist(p);
                for m in 0..nzz {
                    let i = (c * modes + p) * nzz + m;
                    if nyq_t || self.is_vertical_nyquist(m) {
                        self.values[i] = C64::default();
                    } else {
                        let fr = self.full_frequency(p, m);
                        let factor = mult(fr);
                        self.values[i] *= factor;
                    }
                }
            }
        }
    }

    /// Spectral derivative along axis (`0..d-2` tangential, `d-1` vertical).
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = self.clone();
        out.apply_multiplier(|f| C64::new(0.0, f[axis_map(self.grid.dim_tangential(), axis)]));
        out
    }

    /// Evaluates the trigonometric interpolant of one component at `z` for
    /// every tangential mode (spectral layout in; tangential-spectral out).
    ///
    /// `dz_order` applies `(i zeta)^k` before evaluation.
    pub fn eval_at_z(&self, comp: usize, z: f64, dz_order: u32) -> Vec<C64> {
        assert!(self.is_spectral());
        let modes = self.grid.modes();
        let nzz = 2 * self.nz;
        let z0 = self.z(0);
        let scale = 1.0 / nzz as f64;
        let mut out = vec![C64::default(); modes];
        for p in 0..modes {
            if self.grid.is_nyquist(p) {
                continue;
            }
            let mut acc = C64::default();
            for m in 0..nzz {
                if self.is_vertical_nyquist(m) {
                    continue;
                }
                let zeta = self.zeta(m);
                let phase = C64::new(0.0, zeta * (z - z0)).exp();
                let der = C64::new(0.0, zeta).powu(dz_order);
                acc += self.values[self.idx(comp, p, m)] * der * phase;
            }
            out[p] = acc * scale;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
        out
    }

    pub fn scale(&mut self, c: C64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// `L_q` norm over the extended box, components aggregated pointwise in
    /// the Euclidean norm (physical layout).
    pub fn lq_norm(&self, q: f64) -> f64 {
        assert!(!self.tangential_spectral && !self.vertical_spectral);
        let modes = self.grid.modes();
        let nzz = 2 * self.nz;
        let w = self.grid.spacing().powi(self.grid.dim_tangential() as i32) * self.h;
        let mut acc = 0.0;
        let mut sup: f64 = 0.0;
        for p in 0..modes {
            for j in 0..nzz {
                let mut mag2 = 0.0;
                for c in 0..self.ncomp {
                    mag2 += self.values[self.idx(c, p, j)].norm_sqr();
                }
                let mag = mag2.sqrt();
                if q.is_infinite() {
                    sup = sup.max(mag);
                } else {
                    acc += mag.powf(q) * w;
                }
            }
        }
        if q.is_infinite() {
            sup
        } else {
            acc.powf(1.0 / q)
        }
    }
}

#[inline]
fn axis_map(dim_t: usize, axis: usize) -> usize {
    // Frequencies are stored as [xi_1, xi_2, zeta]; for d = 2 the vertical
    // axis (axis index 1) must pick slot 2.
    if axis < dim_t {
        axis
    } else {
        2
    }
}

/// Heat-resolvent division `1 / (lambda + mu |xi|^2)` applied to the
/// extension of `f` with the given parity, restricted to the half-space.
pub fn whole_space_resolvent(
    f: &SpectralField,
    parity: Parity,
    lambda: C64,
    mu: f64,
) -> Result<SpectralField> {
    let ext = ExtField::extend(f, &vec![parity; f.ncomp()])?;
    let mut hat = ext.forward_full();
    hat.apply_multiplier(|fr| {
        let k2 = fr[0] * fr[0] + fr[1] * fr[1] + fr[2] * fr[2];
        1.0 / (lambda + mu * k2)
    });
    hat.inverse_full().restrict()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VerticalGrid;

    fn grids(n: usize, nz: usize) -> (Arc<TangentialGrid>, Arc<VerticalGrid>) {
        (
            Arc::new(TangentialGrid::new(1, n, 2.0 * std::f64::consts::PI).unwrap()),
            Arc::new(VerticalGrid::uniform(nz, 4.0).unwrap()),
        )
    }

    #[test]
    fn reflect2_reproduces_low_degree_polynomials() {
        let (g, v) = grids(8, 32);
        for pow in 0..3u32 {
            let f = SpectralField::from_fn(g.clone(), v.clone(), 1, |_, _, z| {
                C64::new(z.powi(pow as i32), 0.0)
            });
            let ext = ExtField::extend(&f, &[Parity::Reflect2]).unwrap();
            // Check x_d^pow continues across the boundary wherever all three
            // reflection samples stay inside the grid (5k + 2 < nz).
            for k in 0..6 {
                let j = ext.nz - 1 - k;
                let z = ext.z(j);
                let got = ext.values()[ext.idx(0, 0, j)];
                assert!(
                    (got.re - z.powi(pow as i32)).abs() < 1e-12,
                    "pow {pow} k {k} got {} want {}",
                    got.re,
                    z.powi(pow as i32)
                );
            }
        }
    }

    #[test]
    fn odd_even_patterns() {
        let (g, v) = grids(8, 16);
        let f = SpectralField::from_fn(g.clone(), v.clone(), 2, |c, x, z| {
            C64::new((x[0].sin() + 1.3) * (z + 0.2 * c as f64), 0.0)
        });
        let ext = ExtField::extend_odd_even(&f, false).unwrap();
        for p in 0..g.modes() {
            for k in 0..16 {
                let plus = ext.values()[ext.idx(0, p, 16 + k)];
                let minus = ext.values()[ext.idx(0, p, 15 - k)];
                assert!((plus + minus).norm() < 1e-14, "tangential component odd");
                let plus = ext.values()[ext.idx(1, p, 16 + k)];
                let minus = ext.values()[ext.idx(1, p, 15 - k)];
                assert!((plus - minus).norm() < 1e-14, "normal component even");
            }
        }
    }

    #[test]
    fn full_fft_round_trip_and_derivative() {
        let (g, v) = grids(16, 32);
        // Band-limited profile with machine-zero trace at both walls, so
        // every parity extension is smooth.
        let f = SpectralField::from_fn(g, v, 1, |_, x, z| {
            C64::new((2.0 * x[0]).cos() * (-(z - 2.0) * (z - 2.0) * 8.0).exp(), 0.0)
        });
        let ext = ExtField::extend(&f, &[Parity::Odd]).unwrap();
        let back = ext.forward_full().inverse_full();
        assert!(ext.sub(&back).max_abs() < 1e-12);

        // Tangential spectral derivative of cos(2x) is -2 sin(2x).
        let der = ext.forward_full().derivative(0).inverse_full();
        let g2 = der.grid.clone();
        for p in 0..4 {
            let x = g2.point(p)[0];
            let j = ext.nz + 14;
            let z = ext.z(j);
            let want = -2.0 * (2.0 * x).sin() * (-(z - 2.0) * (z - 2.0) * 8.0).exp();
            let got = der.values()[der.idx(0, p, j)].re;
            assert!((got - want).abs() < 1e-9, "got {got} want {want}");
        }
    }

    #[test]
    fn divergence_of_e_extension_is_odd_extension_of_divergence() {
        // div(e[f]) equals the odd extension of div f; checked spectrally
        // against an analytic divergence on sample fields.
        let g = Arc::new(TangentialGrid::new(1, 16, 2.0 * std::f64::consts::PI).unwrap());
        let v = Arc::new(VerticalGrid::uniform(64, 8.0).unwrap());
        // f = (sin x * s(z), cos x * c(z)); s odd and c even about 0, both
        // negligible at the outer wall, so e[f] is globally smooth.
        // div f = cos x * s(z) + cos x * c'(z).
        let s = |z: f64| (-z * z / 2.0).exp() * z;
        let c = |z: f64| (-z * z / 2.0).exp();
        let cp = |z: f64| -z * (-z * z / 2.0).exp();
        let f = SpectralField::from_fn(g.clone(), v.clone(), 2, |comp, x, z| match comp {
            0 => C64::new(x[0].sin() * s(z), 0.0),
            _ => C64::new(x[0].cos() * c(z), 0.0),
        });
        let ext = ExtField::extend_odd_even(&f, false).unwrap();
        let hat = ext.forward_full();
        // Spectral divergence.
        let mut div = ExtField::zeros(hat.grid.clone(), hat.nz, hat.x_max, 1);
        div.set_spectral(true);
        let modes = hat.grid.modes();
        for p in 0..modes {
            for m in 0..2 * hat.nz {
                let fr = hat.full_frequency(p, m);
                let v0 = hat.values()[hat.idx(0, p, m)];
                let v1 = hat.values()[hat.idx(1, p, m)];
                div.values_mut()[(p) * (2 * hat.nz) + m] =
                    C64::new(0.0, fr[0]) * v0 + C64::new(0.0, fr[2]) * v1;
            }
        }
        let div_phys = div.inverse_full();
        // Odd symmetry of the divergence field.
        let mut max_err: f64 = 0.0;
        for p in 0..modes {
            for k in 0..hat.nz {
                let plus = div_phys.values()[div_phys.idx(0, p, hat.nz + k)];
                let minus = div_phys.values()[div_phys.idx(0, p, hat.nz - 1 - k)];
                max_err = max_err.max((plus + minus).norm());
            }
        }
        assert!(max_err < 1e-10, "odd symmetry violated by {max_err}");
        // And it matches the analytic divergence on the upper half.
        let mut max_err: f64 = 0.0;
        for p in 0..modes {
            let x = g.point(p)[0];
            for k in 4..hat.nz - 4 {
                let z = v.nodes()[k];
                let want = x.cos() * s(z) + x.cos() * cp(z);
                let got = div_phys.values()[div_phys.idx(0, p, hat.nz + k)].re;
                max_err = max_err.max((got - want).abs());
            }
        }
        assert!(max_err < 1e-6, "analytic divergence mismatch {max_err}");
    }
}
