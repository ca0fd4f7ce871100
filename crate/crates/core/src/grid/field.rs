//! The fundamental state: a complex vector field sampled on the
//! (tangential x vertical) grid, in physical- or spectral-tangential layout.

use super::{fft, TangentialGrid, VerticalGrid};
use crate::error::{Result, ShsError};
use crate::C64;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    PhysicalTangential,
    SpectralTangential,
}

impl Layout {
    pub fn name(self) -> &'static str {
        match self {
            Layout::PhysicalTangential => "physical",
            Layout::SpectralTangential => "spectral",
        }
    }
}

/// Complex field with `ncomp` components on `modes() x nz` samples.
///
/// Storage is row-major `(component, tangential index, vertical node)` with
/// the vertical node fastest.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: Arc<TangentialGrid>,
    pub vgrid: Arc<VerticalGrid>,
    ncomp: usize,
    layout: Layout,
    values: Vec<C64>,
}

impl SpectralField {
    pub fn zeros(
        grid: Arc<TangentialGrid>,
        vgrid: Arc<VerticalGrid>,
        ncomp: usize,
        layout: Layout,
    ) -> Self {
        let len = ncomp * grid.modes() * vgrid.len();
        Self { grid, vgrid, ncomp, layout, values: vec![C64::default(); len] }
    }

    /// Builds a physical-layout field from a closure of `(component, x', z)`.
    pub fn from_fn(
        grid: Arc<TangentialGrid>,
        vgrid: Arc<VerticalGrid>,
        ncomp: usize,
        mut f: impl FnMut(usize, [f64; 2], f64) -> C64,
    ) -> Self {
        let mut out = Self::zeros(grid, vgrid, ncomp, Layout::PhysicalTangential);
        let modes = out.grid.modes();
        let nz = out.vgrid.len();
        for c in 0..ncomp {
            for p in 0..modes {
                let x = out.grid.point(p);
                for iz in 0..nz {
                    let z = out.vgrid.nodes()[iz];
                    let v = f(c, x, z);
                    out.values[(c * modes + p) * nz + iz] = v;
                }
            }
        }
        out
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn nz(&self) -> usize {
        self.vgrid.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    #[inline]
    pub fn idx(&self, comp: usize, mode: usize, iz: usize) -> usize {
        (comp * self.grid.modes() + mode) * self.vgrid.len() + iz
    }

    #[inline]
    pub fn at(&self, comp: usize, mode: usize, iz: usize) -> C64 {
        self.values[self.idx(comp, mode, iz)]
    }

    #[inline]
    pub fn at_mut(&mut self, comp: usize, mode: usize, iz: usize) -> &mut C64 {
        let i = self.idx(comp, mode, iz);
        &mut self.values[i]
    }

    /// Immutable view of one `(component, mode)` vertical line.
    pub fn line(&self, comp: usize, mode: usize) -> &[C64] {
        let nz = self.vgrid.len();
        let base = (comp * self.grid.modes() + mode) * nz;
        &self.values[base..base + nz]
    }

    pub fn line_mut(&mut self, comp: usize, mode: usize) -> &mut [C64] {
        let nz = self.vgrid.len();
        let base = (comp * self.grid.modes() + mode) * nz;
        &mut self.values[base..base + nz]
    }

    pub fn expect_layout(&self, layout: Layout) -> Result<()> {
        if self.layout != layout {
            return Err(ShsError::LayoutMismatch {
                expected: layout.name(),
                got: self.layout.name(),
            });
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.vgrid != other.vgrid || self.ncomp != other.ncomp {
            return Err(ShsError::GridMismatch("field shapes differ".into()));
        }
        Ok(())
    }

    fn tangential_pass(&mut self, fwd: bool) {
        let modes = self.grid.modes();
        let nz = self.vgrid.len();
        let n = self.grid.n();
        match self.grid.dim_tangential() {
            1 => {
                for c in 0..self.ncomp {
                    for iz in 0..nz {
                        let base = c * modes * nz + iz;
                        fft::transform_strided(
                            &mut self.values,
                            std::iter::once(base),
                            n,
                            nz,
                            fwd,
                        );
                    }
                }
            }
            _ => {
                for c in 0..self.ncomp {
                    // Axis 1 (fast tangential index).
                    let bases: Vec<usize> = (0..n)
                        .flat_map(|k0| (0..nz).map(move |iz| (k0 * n) * nz + iz))
                        .map(|o| c * modes * nz + o)
                        .collect();
                    fft::transform_strided(&mut self.values, bases.into_iter(), n, nz, fwd);
                    // Axis 0 (slow tangential index, stride n * nz).
                    let bases: Vec<usize> = (0..n)
                        .flat_map(|k1| (0..nz).map(move |iz| k1 * nz + iz))
                        .map(|o| c * modes * nz + o)
                        .collect();
                    fft::transform_strided(&mut self.values, bases.into_iter(), n, n * nz, fwd);
                }
            }
        }
    }

    /// Discrete Fourier transform per tangential axis per vertical node
    /// (unnormalised forward convention).
    pub fn forward_tangential(&self) -> Result<Self> {
        self.expect_layout(Layout::PhysicalTangential)?;
        let mut out = self.clone();
        out.tangential_pass(true);
        out.layout = Layout::SpectralTangential;
        Ok(out)
    }

    /// Inverse of [`forward_tangential`]; `inverse . forward = id` to 1e-12.
    pub fn inverse_tangential(&self) -> Result<Self> {
        self.expect_layout(Layout::SpectralTangential)?;
        let mut out = self.clone();
        out.tangential_pass(false);
        out.layout = Layout::PhysicalTangential;
        Ok(out)
    }

    // ---- arithmetic helpers -------------------------------------------------

    pub fn scale(&mut self, c: C64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn axpy(&mut self, c: C64, other: &Self) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    /// Extracts a subset of components as a new field.
    pub fn components(&self, comps: &[usize]) -> Self {
        let modes = self.grid.modes();
        let nz = self.vgrid.len();
        let mut out = Self::zeros(self.grid.clone(), self.vgrid.clone(), comps.len(), self.layout);
        for (ci, &c) in comps.iter().enumerate() {
            let src = c * modes * nz;
            let dst = ci * modes * nz;
            out.values[dst..dst + modes * nz].copy_from_slice(&self.values[src..src + modes * nz]);
        }
        out
    }

    /// Stacks fields with identical grids into one multi-component field.
    pub fn stack(parts: &[&Self]) -> Self {
        let first = parts[0];
        let ncomp = parts.iter().map(|p| p.ncomp).sum();
        let mut out = Self::zeros(first.grid.clone(), first.vgrid.clone(), ncomp, first.layout);
        let mut off = 0;
        for p in parts {
            debug_assert_eq!(p.layout, first.layout);
            out.values[off..off + p.values.len()].copy_from_slice(&p.values);
            off += p.values.len();
        }
        out
    }

    /// Max modulus over all samples.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete `L_2` norm with grid quadrature weights over the half-space
    /// box (all components aggregated).
    pub fn l2_norm(&self) -> f64 {
        let hx = self.grid.spacing().powi(self.grid.dim_tangential() as i32);
        let modes = self.grid.modes();
        let nz = self.vgrid.len();
        let mut acc = 0.0;
        for c in 0..self.ncomp {
            for p in 0..modes {
                for iz in 0..nz {
                    let w = self.vgrid.weights()[iz] * hx;
                    acc += self.values[(c * modes + p) * nz + iz].norm_sqr() * w;
                }
            }
        }
        acc.sqrt()
    }

    /// Largest imaginary part relative to the max modulus; small for fields
    /// that represent real data in physical layout.
    pub fn imag_fraction(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / m
    }

    /// Unweighted bilinear pairing `sum f * g` with grid quadrature weights
    /// (no complex conjugation).
    pub fn bilinear_pairing(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        let hx = self.grid.spacing().powi(self.grid.dim_tangential() as i32);
        let modes = self.grid.modes();
        let nz = self.vgrid.len();
        let mut acc = C64::default();
        for c in 0..self.ncomp {
            for p in 0..modes {
                for iz in 0..nz {
                    let w = self.vgrid.weights()[iz] * hx;
                    let i = (c * modes + p) * nz + iz;
                    acc += self.values[i] * other.values[i] * w;
                }
            }
        }
        acc
    }

    /// Zeroes every Nyquist tangential mode (spectral layout).
    pub fn kill_nyquist(&mut self) {
        debug_assert_eq!(self.layout, Layout::SpectralTangential);
        let modes = self.grid.modes();
        let nz = self.vgrid.len();
        for c in 0..self.ncomp {
            for p in 0..modes {
                if self.grid.is_nyquist(p) {
                    for iz in 0..nz {
                        self.values[(c * modes + p) * nz + iz] = C64::default();
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn grids(d: usize, n: usize, nz: usize) -> (Arc<TangentialGrid>, Arc<VerticalGrid>) {
        (
            Arc::new(TangentialGrid::new(d - 1, n, 2.0 * std::f64::consts::PI).unwrap()),
            Arc::new(VerticalGrid::uniform(nz, 8.0).unwrap()),
        )
    }

    #[test]
    fn constant_field_transforms_to_dc_mode() {
        for d in [2usize, 3] {
            let (g, v) = grids(d, 8, 4);
            let c = C64::new(1.7, 0.0);
            let f = SpectralField::from_fn(g.clone(), v, 1, |_, _, _| c);
            let fh = f.forward_tangential().unwrap();
            let modes = g.modes();
            for p in 0..modes {
                for iz in 0..4 {
                    let expect = if p == 0 { c * modes as f64 } else { C64::default() };
                    assert!((fh.at(0, p, iz) - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let (g, v) = grids(2, 8, 4);
        let f = SpectralField::zeros(g, v, 2, Layout::PhysicalTangential);
        let fh = f.forward_tangential().unwrap();
        assert_eq!(fh.max_abs(), 0.0);
    }

    #[test]
    fn round_trip_is_identity() {
        for d in [2usize, 3] {
            let (g, v) = grids(d, 16, 8);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            let f = SpectralField::from_fn(g, v, 2, |_, _, _| {
                C64::new(rng.gen::<f64>() - 0.5, 0.0)
            });
            let back = f.forward_tangential().unwrap().inverse_tangential().unwrap();
            let err = f.sub(&back).max_abs();
            assert!(err < 1e-12, "round trip error {err}");
            assert!(back.imag_fraction() < 1e-12);
        }
    }

    #[test]
    fn layout_mismatch_rejected() {
        let (g, v) = grids(2, 8, 4);
        let f = SpectralField::zeros(g, v, 1, Layout::SpectralTangential);
        assert!(f.forward_tangential().is_err());
    }
}
