//! Littlewood–Paley dyadic blocks and computable Besov norms.
//!
//! The partition of unity is the mollified plateau
//! `chi(r) = 1` for `r <= 1`, `chi(r) = S(2 - r)` for `1 < r < 2`, `0`
//! beyond, with the standard smooth step
//! `S(x) = eta(x) / (eta(x) + eta(1 - x))`, `eta(x) = exp(-1/x)` for
//! `x > 0`. The annulus bump is `phi(r) = chi(r) - chi(2 r)`, supported in
//! `[1/2, 2]`, with `sum_j phi(2^{-j} r) = 1` for `r > 0` and the low-pass
//! `phi_0 = chi`. The formulas are fixed so results reproduce bit for bit.

use super::field::{Layout, SpectralField};
use super::fullspace::{ExtField, Parity};
use super::BesovIndex;
use crate::error::{Result, ShsError};
use crate::C64;

fn eta(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    let a = eta(x);
    let b = eta(1.0 - x);
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Mollified plateau `chi`: 1 on `r <= 1`, 0 on `r >= 2`.
pub fn plateau(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        smooth_step(2.0 - r)
    }
}

/// Annulus bump `phi`, supported in `[1/2, 2]`.
pub fn annulus(r: f64) -> f64 {
    plateau(r) - plateau(2.0 * r)
}

/// Multiplier value of the dyadic block `Delta_j` at radius `r = |xi|`.
pub fn block_multiplier(j: i32, homogeneous: bool, r: f64) -> f64 {
    if !homogeneous && j == 0 {
        plateau(r)
    } else {
        annulus(r / 2f64.powi(j))
    }
}

/// Applies `Delta_j` to a full-space field given in spectral layout.
///
/// Returns a zero field (flagged) when the block lies entirely outside the
/// representable frequency range.
pub fn dyadic_block_spectral(hat: &ExtField, j: i32, homogeneous: bool) -> (ExtField, bool) {
    let max_r = max_resolved_radius(hat);
    let out_of_range = 2f64.powi(j - 1) > max_r;
    let mut out = hat.clone();
    if out_of_range {
        out.apply_multiplier(|_| C64::default());
        return (out, true);
    }
    out.apply_multiplier(|fr| {
        let r = (fr[0] * fr[0] + fr[1] * fr[1] + fr[2] * fr[2]).sqrt();
        C64::new(block_multiplier(j, homogeneous, r), 0.0)
    });
    (out, false)
}

/// Largest `|xi|` on the lattice (corner radius; Nyquist excluded).
pub fn max_resolved_radius(ext: &ExtField) -> f64 {
    let t = ext.grid.max_frequency();
    let v = std::f64::consts::PI * (ext.nz as f64 - 1.0) / ext.x_max;
    (t * t + v * v).sqrt()
}

/// Default dyadic range for a grid: the blocks up to `j_max` cover every
/// lattice frequency, so the partition sums to one on the whole grid.
pub fn default_block_range(ext: &ExtField, homogeneous: bool) -> (i32, i32) {
    let j_max = max_resolved_radius(ext).log2().ceil() as i32;
    let j_min = if homogeneous { j_max - 14 } else { 0 };
    (j_min, j_max)
}

/// Besov norm of a full-space (extended) field:
/// `|| 2^{j s} ||Delta_j f||_{L_q} ||_{l^r}` over `j_min ..= j_max`.
pub fn besov_norm_ext(ext: &ExtField, index: &BesovIndex) -> f64 {
    let hat = ext.forward_full();
    let mut terms = Vec::new();
    for j in index.j_min..=index.j_max {
        let (block, _) = dyadic_block_spectral(&hat, j, index.homogeneous);
        let lq = block.inverse_full().lq_norm(index.q);
        terms.push(2f64.powf(index.s * j as f64) * lq);
    }
    sequence_norm(&terms, index.r)
}

/// Besov norm of a half-space field through the fixed degree-2 reflection
/// extension (equivalent-norm surrogate for the restriction norm).
pub fn besov_norm_halfspace(field: &SpectralField, index: &BesovIndex) -> Result<f64> {
    field.expect_layout(Layout::PhysicalTangential)?;
    index.check_halfspace_range()?;
    let ext = ExtField::extend(field, &vec![Parity::Reflect2; field.ncomp()])?;
    Ok(besov_norm_ext(&ext, index))
}

/// `l^r` norm of the block sequence; `r = inf` takes the sup.
pub fn sequence_norm(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        terms.iter().cloned().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Sum of all blocks over the range; equals the input on the band covered by
/// the partition.
pub fn reconstruct(hat: &ExtField, j_min: i32, j_max: i32, homogeneous: bool) -> ExtField {
    let mut acc: Option<ExtField> = None;
    for j in j_min..=j_max {
        let (block, _) = dyadic_block_spectral(hat, j, homogeneous);
        match &mut acc {
            None => acc = Some(block),
            Some(a) => {
                for (x, y) in a.values_mut().iter_mut().zip(block.values()) {
                    *x += y;
                }
            }
        }
    }
    acc.unwrap()
}
