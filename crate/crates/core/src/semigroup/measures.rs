//! Decay-rate fits and L1-in-time integrals of the generalized semigroup.

use super::{ContourSpec, SemigroupEvaluator};
use crate::error::Result;
use crate::grid::dyadic::besov_norm_halfspace;
use crate::grid::BesovIndex;
use crate::resolvent::{gradient_all, probe, PhiData};
use serde::Serialize;

/// Besov norm of all second derivatives of a physical field.
pub fn grad2_norm(u: &crate::grid::field::SpectralField, index: &BesovIndex) -> Result<f64> {
    let spec = u.forward_tangential()?;
    let mut total = 0.0;
    for g in gradient_all(&spec)? {
        let gs = g.forward_tangential()?;
        for gg in gradient_all(&gs)? {
            total += besov_norm_halfspace(&gg, index)?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// Slope of `log ||grad^2 T(t) Phi|| - gamma_b t` against `log t`.
    pub slope: f64,
    pub r_squared: f64,
    pub t_nodes: Vec<f64>,
    pub norms: Vec<f64>,
    pub flagged: bool,
}

/// Fits the decay exponent of `||grad^2 T(t) Phi||_{B^s}` over
/// `t in [t_lo, t_hi]` (log-spaced); the caller chooses the normalisation
/// through the field it supplies.
pub fn decay_rate_measure(
    phi: &PhiData,
    mu: f64,
    spec: &ContourSpec,
    index: &BesovIndex,
    t_lo: f64,
    t_hi: f64,
    count: usize,
) -> Result<DecayReport> {
    if phi.max_abs() == 0.0 {
        return Ok(DecayReport {
            slope: 0.0,
            r_squared: 0.0,
            t_nodes: Vec::new(),
            norms: Vec::new(),
            flagged: false,
        });
    }
    let ev = SemigroupEvaluator::new(phi, mu, *spec)?;
    let times: Vec<f64> = (0..count)
        .map(|k| t_lo * (t_hi / t_lo).powf(k as f64 / (count - 1) as f64))
        .collect();
    let values = ev.apply_many(&times)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut norms = Vec::new();
    for v in &values {
        let n = grad2_norm(&v.u, index)?;
        norms.push(n);
        if n > 0.0 {
            xs.push(v.t.ln());
            ys.push(n.ln() - spec.gamma_b * v.t);
        }
    }
    let slope = probe::least_squares_slope(&xs, &ys);
    let r2 = probe::r_squared(&xs, &ys);
    Ok(DecayReport { slope, r_squared: r2, t_nodes: times, norms, flagged: r2 < 0.95 })
}

#[derive(Debug, Clone, Serialize)]
pub struct L1TimeReport {
    /// `int_0^T e^{-gamma_b t} ||grad^2 T(t) Phi|| dt`.
    pub integral: f64,
    /// Integral divided by `||Phi||_B`.
    pub ratio: f64,
    /// Coarse-grid value over fine-grid value.
    pub refinement_ratio: f64,
    pub flagged: bool,
}

/// Quadrature of the weighted time integral on the graded grid
/// `t_k = T (k / K)^4` (trapezoid between graded nodes), with a
/// half-density refinement check.
pub fn l1_time_integral(
    phi: &PhiData,
    mu: f64,
    spec: &ContourSpec,
    index: &BesovIndex,
    t_max: f64,
    count: usize,
) -> Result<L1TimeReport> {
    if phi.max_abs() == 0.0 {
        return Ok(L1TimeReport { integral: 0.0, ratio: 0.0, refinement_ratio: 1.0, flagged: false });
    }
    let ev = SemigroupEvaluator::new(phi, mu, *spec)?;
    let grid = crate::grid::TimeGrid::graded(t_max, count, spec.gamma_b)?;
    let values = ev.apply_many(grid.nodes())?;
    let norms: Vec<f64> = values
        .iter()
        .map(|v| grad2_norm(&v.u, index).map(|n| n * (-spec.gamma_b * v.t).exp()))
        .collect::<Result<_>>()?;
    let fine: f64 = grid.weights().iter().zip(&norms).map(|(w, n)| w * n).sum();
    // Coarse value from every other node of the same evaluations.
    let mut coarse = 0.0;
    let nodes = grid.nodes();
    let mut prev_t = 0.0;
    let mut k = 0;
    while k < nodes.len() {
        let next_t = if k + 2 < nodes.len() { nodes[k + 1] } else { t_max };
        coarse += norms[k] * 0.5 * (next_t - prev_t);
        prev_t = if k + 2 < nodes.len() { nodes[k] } else { t_max };
        k += 2;
    }
    let norm_phi = phi.besov_norm(index)?.max(1e-300);
    let ratio = fine / norm_phi;
    let refinement = if fine > 0.0 { coarse / fine } else { 1.0 };
    Ok(L1TimeReport {
        integral: fine,
        ratio,
        refinement_ratio: refinement,
        flagged: (refinement - 1.0).abs() > 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::field::SpectralField;
    use crate::grid::{TangentialGrid, VerticalGrid};
    use crate::C64;
    use std::sync::Arc;

    fn solenoidal_phi(n: usize, nz: usize, xmax: f64, seed: u64) -> PhiData {
        use rand::{Rng, SeedableRng};
        let g = Arc::new(TangentialGrid::new(1, n, 2.0 * std::f64::consts::PI).unwrap());
        let v = Arc::new(VerticalGrid::uniform(nz, xmax).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c = xmax / 2.0;
        let coeff: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() - 0.5).collect();
        let f = SpectralField::from_fn(g, v, 2, |comp, x, z| {
            let psi_z = -3.0 * (z - c) * (-1.5 * (z - c) * (z - c)).exp();
            let psi = (-1.5 * (z - c) * (z - c)).exp();
            let sx = coeff[0] * x[0].sin() + coeff[1] * (2.0 * x[0]).cos();
            let dsx = coeff[0] * x[0].cos() - 2.0 * coeff[1] * (2.0 * x[0]).sin();
            match comp {
                0 => C64::new(sx * psi_z, 0.0),
                _ => C64::new(-dsx * psi, 0.0),
            }
        });
        PhiData::zero_boundary(f)
    }

    #[test]
    fn zero_field_reports_empty_fit() {
        let phi = solenoidal_phi(8, 32, 8.0, 1).scaled(C64::default());
        let spec = ContourSpec::new(std::f64::consts::FRAC_PI_4, 1.0).unwrap();
        let idx = BesovIndex::new(2.0, 1.0, 0.0, 0, 5, false).unwrap();
        let rep = decay_rate_measure(&phi, 1.0, &spec, &idx, 1e-2, 1.0, 6).unwrap();
        assert!(rep.t_nodes.is_empty() && rep.norms.is_empty());
    }

    #[test]
    fn doubling_phi_doubles_norms_keeps_slope() {
        let phi = solenoidal_phi(8, 64, 8.0, 2);
        let spec = ContourSpec::new(std::f64::consts::FRAC_PI_4, 1.0).unwrap();
        let idx = BesovIndex::new(2.0, 1.0, 0.0, 0, 5, false).unwrap();
        let r1 = decay_rate_measure(&phi, 1.0, &spec, &idx, 5e-2, 0.5, 5).unwrap();
        let r2 =
            decay_rate_measure(&phi.scaled(C64::new(2.0, 0.0)), 1.0, &spec, &idx, 5e-2, 0.5, 5)
                .unwrap();
        for (a, b) in r1.norms.iter().zip(&r2.norms) {
            assert!((2.0 * a - b).abs() < 1e-8 * b.max(1e-9), "{a} {b}");
        }
        assert!((r1.slope - r2.slope).abs() < 1e-6);
    }

    #[test]
    fn l1_integral_is_linear_and_converged() {
        let phi = solenoidal_phi(8, 64, 8.0, 3);
        let spec = ContourSpec::new(std::f64::consts::FRAC_PI_4, 1.0).unwrap();
        let idx = BesovIndex::new(2.0, 1.0, 0.0, 0, 5, false).unwrap();
        let rep = l1_time_integral(&phi, 1.0, &spec, &idx, 5.0, 24).unwrap();
        assert!(rep.integral > 0.0);
        let rep2 =
            l1_time_integral(&phi.scaled(C64::new(2.0, 0.0)), 1.0, &spec, &idx, 5.0, 24).unwrap();
        assert!(
            (rep2.integral - 2.0 * rep.integral).abs() < 1e-10 * rep2.integral,
            "linearity"
        );
        let zero = l1_time_integral(&phi.scaled(C64::default()), 1.0, &spec, &idx, 5.0, 8).unwrap();
        assert_eq!(zero.integral, 0.0);
    }
}
