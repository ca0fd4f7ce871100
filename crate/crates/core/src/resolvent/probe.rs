//! Sampled operator-norm probes for the composed resolvent family.

use super::{PhiData, SOperator};
use crate::error::Result;
use crate::grid::dyadic::besov_norm_halfspace;
use crate::grid::BesovIndex;
use crate::C64;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct EstimateProbeReport {
    /// Sup over samples of `||(lambda, lambda^{1/2} grad, grad^2) S|| / ||Phi||`.
    pub uniform_constant: f64,
    /// Sup of the `|lambda|^{sigma/2}`-weighted ratio against `B^{s+sigma}`.
    pub weighted_constant: f64,
    /// Sup of `|lambda|^{1-sigma/2} || . d_lambda S .. || / ||Phi||_{B^{s-sigma}}`.
    pub dlambda_constant: f64,
    /// Refinement stability: constant at half the sample count over the
    /// same range, divided by the full-sample constant.
    pub refinement_ratio: f64,
    /// Least-squares slope of `log ||grad^2 S(lambda) Phi||` vs `log |lambda|`
    /// along the ray `arg = pi - eps`.
    pub decay_slope: f64,
}

/// Norm of `(lambda u, lambda^{1/2} grad u, grad^2 u)` in the Besov index.
fn graded_norm(
    op: &SOperator,
    lambda: C64,
    index: &BesovIndex,
) -> Result<(f64, f64)> {
    let (u_spec, _q) = op.apply_spectral(lambda)?;
    let u = u_spec.inverse_tangential()?;
    let grads = super::gradient_all(&u_spec)?;
    let mut total = lambda.norm() * besov_norm_halfspace(&u, index)?;
    let mut grad2 = 0.0;
    for g in &grads {
        total += lambda.norm().sqrt() * besov_norm_halfspace(g, index)?;
        let g_spec = g.forward_tangential()?;
        for gg in super::gradient_all(&g_spec)? {
            let n = besov_norm_halfspace(&gg, index)?;
            total += n;
            grad2 += n;
        }
    }
    Ok((total, grad2))
}

/// Measures the Theorem-style estimate constants over log-spaced sector
/// samples along the rays `arg(lambda - gamma_b) = +-(pi - eps)` and the
/// positive real axis.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_estimate_probe(
    phi: &PhiData,
    mu: f64,
    eps: f64,
    gamma_b: f64,
    index: &BesovIndex,
    sigma: f64,
    lambda_count: usize,
    lambda_max: f64,
) -> Result<EstimateProbeReport> {
    let op = SOperator::new(phi, mu)?;
    let norm_phi = phi.besov_norm(index)?.max(1e-300);
    let idx_plus = index.with_s(index.s + sigma);
    let idx_minus = index.with_s(index.s - sigma);
    let norm_phi_plus = phi.besov_norm(&idx_plus)?.max(1e-300);
    let norm_phi_minus = phi.besov_norm(&idx_minus)?.max(1e-300);

    let lambdas = |count: usize| -> Vec<C64> {
        let r0 = (gamma_b * eps.sin()).max(0.3);
        let mut out = Vec::new();
        for arg in [std::f64::consts::PI - eps, 0.0, -(std::f64::consts::PI - eps)] {
            for i in 0..count {
                let r = r0 * (lambda_max / r0).powf(i as f64 / (count - 1) as f64);
                out.push(gamma_b + r * C64::new(0.0, arg).exp());
            }
        }
        out
    };

    let measure = |set: &[C64]| -> Result<(f64, f64, f64)> {
        let mut uni = 0.0f64;
        let mut wei = 0.0f64;
        let mut dl = 0.0f64;
        for &lam in set {
            let (total, _g2) = graded_norm(&op, lam, index)?;
            uni = uni.max(total / norm_phi);
            wei = wei.max(total * lam.norm().powf(sigma / 2.0) / norm_phi_plus);
            // Central difference in lambda, Richardson-extrapolated.
            let h = 1e-3 * lam.norm();
            let g = |hh: f64| -> Result<f64> {
                let (np, _) = graded_norm_diff(&op, lam, hh, index)?;
                Ok(np)
            };
            let d1 = g(h)?;
            let d2 = g(h / 2.0)?;
            let der = (4.0 * d2 - d1) / 3.0;
            dl = dl.max(der * lam.norm().powf(1.0 - sigma / 2.0) / norm_phi_minus);
        }
        Ok((uni, wei, dl))
    };

    let full_set = lambdas(lambda_count);
    let half_set = lambdas(lambda_count / 2);
    let full = measure(&full_set)?;
    let half = measure(&half_set)?;

    // Decay slope of ||grad^2 S(lambda) Phi|| along the upper ray.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..lambda_count {
        let r0 = (gamma_b * eps.sin()).max(0.3);
        let r = r0 * (lambda_max / r0).powf(i as f64 / (lambda_count - 1) as f64);
        let lam = gamma_b + r * C64::new(0.0, std::f64::consts::PI - eps).exp();
        let (_, g2) = graded_norm(&op, lam, &idx_plus)?;
        if g2 > 0.0 {
            xs.push(lam.norm().ln());
            ys.push(g2.ln());
        }
    }
    let decay_slope = least_squares_slope(&xs, &ys);

    Ok(EstimateProbeReport {
        uniform_constant: full.0,
        weighted_constant: full.1,
        dlambda_constant: full.2,
        refinement_ratio: if full.0 > 0.0 { half.0 / full.0 } else { 1.0 },
        decay_slope,
    })
}

/// Norm of the centred difference quotient
/// `(lambda, lambda^{1/2} grad, grad^2)[S(lam+h) - S(lam-h)] / 2h`.
fn graded_norm_diff(
    op: &SOperator,
    lambda: C64,
    h: f64,
    index: &BesovIndex,
) -> Result<(f64, f64)> {
    let (up, _) = op.apply_spectral(lambda + h)?;
    let (um, _) = op.apply_spectral(lambda - h)?;
    let diff_spec = up.sub(&um).scaled(C64::new(1.0 / (2.0 * h), 0.0));
    let u = diff_spec.inverse_tangential()?;
    let grads = super::gradient_all(&diff_spec)?;
    let mut total = lambda.norm() * besov_norm_halfspace(&u, index)?;
    let mut grad2 = 0.0;
    for g in &grads {
        total += lambda.norm().sqrt() * besov_norm_halfspace(g, index)?;
        let g_spec = g.forward_tangential()?;
        for gg in super::gradient_all(&g_spec)? {
            let n = besov_norm_halfspace(&gg, index)?;
            total += n;
            grad2 += n;
        }
    }
    Ok((total, grad2))
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Coefficient of determination of the least-squares line.
pub fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let slope = least_squares_slope(xs, ys);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let icept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let f = slope * x + icept;
        ss_res += (y - f) * (y - f);
        ss_tot += (y - my) * (y - my);
    }
    1.0 - ss_res / ss_tot.max(1e-300)
}
