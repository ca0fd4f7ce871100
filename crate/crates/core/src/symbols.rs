//! Per-mode symbols of the half-space solution formulas: `A`, `B`,
//! `M_{x_d}`, the Lopatinskii determinant `D_{A,B}`, the `E^{(n)}_{A,B}`
//! family, and the multiplier-class verification probes.

use crate::error::{Result, ShsError};
use crate::C64;
use rayon::prelude::*;
use serde::Serialize;

/// One `(lambda, xi')` evaluation point inside the shifted sector.
#[derive(Debug, Clone, Copy)]
pub struct SymbolPoint {
    pub lambda: C64,
    pub xi: [f64; 2],
    pub mu: f64,
}

impl SymbolPoint {
    pub fn new(lambda: C64, xi: [f64; 2], mu: f64) -> Self {
        Self { lambda, xi, mu }
    }

    /// Membership in `Sigma_eps + gamma_b`.
    pub fn in_sector(&self, eps: f64, gamma_b: f64) -> bool {
        in_sector(self.lambda, eps, gamma_b)
    }

    pub fn a(&self) -> f64 {
        eval_a(self.xi)
    }

    pub fn b(&self) -> C64 {
        eval_b(self.lambda, self.a(), self.mu)
    }
}

pub fn in_sector(lambda: C64, eps: f64, gamma_b: f64) -> bool {
    let z = lambda - gamma_b;
    if z == C64::default() {
        return false;
    }
    z.arg().abs() <= std::f64::consts::PI - eps
}

/// `A = |xi'|`.
pub fn eval_a(xi: [f64; 2]) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}

/// `B = sqrt(lambda / mu + A^2)`, principal branch, `Re B > 0` on the
/// sector.
pub fn eval_b(lambda: C64, a: f64, mu: f64) -> C64 {
    (lambda / mu + a * a).sqrt()
}

/// `phi_1(z) = (e^z - 1) / z` by series for small `|z|`; removable at 0.
pub fn phi1(z: C64) -> C64 {
    if z.norm() < 0.05 {
        // 14 terms bound the truncation far below f64 resolution at |z|<0.05.
        let mut term = C64::new(1.0, 0.0);
        let mut acc = C64::new(1.0, 0.0);
        for k in 2..=14 {
            term = term * z / (k as f64);
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `M_{x_d} = (e^{-B x_d} - e^{-A x_d}) / (B - A)` through the
/// cancellation-free form `-x_d e^{-A x_d} phi_1((A - B) x_d)`.
pub fn eval_m(a: f64, b: C64, x_d: f64) -> C64 {
    let z = (C64::new(a, 0.0) - b) * x_d;
    -x_d * (-a * x_d).exp() * phi1(z)
}

/// Naive two-exponential form of `M`; kept as the negative control for the
/// stable evaluator.
pub fn eval_m_naive(a: f64, b: C64, x_d: f64) -> C64 {
    ((-b * x_d).exp() - (-a * x_d).exp()) / (b - C64::new(a, 0.0))
}

/// `d^n/dx^n M_{x_d} = (-1)^n (E^{(n)} e^{-B x_d} + A^n M_{x_d})`.
pub fn eval_m_derivative(a: f64, b: C64, x_d: f64, n: u32) -> C64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * (eval_e(a, b, n) * (-b * x_d).exp() + a.powi(n as i32) * eval_m(a, b, x_d))
}

/// Lopatinskii determinant `D_{A,B} = B^3 + A B^2 + 3 A^2 B - A^3`.
pub fn eval_d(a: f64, b: C64) -> C64 {
    b * b * b + a * b * b + 3.0 * a * a * b - a * a * a
}

/// `E^{(0)} = 0`, `E^{(n)} = (B^n - A^n)/(B - A)` through the factored form
/// `sum_{k=0}^{n-1} A^k B^{n-1-k}`.
pub fn eval_e(a: f64, b: C64, n: u32) -> C64 {
    let mut acc = C64::default();
    for k in 0..n {
        acc += a.powi(k as i32) * b.powu(n - 1 - k);
    }
    acc
}

/// Evaluated symbol pack at one point.
#[derive(Debug, Clone)]
pub struct SymbolPack {
    pub a: f64,
    pub b: C64,
    pub d_ab: C64,
    pub e: [C64; 5],
    pub mu: f64,
    pub lambda: C64,
    /// `|D| < 1e-14 (|lambda|^{1/2} + A)^3`; a verification probe that must
    /// never fire inside the sector.
    pub singular: bool,
}

impl SymbolPack {
    pub fn eval(point: &SymbolPoint) -> Result<Self> {
        let a = point.a();
        let b = point.b();
        if b.re <= 0.0 {
            return Err(ShsError::OutOfSector {
                lambda: point.lambda,
                eps: f64::NAN,
                gamma_b: f64::NAN,
            });
        }
        let d_ab = eval_d(a, b);
        let scale = (point.lambda.norm().sqrt() + a).powi(3);
        let singular = d_ab.norm() < 1e-14 * scale;
        let e = [
            eval_e(a, b, 0),
            eval_e(a, b, 1),
            eval_e(a, b, 2),
            eval_e(a, b, 3),
            eval_e(a, b, 4),
        ];
        Ok(Self { a, b, d_ab, e, mu: point.mu, lambda: point.lambda, singular })
    }

    pub fn m(&self, x_d: f64) -> C64 {
        eval_m(self.a, self.b, x_d)
    }
}

// ---------------------------------------------------------------------------
// Multiplier-class probes
// ---------------------------------------------------------------------------

/// Symbols whose membership in the classes `M_{-n}` is probed numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymbolId {
    BInv,
    DInv,
    XiOverA,
    SqrtLambdaBInv,
    ABInv,
    /// `i xi_1 B^{-3}` from the Volevich rewriting (class `M_{-2}`).
    KernelXiB3,
    /// `(A + B) B D^{-1}` from the pressure kernel (class `M_{-1}`).
    KernelPressure,
    /// `(3B - A) i xi_1 B^{-1} D^{-1}` (class `M_{-2}`).
    KernelStress,
}

impl SymbolId {
    pub fn all() -> &'static [SymbolId] {
        &[
            SymbolId::BInv,
            SymbolId::DInv,
            SymbolId::XiOverA,
            SymbolId::SqrtLambdaBInv,
            SymbolId::ABInv,
            SymbolId::KernelXiB3,
            SymbolId::KernelPressure,
            SymbolId::KernelStress,
        ]
    }

    /// Expected decay order `n` (the class `M_{-n}`).
    pub fn order(self) -> i32 {
        match self {
            SymbolId::BInv => 1,
            SymbolId::DInv => 3,
            SymbolId::XiOverA => 0,
            SymbolId::SqrtLambdaBInv => 0,
            SymbolId::ABInv => 0,
            SymbolId::KernelXiB3 => 2,
            SymbolId::KernelPressure => 1,
            SymbolId::KernelStress => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SymbolId::BInv => "B^-1",
            SymbolId::DInv => "D^-1",
            SymbolId::XiOverA => "xi_j/A",
            SymbolId::SqrtLambdaBInv => "lambda^1/2 B^-1",
            SymbolId::ABInv => "A B^-1",
            SymbolId::KernelXiB3 => "i xi_1 B^-3",
            SymbolId::KernelPressure => "(A+B) B D^-1",
            SymbolId::KernelStress => "(3B-A) i xi_1 B^-1 D^-1",
        }
    }

    pub fn eval(self, lambda: C64, xi: [f64; 2], mu: f64) -> C64 {
        let a = eval_a(xi);
        let b = eval_b(lambda, a, mu);
        match self {
            SymbolId::BInv => 1.0 / b,
            SymbolId::DInv => 1.0 / eval_d(a, b),
            SymbolId::XiOverA => C64::new(xi[0] / a, 0.0),
            SymbolId::SqrtLambdaBInv => lambda.sqrt() / b,
            SymbolId::ABInv => a / b,
            SymbolId::KernelXiB3 => C64::new(0.0, xi[0]) / (b * b * b),
            SymbolId::KernelPressure => (a + b) * b / eval_d(a, b),
            SymbolId::KernelStress => {
                (3.0 * b - a) * C64::new(0.0, xi[0]) / (b * eval_d(a, b))
            }
        }
    }
}

/// Sampling plan for the sector probes: 16 log-spaced `|lambda|` per decade
/// over `[gamma_b sin(eps), 1e6]`, 8 arguments across the sector, 32
/// log-spaced `A`.
#[derive(Debug, Clone, Copy)]
pub struct SampleSpec {
    pub eps: f64,
    pub gamma_b: f64,
    pub mu: f64,
    pub lambda_per_decade: usize,
    pub args: usize,
    pub a_count: usize,
    pub lambda_max: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            eps: std::f64::consts::FRAC_PI_4,
            gamma_b: 1.0,
            mu: 1.0,
            lambda_per_decade: 16,
            args: 8,
            a_count: 32,
            lambda_max: 1e6,
        }
    }
}

impl SampleSpec {
    pub fn lambdas(&self) -> Vec<C64> {
        let r_min = (self.gamma_b * self.eps.sin()).max(1e-3);
        let decades = (self.lambda_max / r_min).log10();
        let count = (decades * self.lambda_per_decade as f64).ceil() as usize;
        let arg_max = std::f64::consts::PI - self.eps;
        let mut out = Vec::new();
        for i in 0..count {
            let r = r_min * (self.lambda_max / r_min).powf(i as f64 / (count - 1) as f64);
            for j in 0..self.args {
                let th = -arg_max + 2.0 * arg_max * j as f64 / (self.args - 1) as f64;
                out.push(self.gamma_b + r * C64::new(0.0, th).exp());
            }
        }
        out
    }

    pub fn a_values(&self) -> Vec<f64> {
        (0..self.a_count)
            .map(|i| 1e-3 * (1e6f64).powf(i as f64 / (self.a_count - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplierReport {
    pub symbol: String,
    pub order: i32,
    /// Sup of `|d^a m| (|lambda|^{1/2} + A)^n A^{|a|}` over the sample.
    pub constant: f64,
    /// Same for the `d/d lambda` variant with exponent `n + 2`.
    pub constant_dlambda: f64,
    /// Constant at half the sample density over the same ranges.
    pub refinement_ratio: f64,
    pub pass: bool,
}

/// Estimates the `M_{-n}` membership constants of a symbol by sampled
/// Richardson-extrapolated central differences in `xi'` and `lambda`.
pub fn check_multiplier_class(id: SymbolId, spec: &SampleSpec) -> MultiplierReport {
    let full = multiplier_constant(id, spec, 1);
    let coarse = multiplier_constant(id, spec, 2);
    let ratio = if full.0 > 0.0 { coarse.0 / full.0 } else { 1.0 };
    let finite = full.0.is_finite() && full.1.is_finite();
    MultiplierReport {
        symbol: id.name().to_string(),
        order: id.order(),
        constant: full.0,
        constant_dlambda: full.1,
        refinement_ratio: ratio,
        pass: finite && (ratio - 1.0).abs() < 0.10,
    }
}

fn multiplier_constant(id: SymbolId, spec: &SampleSpec, stride: usize) -> (f64, f64) {
    let n = id.order();
    let lambdas: Vec<C64> = spec.lambdas().into_iter().step_by(stride).collect();
    let a_values: Vec<f64> = spec.a_values().into_iter().step_by(stride).collect();
    let mu = spec.mu;

    let per_lambda: Vec<(f64, f64)> = lambdas
        .par_iter()
        .map(|&lam| {
            let mut sup = 0.0f64;
            let mut sup_dl = 0.0f64;
            for &a in &a_values {
                let xi = [a, 0.0];
                for alpha in 0..=2u32 {
                    let d = xi_derivative(|x| id.eval(lam, [x, xi[1]], mu), xi[0], alpha);
                    let weight = (lam.norm().sqrt() + a).powi(n) * a.powi(alpha as i32);
                    sup = sup.max(d.norm() * weight);

                    let dl = xi_derivative(
                        |x| lambda_derivative(|l| id.eval(l, [x, xi[1]], mu), lam),
                        xi[0],
                        alpha,
                    );
                    let weight_dl = (lam.norm().sqrt() + a).powi(n + 2) * a.powi(alpha as i32);
                    sup_dl = sup_dl.max(dl.norm() * weight_dl);
                }
            }
            (sup, sup_dl)
        })
        .collect();
    per_lambda
        .into_iter()
        .fold((0.0, 0.0), |acc, v| (acc.0.max(v.0), acc.1.max(v.1)))
}

/// Richardson-extrapolated central difference of order `alpha` in one real
/// variable, relative step 1e-5.
pub fn xi_derivative(f: impl Fn(f64) -> C64, x: f64, alpha: u32) -> C64 {
    if alpha == 0 {
        return f(x);
    }
    let h = 1e-5 * x.abs().max(1e-8);
    let d = |h: f64| -> C64 {
        match alpha {
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            _ => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        }
    };
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

/// Richardson-extrapolated central difference in `lambda` along the real
/// direction (the symbol is holomorphic, so any direction agrees).
pub fn lambda_derivative(f: impl Fn(C64) -> C64, lambda: C64) -> C64 {
    let h = 1e-5 * lambda.norm().max(1e-8);
    let d = |h: f64| (f(lambda + h) - f(lambda - h)) / (2.0 * h);
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorConstantReport {
    /// Extremes of `|lambda + mu |xi|^2| / (|lambda| + |xi|^2)`.
    pub c1_consistent: (f64, f64),
    /// Extremes of the printed variant with `|lambda|^{1/2}` on the outside.
    pub c1_printed: (f64, f64),
    pub refinement_ratio: f64,
}

/// Measures the sector equivalence constant of the heat symbol.
pub fn sector_equivalence_constant(eps: f64, mu: f64, samples: usize) -> SectorConstantReport {
    let measure = |count: usize| -> (f64, f64, f64, f64) {
        let mut lo_c = f64::INFINITY;
        let mut hi_c = 0.0f64;
        let mut lo_p = f64::INFINITY;
        let mut hi_p = 0.0f64;
        let arg_max = std::f64::consts::PI - eps;
        for i in 0..count {
            let r = 1e-4 * (1e10f64).powf(i as f64 / (count - 1) as f64);
            for j in 0..count {
                let th = -arg_max + 2.0 * arg_max * j as f64 / (count - 1) as f64;
                let lam = r * C64::new(0.0, th).exp();
                for k in 0..count {
                    let xi2 = 1e-4 * (1e10f64).powf(k as f64 / (count - 1) as f64);
                    let num = (lam + mu * xi2).norm();
                    let den_c = lam.norm() + xi2;
                    let den_p = lam.norm().sqrt() + xi2;
                    lo_c = lo_c.min(num / den_c);
                    hi_c = hi_c.max(num / den_c);
                    lo_p = lo_p.min(num / den_p);
                    hi_p = hi_p.max(num / den_p);
                }
            }
        }
        (lo_c, hi_c, lo_p, hi_p)
    };
    let fine = measure(samples);
    let coarse = measure(samples / 2);
    let ratio = if fine.0 > 0.0 { coarse.0 / fine.0 } else { 1.0 };
    SectorConstantReport {
        c1_consistent: (fine.0, fine.1),
        c1_printed: (fine.2, fine.3),
        refinement_ratio: ratio,
    }
}
