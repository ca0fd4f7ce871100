//! Time grids as series of fields, the fractional time seminorm and the
//! half-order derivative multiplier.

use super::field::SpectralField;
use super::TimeGrid;
use crate::error::{Result, ShsError};
use crate::C64;

/// A field-valued time series on a uniform grid.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub tgrid: TimeGrid,
    pub fields: Vec<SpectralField>,
}

impl TimeSeries {
    pub fn new(tgrid: TimeGrid, fields: Vec<SpectralField>) -> Result<Self> {
        if tgrid.len() != fields.len() {
            return Err(ShsError::GridMismatch("time grid / series length mismatch".into()));
        }
        Ok(Self { tgrid, fields })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `int ||f(t)||_X dt` with the grid weights and a caller-chosen spatial
    /// norm.
    pub fn l1_norm(&self, norm_x: &mut dyn FnMut(&SpectralField) -> f64) -> f64 {
        self.tgrid
            .weights()
            .iter()
            .zip(&self.fields)
            .map(|(w, f)| w * norm_x(f))
            .sum()
    }

    /// Catmull–Rom evaluation at arbitrary `t`; zero outside the window
    /// (the series is treated as compactly supported). Reproduces cubics on
    /// interior cells, so constants interpolate exactly.
    pub fn eval(&self, t: f64) -> SpectralField {
        let t0 = self.tgrid.nodes()[0];
        let dt = self.tgrid.spacing();
        let n = self.len();
        let zero = || self.fields[0].scaled(C64::default());
        let s = (t - t0) / dt;
        if s < -1.0 || s > n as f64 {
            return zero();
        }
        let cell = s.floor();
        let frac = s - cell;
        let cell = cell as i64;
        let sample = |k: i64| -> Option<&SpectralField> {
            if k < 0 || k >= n as i64 {
                None
            } else {
                Some(&self.fields[k as usize])
            }
        };
        // Catmull-Rom weights for samples at cell-1 .. cell+2.
        let u = frac;
        let w = [
            0.5 * (-u + 2.0 * u * u - u * u * u),
            0.5 * (2.0 - 5.0 * u * u + 3.0 * u * u * u),
            0.5 * (u + 4.0 * u * u - 3.0 * u * u * u),
            0.5 * (-u * u + u * u * u),
        ];
        let mut out = zero();
        for (i, wi) in w.iter().enumerate() {
            if let Some(f) = sample(cell - 1 + i as i64) {
                out.axpy(C64::new(*wi, 0.0), f);
            }
        }
        out
    }

    /// 4th-order centred time derivative at node `k` (one-sided stencils at
    /// the ends).
    pub fn ddt(&self, k: usize) -> SpectralField {
        let dt = self.tgrid.spacing();
        let n = self.len();
        let mut out = self.fields[0].scaled(C64::default());
        let stencil: &[(i64, f64)] = if k >= 2 && k + 2 < n {
            &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)]
        } else if k < 2 {
            &[
                (0, -25.0 / 12.0),
                (1, 48.0 / 12.0),
                (2, -36.0 / 12.0),
                (3, 16.0 / 12.0),
                (4, -3.0 / 12.0),
            ]
        } else {
            &[
                (0, 25.0 / 12.0),
                (-1, -48.0 / 12.0),
                (-2, 36.0 / 12.0),
                (-3, -16.0 / 12.0),
                (-4, 3.0 / 12.0),
            ]
        };
        for &(off, c) in stencil {
            let idx = (k as i64 + off).clamp(0, n as i64 - 1) as usize;
            out.axpy(C64::new(c / dt, 0.0), &self.fields[idx]);
        }
        out
    }
}

/// Extension mode for a series defined on `(0, T)` or `R_+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendMode {
    /// `E_(T)`: zero for `t <= 0`, `f` on `(0, T)`, `f(2T - t)` on
    /// `[T, 2T)`, zero afterwards.
    ReflectT,
    /// `E_0`: zero past.
    ZeroPast,
    /// `E_1`: even past, `f(-t)` for `t < 0`.
    EvenPast,
}

/// Extends a series sampled on the uniform nodes `0, dt, ..., T` to the
/// window `[-T, 3T]` on the same spacing.
pub fn time_extend(series: &TimeSeries, mode: ExtendMode) -> Result<TimeSeries> {
    let m = series.len() - 1;
    let t_end = series.tgrid.nodes()[m];
    let gamma_b = series.tgrid.gamma_b;
    let zero = series.fields[0].scaled(C64::default());
    let count = 4 * m + 1;
    let tgrid = TimeGrid::uniform(-t_end, 3.0 * t_end, count, gamma_b)?;
    let mut fields = Vec::with_capacity(count);
    for j in 0..count {
        let k = j as i64 - m as i64; // signed index relative to t = 0
        let f = match mode {
            ExtendMode::ReflectT => {
                if k < 0 || k > 2 * m as i64 {
                    zero.clone()
                } else if k <= m as i64 {
                    series.fields[k as usize].clone()
                } else {
                    series.fields[(2 * m as i64 - k) as usize].clone()
                }
            }
            ExtendMode::ZeroPast => {
                if !(0..=m as i64).contains(&k) {
                    zero.clone()
                } else {
                    series.fields[k as usize].clone()
                }
            }
            ExtendMode::EvenPast => {
                let ka = k.unsigned_abs() as usize;
                if ka <= m {
                    series.fields[ka].clone()
                } else {
                    zero.clone()
                }
            }
        };
        fields.push(f);
    }
    TimeSeries::new(tgrid, fields)
}

/// Output of [`lambda_half`].
pub struct LambdaHalfOutput {
    pub series: TimeSeries,
    /// `gamma_b = 0` annihilates the time mean through the `tau = 0` factor.
    pub mean_annihilated: bool,
}

/// Applies the Fourier–Laplace multiplier `(gamma_b + i tau)^{1/2}`
/// (principal branch) in time.
///
/// The series window, zero-padded `pad_factor`-fold, is treated as one
/// period; data must be compactly supported in the window. With
/// `pad_factor = 1` the action is exactly diagonal on the window harmonics.
pub fn lambda_half(series: &TimeSeries, gamma_b: f64, pad_factor: usize) -> Result<LambdaHalfOutput> {
    let nt = series.len();
    if nt < 4 {
        return Err(ShsError::InvalidParam("lambda_half needs >= 4 time nodes".into()));
    }
    if pad_factor == 0 {
        return Err(ShsError::InvalidParam("pad_factor must be >= 1".into()));
    }
    let dt = series.tgrid.spacing();
    let pad = pad_factor * nt;
    let period = pad as f64 * dt;
    let dof = series.fields[0].values().len();

    let mut mean_mag = 0.0f64;
    let mut max_mag = 0.0f64;
    let mut out_fields: Vec<SpectralField> =
        series.fields.iter().map(|f| f.scaled(C64::default())).collect();

    let mut line = vec![C64::default(); pad];
    for i in 0..dof {
        for (k, v) in line.iter_mut().enumerate() {
            *v = if k < nt { series.fields[k].values()[i] } else { C64::default() };
        }
        super::fft::forward(&mut line);
        mean_mag = mean_mag.max(line[0].norm() / pad as f64);
        for (m, v) in line.iter_mut().enumerate() {
            max_mag = max_mag.max(v.norm() / pad as f64);
            let signed = if m <= pad / 2 - 1 { m as i64 } else { m as i64 - pad as i64 };
            let tau = 2.0 * std::f64::consts::PI * signed as f64 / period;
            *v *= C64::new(gamma_b, tau).sqrt();
        }
        super::fft::inverse(&mut line);
        for (k, f) in out_fields.iter_mut().enumerate() {
            f.values_mut()[i] = line[k];
        }
    }
    let mean_annihilated = gamma_b == 0.0 && mean_mag > 1e-12 * max_mag.max(1e-300);
    Ok(LambdaHalfOutput {
        series: TimeSeries::new(series.tgrid.clone(), out_fields)?,
        mean_annihilated,
    })
}

/// Report of the fractional seminorm quadrature.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SeminormReport {
    pub value: f64,
    /// Numerical part over `|h| <= h_cut`.
    pub interior: f64,
    /// Analytic disjoint-support tail beyond `h_cut`.
    pub tail: f64,
    /// Coarse/fine ratio of the interior quadrature.
    pub refinement_ratio: f64,
    pub converged: bool,
}

/// Slobodeckij seminorm
/// `int_R |h|^{-3/2} || f(. + h) - f(.) ||_{L_1(t, X)} dh`
/// (exponent `theta + 1 = 3/2` for `theta = 1/2`).
///
/// The substitution `h = u^2` regularises the weight. `t_core` restricts the
/// inner `L_1`-in-time integral (used by the interior-shift diagnostics);
/// `h_max` truncates the shift range. Without restrictions the
/// disjoint-support tail `8 ||f||_{L_1(X)} / sqrt(h_cut)` is added in closed
/// form.
pub fn time_half_seminorm(
    series: &TimeSeries,
    norm_x: &mut dyn FnMut(&SpectralField) -> f64,
    t_core: Option<(f64, f64)>,
    h_max: Option<f64>,
    u_nodes: usize,
) -> Result<SeminormReport> {
    if u_nodes < 4 {
        return Err(ShsError::InvalidParam("u_nodes must be >= 4".into()));
    }
    let window = series.tgrid.nodes()[series.len() - 1] - series.tgrid.nodes()[0];
    let h_cut = h_max.unwrap_or(window).min(window);
    let coarse = seminorm_interior(series, norm_x, t_core, h_cut, u_nodes / 2)?;
    let fine = seminorm_interior(series, norm_x, t_core, h_cut, u_nodes)?;
    let tail = if t_core.is_some() || h_max.is_some() {
        0.0
    } else {
        let l1 = series.l1_norm(norm_x);
        8.0 * l1 / h_cut.sqrt()
    };
    let ratio = if fine != 0.0 { coarse / fine } else { 1.0 };
    Ok(SeminormReport {
        value: fine + tail,
        interior: fine,
        tail,
        refinement_ratio: ratio,
        converged: (ratio - 1.0).abs() < 0.05,
    })
}

fn seminorm_interior(
    series: &TimeSeries,
    norm_x: &mut dyn FnMut(&SpectralField) -> f64,
    t_core: Option<(f64, f64)>,
    h_cut: f64,
    u_nodes: usize,
) -> Result<f64> {
    let t0 = series.tgrid.nodes()[0];
    let t_end = series.tgrid.nodes()[series.len() - 1];
    let dt = series.tgrid.spacing();

    // || f(. + h) - f ||_{L_1} is even in h; compute h > 0 and double.
    let mut diff_l1 = |h: f64| -> f64 {
        let (lo, hi) = match t_core {
            Some((a, b)) => (a, b),
            None => (t0 - h - dt, t_end + dt),
        };
        let steps = ((hi - lo) / dt).ceil() as usize;
        let fine = (hi - lo) / steps as f64;
        let mut acc = 0.0;
        for k in 0..steps {
            let t = lo + (k as f64 + 0.5) * fine;
            let d = series.eval(t + h).sub(&series.eval(t));
            acc += fine * norm_x(&d);
        }
        acc
    };

    let u_max = h_cut.sqrt();
    let du = u_max / u_nodes as f64;
    let mut total = 0.0;
    for iu in 0..u_nodes {
        let u = (iu as f64 + 0.5) * du;
        let h = u * u;
        // Factor 2 for both signs of h; weight |h|^{-3/2} dh = 2 du / u^2.
        total += 2.0 * diff_l1(h) * 2.0 / (u * u) * du;
    }
    Ok(total)
}
