//! Grids, tangential Fourier transforms, dyadic blocks, Besov norms and
//! time-fractional operators.

pub mod dyadic;
pub mod fd;
pub mod field;
pub mod fft;
pub mod fullspace;
pub mod snapshot;
pub mod timeops;

use crate::error::{Result, ShsError};

/// Uniform periodic grid in the `d - 1` tangential directions.
///
/// The frequency set per axis is `xi = (2*pi/L) * m` with
/// `m = -N/2+1, ..., N/2-1`; the Nyquist index `-N/2` is carried by the FFT
/// storage but annihilated by every spectral operator so that the resolved
/// set is closed under negation and contains zero exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialGrid {
    dim_tangential: usize,
    n: usize,
    period: f64,
}

impl TangentialGrid {
    pub fn new(dim_tangential: usize, n: usize, period: f64) -> Result<Self> {
        if !(1..=2).contains(&dim_tangential) {
            return Err(ShsError::InvalidParam(format!(
                "dim_tangential must be 1 or 2 (d in {{2,3}}), got {dim_tangential}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(ShsError::InvalidParam(format!(
                "tangential N must be a power of two >= 8, got {n}"
            )));
        }
        if !(period > 0.0) {
            return Err(ShsError::InvalidParam(format!("period must be > 0, got {period}")));
        }
        Ok(Self { dim_tangential, n, period })
    }

    pub fn dim_tangential(&self) -> usize {
        self.dim_tangential
    }

    /// Space dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim_tangential + 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Number of stored tangential modes (or physical points).
    pub fn modes(&self) -> usize {
        self.n.pow(self.dim_tangential as u32)
    }

    /// Physical grid spacing per axis.
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Signed integer frequency of FFT index `k`.
    pub fn signed_index(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k <= n / 2 - 1 {
            k
        } else {
            k - n
        }
    }

    /// Frequency `xi` of FFT index `k` along one axis.
    pub fn frequency(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.signed_index(k) as f64 / self.period
    }

    /// `true` if the flat mode index touches a Nyquist index on any axis.
    pub fn is_nyquist(&self, mode: usize) -> bool {
        let n = self.n;
        match self.dim_tangential {
            1 => mode == n / 2,
            _ => {
                let (k0, k1) = (mode / n, mode % n);
                k0 == n / 2 || k1 == n / 2
            }
        }
    }

    /// Tangential frequency vector of the flat mode index.
    pub fn xi(&self, mode: usize) -> [f64; 2] {
        match self.dim_tangential {
            1 => [self.frequency(mode), 0.0],
            _ => [self.frequency(mode / self.n), self.frequency(mode % self.n)],
        }
    }

    /// `|xi'|^2` for the flat mode index.
    pub fn xi_norm_sq(&self, mode: usize) -> f64 {
        let xi = self.xi(mode);
        xi[0] * xi[0] + xi[1] * xi[1]
    }

    /// Physical coordinates of the flat point index.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim_tangential {
            1 => [idx as f64 * h, 0.0],
            _ => [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h],
        }
    }

    /// Largest resolved `|xi'|` (Nyquist excluded).
    pub fn max_frequency(&self) -> f64 {
        let m = (self.n / 2 - 1) as f64;
        let per_axis = 2.0 * std::f64::consts::PI * m / self.period;
        per_axis * (self.dim_tangential as f64).sqrt()
    }

    /// Flat index of the negated mode, when it is resolved.
    pub fn negate_mode(&self, mode: usize) -> Option<usize> {
        let n = self.n;
        let neg1 = |k: usize| -> Option<usize> {
            if k == n / 2 {
                None
            } else if k == 0 {
                Some(0)
            } else {
                Some(n - k)
            }
        };
        match self.dim_tangential {
            1 => neg1(mode),
            _ => {
                let (k0, k1) = (mode / n, mode % n);
                Some(neg1(k0)? * n + neg1(k1)?)
            }
        }
    }
}

/// Quadrature rule of a [`VerticalGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerticalRule {
    /// Cell-centred uniform nodes `(k + 1/2) h`; midpoint weights. The only
    /// rule compatible with the reflected full-space FFT.
    UniformMidpoint,
    /// Composite Gauss–Legendre panels; spectrally accurate quadrature for
    /// smooth integrands.
    GaussLegendre { panels: usize, per_panel: usize },
}

/// Discretisation of the vertical semi-axis, truncated to `(0, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    x_max: f64,
    rule: VerticalRule,
}

impl VerticalGrid {
    /// Cell-centred uniform grid with midpoint weights.
    pub fn uniform(nz: usize, x_max: f64) -> Result<Self> {
        if nz < 4 {
            return Err(ShsError::InvalidParam(format!("Nz must be >= 4, got {nz}")));
        }
        if !(x_max > 0.0) {
            return Err(ShsError::InvalidParam(format!("Xmax must be > 0, got {x_max}")));
        }
        let h = x_max / nz as f64;
        let nodes = (0..nz).map(|k| (k as f64 + 0.5) * h).collect();
        let weights = vec![h; nz];
        Ok(Self { nodes, weights, x_max, rule: VerticalRule::UniformMidpoint })
    }

    /// Composite Gauss–Legendre panels on `[0, x_max]`.
    pub fn gauss_legendre(panels: usize, per_panel: usize, x_max: f64) -> Result<Self> {
        if panels == 0 || per_panel == 0 {
            return Err(ShsError::InvalidParam("empty Gauss-Legendre rule".into()));
        }
        let (gx, gw) = gauss_legendre_01(per_panel);
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        let hp = x_max / panels as f64;
        for p in 0..panels {
            let a = p as f64 * hp;
            for (&x, &w) in gx.iter().zip(&gw) {
                nodes.push(a + x * hp);
                weights.push(w * hp);
            }
        }
        Ok(Self { nodes, weights, x_max, rule: VerticalRule::GaussLegendre { panels, per_panel } })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn rule(&self) -> VerticalRule {
        self.rule
    }

    pub fn is_uniform(&self) -> bool {
        self.rule == VerticalRule::UniformMidpoint
    }

    /// Uniform spacing; panics on non-uniform rules.
    pub fn spacing(&self) -> f64 {
        assert!(self.is_uniform(), "spacing() requires the uniform rule");
        self.x_max / self.len() as f64
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]` by Newton iteration.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-like initial guess on [-1, 1].
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // Legendre recurrence for P_n(z) and P'_n(z).
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let mut p0 = 1.0;
        let mut p1 = 0.0;
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
        }
        let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        x[i] = (1.0 - z) / 2.0;
        x[n - 1 - i] = (1.0 + z) / 2.0;
        let wi = 1.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(q, r, s)` triple with dyadic range defining a computable Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BesovIndex {
    pub q: f64,
    /// `r = f64::INFINITY` selects the sup over blocks.
    pub r: f64,
    pub s: f64,
    pub j_min: i32,
    pub j_max: i32,
    pub homogeneous: bool,
}

impl BesovIndex {
    pub fn new(q: f64, r: f64, s: f64, j_min: i32, j_max: i32, homogeneous: bool) -> Result<Self> {
        if !(q > 1.0) {
            return Err(ShsError::InvalidParam(format!("Besov q must be > 1, got {q}")));
        }
        if !(r >= 1.0) {
            return Err(ShsError::InvalidParam(format!("Besov r must be >= 1, got {r}")));
        }
        if j_min > j_max {
            return Err(ShsError::InvalidParam(format!("j_min {j_min} > j_max {j_max}")));
        }
        Ok(Self { q, r, s, j_min, j_max, homogeneous })
    }

    /// The standing admissibility window `-1 + 1/q < s < 1/q` for half-space
    /// norms.
    pub fn check_halfspace_range(&self) -> Result<()> {
        let lo = -1.0 + 1.0 / self.q;
        let hi = 1.0 / self.q;
        if self.s <= lo || self.s >= hi {
            return Err(ShsError::IndexRange { s: self.s, lo, hi });
        }
        Ok(())
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }
}

/// Time nodes with quadrature weights and the exponential weight `gamma_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub gamma_b: f64,
}

impl TimeGrid {
    /// Uniform grid on `[t0, t1]` with trapezoid weights.
    pub fn uniform(t0: f64, t1: f64, count: usize, gamma_b: f64) -> Result<Self> {
        if count < 2 || !(t1 > t0) {
            return Err(ShsError::InvalidParam("time grid needs t1 > t0 and >= 2 nodes".into()));
        }
        if gamma_b < 0.0 {
            return Err(ShsError::InvalidParam("gamma_b must be >= 0".into()));
        }
        let dt = (t1 - t0) / (count - 1) as f64;
        let nodes: Vec<f64> = (0..count).map(|k| t0 + k as f64 * dt).collect();
        let mut weights = vec![dt; count];
        weights[0] = dt / 2.0;
        weights[count - 1] = dt / 2.0;
        Ok(Self { nodes, weights, gamma_b })
    }

    /// Graded grid `t_k = T (k / K)^4` on `(0, T]`, suited to integrable
    /// endpoint singularities at `t = 0`; weights by the trapezoid rule on
    /// the graded nodes.
    pub fn graded(t_max: f64, count: usize, gamma_b: f64) -> Result<Self> {
        if count < 2 || !(t_max > 0.0) {
            return Err(ShsError::InvalidParam("graded grid needs T > 0 and >= 2 nodes".into()));
        }
        let nodes: Vec<f64> =
            (1..=count).map(|k| t_max * (k as f64 / count as f64).powi(4)).collect();
        let mut weights = vec![0.0; count];
        for k in 0..count {
            let left = if k == 0 { 0.0 } else { nodes[k - 1] };
            let right = if k + 1 == count { nodes[k] } else { nodes[k + 1] };
            weights[k] = 0.5 * (right - left);
        }
        Ok(Self { nodes, weights, gamma_b })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangential_grid_invariants() {
        let g = TangentialGrid::new(1, 16, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g.modes(), 16);
        // Frequencies closed under negation on the resolved set, zero once.
        let mut zero_count = 0;
        for k in 0..16 {
            if g.is_nyquist(k) {
                continue;
            }
            let m = g.negate_mode(k).unwrap();
            assert_eq!(g.signed_index(m), -g.signed_index(k));
            if g.signed_index(k) == 0 {
                zero_count += 1;
            }
        }
        assert_eq!(zero_count, 1);
        assert!(TangentialGrid::new(1, 6, 1.0).is_err());
        assert!(TangentialGrid::new(1, 12, 1.0).is_err());
    }

    #[test]
    fn vertical_weights_sum_to_xmax() {
        for vg in [
            VerticalGrid::uniform(64, 8.0).unwrap(),
            VerticalGrid::gauss_legendre(8, 12, 8.0).unwrap(),
        ] {
            let sum: f64 = vg.weights().iter().sum();
            assert!((sum - 8.0).abs() < 1e-12, "sum {sum}");
            assert!(vg.nodes().windows(2).all(|w| w[1] > w[0]));
            assert!(vg.nodes().iter().all(|&x| x > 0.0 && x <= 8.0));
            assert!(vg.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        // Degree-11 polynomial integrated exactly by a 6-point rule.
        let (x, w) = gauss_legendre_01(6);
        let int: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(11)).sum();
        assert!((int - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn graded_time_grid_weights_cover_interval() {
        let tg = TimeGrid::graded(2.0, 24, 1.0).unwrap();
        let sum: f64 = tg.weights().iter().sum();
        // Trapezoid cells cover (t_1/..., T]; the uncovered prefix is half
        // the first cell.
        assert!((sum - 2.0 + 0.5 * tg.nodes()[0]).abs() < 1.0,
            "weights should roughly cover the interval, sum = {sum}");
        assert!(tg.nodes().windows(2).all(|w| w[1] > w[0]));
    }
}
