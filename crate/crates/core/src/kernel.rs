//! Base dispersal kernels and their scaled variants.
//!
//! A base kernel is a continuous, symmetric, non-negative bump with a finite
//! positive second moment. Two scalings are supported:
//!
//! * general mode: `J_eps(z) = C_norm / eps^(m+n) * J(z/eps)` with a fixed
//!   normalization `C_norm = (1/2 * second moment of J)^-1`;
//! * periodic mode: the kernel is truncated, periodized with period `2*pi/eps`
//!   in scaled coordinates (so the scaled kernel is `2*pi`-periodic), and
//!   renormalized per epsilon against the second moment over one period cell.
//!
//! All kernel integrals run on a dedicated midpoint grid over the support
//! window, never on the simulation grid.

use crate::error::{Error, Result};
use crate::quad::{self, DEFAULT_QUAD_POINTS_1D, DEFAULT_QUAD_POINTS_2D};
use std::f64::consts::{PI, TAU};
use std::path::Path;

/// Gaussian kernels are cut off at this radius (in standard deviations) for
/// every integral and evaluation; the discarded mass is below 1e-14 relative.
pub const GAUSSIAN_TRUNCATION_RADIUS: f64 = 8.0;

/// Piecewise-linear radial kernel loaded from samples. Symmetry is enforced
/// at load time by averaging the interpolants at `z` and `-z`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl KernelTable {
    /// Build from `(z, J(z))` samples with strictly increasing `z`.
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidKernel(
                "tabulated kernel needs at least two samples".into(),
            ));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidKernel(format!(
                    "table abscissae must be strictly increasing (got {} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if samples.iter().any(|&(z, v)| !z.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidKernel("non-finite table entry".into()));
        }
        let raw = |z: f64| -> f64 {
            let n = samples.len();
            if z < samples[0].0 || z > samples[n - 1].0 {
                return 0.0;
            }
            let idx = samples.partition_point(|&(zi, _)| zi <= z);
            if idx == 0 {
                return samples[0].1;
            }
            if idx == n {
                return samples[n - 1].1;
            }
            let (z0, v0) = samples[idx - 1];
            let (z1, v1) = samples[idx];
            v0 + (v1 - v0) * (z - z0) / (z1 - z0)
        };
        let mut radii: Vec<f64> = samples.iter().map(|&(z, _)| z.abs()).collect();
        radii.push(0.0);
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        radii.dedup();
        let values: Vec<f64> = radii.iter().map(|&r| 0.5 * (raw(r) + raw(-r))).collect();
        Ok(KernelTable { radii, values })
    }

    /// Load from a two-column CSV `z,value` (optional header line).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let a = parts.next().unwrap_or("").trim();
            let b = parts.next().unwrap_or("").trim();
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(z), Ok(v)) => samples.push((z, v)),
                _ if lineno == 0 => continue, // header
                _ => {
                    return Err(Error::InvalidKernel(format!(
                        "bad table line {}: `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_samples(&samples)
    }

    fn eval_radius(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if r > self.radii[n - 1] {
            return 0.0;
        }
        let idx = self.radii.partition_point(|&ri| ri <= r);
        if idx == 0 {
            return self.values[0];
        }
        if idx == n {
            return self.values[n - 1];
        }
        let (r0, v0) = (self.radii[idx - 1], self.values[idx - 1]);
        let (r1, v1) = (self.radii[idx], self.values[idx]);
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    fn support_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub enum KernelShape {
    Tent,
    Gaussian,
    Tabulated(KernelTable),
}

/// Unscaled kernel `J` with its spatial dimension (1 or 2). Built-in shapes
/// have unit mass; tabulated kernels carry whatever mass the table encodes.
#[derive(Debug, Clone)]
pub struct BaseKernel {
    shape: KernelShape,
    dim: usize,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::InvalidKernel(format!("unsupported dimension {dim}")))
    }
}

impl BaseKernel {
    /// `J(z) = max(0, 1 - |z|)`, normalized to unit mass in 2D.
    pub fn tent(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(BaseKernel {
            shape: KernelShape::Tent,
            dim,
        })
    }

    /// Standard normal density, truncated at [`GAUSSIAN_TRUNCATION_RADIUS`].
    pub fn gaussian(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(BaseKernel {
            shape: KernelShape::Gaussian,
            dim,
        })
    }

    /// Tabulated radial kernel; 1D only.
    pub fn tabulated(table: KernelTable) -> Self {
        BaseKernel {
            shape: KernelShape::Tabulated(table),
            dim: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape_name(&self) -> &'static str {
        match self.shape {
            KernelShape::Tent => "tent",
            KernelShape::Gaussian => "gaussian",
            KernelShape::Tabulated(_) => "tabulated",
        }
    }

    pub fn support_radius(&self) -> f64 {
        match &self.shape {
            KernelShape::Tent => 1.0,
            KernelShape::Gaussian => GAUSSIAN_TRUNCATION_RADIUS,
            KernelShape::Tabulated(t) => t.support_radius(),
        }
    }

    /// Kernel value from the squared radius. Evaluating through `|z|^2` makes
    /// `J(z) = J(-z)` hold bitwise.
    fn eval_r2(&self, r2: f64) -> f64 {
        match &self.shape {
            KernelShape::Tent => {
                let r = r2.sqrt();
                let v = (1.0 - r).max(0.0);
                if self.dim == 2 {
                    v * (3.0 / PI)
                } else {
                    v
                }
            }
            KernelShape::Gaussian => {
                if r2 > GAUSSIAN_TRUNCATION_RADIUS * GAUSSIAN_TRUNCATION_RADIUS {
                    0.0
                } else if self.dim == 2 {
                    (-0.5 * r2).exp() / TAU
                } else {
                    (-0.5 * r2).exp() / TAU.sqrt()
                }
            }
            KernelShape::Tabulated(t) => t.eval_radius(r2.sqrt()),
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim);
        let r2: f64 = z.iter().map(|t| t * t).sum();
        self.eval_r2(r2)
    }

    pub fn max_value(&self) -> f64 {
        match &self.shape {
            KernelShape::Tent | KernelShape::Gaussian => self.eval_r2(0.0),
            KernelShape::Tabulated(t) => t.max_value(),
        }
    }

    /// `int J(z) dz` over the truncation window.
    pub fn mass(&self, points: usize) -> f64 {
        let r = self.support_radius();
        quad::midpoint_sym(self.dim, r, points, |z| self.eval(z))
    }

    /// `int J(z) |z|^2 dz` over the truncation window.
    pub fn second_moment(&self, points: usize) -> f64 {
        let r = self.support_radius();
        quad::midpoint_sym(self.dim, r, points, |z| {
            let r2: f64 = z.iter().map(|t| t * t).sum();
            self.eval(z) * r2
        })
    }

    /// Sampling-based validation of non-negativity, positivity at the origin,
    /// symmetry and the second moment.
    pub fn check_properties(&self, points: usize) -> Result<()> {
        let origin = vec![0.0; self.dim];
        if !(self.eval(&origin) > 0.0) {
            return Err(Error::InvalidKernel("J(0) must be positive".into()));
        }
        let r = self.support_radius();
        let samples = 101;
        for i in 0..samples {
            let t = -r + 2.0 * r * i as f64 / (samples - 1) as f64;
            let z: Vec<f64> = (0..self.dim)
                .map(|d| if d == 0 { t } else { 0.37 * t })
                .collect();
            let zn: Vec<f64> = z.iter().map(|v| -v).collect();
            let v = self.eval(&z);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidKernel(format!(
                    "J must be finite and non-negative (J({t}) = {v})"
                )));
            }
            if v != self.eval(&zn) {
                return Err(Error::InvalidKernel(format!("J not symmetric at |z| = {t}")));
            }
        }
        let m2 = self.second_moment(points);
        if !(m2 > 0.0) || !m2.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "second moment must be finite and positive (got {m2})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    General,
    /// Torus period is `2*pi` in every coordinate.
    Periodic,
}

/// Fold a coordinate onto the canonical half-period `[0, pi]`. The absolute
/// value is taken first (so `z` and `-z` reduce identically bitwise), the
/// remainder is exact, and the final subtraction is exact by Sterbenz.
fn fold_half_period(z: f64) -> f64 {
    let w = z.abs().rem_euclid(TAU);
    if w > PI {
        TAU - w
    } else {
        w
    }
}

/// Normalization constant: `C_norm` in general mode, `C_norm^eps` in periodic
/// mode (second moment taken over one period cell of the periodized kernel).
pub fn normalization_constant(
    base: &BaseKernel,
    mode: KernelMode,
    epsilon: f64,
    points: usize,
) -> Result<f64> {
    let m2 = match mode {
        KernelMode::General => base.second_moment(points),
        KernelMode::Periodic => {
            let window = cell_window(base, epsilon);
            if window <= 0.0 {
                0.0
            } else {
                quad::midpoint_sym(base.dim(), window, points, |w| {
                    let r2: f64 = w.iter().map(|t| t * t).sum();
                    periodized(base, w, TAU / epsilon) * r2
                })
            }
        }
    };
    if !(m2 > 0.0) || !m2.is_finite() {
        return Err(Error::InvalidKernel(format!(
            "zero or non-finite second moment ({m2}); kernel is degenerate"
        )));
    }
    Ok(2.0 / m2)
}

/// Integration window for one period cell in scaled coordinates: the support
/// radius when the truncated kernel fits inside half a period, else the half
/// period itself (images then overlap and are summed).
fn cell_window(base: &BaseKernel, epsilon: f64) -> f64 {
    let half_period = PI / epsilon;
    base.support_radius().min(half_period)
}

/// Periodization of the truncated kernel: sum of lattice images with period
/// `period` per coordinate. A single term when the support fits in half a
/// period. Coordinates are canonicalized to their absolute value first so the
/// sum is bitwise symmetric.
fn periodized(base: &BaseKernel, w: &[f64], period: f64) -> f64 {
    let r = base.support_radius();
    let image_range = |a: f64| -> (i64, i64) {
        let lo = ((-r - a) / period).ceil() as i64;
        let hi = ((r - a) / period).floor() as i64;
        (lo, hi)
    };
    match w.len() {
        1 => {
            let a = w[0].abs();
            let (lo, hi) = image_range(a);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += base.eval(&[a + period * j as f64]);
            }
            acc
        }
        2 => {
            let a0 = w[0].abs();
            let a1 = w[1].abs();
            let (lo0, hi0) = image_range(a0);
            let (lo1, hi1) = image_range(a1);
            let mut acc = 0.0;
            for j0 in lo0..=hi0 {
                for j1 in lo1..=hi1 {
                    acc += base.eval(&[a0 + period * j0 as f64, a1 + period * j1 as f64]);
                }
            }
            acc
        }
        d => panic!("unsupported dimension {d}"),
    }
}

/// Scaled kernel `J_eps` with its scaling exponent `m in [0, 2]` and mode.
#[derive(Debug, Clone)]
pub struct ScaledKernel {
    base: BaseKernel,
    epsilon: f64,
    m: f64,
    mode: KernelMode,
    norm_const: f64,
    quad_points: usize,
}

impl ScaledKernel {
    pub fn new(base: BaseKernel, epsilon: f64, m: f64, mode: KernelMode) -> Result<Self> {
        let points = match base.dim() {
            1 => DEFAULT_QUAD_POINTS_1D,
            _ => DEFAULT_QUAD_POINTS_2D,
        };
        Self::with_quad_points(base, epsilon, m, mode, points)
    }

    pub fn with_quad_points(
        base: BaseKernel,
        epsilon: f64,
        m: f64,
        mode: KernelMode,
        quad_points: usize,
    ) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidKernel(format!("epsilon must be positive (got {epsilon})")));
        }
        if !(0.0..=2.0).contains(&m) {
            return Err(Error::InvalidKernel(format!("m must lie in [0, 2] (got {m})")));
        }
        let norm_const = normalization_constant(&base, mode, epsilon, quad_points)?;
        Ok(ScaledKernel {
            base,
            epsilon,
            m,
            mode,
            norm_const,
            quad_points,
        })
    }

    /// Construct with an explicit normalization constant, bypassing the
    /// second-moment computation. Needed for degenerate (e.g. zero-mass)
    /// kernels where `normalization_constant` rejects the input.
    pub fn with_norm_const(
        base: BaseKernel,
        epsilon: f64,
        m: f64,
        mode: KernelMode,
        norm_const: f64,
    ) -> Self {
        let quad_points = match base.dim() {
            1 => DEFAULT_QUAD_POINTS_1D,
            _ => DEFAULT_QUAD_POINTS_2D,
        };
        ScaledKernel {
            base,
            epsilon,
            m,
            mode,
            norm_const,
            quad_points,
        }
    }

    pub fn base(&self) -> &BaseKernel {
        &self.base
    }
    pub fn dim(&self) -> usize {
        self.base.dim()
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn mode(&self) -> KernelMode {
        self.mode
    }
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }
    pub fn quad_points(&self) -> usize {
        self.quad_points
    }

    /// `C / eps^(m+n)`.
    pub fn scale_factor(&self) -> f64 {
        self.norm_const * self.epsilon.powf(-(self.m + self.dim() as f64))
    }

    /// Evaluate `J_eps(z)`. Periodic mode first reduces every coordinate into
    /// the torus; the result is `2*pi`-periodic and exactly even.
    pub fn eval(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim());
        match self.mode {
            KernelMode::General => {
                let w: Vec<f64> = z.iter().map(|&t| t / self.epsilon).collect();
                self.scale_factor() * self.base.eval(&w)
            }
            KernelMode::Periodic => {
                let w: Vec<f64> = z.iter().map(|&t| fold_half_period(t) / self.epsilon).collect();
                self.scale_factor() * periodized(&self.base, &w, TAU / self.epsilon)
            }
        }
    }

    /// Upper envelope of `J_eps`.
    pub fn sup_norm(&self) -> f64 {
        let at_zero = self.eval(&vec![0.0; self.dim()]);
        at_zero.max(self.scale_factor() * self.base.max_value())
    }

    /// Midpoint sum of `J_per(w) * f(w)` over one period cell (restricted to
    /// the support window) in scaled coordinates. All spectral quantities
    /// share these nodes, which keeps identities between them exact.
    pub(crate) fn cell_integral(&self, mut f: impl FnMut(&[f64]) -> f64) -> Result<f64> {
        if self.mode != KernelMode::Periodic {
            return Err(Error::ModeMismatch(
                "period-cell integrals require a periodic-mode kernel".into(),
            ));
        }
        let window = cell_window(&self.base, self.epsilon);
        if !(window > 0.0) {
            return Ok(0.0);
        }
        let period = TAU / self.epsilon;
        Ok(quad::midpoint_sym(self.dim(), window, self.quad_points, |w| {
            periodized(&self.base, w, period) * f(w)
        }))
    }

    /// Fourier coefficient `J_hat_eps(k)` of the periodized kernel. The
    /// imaginary part must vanish by symmetry; it is integrated too and
    /// checked against the quadrature tolerance.
    pub fn fourier_coefficient(&self, k: &[i64]) -> Result<f64> {
        if k.len() != self.dim() {
            return Err(Error::GridMismatch(format!(
                "mode index has dimension {}, kernel has {}",
                k.len(),
                self.dim()
            )));
        }
        // Canonical sign so k and -k integrate identical summands.
        let k = canonical_mode(k);
        let eps = self.epsilon;
        let re = self.cell_integral(|w| {
            let kw: f64 = k.iter().zip(w).map(|(&ki, &wi)| ki as f64 * wi).sum();
            (eps * kw).cos()
        })?;
        let im = self.cell_integral(|w| {
            let kw: f64 = k.iter().zip(w).map(|(&ki, &wi)| ki as f64 * wi).sum();
            (eps * kw).sin()
        })?;
        let scale = self.norm_const * eps.powf(-self.m);
        if im.abs() * scale > 1e-10 * (1.0 + re.abs() * scale) {
            return Err(Error::Numerical(format!(
                "imaginary part of Fourier coefficient did not cancel ({})",
                im * scale
            )));
        }
        Ok(scale * re)
    }

    /// Torus eigenvalue `beta_k = J_hat(k) - J_hat(0)`, computed as a single
    /// integral of `J_per(w) (cos(eps k.w) - 1)` to avoid cancellation.
    /// Exactly zero for `k = 0`.
    pub fn mode_eigenvalue(&self, k: &[i64]) -> Result<f64> {
        if k.len() != self.dim() {
            return Err(Error::GridMismatch(format!(
                "mode index has dimension {}, kernel has {}",
                k.len(),
                self.dim()
            )));
        }
        let k = canonical_mode(k);
        let eps = self.epsilon;
        let integral = self.cell_integral(|w| {
            let kw: f64 = k.iter().zip(w).map(|(&ki, &wi)| ki as f64 * wi).sum();
            (eps * kw).cos() - 1.0
        })?;
        Ok(self.norm_const * eps.powf(-self.m) * integral)
    }

    /// Mass and second moment of the periodized kernel over one cell.
    pub fn cell_moments(&self) -> Result<(f64, f64)> {
        let m0 = self.cell_integral(|_| 1.0)?;
        let m2 = self.cell_integral(|w| w.iter().map(|t| t * t).sum())?;
        Ok((m0, m2))
    }

    /// Total mass `int J_eps`: `C_norm eps^-m * (window mass)` in general
    /// mode, `J_hat(0)` in periodic mode.
    pub fn mass(&self) -> Result<f64> {
        match self.mode {
            KernelMode::General => {
                let m0 = self.base.mass(self.quad_points);
                Ok(self.norm_const * self.epsilon.powf(-self.m) * m0)
            }
            KernelMode::Periodic => {
                let (m0, _) = self.cell_moments()?;
                Ok(self.norm_const * self.epsilon.powf(-self.m) * m0)
            }
        }
    }

    /// Half second moment of the scaled kernel, integrated in unscaled
    /// coordinates. Equals `eps^(2-m)` in general mode by the scaling
    /// substitution; used as a cross-check of the normalization.
    pub fn half_second_moment_unscaled(&self) -> Result<f64> {
        if self.mode != KernelMode::General {
            return Err(Error::ModeMismatch(
                "the scaling identity check applies to general mode".into(),
            ));
        }
        let r = self.base.support_radius() * self.epsilon;
        let v = quad::midpoint_sym(self.dim(), r, self.quad_points, |z| {
            let r2: f64 = z.iter().map(|t| t * t).sum();
            self.eval(z) * r2
        });
        Ok(0.5 * v)
    }
}

fn canonical_mode(k: &[i64]) -> Vec<i64> {
    match k.iter().find(|&&ki| ki != 0) {
        Some(&first) if first < 0 => k.iter().map(|&ki| -ki).collect(),
        _ => k.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent1() -> BaseKernel {
        BaseKernel::tent(1).unwrap()
    }

    // Symbolic oracle: int (1-|z|) z^2 dz over [-1,1] = 1/6, so C = 12.
    #[test]
    fn normalization_tent_general() {
        let c = normalization_constant(&tent1(), KernelMode::General, 1.0, 1 << 14).unwrap();
        assert!((c - 12.0).abs() < 1e-6, "C_norm = {c}");
    }

    // Oracle: variance of the standard normal is 1, so C = 2.
    #[test]
    fn normalization_gaussian_general() {
        let g = BaseKernel::gaussian(1).unwrap();
        let c = normalization_constant(&g, KernelMode::General, 1.0, 1 << 14).unwrap();
        assert!((c - 2.0).abs() < 1e-9, "C_norm = {c}");
    }

    // A flat table with second moment exactly 2 gives C = 1.
    #[test]
    fn normalization_unit_second_moment() {
        let table = KernelTable::from_samples(&[(-2.0, 0.375), (2.0, 0.375)]).unwrap();
        let k = BaseKernel::tabulated(table);
        let c = normalization_constant(&k, KernelMode::General, 1.0, 1 << 14).unwrap();
        assert!((c - 1.0).abs() < 1e-8, "C_norm = {c}");
    }

    #[test]
    fn normalization_rejects_zero_mass() {
        let table = KernelTable::from_samples(&[(-1.0, 0.0), (1.0, 0.0)]).unwrap();
        let k = BaseKernel::tabulated(table);
        let err = normalization_constant(&k, KernelMode::General, 1.0, 1 << 10).unwrap_err();
        assert!(matches!(err, Error::InvalidKernel(_)));
    }

    #[test]
    fn eval_scaled_tent_examples() {
        let k = ScaledKernel::new(tent1(), 1.0, 0.0, KernelMode::General).unwrap();
        let v0 = k.eval(&[0.0]);
        assert!((v0 - 12.0).abs() < 1e-5, "J_eps(0) = {v0}");

        // 12 * 0.5^-3 * J(0.5) = 96 * 0.5 = 48.
        let k = ScaledKernel::new(tent1(), 0.5, 2.0, KernelMode::General).unwrap();
        let v = k.eval(&[0.25]);
        assert!((v - 48.0).abs() < 2e-4, "J_eps(0.25) = {v}");
    }

    #[test]
    fn eval_scaled_symmetry_is_bitwise() {
        for mode in [KernelMode::General, KernelMode::Periodic] {
            let k = ScaledKernel::new(tent1(), 0.7, 1.0, mode).unwrap();
            for i in 0..200 {
                let z = -4.0 + i as f64 * 0.0403;
                assert_eq!(k.eval(&[z]), k.eval(&[-z]), "z = {z}");
            }
        }
        let k2 = ScaledKernel::new(BaseKernel::gaussian(2).unwrap(), 0.9, 1.0, KernelMode::Periodic)
            .unwrap();
        for i in 0..40 {
            let z = [-3.0 + i as f64 * 0.151, 1.3 - i as f64 * 0.07];
            assert_eq!(k2.eval(&z), k2.eval(&[-z[0], -z[1]]));
        }
    }

    #[test]
    fn fourier_tent_k0_and_k1() {
        let k = ScaledKernel::new(tent1(), 1.0, 0.0, KernelMode::Periodic).unwrap();
        let f0 = k.fourier_coefficient(&[0]).unwrap();
        assert!((f0 - 12.0).abs() < 1e-6, "J_hat(0) = {f0}");
        // Oracle: int_{-1}^{1} (1-|z|) cos(kz) dz = 2(1-cos k)/k^2.
        let f1 = k.fourier_coefficient(&[1]).unwrap();
        let expect = 24.0 * (1.0 - 1f64.cos());
        assert!((f1 - expect).abs() < 1e-6, "J_hat(1) = {f1}");
    }

    #[test]
    fn fourier_negation_is_bitwise() {
        let k = ScaledKernel::new(tent1(), 1.0, 0.0, KernelMode::Periodic).unwrap();
        for kk in 1..6i64 {
            assert_eq!(
                k.fourier_coefficient(&[kk]).unwrap(),
                k.fourier_coefficient(&[-kk]).unwrap()
            );
        }
    }

    #[test]
    fn fourier_riemann_lebesgue_envelope() {
        let k = ScaledKernel::new(tent1(), 1.0, 0.0, KernelMode::Periodic).unwrap();
        let ks = [16i64, 32, 64, 128];
        let vals: Vec<f64> = ks
            .iter()
            .map(|&kk| k.fourier_coefficient(&[kk]).unwrap().abs())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0], "envelope must decay: {vals:?}");
        }
        assert!(vals[3] < 1e-2, "tail too large: {vals:?}");
    }

    #[test]
    fn general_mode_mismatch_for_fourier() {
        let k = ScaledKernel::new(tent1(), 1.0, 0.0, KernelMode::General).unwrap();
        assert!(matches!(
            k.fourier_coefficient(&[1]),
            Err(Error::ModeMismatch(_))
        ));
    }

    // Scaling substitution: (1/2) int J_eps |z|^2 dz = eps^(2-m).
    #[test]
    fn general_scaling_identity() {
        for &(eps, m) in &[(1.0, 0.0), (0.5, 1.0), (0.25, 2.0), (2.0, 0.5)] {
            let k = ScaledKernel::new(tent1(), eps, m, KernelMode::General).unwrap();
            let lhs = k.half_second_moment_unscaled().unwrap();
            let rhs = eps.powf(2.0 - m);
            assert!(
                (lhs - rhs).abs() <= 1e-6 * rhs,
                "eps={eps} m={m}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn periodic_eval_is_periodic() {
        let k = ScaledKernel::new(tent1(), 1.0, 0.0, KernelMode::Periodic).unwrap();
        // Dyadic offsets keep z + 2*pi exactly representable, so the reduced
        // argument is identical and the values match bitwise.
        for i in -40..40i64 {
            let z = i as f64 * 0.078125;
            assert_eq!(k.eval(&[z + TAU]), k.eval(&[z]));
            assert_eq!(k.eval(&[z - TAU]), k.eval(&[z]));
        }
    }

    #[test]
    fn periodization_sums_overlapping_images() {
        // Gaussian support (8) exceeds the half period (pi) at eps = 1: the
        // periodized kernel at the cell edge must exceed the bare kernel.
        let g = BaseKernel::gaussian(1).unwrap();
        let k = ScaledKernel::new(g.clone(), 1.0, 0.0, KernelMode::Periodic).unwrap();
        let edge = k.eval(&[PI - 0.01]);
        let bare = k.scale_factor() * g.eval(&[PI - 0.01]);
        assert!(edge > 1.5 * bare, "edge {edge} vs bare {bare}");
    }

    #[test]
    fn table_symmetrization() {
        // Asymmetric table: J(-1..1) with J(0.5) = 2, J(-0.5) = 1 averages to 1.5.
        let t = KernelTable::from_samples(&[(-1.0, 0.0), (-0.5, 1.0), (0.0, 3.0), (0.5, 2.0), (1.0, 0.0)])
            .unwrap();
        let k = BaseKernel::tabulated(t);
        assert!((k.eval(&[0.5]) - 1.5).abs() < 1e-14);
        assert_eq!(k.eval(&[0.5]), k.eval(&[-0.5]));
    }

    #[test]
    fn check_properties_accepts_builtins() {
        for dim in [1, 2] {
            BaseKernel::tent(dim).unwrap().check_properties(1 << 10).unwrap();
            BaseKernel::gaussian(dim).unwrap().check_properties(1 << 10).unwrap();
        }
    }
}
