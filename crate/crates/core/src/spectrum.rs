//! Spectrum of the dispersion operator: the essential range contributed by
//! the boundary deficit, the isolated eigenvalue sequence, explicit torus
//! eigenpairs, the limit eigenvalue, and small-epsilon asymptotics.

use crate::domain::{Field, Grid};
use crate::error::{Error, Result};
use crate::kernel::{BaseKernel, KernelMode, ScaledKernel};
use crate::operator::{boundary_deficit_field, DiscreteOperator};
use nalgebra::DMatrix;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralClass {
    NearEssential,
    Isolated,
}

impl SpectralClass {
    pub fn label(&self) -> &'static str {
        match self {
            SpectralClass::NearEssential => "near-essential",
            SpectralClass::Isolated => "isolated",
        }
    }
}

/// Classified spectrum of an assembled operator.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// `[min b_eps, max b_eps]` over the grid; a single point on the torus.
    pub essential_range: (f64, f64),
    /// Analytic `(k, beta_k)` list on the torus; absent on masked grids.
    pub analytic: Option<Vec<(Vec<i64>, f64)>>,
    /// Dense eigenvalues, sorted descending.
    pub numeric: Vec<f64>,
    pub classes: Vec<SpectralClass>,
    pub delta_class: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LimitEigenvalue {
    /// `beta_infinity = -J_hat(0)`.
    pub beta_infinity: f64,
    /// Mass over second moment of the periodized kernel on one cell.
    pub rho: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AsymptoticRow {
    pub epsilon: f64,
    pub beta: f64,
    /// Leading-order prediction `-eps^(2-m) |k|^2 / n`.
    pub predicted: f64,
    pub ratio: f64,
    /// Set when the scaled support no longer fits inside half a period, so
    /// the truncation assumption behind the expansion is active.
    pub truncation_warning: bool,
}

#[derive(Debug, Clone, Copy)]
pub enum Phase {
    Cos,
    Sin,
}

/// Analytic torus eigenvalues `beta_k` for modes up to `k_max` per
/// coordinate (non-negative leading index; `beta_k = beta_{-k}`).
pub fn analytic_eigenvalues(
    kernel: &ScaledKernel,
    k_max: usize,
) -> Result<Vec<(Vec<i64>, f64)>> {
    if kernel.mode() != KernelMode::Periodic {
        return Err(Error::ModeMismatch(
            "analytic eigenvalues exist in periodic mode only".into(),
        ));
    }
    let km = k_max as i64;
    let mut out = Vec::new();
    match kernel.dim() {
        1 => {
            for k in 0..=km {
                out.push((vec![k], kernel.mode_eigenvalue(&[k])?));
            }
        }
        _ => {
            for k0 in 0..=km {
                let lo = if k0 == 0 { 0 } else { -km };
                for k1 in lo..=km {
                    out.push((vec![k0, k1], kernel.mode_eigenvalue(&[k0, k1])?));
                }
            }
        }
    }
    Ok(out)
}

/// Trigonometric eigenfunction sampled on a torus grid.
pub fn eigenfunction(grid: &Arc<Grid>, k: &[i64], phase: Phase) -> Result<Field> {
    if !grid.is_torus() {
        return Err(Error::ModeMismatch(
            "eigenfunctions are explicit on the torus only".into(),
        ));
    }
    if k.len() != grid.dim() {
        return Err(Error::GridMismatch("mode/grid dimension mismatch".into()));
    }
    if k.iter().all(|&ki| ki == 0) {
        if let Phase::Sin = phase {
            return Err(Error::InvalidConfig(
                "sin eigenfunction at k = 0 is identically zero".into(),
            ));
        }
    }
    Ok(Field::from_fn(grid.clone(), |x| {
        let kx: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
        match phase {
            Phase::Cos => kx.cos(),
            Phase::Sin => kx.sin(),
        }
    }))
}

/// `[min, max]` of the boundary deficit over the grid.
pub fn essential_range(kernel: &ScaledKernel, grid: &Arc<Grid>) -> Result<(f64, f64)> {
    let b = boundary_deficit_field(kernel, grid)?;
    let (max, _, min, _) = b.extrema();
    Ok((min, max))
}

/// Symmetric dense eigendecomposition with eigenvalues sorted descending
/// (eigenvectors as matching columns). Failures surface matrix diagnostics.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = matrix.nrows();
    let eig = nalgebra::linalg::SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 50_000)
        .ok_or_else(|| {
            let norm = matrix.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            Error::Numerical(format!(
                "symmetric eigensolve failed to converge (n = {n}, max |A_ij| = {norm})"
            ))
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Dense eigenvalues of the assembled operator, sorted descending.
pub fn numeric_eigenvalues(op: &DiscreteOperator) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(op.matrix())?.0)
}

/// Largest eigenvalue on the mean-zero complement: the constant vector is an
/// exact null vector, so after sorting this is the second-largest eigenvalue.
pub fn numeric_beta1(op: &DiscreteOperator) -> Result<f64> {
    let vals = numeric_eigenvalues(op)?;
    if vals.len() < 2 {
        return Err(Error::Numerical(
            "operator too small for a non-trivial eigenvalue".into(),
        ));
    }
    let scale = op.operator_norm_bound().max(1.0);
    if vals[0].abs() > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "expected a zero top eigenvalue (constants), got {}",
            vals[0]
        )));
    }
    Ok(vals[1])
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Modes per coordinate for the analytic list on the torus.
    pub k_max: usize,
    /// Override for the near-essential distance; default `10 h ||b||_inf`.
    pub delta_class: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            k_max: 8,
            delta_class: None,
        }
    }
}

/// Dense eigendecomposition plus classification against the essential range.
pub fn classify_spectrum(op: &DiscreteOperator, opts: ClassifyOptions) -> Result<SpectralReport> {
    let numeric = numeric_eigenvalues(op)?;
    let b = op.deficit_values();
    let (mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut bsup = 0.0f64;
    for &v in b {
        bmin = bmin.min(v);
        bmax = bmax.max(v);
        bsup = bsup.max(v.abs());
    }
    let delta_class = opts
        .delta_class
        .unwrap_or(10.0 * op.grid().spacing() * bsup);
    let classes = numeric
        .iter()
        .map(|&lambda| {
            let dist = if lambda < bmin {
                bmin - lambda
            } else if lambda > bmax {
                lambda - bmax
            } else {
                0.0
            };
            if dist <= delta_class {
                SpectralClass::NearEssential
            } else {
                SpectralClass::Isolated
            }
        })
        .collect();
    let analytic = if op.grid().is_torus() {
        Some(analytic_eigenvalues(op.kernel(), opts.k_max)?)
    } else {
        None
    };
    Ok(SpectralReport {
        essential_range: (bmin, bmax),
        analytic,
        numeric,
        classes,
        delta_class,
    })
}

/// Limit eigenvalue `beta_infinity = -J_hat(0)` together with the moment
/// ratio `rho`; the identity `beta_infinity = -2 rho / eps^m` is exact here
/// because both sides share the same quadrature nodes.
pub fn limit_eigenvalue(kernel: &ScaledKernel) -> Result<LimitEigenvalue> {
    let (m0, m2) = kernel.cell_moments()?;
    if !(m2 > 0.0) {
        return Err(Error::InvalidKernel(
            "degenerate kernel: zero cell second moment".into(),
        ));
    }
    let rho = m0 / m2;
    let beta_infinity = -kernel.norm_const() * kernel.epsilon().powf(-kernel.m()) * m0;
    Ok(LimitEigenvalue {
        beta_infinity,
        rho,
    })
}

/// Sweep `beta_k(eps)` over a list of epsilons against the leading-order
/// limit `-eps^(2-m) |k|^2 / n` (equivalently `-|k|^2/n` at `m = 2`).
pub fn asymptotic_scan(
    base: &BaseKernel,
    k: &[i64],
    m: f64,
    epsilons: &[f64],
    quad_points: usize,
) -> Result<Vec<AsymptoticRow>> {
    let n = base.dim() as f64;
    let k2: f64 = k.iter().map(|&ki| (ki * ki) as f64).sum();
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let kernel =
            ScaledKernel::with_quad_points(base.clone(), eps, m, KernelMode::Periodic, quad_points)?;
        let beta = kernel.mode_eigenvalue(k)?;
        let predicted = -eps.powf(2.0 - m) * k2 / n;
        let ratio = if predicted != 0.0 {
            beta / predicted
        } else {
            f64::NAN
        };
        rows.push(AsymptoticRow {
            epsilon: eps,
            beta,
            predicted,
            ratio,
            truncation_warning: eps * base.support_radius() >= std::f64::consts::PI,
        });
    }
    Ok(rows)
}

/// Greedy nearest matching of analytic targets (with multiplicities) against
/// the numeric pool. Returns, per target, the indices claimed from the pool.
pub fn greedy_match(targets: &[(f64, usize)], pool: &[f64]) -> Vec<Vec<usize>> {
    let mut taken = vec![false; pool.len()];
    let mut result = Vec::with_capacity(targets.len());
    for &(value, mult) in targets {
        let mut claimed = Vec::with_capacity(mult);
        for _ in 0..mult {
            let mut best: Option<(usize, f64)> = None;
            for (i, &p) in pool.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let d = (p - value).abs();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            if let Some((i, _)) = best {
                taken[i] = true;
                claimed.push(i);
            }
        }
        result.push(claimed);
    }
    result
}

/// Eigenfunction residual `||L phi - beta phi||_inf` for a given eigenvalue.
pub fn eigen_residual(op: &DiscreteOperator, phi: &Field, beta: f64) -> Result<f64> {
    let mut lphi = op.apply(phi)?;
    lphi.axpy(-beta, phi);
    Ok(lphi.max_abs())
}

/// Rayleigh quotient `<L u, u> / <u, u>`.
pub fn rayleigh_quotient(op: &DiscreteOperator, u: &Field) -> Result<f64> {
    let num = op.dirichlet_form(u)?;
    let den = crate::domain::l2_inner(u, u)?;
    Ok(num / den)
}
