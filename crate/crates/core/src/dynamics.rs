//! Time integration of `u_t = L_eps u + f(u)` and the diagnostics attached to
//! it: extremum tracking, invariant-region monitoring, the mean-mass
//! convergence criterion with its three decay bounds, and the Lyapunov
//! energy of the gradient-flow structure.

use crate::domain::{self, Field};
use crate::error::{Error, Result};
use crate::force::ForceTerm;
use crate::operator::DiscreteOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    Rk4,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Scheme::Euler),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::Rk4 => "rk4",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Diagnostics are recorded every `record_stride` steps (plus the final
    /// state).
    pub record_stride: usize,
    /// Capture the field at the first step time reaching each entry.
    pub snapshot_times: Vec<f64>,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_end: f64, scheme: Scheme) -> Self {
        EvolveOptions {
            dt,
            t_end,
            scheme,
            record_stride: 1,
            snapshot_times: Vec::new(),
        }
    }
}

/// Per-record diagnostics along a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub t: f64,
    /// Node max and its index (ties to the lowest index).
    pub mu: f64,
    pub argmax: usize,
    /// Node min and its index.
    pub nu: f64,
    pub argmin: usize,
    pub mean: f64,
    /// `||u - mean||_2`.
    pub deviation: f64,
    /// `<L_eps u, u>`.
    pub dirichlet: f64,
    /// Lyapunov energy.
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub records: Vec<TraceRecord>,
    pub snapshots: Vec<(f64, Field)>,
    pub final_field: Field,
    pub dt: f64,
    pub scheme: Scheme,
}

/// Largest admissible time step: `0.9 / (2 ||b||_inf + L_f)` for Euler (the
/// linear spectrum lies in `[2 beta_inf, 0]`), 2.7 times that for RK4.
pub fn stability_dt_bound(op: &DiscreteOperator, force: &ForceTerm, scheme: Scheme) -> f64 {
    let (lo, hi) = force.bound_interval();
    let lf = force.derivative_bound(lo, hi);
    let denom = op.operator_norm_bound() + lf;
    let base = if denom > 0.0 { 0.9 / denom } else { f64::INFINITY };
    match scheme {
        Scheme::Euler => base,
        Scheme::Rk4 => 2.7 * base,
    }
}

fn rhs(op: &DiscreteOperator, force: &ForceTerm, u: &Field) -> Result<Field> {
    let mut out = op.apply(u)?;
    for (o, &v) in out.values_mut().iter_mut().zip(u.values()) {
        *o += force.eval(v);
    }
    Ok(out)
}

fn step(
    op: &DiscreteOperator,
    force: &ForceTerm,
    u: &Field,
    dt: f64,
    scheme: Scheme,
) -> Result<Field> {
    match scheme {
        Scheme::Euler => {
            let k1 = rhs(op, force, u)?;
            let mut next = u.clone();
            next.axpy(dt, &k1);
            Ok(next)
        }
        Scheme::Rk4 => {
            let k1 = rhs(op, force, u)?;
            let mut u2 = u.clone();
            u2.axpy(0.5 * dt, &k1);
            let k2 = rhs(op, force, &u2)?;
            let mut u3 = u.clone();
            u3.axpy(0.5 * dt, &k2);
            let k3 = rhs(op, force, &u3)?;
            let mut u4 = u.clone();
            u4.axpy(dt, &k3);
            let k4 = rhs(op, force, &u4)?;
            let mut next = u.clone();
            next.axpy(dt / 6.0, &k1);
            next.axpy(dt / 3.0, &k2);
            next.axpy(dt / 3.0, &k3);
            next.axpy(dt / 6.0, &k4);
            Ok(next)
        }
    }
}

fn make_record(op: &DiscreteOperator, force: &ForceTerm, u: &Field, t: f64) -> Result<TraceRecord> {
    let (mu, argmax, nu, argmin) = u.extrema();
    let mean = domain::mean_mass(u);
    let w = u.grid().cell_volume();
    let deviation = (u
        .values()
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<f64>()
        * w)
        .sqrt();
    let dirichlet = op.dirichlet_form(u)?;
    let potential: f64 = u
        .values()
        .iter()
        .map(|&v| force.antiderivative(v))
        .sum::<f64>()
        * w;
    let energy = -0.5 * dirichlet - potential;
    Ok(TraceRecord {
        t,
        mu,
        argmax,
        nu,
        argmin,
        mean,
        deviation,
        dirichlet,
        energy,
    })
}

/// Integrate the evolution problem, recording diagnostics along the way.
/// Rejects steps above the stability bound; aborts with the last valid time
/// when any value stops being finite.
pub fn evolve(
    op: &DiscreteOperator,
    force: &ForceTerm,
    u0: &Field,
    opts: &EvolveOptions,
) -> Result<EvolutionTrace> {
    if !u0.is_finite() {
        return Err(Error::InvalidConfig(
            "initial datum contains non-finite values".into(),
        ));
    }
    if !(opts.dt > 0.0) || !(opts.t_end >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need dt > 0 and T >= 0 (got dt = {}, T = {})",
            opts.dt, opts.t_end
        )));
    }
    let bound = stability_dt_bound(op, force, opts.scheme);
    if opts.dt > bound {
        return Err(Error::StepTooLarge { dt: opts.dt, bound });
    }
    let stride = opts.record_stride.max(1);
    let mut snapshot_times = opts.snapshot_times.clone();
    snapshot_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut next_snapshot = 0usize;

    let steps = if opts.t_end == 0.0 {
        0
    } else {
        (opts.t_end / opts.dt).ceil() as usize
    };
    let mut u = u0.clone();
    let mut records = vec![make_record(op, force, &u, 0.0)?];
    let mut snapshots = Vec::new();
    let mut t = 0.0;
    for s in 1..=steps {
        // Shrink the final step to land exactly on T.
        let dt = if s == steps { opts.t_end - t } else { opts.dt };
        if dt <= 0.0 {
            break;
        }
        let next = step(op, force, &u, dt, opts.scheme)?;
        if !next.is_finite() {
            return Err(Error::Numerical(format!(
                "solution blew up; last valid time t = {t}"
            )));
        }
        u = next;
        t += dt;
        if s % stride == 0 || s == steps {
            records.push(make_record(op, force, &u, t)?);
        }
        while next_snapshot < snapshot_times.len() && t >= snapshot_times[next_snapshot] - 1e-12 {
            snapshots.push((t, u.clone()));
            next_snapshot += 1;
        }
    }
    Ok(EvolutionTrace {
        records,
        snapshots,
        final_field: u,
        dt: opts.dt,
        scheme: opts.scheme,
    })
}

/// Continuous-dependence constant
/// `C(T) = exp(T (sqrt(2) ||J_eps||_inf |Omega|^(1/2) + max |f'|))`.
pub fn gronwall_constant(op: &DiscreteOperator, force: &ForceTerm, t: f64) -> f64 {
    let (lo, hi) = force.bound_interval();
    let lf = force.derivative_max(lo, hi);
    let j_sup = op.kernel().sup_norm();
    let omega = op.grid().measure();
    (t * (2.0f64.sqrt() * j_sup * omega.sqrt() + lf)).exp()
}

#[derive(Debug, Clone, Copy)]
pub struct DependenceReport {
    pub initial_distance: f64,
    pub final_distance: f64,
    pub gronwall: f64,
    pub holds: bool,
    /// `C(T) ||u0 - v0|| / ||u(T) - v(T)||` (infinite when trajectories
    /// coincide).
    pub slack: f64,
}

/// Integrate two initial data and compare their separation against the
/// Gronwall bound.
pub fn continuous_dependence_check(
    op: &DiscreteOperator,
    force: &ForceTerm,
    u0: &Field,
    v0: &Field,
    opts: &EvolveOptions,
) -> Result<DependenceReport> {
    u0.same_grid(v0)?;
    let tu = evolve(op, force, u0, opts)?;
    let tv = evolve(op, force, v0, opts)?;
    let mut d0 = u0.clone();
    d0.axpy(-1.0, v0);
    let mut d_final = tu.final_field.clone();
    d_final.axpy(-1.0, &tv.final_field);
    let initial_distance = domain::l2_norm(&d0);
    let final_distance = domain::l2_norm(&d_final);
    let gronwall = gronwall_constant(op, force, opts.t_end);
    let bound = gronwall * initial_distance;
    let holds = final_distance <= bound * (1.0 + 1e-9) + 1e-14;
    let slack = if final_distance > 0.0 {
        bound / final_distance
    } else {
        f64::INFINITY
    };
    Ok(DependenceReport {
        initial_distance,
        final_distance,
        gronwall,
        holds,
        slack,
    })
}

/// Worst excursion of the trace outside `Gamma = [u1, u2]`; the endpoints
/// must be declared zeros of the force.
pub fn invariant_region_violation(
    trace: &EvolutionTrace,
    force: &ForceTerm,
    gamma: (f64, f64),
) -> Result<f64> {
    let (u1, u2) = gamma;
    if !(u1 < u2) {
        return Err(Error::InvalidConfig(format!(
            "need u1 < u2 (got {u1}, {u2})"
        )));
    }
    for v in [u1, u2] {
        if force.eval(v).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!(
                "invariant-region endpoint {v} is not a zero of f (f = {})",
                force.eval(v)
            )));
        }
    }
    Ok(trace
        .records
        .iter()
        .map(|r| (u1 - r.nu).max(r.mu - u2).max(0.0))
        .fold(0.0, f64::max))
}

/// Ingredients of the mean-mass convergence criterion.
#[derive(Debug, Clone, Copy)]
pub struct SigmaReport {
    /// Largest non-trivial eigenvalue.
    pub beta1: f64,
    /// `max_{Gamma} |f'|` (exact envelope, no safety margin).
    pub force_bound: f64,
    /// `sigma = 2 (beta1 + force_bound)`.
    pub sigma: f64,
    /// `a_1 = ||u0 - mean(u0)||_2`.
    pub a1: f64,
    /// `a_2 = C(L_eps) a_1^2`.
    pub a2: f64,
}

/// Assemble the criterion from a known `beta1` (analytic on the torus via
/// [`crate::spectrum::analytic_eigenvalues`], numeric elsewhere via
/// [`crate::spectrum::numeric_beta1`]).
pub fn sigma_criterion(
    beta1: f64,
    force: &ForceTerm,
    gamma: (f64, f64),
    u0: &Field,
    op: &DiscreteOperator,
) -> SigmaReport {
    let force_bound = force.derivative_max(gamma.0, gamma.1);
    let sigma = 2.0 * (beta1 + force_bound);
    let mean = domain::mean_mass(u0);
    let w = u0.grid().cell_volume();
    let a1 = (u0
        .values()
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<f64>()
        * w)
        .sqrt();
    let a2 = op.operator_norm_bound() * a1 * a1;
    SigmaReport {
        beta1,
        force_bound,
        sigma,
        a1,
        a2,
    }
}

/// Least-squares slope of `ln v` against `t` over records with `v > floor`.
pub fn fit_exponential_rate<I: IntoIterator<Item = (f64, f64)>>(
    points: I,
    floor: f64,
) -> Option<f64> {
    let data: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(_, v)| v > floor)
        .map(|(t, v)| (t, v.ln()))
        .collect();
    if data.len() < 3 {
        return None;
    }
    let n = data.len() as f64;
    let st: f64 = data.iter().map(|p| p.0).sum();
    let sv: f64 = data.iter().map(|p| p.1).sum();
    let stt: f64 = data.iter().map(|p| p.0 * p.0).sum();
    let stv: f64 = data.iter().map(|p| p.0 * p.1).sum();
    let denom = n * stt - st * st;
    if denom.abs() < 1e-14 {
        return None;
    }
    Some((n * stv - st * sv) / denom)
}

#[derive(Debug, Clone, Copy)]
pub struct DecayReport {
    pub holds: bool,
    pub max_ratio: f64,
    pub fitted_rate: Option<f64>,
}

/// `deviation(t) <= a1 e^(sigma t)` at every record, up to the integration
/// tolerance. `a1 = 0` (constant initial data) degenerates to requiring the
/// deviation to stay at rounding level.
pub fn deviation_decay_check(
    trace: &EvolutionTrace,
    sigma: &SigmaReport,
    tol_int: f64,
) -> DecayReport {
    let mut holds = true;
    let mut max_ratio = 0.0f64;
    for r in &trace.records {
        let bound = sigma.a1 * (sigma.sigma * r.t).exp();
        if r.deviation > bound * (1.0 + tol_int) + 1e-12 {
            holds = false;
        }
        if bound > 0.0 {
            max_ratio = max_ratio.max(r.deviation / bound);
        }
    }
    let fitted_rate = fit_exponential_rate(trace.records.iter().map(|r| (r.t, r.deviation)), 1e-12);
    DecayReport {
        holds,
        max_ratio,
        fitted_rate,
    }
}

/// `|<L u, u>| <= a2 e^(2 sigma t)` at every record.
pub fn dirichlet_form_check(
    trace: &EvolutionTrace,
    sigma: &SigmaReport,
    tol_int: f64,
) -> DecayReport {
    let mut holds = true;
    let mut max_ratio = 0.0f64;
    for r in &trace.records {
        let bound = sigma.a2 * (2.0 * sigma.sigma * r.t).exp();
        if r.dirichlet.abs() > bound * (1.0 + tol_int) + 1e-12 {
            holds = false;
        }
        if bound > 0.0 {
            max_ratio = max_ratio.max(r.dirichlet.abs() / bound);
        }
    }
    let fitted_rate = fit_exponential_rate(
        trace.records.iter().map(|r| (r.t, r.dirichlet.abs())),
        1e-12,
    );
    DecayReport {
        holds,
        max_ratio,
        fitted_rate,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeResidualReport {
    /// Smallest `K` with `|mean'(t) - f(mean(t))| <= K e^(sigma t)` over the
    /// recorded (finite-difference) residuals.
    pub k_sup: f64,
    pub sup_time: f64,
    /// Fitted decay rate of the residual envelope.
    pub fitted_rate: Option<f64>,
    pub max_residual: f64,
}

/// Residual of the mean-mass ODE `mean' = f(mean) + O(e^(sigma t))`,
/// differentiated by centered differences on the trace. `fit_floor` guards
/// the rate fit against the finite-difference noise floor.
pub fn mean_mass_ode_check(
    trace: &EvolutionTrace,
    force: &ForceTerm,
    sigma: &SigmaReport,
    fit_floor: f64,
) -> OdeResidualReport {
    let recs = &trace.records;
    let mut residuals = Vec::new();
    for j in 1..recs.len().saturating_sub(1) {
        let dtm = recs[j + 1].t - recs[j - 1].t;
        if dtm <= 0.0 {
            continue;
        }
        let deriv = (recs[j + 1].mean - recs[j - 1].mean) / dtm;
        residuals.push((recs[j].t, (deriv - force.eval(recs[j].mean)).abs()));
    }
    let mut k_sup = 0.0f64;
    let mut sup_time = 0.0;
    let mut max_residual = 0.0f64;
    for &(t, r) in &residuals {
        max_residual = max_residual.max(r);
        let k = r / (sigma.sigma * t).exp();
        if k > k_sup {
            k_sup = k;
            sup_time = t;
        }
    }
    let fitted_rate = fit_exponential_rate(residuals.iter().copied(), fit_floor);
    OdeResidualReport {
        k_sup,
        sup_time,
        fitted_rate,
        max_residual,
    }
}

/// Worst violations of the extremum comparison inequalities
/// `mu' <= f(mu)` and `nu' >= f(nu)`, evaluated by centered differences on
/// the trace. Both are zero up to finite-difference error.
pub fn extremum_comparison(trace: &EvolutionTrace, force: &ForceTerm) -> (f64, f64) {
    let recs = &trace.records;
    let mut viol_mu = 0.0f64;
    let mut viol_nu = 0.0f64;
    for j in 1..recs.len().saturating_sub(1) {
        let dtm = recs[j + 1].t - recs[j - 1].t;
        if dtm <= 0.0 {
            continue;
        }
        let dmu = (recs[j + 1].mu - recs[j - 1].mu) / dtm;
        let dnu = (recs[j + 1].nu - recs[j - 1].nu) / dtm;
        viol_mu = viol_mu.max(dmu - force.eval(recs[j].mu));
        viol_nu = viol_nu.max(force.eval(recs[j].nu) - dnu);
    }
    (viol_mu, viol_nu)
}

/// Lyapunov energy
/// `E(u) = 1/4 sum_{ij} h^{2n} J_eps(x_i-x_j)(u_j-u_i)^2 - sum_i h^n F(u_i)`
/// via the literal double sum; the gradient of `E` in the weighted metric is
/// `-(L_eps u + f(u))`, so `E` is non-increasing along trajectories.
pub fn lyapunov_energy(op: &DiscreteOperator, force: &ForceTerm, u: &Field) -> Result<f64> {
    let double_sum = op.interaction_double_sum(u)?;
    let w = u.grid().cell_volume();
    let potential: f64 = u
        .values()
        .iter()
        .map(|&v| force.antiderivative(v))
        .sum::<f64>()
        * w;
    Ok(0.25 * double_sum - potential)
}
