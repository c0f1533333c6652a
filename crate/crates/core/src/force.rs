//! Reaction (force) terms `f` with their derivatives, zeros, envelope bounds
//! and numerical antiderivative.

use crate::error::{Error, Result};
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Samples per envelope sweep (endpoints are always included so polynomial
/// extrema at interval ends are hit exactly).
const ENVELOPE_SAMPLES: usize = 1 << 12;

/// Safety factor applied by [`ForceTerm::derivative_bound`] and
/// [`ForceTerm::second_derivative_bound`] on top of the sampled envelope.
pub const ENVELOPE_MARGIN: f64 = 1.1;

#[derive(Clone)]
pub struct ForceTerm {
    f: ScalarFn,
    fp: ScalarFn,
    fpp: Option<ScalarFn>,
    zeros: Vec<f64>,
    bound_interval: (f64, f64),
    label: String,
}

impl std::fmt::Debug for ForceTerm {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("ForceTerm")
            .field("label", &self.label)
            .field("zeros", &self.zeros)
            .field("bound_interval", &self.bound_interval)
            .finish()
    }
}

impl ForceTerm {
    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fp: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fpp: Option<ScalarFn>,
        mut zeros: Vec<f64>,
        bound_interval: (f64, f64),
        label: impl Into<String>,
    ) -> Self {
        zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ForceTerm {
            f: Arc::new(f),
            fp: Arc::new(fp),
            fpp,
            zeros,
            bound_interval,
            label: label.into(),
        }
    }

    /// `f = 0`.
    pub fn zero() -> Self {
        Self::custom(
            |_| 0.0,
            |_| 0.0,
            Some(Arc::new(|_| 0.0)),
            vec![0.0],
            (-1.0, 1.0),
            "zero",
        )
    }

    /// `f(u) = rate * u (1 - u)` with zeros 0 and 1.
    pub fn logistic(rate: f64) -> Self {
        Self::custom(
            move |u| rate * u * (1.0 - u),
            move |u| rate * (1.0 - 2.0 * u),
            Some(Arc::new(move |_| -2.0 * rate)),
            vec![0.0, 1.0],
            (-1.0, 2.0),
            format!("logistic({rate})"),
        )
    }

    /// `f(u) = a u - u^3`; zeros `0, +-sqrt(a)` for positive `a`.
    pub fn cubic(a: f64) -> Self {
        let zeros = if a > 0.0 {
            vec![-a.sqrt(), 0.0, a.sqrt()]
        } else {
            vec![0.0]
        };
        let span = zeros.last().unwrap().abs() + 1.0;
        Self::custom(
            move |u| a * u - u * u * u,
            move |u| a - 3.0 * u * u,
            Some(Arc::new(|u| -6.0 * u)),
            zeros,
            (-span, span),
            format!("cubic({a})"),
        )
    }

    /// Piecewise-linear force from `(u, f(u))` samples; the derivative is the
    /// segment slope, the second derivative is unavailable. Declared zeros
    /// are validated on use.
    pub fn from_table(samples: Vec<(f64, f64)>, zeros: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidConfig(
                "force table needs at least two samples".into(),
            ));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidConfig(
                    "force table abscissae must be strictly increasing".into(),
                ));
            }
        }
        let lo = samples[0].0;
        let hi = samples[samples.len() - 1].0;
        let eval = {
            let samples = samples.clone();
            move |u: f64| -> f64 {
                let n = samples.len();
                let u = u.clamp(samples[0].0, samples[n - 1].0);
                let idx = samples.partition_point(|&(ui, _)| ui <= u).clamp(1, n - 1);
                let (u0, v0) = samples[idx - 1];
                let (u1, v1) = samples[idx];
                v0 + (v1 - v0) * (u - u0) / (u1 - u0)
            }
        };
        let slope = {
            let samples = samples.clone();
            move |u: f64| -> f64 {
                let n = samples.len();
                let u = u.clamp(samples[0].0, samples[n - 1].0);
                let idx = samples.partition_point(|&(ui, _)| ui <= u).clamp(1, n - 1);
                let (u0, v0) = samples[idx - 1];
                let (u1, v1) = samples[idx];
                (v1 - v0) / (u1 - u0)
            }
        };
        Ok(Self::custom(eval, slope, None, zeros, (lo, hi), "table"))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        (self.fp)(u)
    }

    pub fn second_derivative(&self, u: f64) -> Option<f64> {
        self.fpp.as_ref().map(|g| g(u))
    }

    pub fn has_second_derivative(&self) -> bool {
        self.fpp.is_some()
    }

    /// Declared zeros, ascending.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    /// Interval on which envelope bounds are taken by default.
    pub fn bound_interval(&self) -> (f64, f64) {
        self.bound_interval
    }

    pub fn with_bound_interval(mut self, lo: f64, hi: f64) -> Self {
        self.bound_interval = (lo, hi);
        self
    }

    /// Every declared zero must satisfy `|f(z)| <= 1e-10`.
    pub fn validate_zeros(&self) -> Result<()> {
        for &z in &self.zeros {
            let v = self.eval(z);
            if v.abs() > 1e-10 {
                return Err(Error::InvalidConfig(format!(
                    "declared zero {z} has f(z) = {v}"
                )));
            }
        }
        Ok(())
    }

    fn sampled_max(&self, g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        debug_assert!(hi >= lo);
        let n = ENVELOPE_SAMPLES;
        let mut best = 0.0f64;
        for i in 0..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            best = best.max(g(u).abs());
        }
        best
    }

    /// Envelope `max |f'|` over `[lo, hi]` by dense sampling (endpoints
    /// included, no safety margin).
    pub fn derivative_max(&self, lo: f64, hi: f64) -> f64 {
        self.sampled_max(&|u| (self.fp)(u), lo, hi)
    }

    /// `max |f'|` padded by the documented 10% safety margin; used for
    /// stability bounds and contraction certificates.
    pub fn derivative_bound(&self, lo: f64, hi: f64) -> f64 {
        ENVELOPE_MARGIN * self.derivative_max(lo, hi)
    }

    /// Margined `max |f''|`; errors when no second derivative is declared.
    pub fn second_derivative_bound(&self, lo: f64, hi: f64) -> Result<f64> {
        let g = self
            .fpp
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("force has no second derivative".into()))?
            .clone();
        Ok(ENVELOPE_MARGIN * self.sampled_max(&|u| g(u), lo, hi))
    }

    /// Antiderivative `F(u) = int_a^u f`, anchored at the smallest declared
    /// zero, by composite Simpson quadrature. Only differences of `F` carry
    /// meaning. Exact for polynomial forces up to cubics.
    pub fn antiderivative(&self, u: f64) -> f64 {
        let a = self.zeros.first().copied().unwrap_or(0.0);
        if u == a {
            return 0.0;
        }
        let span = (u - a).abs();
        let panels = 2 * 32usize.max((span * 64.0).ceil() as usize);
        let h = (u - a) / panels as f64;
        let mut acc = self.eval(a) + self.eval(u);
        for i in 1..panels {
            let x = a + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * self.eval(x);
        }
        acc * h / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_basics() {
        let f = ForceTerm::logistic(0.5);
        f.validate_zeros().unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1.0), 0.0);
        // Envelope over the invariant interval is attained at the endpoints.
        assert!((f.derivative_max(0.0, 1.0) - 0.5).abs() < 1e-14);
        assert!((f.derivative_bound(0.0, 1.0) - 0.55).abs() < 1e-14);
    }

    #[test]
    fn cubic_zeros_and_envelopes() {
        let f = ForceTerm::cubic(1.0);
        f.validate_zeros().unwrap();
        assert_eq!(f.zeros(), &[-1.0, 0.0, 1.0]);
        assert!((f.derivative(1.0) + 2.0).abs() < 1e-14);
        // max |f''| over [-1.14, 1.14] = 6 * 1.14.
        let b = f.second_derivative_bound(-1.14, 1.14).unwrap();
        assert!((b - 1.1 * 6.84).abs() < 1e-12);
    }

    #[test]
    fn antiderivative_matches_closed_form() {
        // Logistic: F(u) = u^2/2 - u^3/3; Simpson is exact on cubics.
        let f = ForceTerm::logistic(1.0);
        for &u in &[0.3, 1.0, -0.7, 2.5] {
            let expect = u * u / 2.0 - u * u * u / 3.0;
            assert!(
                (f.antiderivative(u) - expect).abs() < 1e-12,
                "F({u}) = {}",
                f.antiderivative(u)
            );
        }
        // Cubic anchored at the smallest zero (-1).
        let f = ForceTerm::cubic(1.0);
        let closed = |u: f64| (u * u / 2.0 - u.powi(4) / 4.0) - (0.5 - 0.25);
        for &u in &[-1.0, 0.0, 0.5, 1.3] {
            assert!((f.antiderivative(u) - closed(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_declared_zero_is_rejected() {
        let f = ForceTerm::custom(
            |u| u + 0.5,
            |_| 1.0,
            None,
            vec![0.0],
            (-1.0, 1.0),
            "shifted",
        );
        assert!(f.validate_zeros().is_err());
    }

    #[test]
    fn table_force_interpolates() {
        let f =
            ForceTerm::from_table(vec![(-1.0, -2.0), (0.0, 0.0), (1.0, 2.0)], vec![0.0]).unwrap();
        f.validate_zeros().unwrap();
        assert!((f.eval(0.5) - 1.0).abs() < 1e-14);
        assert!((f.derivative(0.5) - 2.0).abs() < 1e-14);
        assert!(f.second_derivative(0.5).is_none());
    }
}
