//! Discrete fractional-derivative operators on uniformly sampled signals.
//!
//! The Grünwald-Letnikov (GL) form used here is a convolution with binomial
//! weights over the full sample history, initial sample included. That makes
//! it an approximation of the Riemann-Liouville derivative: applied to a
//! signal with f(0) != 0 it keeps the t^{-beta} memory of the initial value
//! rather than discarding it (see `gl_derivative` tests). Callers that want
//! Caputo semantics subtract f(0) from the signal first.

use crate::error::{Error, Result};
use crate::specialfn::{gamma, mittag_leffler};

/// Uniformly sampled real signal. Only the step is stored; uniform spacing
/// is structural.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub dt: f64,
    pub t0: f64,
    pub values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(dt: f64, t0: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: dt,
                reason: "time step must be finite and positive",
            });
        }
        if values.is_empty() {
            return Err(Error::BadData("signal must contain at least one sample".into()));
        }
        Ok(SampledSignal { dt, t0, values })
    }

    pub fn from_fn(dt: f64, t0: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n).map(|k| f(t0 + k as f64 * dt)).collect();
        Self::new(dt, t0, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample time of index k.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }
}

/// First k GL weights for order beta: c[0] = 1, c[j] = ((j-1-beta)/j) c[j-1].
/// (One-based in the usual stencil notation; this vector is zero-based.)
pub fn gl_coefficients(beta: f64, k: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(k);
    if k == 0 {
        return c;
    }
    c.push(1.0);
    for j in 1..k {
        let jf = j as f64;
        let next = c[j - 1] * (jf - 1.0 - beta) / jf;
        c.push(next);
    }
    c
}

/// Exact partial sum of the GL weights: sum_{j=0}^{m-1} c_j
/// = Gamma(m - beta) / (Gamma(m) Gamma(1 - beta)). Tends to 0 like
/// m^{-beta} for 0 < beta < 1 (slowly: it is NOT small for small beta).
pub fn gl_coefficient_partial_sum(beta: f64, m: usize) -> Result<f64> {
    let mf = m as f64;
    let (la, _) = crate::specialfn::ln_gamma(mf - beta)?;
    let (lb, _) = crate::specialfn::ln_gamma(mf)?;
    let g = gamma(1.0 - beta)?;
    Ok((la - lb).exp() / g)
}

/// GL fractional derivative of order beta in [0, 1):
/// output[k] = dt^{-beta} sum_{j=0}^{k} c_j * signal[k-j].
/// Optional window truncates the memory to the most recent `w` samples.
pub fn gl_derivative_windowed(
    signal: &SampledSignal,
    beta: f64,
    window: Option<usize>,
) -> Result<SampledSignal> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "require 0 <= beta < 1",
        });
    }
    let n = signal.len();
    let c = gl_coefficients(beta, n);
    let scale = signal.dt.powf(-beta);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let reach = match window {
            Some(w) if w > 0 => (k + 1).min(w),
            _ => k + 1,
        };
        let mut acc = 0.0f64;
        for j in 0..reach {
            acc += c[j] * signal.values[k - j];
        }
        out.push(scale * acc);
    }
    SampledSignal::new(signal.dt, signal.t0, out)
}

/// GL fractional derivative over the full history (no memory truncation).
pub fn gl_derivative(signal: &SampledSignal, beta: f64) -> Result<SampledSignal> {
    gl_derivative_windowed(signal, beta, None)
}

/// Closed-form Caputo derivative of t^p for p > 0, 0 < beta < 1:
/// Gamma(p+1)/Gamma(p+1-beta) t^{p-beta}. Identical to Riemann-Liouville
/// here since t^p vanishes at t = 0.
pub fn caputo_oracle_power(beta: f64, p: f64, t: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "require 0 < beta < 1",
        });
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "require p > 0",
        });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "require t > 0",
        });
    }
    Ok(gamma(p + 1.0)? / gamma(p + 1.0 - beta)? * t.powf(p - beta))
}

/// Closed form of the order-alpha fractional derivative of
/// t^{b-1} E_{mu,b}(lam t^mu):  t^{b-1-alpha} E_{mu, b-alpha}(lam t^mu).
/// The relaxation-mode solutions the solver is tested against are exactly
/// of this shape.
pub fn ml_fractional_derivative_identity(
    alpha: f64,
    mu: f64,
    b: f64,
    lam: f64,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "require t > 0",
        });
    }
    let e = mittag_leffler(mu, b - alpha, lam * t.powf(mu), 1e-12)?;
    Ok(t.powf(b - 1.0 - alpha) * e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_match_recursion_examples() {
        assert_eq!(gl_coefficients(0.0, 4), vec![1.0, 0.0, 0.0, 0.0]);
        let c = gl_coefficients(0.5, 4);
        let want = [1.0, -0.5, -0.125, -0.0625];
        for (got, want) in c.iter().zip(want) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        let c = gl_coefficients(1.0, 3);
        assert_eq!(c, vec![1.0, -1.0, 0.0]);
    }

    #[test]
    fn coefficient_partial_sums_match_closed_form() {
        // running sum of the recursion against the Gamma-ratio closed form
        for &beta in &[0.1, 0.5, 0.9] {
            let c = gl_coefficients(beta, 100_000);
            let mut running = 0.0f64;
            for (j, cj) in c.iter().enumerate() {
                running += cj;
                let m = j + 1;
                if m == 10 || m == 1000 || m == 100_000 {
                    let want = gl_coefficient_partial_sum(beta, m).unwrap();
                    let err = (running - want).abs();
                    assert!(
                        err < 1e-9 * want.abs().max(1e-4),
                        "partial sum mismatch at beta={beta}, m={m}: {running} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn coefficient_sums_decay_toward_zero() {
        // The infinite sum is 0 for 0 < beta < 1, approached like m^{-beta}:
        // slow for small beta (still ~0.3 at m=1e5 for beta=0.1), fast for
        // beta near 1. Assert the m^{-beta} decay law, not an absolute bound.
        for &beta in &[0.1, 0.5, 0.9] {
            let s3 = gl_coefficient_partial_sum(beta, 1_000).unwrap();
            let s5 = gl_coefficient_partial_sum(beta, 100_000).unwrap();
            let ratio = s5 / s3;
            let want = 100f64.powf(-beta);
            assert!(
                (ratio / want - 1.0).abs() < 0.01,
                "decay law fails for beta={beta}: ratio {ratio}, want {want}"
            );
            assert!(s5 > 0.0 && s5 < s3);
        }
        // near-unity order really does shrink below 1e-3 by m = 1e5
        assert!(gl_coefficient_partial_sum(0.9, 100_000).unwrap() < 1e-3);
    }

    #[test]
    fn order_zero_is_identity() {
        let sig = SampledSignal::from_fn(0.01, 0.0, 50, |t| (3.0 * t).sin() + 2.0).unwrap();
        let out = gl_derivative(&sig, 0.0).unwrap();
        for (a, b) in out.values.iter().zip(&sig.values) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn half_derivative_of_t_matches_closed_form() {
        let sig = SampledSignal::from_fn(1e-3, 0.0, 1001, |t| t).unwrap();
        let out = gl_derivative(&sig, 0.5).unwrap();
        let got = out.values[1000];
        let want = caputo_oracle_power(0.5, 1.0, 1.0).unwrap(); // 2/sqrt(pi)
        assert!((want - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!(
            ((got - want) / want).abs() < 1e-2,
            "got {got}, want {want}"
        );
    }

    #[test]
    fn constant_signal_keeps_initial_value_memory() {
        // GL here approximates Riemann-Liouville: for f = c the output tends
        // to c t^{-beta}/Gamma(1-beta), not zero.
        let c = 3.2;
        let beta = 0.3;
        let sig = SampledSignal::from_fn(1e-3, 0.0, 1001, |_| c).unwrap();
        let out = gl_derivative(&sig, beta).unwrap();
        let t = 1.0f64;
        let want = c * t.powf(-beta) / gamma(1.0 - beta).unwrap();
        let got = out.values[1000];
        assert!(
            ((got - want) / want).abs() < 1e-2,
            "got {got}, want {want}"
        );
    }

    #[test]
    fn linearity_to_machine_precision() {
        let f = SampledSignal::from_fn(0.02, 0.0, 80, |t| (t * 2.0).sin()).unwrap();
        let g = SampledSignal::from_fn(0.02, 0.0, 80, |t| (1.0 + t).ln()).unwrap();
        let (a, b) = (2.5, -1.3);
        let combo = SampledSignal::new(
            0.02,
            0.0,
            f.values
                .iter()
                .zip(&g.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
        .unwrap();
        let beta = 0.6;
        let df = gl_derivative(&f, beta).unwrap();
        let dg = gl_derivative(&g, beta).unwrap();
        let dc = gl_derivative(&combo, beta).unwrap();
        for k in 0..80 {
            let want = a * df.values[k] + b * dg.values[k];
            let scale = want.abs().max(1.0);
            assert!(
                (dc.values[k] - want).abs() < 1e-12 * scale,
                "linearity fails at k={k}"
            );
        }
    }

    #[test]
    fn composition_adds_orders() {
        // (1-L)^b1 (1-L)^b2 = (1-L)^(b1+b2) exactly as discrete operators,
        // so the composed derivative matches the single application to
        // rounding, not just O(dt).
        let f = SampledSignal::from_fn(0.05, 0.0, 120, |t| t * t * (1.0 + t).sqrt()).unwrap();
        let (b1, b2) = (0.3, 0.45);
        let step1 = gl_derivative(&f, b1).unwrap();
        let composed = gl_derivative(&step1, b2).unwrap();
        let direct = gl_derivative(&f, b1 + b2).unwrap();
        for k in 0..120 {
            let scale = direct.values[k].abs().max(1.0);
            assert!(
                (composed.values[k] - direct.values[k]).abs() < 1e-11 * scale,
                "composition fails at k={k}: {} vs {}",
                composed.values[k],
                direct.values[k]
            );
        }
    }

    #[test]
    fn convergence_is_first_order_on_powers() {
        // error at t = 1 at least halves when dt halves
        let beta = 0.4;
        let p = 1.5;
        let want = caputo_oracle_power(beta, p, 1.0).unwrap();
        let err_at = |n: usize| {
            let sig = SampledSignal::from_fn(1.0 / n as f64, 0.0, n + 1, |t| t.powf(p)).unwrap();
            let out = gl_derivative(&sig, beta).unwrap();
            (out.values[n] - want).abs()
        };
        let e1 = err_at(500);
        let e2 = err_at(1000);
        assert!(
            e2 <= 0.6 * e1,
            "no first-order convergence: e(dt)={e1:e}, e(dt/2)={e2:e}"
        );
    }

    #[test]
    fn ml_derivative_identity_matches_gl_oracle() {
        // f(t) = E_{1,1}(-t) = exp(-t); its order-1/2 derivative in closed
        // form is t^{-1/2} E_{1,1/2}(-t). Cross-check against the sampled GL
        // operator at t = 1.
        let closed = ml_fractional_derivative_identity(0.5, 1.0, 1.0, -1.0, 1.0).unwrap();
        let n = 10_000;
        let sig = SampledSignal::from_fn(1.0 / n as f64, 0.0, n + 1, |t| (-t).exp()).unwrap();
        let out = gl_derivative(&sig, 0.5).unwrap();
        let got = out.values[n];
        assert!(
            ((got - closed) / closed).abs() < 1e-2,
            "GL {got} vs closed form {closed}"
        );
        // and the closed form itself equals the independently evaluated E
        let e = mittag_leffler(1.0, 0.5, -1.0, 1e-12).unwrap();
        assert!(((closed - e) / e).abs() < 1e-13);
    }

    #[test]
    fn ml_derivative_identity_order_zero_is_plain_function() {
        let v = ml_fractional_derivative_identity(0.0, 0.8, 1.0, -2.0, 1.7).unwrap();
        let want = mittag_leffler(0.8, 1.0, -2.0 * 1.7f64.powf(0.8), 1e-12).unwrap();
        assert!(((v - want) / want).abs() < 1e-13);
    }

    #[test]
    fn windowed_memory_truncation() {
        let sig = SampledSignal::from_fn(0.01, 0.0, 200, |t| (t * 3.0).cos()).unwrap();
        let full = gl_derivative(&sig, 0.5).unwrap();
        let win = gl_derivative_windowed(&sig, 0.5, Some(50)).unwrap();
        // identical while history fits the window
        for k in 0..50 {
            assert_eq!(full.values[k], win.values[k]);
        }
        // different (but close) once truncation bites
        let k = 199;
        assert!(full.values[k] != win.values[k]);
        let rel = ((full.values[k] - win.values[k]) / full.values[k]).abs();
        assert!(rel < 0.2, "window truncation wildly off: rel {rel}");
    }

    #[test]
    fn operator_rejects_bad_input() {
        let sig = SampledSignal::from_fn(0.1, 0.0, 4, |t| t).unwrap();
        assert!(gl_derivative(&sig, 1.0).is_err());
        assert!(gl_derivative(&sig, -0.1).is_err());
        assert!(SampledSignal::new(0.0, 0.0, vec![1.0]).is_err());
        assert!(SampledSignal::new(0.1, 0.0, vec![]).is_err());
        assert!(caputo_oracle_power(0.5, 0.0, 1.0).is_err());
        assert!(caputo_oracle_power(0.5, 1.0, 0.0).is_err());
        assert!(caputo_oracle_power(1.0, 1.0, 1.0).is_err());
    }
}
