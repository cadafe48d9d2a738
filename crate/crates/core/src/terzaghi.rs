//! Classical (order-0) consolidation series, coded directly against the
//! exponential kernel. This is a deliberate second implementation: it shares
//! no series machinery with the fractional path and serves as its order-0
//! cross-check.

use crate::analytic::ConsolidationProblem;
use crate::error::{Error, Result};

fn require_order_zero(prob: &ConsolidationProblem) -> Result<()> {
    let beta = prob.params.beta();
    if beta != 0.0 {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "classical series is defined for beta = 0 only",
        });
    }
    Ok(())
}

/// exp(-n^2 pi^2 lambda_bar t / (4 h^2)) mode factors until they underflow
/// past the series tolerance.
fn mode_decays(prob: &ConsolidationProblem, t: f64) -> Vec<f64> {
    let c = prob.coeffs();
    let rate = std::f64::consts::PI * std::f64::consts::PI * c.lambda_bar * t
        / (4.0 * prob.h * prob.h);
    let mut out = Vec::new();
    let mut n = 1usize;
    loop {
        let e = (-(n as f64) * (n as f64) * rate).exp();
        out.push(e);
        if (n >= 5 && e < prob.series_tol) || n + 2 > prob.n_max {
            return out;
        }
        n += 2;
    }
}

/// Terzaghi pore pressure, Pa.
pub fn pressure(prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64> {
    require_order_zero(prob)?;
    if !(0.0..=prob.h).contains(&z) {
        return Err(Error::InvalidParameter { name: "z", value: z, reason: "need 0 <= z <= h" });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter { name: "t", value: t, reason: "need t >= 0" });
    }
    let c = prob.coeffs();
    if t == 0.0 {
        return Ok(if z < prob.h { c.gamma * prob.p_a } else { 0.0 });
    }
    let zb = z / prob.h;
    let mut sum = 0.0;
    for (i, e) in mode_decays(prob, t).iter().enumerate() {
        let n = (2 * i + 1) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * 4.0 / (n * std::f64::consts::PI)
            * (n * std::f64::consts::FRAC_PI_2 * zb).cos()
            * e;
    }
    Ok(c.gamma * prob.p_a * sum)
}

/// Terzaghi settlement, m.
pub fn displacement(prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64> {
    require_order_zero(prob)?;
    if !(0.0..=prob.h).contains(&z) {
        return Err(Error::InvalidParameter { name: "z", value: z, reason: "need 0 <= z <= h" });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter { name: "t", value: t, reason: "need t >= 0" });
    }
    let c = prob.coeffs();
    let pref = prob.p_a * prob.h / c.aggregate;
    let zb = z / prob.h;
    if t == 0.0 {
        return Ok(pref * (1.0 - zb) * (1.0 - c.gamma_alpha));
    }
    let mut sum = 0.0;
    for (i, e) in mode_decays(prob, t).iter().enumerate() {
        let n = (2 * i + 1) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = 8.0 / (n * n * std::f64::consts::PI * std::f64::consts::PI);
        sum += w * (sign * (n * std::f64::consts::FRAC_PI_2 * zb).sin() - 1.0) * e;
    }
    Ok(pref * ((1.0 - zb) + c.gamma_alpha * sum))
}

/// Darcy flux through the drained face z = h, m/s: -lambda_beta dp/dz with
/// the gradient differentiated termwise.
pub fn flux_at_base(prob: &ConsolidationProblem, t: f64) -> Result<f64> {
    require_order_zero(prob)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Undefined { what: "classical flux (singular at t = 0)", value: t });
    }
    let c = prob.coeffs();
    // dp/dz|_h = -gamma P_A (2/h) sum exp(...); sign of each term collapses
    // because sin(n pi/2) = (-1)^((n-1)/2) for odd n
    let sum: f64 = mode_decays(prob, t).iter().sum();
    Ok(c.lambda_beta * c.gamma * prob.p_a * (2.0 / prob.h) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{MaterialParams, ParamSet};

    fn prob() -> ConsolidationProblem {
        let m = MaterialParams::new(1.67e5, 7.69e4, 0.65, 0.88, 8.33e-12, 0.0).unwrap();
        ConsolidationProblem::new(ParamSet::Compressible(m), 3e-3, 7e4).unwrap()
    }

    #[test]
    fn reference_value() {
        let p = pressure(&prob(), 1.5e-3, 10.0).unwrap();
        assert!(((p - 59.7886419450933908279) / p).abs() < 1e-10, "{p}");
    }

    #[test]
    fn matches_order_zero_fractional_path() {
        let pr = prob();
        for t in [0.5, 5.0, 50.0] {
            for zb in [0.0, 0.3, 0.7, 1.0] {
                let z = zb * pr.h;
                let p_frac = pr.pore_pressure(z, t).unwrap();
                let p_cl = pressure(&pr, z, t).unwrap();
                assert!(
                    (p_frac - p_cl).abs() <= 1e-10 * pr.p_a.max(p_cl.abs()),
                    "p mismatch z={z} t={t}: {p_frac} vs {p_cl}"
                );
                let u_frac = pr.displacement(z, t).unwrap();
                let u_cl = displacement(&pr, z, t).unwrap();
                assert!(
                    (u_frac - u_cl).abs() <= 1e-10 * u_cl.abs().max(1e-12),
                    "u mismatch z={z} t={t}: {u_frac} vs {u_cl}"
                );
            }
            let q_frac = pr.flux_at_base(t).unwrap();
            let q_cl = flux_at_base(&pr, t).unwrap();
            assert!(((q_frac - q_cl) / q_cl).abs() < 1e-8, "flux mismatch at t={t}");
        }
    }

    #[test]
    fn rejects_fractional_order() {
        let m = MaterialParams::new(1.67e5, 7.69e4, 0.65, 0.88, 8.33e-12, 0.3).unwrap();
        let pr = ConsolidationProblem::new(ParamSet::Compressible(m), 3e-3, 7e4).unwrap();
        assert!(pressure(&pr, 0.0, 1.0).is_err());
        assert!(displacement(&pr, 0.0, 1.0).is_err());
        assert!(flux_at_base(&pr, 1.0).is_err());
    }
}
