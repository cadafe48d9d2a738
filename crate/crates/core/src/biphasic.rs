//! Biphasic (mixture-theory) confined compression creep. The displacement
//! diffusion equation du_t = H_A (k/mu) u_zz shares its BVP with the order-0
//! incompressible record, so the two descriptions must coincide under the
//! parameter mapping in `material::BiphasicParams::as_incompressible`.

use crate::error::{Error, Result};
use crate::material::BiphasicParams;

/// Settlement u(z, t), m, from the biphasic series. Separate exponential
/// implementation kept as the cross-check twin of the order-0 fractional
/// displacement.
pub fn biphasic_displacement(
    bi: &BiphasicParams,
    h: f64,
    p_a: f64,
    z: f64,
    t: f64,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter { name: "h", value: h, reason: "layer height must be > 0" });
    }
    if !(p_a > 0.0 && p_a.is_finite()) {
        return Err(Error::InvalidParameter { name: "P_A", value: p_a, reason: "applied stress must be > 0" });
    }
    if !(0.0..=h).contains(&z) {
        return Err(Error::InvalidParameter { name: "z", value: z, reason: "need 0 <= z <= h" });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter { name: "t", value: t, reason: "need t >= 0" });
    }
    let zb = z / h;
    if t == 0.0 {
        return Ok(0.0);
    }
    let diffusivity = bi.h_a * bi.k_over_mu;
    let rate = std::f64::consts::PI * std::f64::consts::PI * diffusivity * t / (4.0 * h * h);
    let mut sum = 0.0;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let e = (-nf * nf * rate).exp();
        let sign = if n % 4 == 1 { 1.0 } else { -1.0 };
        let w = 8.0 / (nf * nf * std::f64::consts::PI * std::f64::consts::PI);
        sum += w * (sign * (nf * std::f64::consts::FRAC_PI_2 * zb).sin() - 1.0) * e;
        if n >= 5 && e < 1e-14 {
            break;
        }
        n += 2;
        if n > 200_001 {
            return Err(Error::NonConvergence {
                what: "biphasic displacement series",
                detail: format!("t = {t} too small to resolve"),
            });
        }
    }
    Ok(p_a * h / bi.h_a * ((1.0 - zb) + sum))
}
