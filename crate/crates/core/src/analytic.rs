//! Closed-form solutions of the 1D fractional consolidation problem.
//!
//! Domain: a layer of height h, drained at z = h, sealed at z = 0, loaded by
//! an axial step stress P_A at t = 0. All fields are eigenfunction series in
//! the odd modes n = 1, 3, 5, ... with Mittag-Leffler time kernels
//! E_{1-beta, b}(x_n), x_n = -n^2 pi^2 lambda_bar t^(1-beta) / (4 h^2).
//!
//! Truncation is adaptive: the kernels are positive and decreasing in n on
//! the negative axis, so the running kernel value bounds the tail. The stop
//! thresholds below fold in the algebraic tail weight of each series.

use crate::error::{Error, Result};
use crate::material::{ConsolidationCoeffs, ParamSet};
use crate::specialfn::mittag_leffler;

pub const DEFAULT_SERIES_TOL: f64 = 1e-10;
pub const DEFAULT_N_MAX: usize = 9999;

/// One confined-compression consolidation setup.
#[derive(Debug, Clone, Copy)]
pub struct ConsolidationProblem {
    pub params: ParamSet,
    /// layer height (drainage path), m
    pub h: f64,
    /// applied axial step stress, Pa
    pub p_a: f64,
    /// relative truncation threshold for the eigenfunction series
    pub series_tol: f64,
    /// hard cap on series terms
    pub n_max: usize,
}

impl ConsolidationProblem {
    pub fn new(params: ParamSet, h: f64, p_a: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter { name: "h", value: h, reason: "layer height must be > 0" });
        }
        if !(p_a > 0.0 && p_a.is_finite()) {
            return Err(Error::InvalidParameter { name: "P_A", value: p_a, reason: "applied stress must be > 0" });
        }
        Ok(ConsolidationProblem {
            params,
            h,
            p_a,
            series_tol: DEFAULT_SERIES_TOL,
            n_max: DEFAULT_N_MAX,
        })
    }

    pub fn with_series_tol(mut self, tol: f64) -> Self {
        self.series_tol = tol;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn coeffs(&self) -> ConsolidationCoeffs {
        self.params.coeffs()
    }

    fn check_z(&self, z: f64) -> Result<()> {
        if !(z >= 0.0 && z <= self.h) {
            return Err(Error::InvalidParameter { name: "z", value: z, reason: "need 0 <= z <= h" });
        }
        Ok(())
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter { name: "t", value: t, reason: "need t >= 0" });
        }
        Ok(())
    }

    /// Decay rate L with x_n = -n^2 L at time t.
    fn mode_rate(&self, c: &ConsolidationCoeffs, t: f64) -> f64 {
        std::f64::consts::PI * std::f64::consts::PI * c.lambda_bar * t.powf(1.0 - c.beta)
            / (4.0 * self.h * self.h)
    }

    /// Kernel values E_{1-beta, b}(-n^2 L) for odd n. The kernels decay only
    /// algebraically (~n^-2) for beta > 0, so the sum is cut once the
    /// two-term large-argument expansion c1/x + c2/x^2 carries the mode, and
    /// the omitted tail is restored in closed form by the callers.
    fn kernels(&self, kind: KernelKind, t: f64) -> Result<Kernels> {
        let c = self.coeffs();
        let a = 1.0 - c.beta;
        let b = match kind {
            KernelKind::Unit => 1.0,
            KernelKind::Flux => a,
            KernelKind::Integrated => 1.0 + a,
        };
        let l = self.mode_rate(&c, t);
        let c1 = crate::specialfn::recip_gamma(b - a);
        let c2 = -crate::specialfn::recip_gamma(b - 2.0 * a);
        // per-mode evaluations need a couple of digits past the stop rule,
        // but no tighter than the kernel evaluators can certify
        let ml_tol = (self.series_tol * 1e-2).max(crate::specialfn::TOL_CERTIFIABLE);
        let mut modes = Vec::new();
        let mut n = 1usize;
        let mut prev_res = f64::INFINITY;
        let mut streak = 0usize;
        loop {
            let x = (n * n) as f64 * l;
            let e = mittag_leffler(a, b, -x, ml_tol)?;
            modes.push((n, e));
            // residual against the expansion bounds the per-mode tail error;
            // weights add at most a factor ~n (unit-weight series)
            let res = (e - c1 / x - c2 / (x * x)).abs();
            let mult = match kind {
                KernelKind::Unit => 1.0,
                KernelKind::Flux | KernelKind::Integrated => n as f64,
            };
            if x >= 4.0 && res <= prev_res && res * mult < self.series_tol {
                streak += 1;
                if n >= 5 && streak >= 2 {
                    return Ok(Kernels { modes, l, c1, c2 });
                }
            } else {
                streak = 0;
            }
            prev_res = res;
            n += 2;
            if n > self.n_max {
                return Err(Error::NonConvergence {
                    what: "eigenfunction series",
                    detail: format!(
                        "tail bound still {res:.3e} at n_max = {}; t = {t} too small to resolve",
                        self.n_max
                    ),
                });
            }
        }
    }

    /// Pore pressure p(z, t), Pa. At t = 0 returns the undrained initial
    /// value gamma*P_A (0 exactly at the drained face).
    pub fn pore_pressure(&self, z: f64, t: f64) -> Result<f64> {
        Ok(self.pore_pressure_profile(&[z], t)?[0])
    }

    /// Pressure profile over several z at one time; kernels shared.
    pub fn pore_pressure_profile(&self, zs: &[f64], t: f64) -> Result<Vec<f64>> {
        for &z in zs {
            self.check_z(z)?;
        }
        self.check_t(t)?;
        let c = self.coeffs();
        let scale = self.p_a * c.gamma;
        if t == 0.0 {
            return Ok(zs.iter().map(|&z| if z < self.h { scale } else { 0.0 }).collect());
        }
        let kern = self.kernels(KernelKind::Unit, t)?;
        let mut out = Vec::with_capacity(zs.len());
        for &z in zs {
            let zb = z / self.h;
            // retained modes with raw kernels, omitted tail via the
            // expansion: sum_all w_n (c1/x_n + c2/x_n^2) has closed Fourier
            // forms, subtract the retained part of it
            let mut s = 0.0;
            let mut a_partial = 0.0;
            for &(n, e) in &kern.modes {
                let nf = n as f64;
                let sign = if n % 4 == 1 { 1.0 } else { -1.0 };
                let w = 4.0 / (nf * std::f64::consts::PI)
                    * sign
                    * (nf * std::f64::consts::FRAC_PI_2 * zb).cos();
                s += w * e;
                let x = nf * nf * kern.l;
                a_partial += w * (kern.c1 / x + kern.c2 / (x * x));
            }
            let a_all = 4.0 / std::f64::consts::PI
                * (kern.c1 / kern.l * fourier::s3_cos(zb)
                    + kern.c2 / (kern.l * kern.l) * fourier::s5_cos(zb));
            out.push(scale * (s + a_all - a_partial));
        }
        Ok(out)
    }

    /// Axial displacement u(z, t), m (settlement positive, u(h, t) = 0).
    /// At t = 0 returns the exact undrained elastic line.
    pub fn displacement(&self, z: f64, t: f64) -> Result<f64> {
        Ok(self.displacement_profile(&[z], t)?[0])
    }

    pub fn displacement_profile(&self, zs: &[f64], t: f64) -> Result<Vec<f64>> {
        for &z in zs {
            self.check_z(z)?;
        }
        self.check_t(t)?;
        let c = self.coeffs();
        let pref = self.p_a * self.h / c.aggregate;
        if t == 0.0 {
            // series at t=0 sums to the linear undrained profile; evaluate it
            // exactly instead of through the slowly converging sum
            return Ok(zs
                .iter()
                .map(|&z| pref * (1.0 - z / self.h) * (1.0 - c.gamma_alpha))
                .collect());
        }
        let kern = self.kernels(KernelKind::Unit, t)?;
        let mut out = Vec::with_capacity(zs.len());
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        for &z in zs {
            let zb = z / self.h;
            let mut s = 0.0;
            let mut a_partial = 0.0;
            for &(n, e) in &kern.modes {
                let nf = n as f64;
                let sign = if n % 4 == 1 { 1.0 } else { -1.0 };
                let w = 8.0 / (nf * nf * pi2)
                    * (sign * (nf * std::f64::consts::FRAC_PI_2 * zb).sin() - 1.0);
                s += w * e;
                let x = nf * nf * kern.l;
                a_partial += w * (kern.c1 / x + kern.c2 / (x * x));
            }
            let a_all = 8.0 / pi2
                * (kern.c1 / kern.l * (fourier::t4_sin(zb) - fourier::SUM_INV_N4)
                    + kern.c2 / (kern.l * kern.l) * (fourier::t6_sin(zb) - fourier::SUM_INV_N6));
            out.push(pref * ((1.0 - zb) + c.gamma_alpha * (s + a_all - a_partial)));
        }
        Ok(out)
    }

    /// Seepage discharge per unit area through the drained face z = h, m/s.
    /// Singular at t = 0 (the t^-beta factor), reported as an error.
    pub fn flux_at_base(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Undefined {
                what: "flux at the drained face (t^-beta kernel is singular at t = 0)",
                value: t,
            });
        }
        let c = self.coeffs();
        let kern = self.kernels(KernelKind::Flux, t)?;
        Ok(c.lambda_beta * c.gamma * self.p_a * (2.0 / self.h)
            * t.powf(-c.beta)
            * kern.unit_weight_total())
    }

    /// Integral of `flux_at_base` over (0, t]: total outflow volume per unit
    /// area, m. The integrable t^-beta singularity is absorbed in closed form.
    pub fn cumulative_base_outflow(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let c = self.coeffs();
        let kern = self.kernels(KernelKind::Integrated, t)?;
        Ok(c.lambda_beta * c.gamma * self.p_a * (2.0 / self.h)
            * t.powf(1.0 - c.beta)
            * kern.unit_weight_total())
    }

    /// Specimen weight W(t), kg: initial weight minus expelled water.
    /// `w_s` is the water density (kg/m^3), `area` the drained face area.
    /// With `first_mode_only` the sum is truncated at n = 1.
    pub fn weight_loss(
        &self,
        w0: f64,
        w_s: f64,
        area: f64,
        t: f64,
        first_mode_only: bool,
    ) -> Result<f64> {
        if !(w0 >= 0.0 && w_s > 0.0 && area > 0.0) {
            return Err(Error::InvalidParameter {
                name: "w0/w_s/area",
                value: w0.min(w_s).min(area),
                reason: "need w0 >= 0, w_s > 0, area > 0",
            });
        }
        self.check_t(t)?;
        if t == 0.0 {
            return Ok(w0);
        }
        let outflow = if first_mode_only {
            let c = self.coeffs();
            let a = 1.0 - c.beta;
            let ml_tol = (self.series_tol * 1e-2).max(crate::specialfn::TOL_CERTIFIABLE);
            let e = mittag_leffler(a, 1.0 + a, -self.mode_rate(&c, t), ml_tol)?;
            c.lambda_beta * c.gamma * self.p_a * (2.0 / self.h) * t.powf(1.0 - c.beta) * e
        } else {
            self.cumulative_base_outflow(t)?
        };
        Ok(w0 - w_s * area * outflow)
    }
}

#[derive(Debug, Clone, Copy)]
enum KernelKind {
    /// E_{1-beta, 1}: pressure and displacement series
    Unit,
    /// E_{1-beta, 1-beta}: flux series
    Flux,
    /// E_{1-beta, 2-beta}: time-integrated flux series
    Integrated,
}

/// Retained raw kernel values plus the expansion coefficients needed to
/// restore the omitted tail in closed form.
struct Kernels {
    modes: Vec<(usize, f64)>,
    l: f64,
    c1: f64,
    c2: f64,
}

impl Kernels {
    /// Total over all odd n with unit weights (flux-type series).
    fn unit_weight_total(&self) -> f64 {
        let mut s = 0.0;
        let mut a_partial = 0.0;
        for &(n, e) in &self.modes {
            s += e;
            let x = (n * n) as f64 * self.l;
            a_partial += self.c1 / x + self.c2 / (x * x);
        }
        let a_all = self.c1 / self.l * fourier::SUM_INV_N2
            + self.c2 / (self.l * self.l) * fourier::SUM_INV_N4;
        s + a_all - a_partial
    }
}

/// Closed forms of the Fourier sums over odd n (j = (n-1)/2, zb in [0,1])
/// used for the series tails.
mod fourier {
    use std::f64::consts::PI;

    /// sum (-1)^j cos(n pi zb/2) / n^3
    pub fn s3_cos(zb: f64) -> f64 {
        PI.powi(3) * (1.0 - zb * zb) / 32.0
    }

    /// sum (-1)^j cos(n pi zb/2) / n^5
    pub fn s5_cos(zb: f64) -> f64 {
        let z2 = zb * zb;
        PI.powi(5) * (5.0 / 1536.0 - z2 / 256.0 + z2 * z2 / 1536.0)
    }

    /// sum (-1)^j sin(n pi zb/2) / n^4
    pub fn t4_sin(zb: f64) -> f64 {
        PI.powi(4) * (zb / 64.0 - zb * zb * zb / 192.0)
    }

    /// sum (-1)^j sin(n pi zb/2) / n^6
    pub fn t6_sin(zb: f64) -> f64 {
        let z3 = zb * zb * zb;
        PI.powi(6) * (5.0 * zb / 3072.0 - z3 / 1536.0 + z3 * zb * zb / 15360.0)
    }

    /// sum over odd n of n^-2, n^-4, n^-6
    pub const SUM_INV_N2: f64 = PI * PI / 8.0;
    pub const SUM_INV_N4: f64 = 1.014678031604192; // pi^4/96
    pub const SUM_INV_N6: f64 = 1.001447076640942; // pi^6/960
}

/// The z = 0 creep curve of the incompressible record:
/// u(t) = (P_A/M) [h - sum E_{1-beta,1}(-n^2 pi^2 lambda_beta M t^(1-beta)/(4h^2)) 8h/(n pi)^2].
pub fn displacement_incompressible(
    m: f64,
    beta: f64,
    lambda_beta: f64,
    h: f64,
    p_a: f64,
    t: f64,
) -> Result<f64> {
    let params = ParamSet::Incompressible(crate::material::IncompressibleParams::new(
        m,
        beta,
        lambda_beta,
    )?);
    ConsolidationProblem::new(params, h, p_a)?.displacement(0.0, t)
}

/// Flux under a sustained constant pressure gradient, normalized by its
/// value at t_ref = 1 s. The lambda_beta and gradient magnitudes cancel in
/// the ratio, which is t^-beta exactly.
pub fn normalized_flux_constant_gradient(
    lambda_beta: f64,
    beta: f64,
    grad_p: f64,
    t: f64,
) -> Result<f64> {
    if !(lambda_beta > 0.0) {
        return Err(Error::InvalidParameter { name: "lambda_beta", value: lambda_beta, reason: "must be > 0" });
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter { name: "beta", value: beta, reason: "require 0 <= beta < 1" });
    }
    if !(grad_p != 0.0 && grad_p.is_finite()) {
        return Err(Error::InvalidParameter { name: "grad_p", value: grad_p, reason: "must be nonzero" });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Undefined { what: "normalized flux (singular at t = 0)", value: t });
    }
    Ok(t.powf(-beta))
}
