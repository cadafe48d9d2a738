//! Material parameter records and derived consolidation constants.
//!
//! Two families are supported: the compressible record (drained bulk and
//! shear moduli plus Biot/Skempton coupling) and the incompressible limit
//! (alpha = B = 1), where only the aggregate modulus survives and the
//! consolidation coefficient collapses to lambda_beta * M. The biphasic
//! mixture description maps onto the incompressible record at beta = 0.

use crate::error::{Error, Result};
use std::path::Path;

fn check(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}

/// Compressible poroelastic parameters (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// drained bulk modulus, Pa
    pub bulk: f64,
    /// shear modulus, Pa
    pub shear: f64,
    /// Biot coefficient
    pub alpha: f64,
    /// Skempton coefficient
    pub skempton: f64,
    /// anomalous permeability, m^4 N^-1 s^(beta-1)
    pub lambda_beta: f64,
    /// fractional order of the seepage law
    pub beta: f64,
    /// annotation only; not used by the 1D closed forms
    pub poisson_ratio: Option<f64>,
}

impl MaterialParams {
    pub fn new(
        bulk: f64,
        shear: f64,
        alpha: f64,
        skempton: f64,
        lambda_beta: f64,
        beta: f64,
    ) -> Result<Self> {
        check(bulk > 0.0 && bulk.is_finite(), "K", bulk, "drained bulk modulus must be > 0")?;
        check(shear > 0.0 && shear.is_finite(), "G", shear, "shear modulus must be > 0")?;
        check(alpha > 0.0 && alpha <= 1.0, "alpha", alpha, "require 0 < alpha <= 1")?;
        check(skempton > 0.0 && skempton <= 1.0, "B", skempton, "require 0 < B <= 1")?;
        check(
            lambda_beta > 0.0 && lambda_beta.is_finite(),
            "lambda_beta",
            lambda_beta,
            "permeability must be > 0",
        )?;
        check((0.0..1.0).contains(&beta), "beta", beta, "require 0 <= beta < 1")?;
        if alpha * skempton >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "alpha*B",
                value: alpha * skempton,
                reason: "alpha*B = 1 is the incompressible limit; use IncompressibleParams",
            });
        }
        Ok(MaterialParams {
            bulk,
            shear,
            alpha,
            skempton,
            lambda_beta,
            beta,
            poisson_ratio: None,
        })
    }

    pub fn derive(&self) -> DerivedParams {
        let k = self.bulk;
        let g = self.shear;
        let k_u = k / (1.0 - self.alpha * self.skempton);
        let gamma = 3.0 * (k_u - k) / (self.alpha * (4.0 * g + 3.0 * k_u));
        let lambda_bar = self.lambda_beta * (4.0 * g + 3.0 * k) * (k_u - k)
            / (self.alpha * self.alpha * (4.0 * g + 3.0 * k_u));
        let aggregate = (3.0 * k + 4.0 * g) / 3.0;
        let nu_u = (3.0 * k_u - 2.0 * g) / (2.0 * (3.0 * k_u + g));
        DerivedParams {
            k_u,
            gamma,
            lambda_bar,
            aggregate,
            nu_u,
        }
    }
}

/// Constants derived from `MaterialParams`; everything the closed forms use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// undrained bulk modulus, Pa
    pub k_u: f64,
    /// initial pore-pressure ratio p(z,0)/P_A
    pub gamma: f64,
    /// consolidation coefficient, m^2 s^(beta-1)
    pub lambda_bar: f64,
    /// aggregate (confined) modulus (3K+4G)/3, Pa
    pub aggregate: f64,
    /// undrained Poisson ratio
    pub nu_u: f64,
}

/// Incompressible limit: alpha = B = 1, gamma = 1, lambda_bar = lambda_beta*M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncompressibleParams {
    /// aggregate modulus, Pa
    pub aggregate: f64,
    /// fractional order
    pub beta: f64,
    /// anomalous permeability, m^4 N^-1 s^(beta-1)
    pub lambda_beta: f64,
}

impl IncompressibleParams {
    pub fn new(aggregate: f64, beta: f64, lambda_beta: f64) -> Result<Self> {
        check(aggregate > 0.0 && aggregate.is_finite(), "M", aggregate, "aggregate modulus must be > 0")?;
        check((0.0..1.0).contains(&beta), "beta", beta, "require 0 <= beta < 1")?;
        check(
            lambda_beta > 0.0 && lambda_beta.is_finite(),
            "lambda_beta",
            lambda_beta,
            "permeability must be > 0",
        )?;
        Ok(IncompressibleParams {
            aggregate,
            beta,
            lambda_beta,
        })
    }
}

/// Either parameter family, as consumed by the solution and solver code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSet {
    Compressible(MaterialParams),
    Incompressible(IncompressibleParams),
}

/// The coefficient set every 1D solution is written in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsolidationCoeffs {
    /// p(z,0+)/P_A
    pub gamma: f64,
    /// gamma*alpha, the displacement-series weight (1 when incompressible)
    pub gamma_alpha: f64,
    /// consolidation coefficient, m^2 s^(beta-1)
    pub lambda_bar: f64,
    /// anomalous permeability, m^4 N^-1 s^(beta-1)
    pub lambda_beta: f64,
    /// aggregate modulus (3K+4G)/3, Pa
    pub aggregate: f64,
    /// Biot coefficient (1 when incompressible)
    pub alpha: f64,
    /// fractional order
    pub beta: f64,
}

impl ParamSet {
    pub fn coeffs(&self) -> ConsolidationCoeffs {
        match self {
            ParamSet::Compressible(p) => {
                let d = p.derive();
                ConsolidationCoeffs {
                    gamma: d.gamma,
                    gamma_alpha: d.gamma * p.alpha,
                    lambda_bar: d.lambda_bar,
                    lambda_beta: p.lambda_beta,
                    aggregate: d.aggregate,
                    alpha: p.alpha,
                    beta: p.beta,
                }
            }
            ParamSet::Incompressible(p) => ConsolidationCoeffs {
                gamma: 1.0,
                gamma_alpha: 1.0,
                lambda_bar: p.lambda_beta * p.aggregate,
                lambda_beta: p.lambda_beta,
                aggregate: p.aggregate,
                alpha: 1.0,
                beta: p.beta,
            },
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            ParamSet::Compressible(p) => p.beta,
            ParamSet::Incompressible(p) => p.beta,
        }
    }
}

/// Biphasic (mixture-theory) description of the same test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiphasicParams {
    /// aggregate modulus, Pa
    pub h_a: f64,
    /// permeability over fluid viscosity, m^4 N^-1 s^-1
    pub k_over_mu: f64,
    /// solid/fluid volume ratio
    pub gamma_ratio: f64,
}

impl BiphasicParams {
    pub fn new(h_a: f64, k_over_mu: f64, gamma_ratio: f64) -> Result<Self> {
        check(h_a > 0.0 && h_a.is_finite(), "H_A", h_a, "aggregate modulus must be > 0")?;
        check(
            k_over_mu > 0.0 && k_over_mu.is_finite(),
            "k_over_mu",
            k_over_mu,
            "permeability/viscosity must be > 0",
        )?;
        check(
            gamma_ratio > 0.0 && gamma_ratio.is_finite(),
            "gamma_ratio",
            gamma_ratio,
            "volume ratio must be > 0",
        )?;
        Ok(BiphasicParams {
            h_a,
            k_over_mu,
            gamma_ratio,
        })
    }

    /// Permeability/viscosity from a diffusivity kappa via
    /// k/mu = 1/((1+gamma)^2 kappa).
    pub fn k_over_mu_from_diffusivity(kappa: f64, gamma_ratio: f64) -> Result<f64> {
        check(kappa > 0.0 && kappa.is_finite(), "kappa", kappa, "diffusivity must be > 0")?;
        check(gamma_ratio > 0.0, "gamma_ratio", gamma_ratio, "volume ratio must be > 0")?;
        Ok(1.0 / ((1.0 + gamma_ratio) * (1.0 + gamma_ratio) * kappa))
    }

    /// The order-0 incompressible record with the same consolidation
    /// coefficient H_A * k/mu.
    pub fn as_incompressible(&self) -> Result<IncompressibleParams> {
        IncompressibleParams::new(self.h_a, 0.0, self.k_over_mu)
    }

    /// Inverse of `as_incompressible`; the volume ratio is not represented
    /// on the other side and must be resupplied.
    pub fn from_incompressible(inc: &IncompressibleParams, gamma_ratio: f64) -> Result<Self> {
        if inc.beta != 0.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: inc.beta,
                reason: "biphasic equivalence holds only at beta = 0",
            });
        }
        BiphasicParams::new(inc.aggregate, inc.lambda_beta, gamma_ratio)
    }
}

fn scan_params(text: &str, origin: &str) -> Result<Vec<(String, f64)>> {
    let mut seen: Vec<(String, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, |c: char| c == '=' || c.is_whitespace());
        let key = parts.next().unwrap_or("").trim();
        let val_str = parts.next().unwrap_or("").trim_start_matches('=').trim();
        let value: f64 = val_str.parse().map_err(|_| Error::Input {
            path: origin.to_string(),
            line: idx + 1,
            reason: format!("cannot parse '{val_str}' as a number for key '{key}'"),
        })?;
        if seen.iter().any(|(k, _)| k == key) {
            return Err(Error::Input {
                path: origin.to_string(),
                line: idx + 1,
                reason: format!("duplicate key '{key}'"),
            });
        }
        seen.push((key.to_string(), value));
    }
    Ok(seen)
}

/// Parse a flat key/value parameter file. Keys: K_pa, G_pa, alpha, B,
/// lambda_beta, beta (all required), poisson (optional). '#' starts a
/// comment; `key value` and `key = value` both accepted.
pub fn parse_params_str(text: &str, origin: &str) -> Result<MaterialParams> {
    let mut seen = scan_params(text, origin)?;
    let mut get = |key: &str| -> Option<f64> {
        let pos = seen.iter().position(|(k, _)| k == key)?;
        Some(seen.remove(pos).1)
    };
    let required = |v: Option<f64>, key: &'static str| {
        v.ok_or_else(|| Error::BadData(format!("{origin}: missing required key '{key}'")))
    };
    let bulk = required(get("K_pa"), "K_pa")?;
    let shear = required(get("G_pa"), "G_pa")?;
    let alpha = required(get("alpha"), "alpha")?;
    let skempton = required(get("B"), "B")?;
    let lambda_beta = required(get("lambda_beta"), "lambda_beta")?;
    let beta = required(get("beta"), "beta")?;
    let poisson = get("poisson");
    if let Some((k, _)) = seen.first() {
        return Err(Error::BadData(format!("{origin}: unknown key '{k}'")));
    }
    let mut p = MaterialParams::new(bulk, shear, alpha, skempton, lambda_beta, beta)?;
    p.poisson_ratio = poisson;
    Ok(p)
}

pub fn read_params_file(path: &Path) -> Result<MaterialParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_params_str(&text, &path.display().to_string())
}

/// Parse a params file of either model family: the presence of an `M_pa`
/// key selects the incompressible form (keys M_pa, beta, lambda_beta),
/// otherwise the full poroelastic key set is required.
pub fn parse_param_set_str(text: &str, origin: &str) -> Result<ParamSet> {
    let scanned = scan_params(text, origin)?;
    if !scanned.iter().any(|(k, _)| k == "M_pa") {
        return Ok(ParamSet::Compressible(parse_params_str(text, origin)?));
    }
    let mut seen = scanned;
    let mut get = |key: &str| -> Option<f64> {
        let pos = seen.iter().position(|(k, _)| k == key)?;
        Some(seen.remove(pos).1)
    };
    let required = |v: Option<f64>, key: &'static str| {
        v.ok_or_else(|| Error::BadData(format!("{origin}: missing required key '{key}'")))
    };
    let aggregate = required(get("M_pa"), "M_pa")?;
    let beta = required(get("beta"), "beta")?;
    let lambda_beta = required(get("lambda_beta"), "lambda_beta")?;
    if let Some((k, _)) = seen.first() {
        return Err(Error::BadData(format!("{origin}: unknown key '{k}'")));
    }
    Ok(ParamSet::Incompressible(IncompressibleParams::new(
        aggregate,
        beta,
        lambda_beta,
    )?))
}

pub fn read_param_set_file(path: &Path) -> Result<ParamSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_param_set_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params() -> MaterialParams {
        MaterialParams::new(1.67e5, 7.69e4, 0.65, 0.88, 8.33e-8, 0.0).unwrap()
    }

    #[test]
    fn derived_constants_for_reference_set() {
        let d = reference_params().derive();
        assert!(((d.k_u - 3.9018691588785046e5) / d.k_u).abs() < 1e-12);
        assert!((d.gamma - 0.695).abs() < 0.005, "gamma = {}", d.gamma);
        assert!(((d.gamma - 0.6968751264516652) / d.gamma).abs() < 1e-12);
        assert!(((d.lambda_bar - 2.407e-2) / d.lambda_bar).abs() < 1e-3);
        assert!(((d.aggregate - 269533.333333333333) / d.aggregate).abs() < 1e-12);
        // nu from K,G is ~0.3, and nu_u must exceed it and stay below 0.5
        assert!(d.nu_u > 0.3 && d.nu_u < 0.5, "nu_u = {}", d.nu_u);
    }

    #[test]
    fn undrained_exceeds_drained() {
        let p = reference_params();
        let d = p.derive();
        assert!(d.k_u > p.bulk);
        assert!(d.gamma > 0.0 && d.gamma < 1.0);
        assert!(d.lambda_bar > 0.0);
    }

    #[test]
    fn skempton_monotonicity() {
        // physics: stiffer undrained response and higher initial pressure
        // ratio as B grows, everything else fixed
        let mut prev_ku = 0.0;
        let mut prev_gamma = 0.0;
        for i in 1..9 {
            let b = 0.1 * i as f64;
            let p = MaterialParams::new(1.67e5, 7.69e4, 0.65, b, 8.33e-8, 0.2).unwrap();
            let d = p.derive();
            assert!(d.k_u > prev_ku && d.gamma > prev_gamma, "not monotone at B={b}");
            prev_ku = d.k_u;
            prev_gamma = d.gamma;
        }
    }

    #[test]
    fn incompressible_coeffs() {
        let inc = IncompressibleParams::new(1.27e5, 0.73, 2.95e-12).unwrap();
        let c = ParamSet::Incompressible(inc).coeffs();
        assert_eq!(c.gamma, 1.0);
        assert_eq!(c.gamma_alpha, 1.0);
        assert!((c.lambda_bar - 2.95e-12 * 1.27e5).abs() < 1e-20);
        assert_eq!(c.aggregate, 1.27e5);
        // order 0 reduces to the classical incompressible record
        let classical = IncompressibleParams::new(1.27e5, 0.0, 2.95e-12).unwrap();
        assert_eq!(classical.beta, 0.0);
    }

    #[test]
    fn incompressible_limit_is_rejected_by_compressible_record() {
        assert!(MaterialParams::new(1e5, 1e5, 1.0, 1.0, 1e-10, 0.1).is_err());
    }

    #[test]
    fn biphasic_round_trip_and_diffusivity_link() {
        let bi = BiphasicParams::new(1.27e5, 3.1e-12, 0.25).unwrap();
        let inc = bi.as_incompressible().unwrap();
        assert_eq!(inc.beta, 0.0);
        assert_eq!(inc.aggregate, bi.h_a);
        assert_eq!(inc.lambda_beta, bi.k_over_mu);
        let back = BiphasicParams::from_incompressible(&inc, 0.25).unwrap();
        assert_eq!(back.h_a, bi.h_a);
        assert_eq!(back.k_over_mu, bi.k_over_mu);
        // beta != 0 must refuse the mapping
        let frac = IncompressibleParams::new(1.27e5, 0.5, 3.1e-12).unwrap();
        assert!(BiphasicParams::from_incompressible(&frac, 0.25).is_err());
        // consolidation coefficient equals H_A * k/mu on both sides
        let c = ParamSet::Incompressible(inc).coeffs();
        assert!((c.lambda_bar - bi.h_a * bi.k_over_mu).abs() < 1e-18);
        let km = BiphasicParams::k_over_mu_from_diffusivity(2.0, 0.5).unwrap();
        assert!((km - 1.0 / (2.25 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn unit_audit_lambda_bar_time_scaling() {
        // Exponent vectors (m, N, s) with the time exponent kept as a
        // polynomial c0 + c1*beta. The combination lambda_bar * t^(1-beta)/h^2
        // must come out dimensionless for every beta.
        #[derive(Clone, Copy, PartialEq, Debug)]
        struct U {
            m: f64,
            n: f64,
            s0: f64,
            s_beta: f64,
        }
        let mul = |a: U, b: U| U {
            m: a.m + b.m,
            n: a.n + b.n,
            s0: a.s0 + b.s0,
            s_beta: a.s_beta + b.s_beta,
        };
        let lambda_beta = U { m: 4.0, n: -1.0, s0: -1.0, s_beta: 1.0 }; // m^4 N^-1 s^(beta-1)
        let pascal = U { m: -2.0, n: 1.0, s0: 0.0, s_beta: 0.0 };
        let lambda_bar = mul(lambda_beta, pascal); // modulus ratio in the formula is Pa^1 net
        assert_eq!(lambda_bar, U { m: 2.0, n: 0.0, s0: -1.0, s_beta: 1.0 });
        let t_pow = U { m: 0.0, n: 0.0, s0: 1.0, s_beta: -1.0 }; // t^(1-beta)
        let inv_h2 = U { m: -2.0, n: 0.0, s0: 0.0, s_beta: 0.0 };
        let combo = mul(mul(lambda_bar, t_pow), inv_h2);
        assert_eq!(combo, U { m: 0.0, n: 0.0, s0: 0.0, s_beta: 0.0 });
    }

    #[test]
    fn params_file_parsing() {
        let good = "# reference set\nK_pa 1.67e5\nG_pa 7.69e4\nalpha 0.65\nB = 0.88\nlambda_beta 8.33e-8\nbeta 0\n";
        let p = parse_params_str(good, "inline").unwrap();
        assert_eq!(p.bulk, 1.67e5);
        assert_eq!(p.skempton, 0.88);
        assert_eq!(p.poisson_ratio, None);

        let with_poisson = format!("{good}poisson 0.3\n");
        let p = parse_params_str(&with_poisson, "inline").unwrap();
        assert_eq!(p.poisson_ratio, Some(0.3));

        let bad_num = "K_pa abc\nG_pa 1\nalpha 0.5\nB 0.5\nlambda_beta 1e-9\nbeta 0\n";
        match parse_params_str(bad_num, "inline") {
            Err(Error::Input { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected line-numbered input error, got {other:?}"),
        }

        let missing = "K_pa 1e5\nG_pa 1e5\nalpha 0.5\nB 0.5\nbeta 0\n";
        assert!(parse_params_str(missing, "inline").is_err());

        let unknown = format!("{good}bogus_key 3\n");
        assert!(parse_params_str(&unknown, "inline").is_err());

        let dup = format!("{good}beta 0.5\n");
        assert!(parse_params_str(&dup, "inline").is_err());
    }

    #[test]
    fn param_set_file_selects_model_family() {
        let comp = "K_pa 1.67e5\nG_pa 7.69e4\nalpha 0.65\nB 0.88\nlambda_beta 8.33e-8\nbeta 0.2\n";
        match parse_param_set_str(comp, "inline").unwrap() {
            ParamSet::Compressible(p) => assert_eq!(p.bulk, 1.67e5),
            other => panic!("expected compressible, got {other:?}"),
        }

        let inc = "# creep fit\nM_pa 1.27e5\nbeta 0.73\nlambda_beta 2.95e-12\n";
        match parse_param_set_str(inc, "inline").unwrap() {
            ParamSet::Incompressible(p) => {
                assert_eq!(p.aggregate, 1.27e5);
                assert_eq!(p.beta, 0.73);
            }
            other => panic!("expected incompressible, got {other:?}"),
        }

        let mixed = "M_pa 1e5\nbeta 0.5\nlambda_beta 1e-12\nK_pa 1e5\n";
        assert!(parse_param_set_str(mixed, "inline").is_err());
        let short = "M_pa 1e5\nbeta 0.5\n";
        assert!(parse_param_set_str(short, "inline").is_err());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(MaterialParams::new(-1.0, 7e4, 0.5, 0.5, 1e-9, 0.0).is_err());
        assert!(MaterialParams::new(1e5, 0.0, 0.5, 0.5, 1e-9, 0.0).is_err());
        assert!(MaterialParams::new(1e5, 7e4, 0.0, 0.5, 1e-9, 0.0).is_err());
        assert!(MaterialParams::new(1e5, 7e4, 1.1, 0.5, 1e-9, 0.0).is_err());
        assert!(MaterialParams::new(1e5, 7e4, 0.5, 0.5, 0.0, 0.0).is_err());
        assert!(MaterialParams::new(1e5, 7e4, 0.5, 0.5, 1e-9, 1.0).is_err());
        assert!(IncompressibleParams::new(0.0, 0.5, 1e-12).is_err());
        assert!(BiphasicParams::new(1e5, 0.0, 0.3).is_err());
    }
}
