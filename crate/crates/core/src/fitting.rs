//! Creep-curve fitting: recover (M, beta, lambda_beta) from a measured
//! settlement record by derivative-free RMS minimization against the
//! incompressible closed-form creep curve at z = 0.
//!
//! The simplex runs in a transformed space (log M, logit beta, log
//! lambda_beta) so every candidate the optimizer can express is a legal
//! parameter set. Ramped load application is deliberately ignored here;
//! the record is fitted with the step-load curve, and ramp sensitivity is
//! the solver module's job.

use crate::analytic::ConsolidationProblem;
use crate::error::{Error, Result};
use crate::material::{IncompressibleParams, ParamSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// One confined-compression creep record.
#[derive(Debug, Clone)]
pub struct CreepDataset {
    pub sample_id: String,
    /// sample height (drainage path), m
    pub h: f64,
    /// applied axial stress, Pa
    pub p_a: f64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
}

impl CreepDataset {
    pub fn new(sample_id: &str, h: f64, p_a: f64, t: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter { name: "h", value: h, reason: "height must be > 0" });
        }
        if !(p_a > 0.0 && p_a.is_finite()) {
            return Err(Error::InvalidParameter { name: "P_A", value: p_a, reason: "stress must be > 0" });
        }
        if t.len() != u.len() {
            return Err(Error::BadData(format!(
                "time and displacement lengths differ ({} vs {})",
                t.len(),
                u.len()
            )));
        }
        if t.is_empty() {
            return Err(Error::BadData("empty dataset".into()));
        }
        if t[0] < 0.0 {
            return Err(Error::BadData(format!("negative time {}", t[0])));
        }
        for i in 1..t.len() {
            if !(t[i] > t[i - 1]) {
                return Err(Error::BadData(format!(
                    "time not strictly increasing at index {i} ({} then {})",
                    t[i - 1],
                    t[i]
                )));
            }
        }
        if let Some(bad) = u.iter().find(|v| !v.is_finite()) {
            return Err(Error::BadData(format!("non-finite displacement {bad}")));
        }
        Ok(CreepDataset { sample_id: sample_id.to_string(), h, p_a, t, u })
    }

    /// Advisories that do not block the fit.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.t.len() < 10 {
            w.push(format!("only {} samples; at least 10 recommended", self.t.len()));
        }
        if let Some(&first) = self.t.iter().find(|&&v| v > 0.0) {
            let decades = (self.t[self.t.len() - 1] / first).log10();
            if decades < 2.0 {
                w.push(format!(
                    "time span covers {decades:.2} decades; at least 2 recommended"
                ));
            }
        }
        w
    }

    fn check_not_degenerate(&self) -> Result<()> {
        let max = self.u.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.u.iter().cloned().fold(f64::MAX, f64::min);
        if max - min <= 4.0 * f64::EPSILON * max.abs().max(min.abs()) {
            return Err(Error::BadData("displacement record is constant".into()));
        }
        if max <= 0.0 {
            return Err(Error::BadData("displacement never becomes positive".into()));
        }
        Ok(())
    }
}

/// Recovered parameters and the quality of the fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: &'static str,
    pub m: f64,
    pub beta: f64,
    pub lambda_beta: f64,
    /// RMS misfit in meters, recomputed at tight series tolerance
    pub rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

fn creep_curve(m: f64, beta: f64, lambda_beta: f64, h: f64, p_a: f64, t: f64, tol: f64) -> Result<f64> {
    let params = ParamSet::Incompressible(IncompressibleParams::new(m, beta, lambda_beta)?);
    ConsolidationProblem::new(params, h, p_a)?
        .with_series_tol(tol)
        .displacement(0.0, t)
}

fn rms_at_tol(ds: &CreepDataset, m: f64, beta: f64, lambda_beta: f64, tol: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (&t, &u) in ds.t.iter().zip(&ds.u) {
        let model = creep_curve(m, beta, lambda_beta, ds.h, ds.p_a, t, tol)?;
        acc += (model - u) * (model - u);
    }
    Ok((acc / ds.t.len() as f64).sqrt())
}

/// RMS misfit of a candidate against the record, at reporting tolerance.
pub fn rms_objective(ds: &CreepDataset, m: f64, beta: f64, lambda_beta: f64) -> Result<f64> {
    rms_at_tol(ds, m, beta, lambda_beta, 1e-12)
}

/// Nelder-Mead controls; defaults follow the classic fminsearch shape
/// parameters (reflect 1, expand 2, contract 1/2, shrink 1/2).
#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// simplex diameter stop (max-norm over vertices)
    pub tol_x: f64,
    /// objective spread stop
    pub tol_f: f64,
    pub max_iter: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            tol_x: 1e-9,
            tol_f: 1e-13,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Downhill simplex minimization. Deterministic; stops when both the
/// vertex spread and the objective spread fall under their tolerances,
/// or at the iteration cap (converged = false, best point kept).
pub fn nelder_mead<F>(mut objective: F, x0: &[f64], opts: &NmOptions) -> Result<NmOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::BadData("empty start point".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadData("non-finite start point".into()));
    }
    // initial simplex: perturb one coordinate per vertex by 5%
    // (0.00025 absolute where the coordinate is zero)
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        if v[i] != 0.0 {
            v[i] *= 1.05;
        } else {
            v[i] = 0.00025;
        }
        verts.push(v);
    }
    let mut fs = Vec::with_capacity(n + 1);
    for v in &verts {
        fs.push(objective(v)?);
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        // order best..worst
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap_or(std::cmp::Ordering::Equal));
        let reorder_v: Vec<Vec<f64>> = idx.iter().map(|&i| verts[i].clone()).collect();
        let reorder_f: Vec<f64> = idx.iter().map(|&i| fs[i]).collect();
        verts = reorder_v;
        fs = reorder_f;

        let spread_x = verts[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&verts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread_f = fs[1..]
            .iter()
            .map(|f| (f - fs[0]).abs())
            .fold(0.0f64, f64::max);
        if spread_x <= opts.tol_x && spread_f <= opts.tol_f {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| verts[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = verts[n].clone();
        let fworst = fs[n];
        let mix = |a: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + a * (c - w))
                .collect()
        };

        let xr = mix(opts.reflection);
        let fr = objective(&xr)?;
        if fr < fs[0] {
            let xe = mix(opts.reflection * opts.expansion);
            let fe = objective(&xe)?;
            if fe < fr {
                verts[n] = xe;
                fs[n] = fe;
            } else {
                verts[n] = xr;
                fs[n] = fr;
            }
            continue;
        }
        if fr < fs[n - 1] {
            verts[n] = xr;
            fs[n] = fr;
            continue;
        }
        if fr < fworst {
            // outside contraction
            let xc = mix(opts.reflection * opts.contraction);
            let fc = objective(&xc)?;
            if fc <= fr {
                verts[n] = xc;
                fs[n] = fc;
                continue;
            }
        } else {
            // inside contraction
            let xc = mix(-opts.contraction);
            let fc = objective(&xc)?;
            if fc < fworst {
                verts[n] = xc;
                fs[n] = fc;
                continue;
            }
        }
        // shrink toward the best vertex
        for i in 1..=n {
            let vi: Vec<f64> = verts[i]
                .iter()
                .zip(&verts[0])
                .map(|(v, b)| b + opts.shrink * (v - b))
                .collect();
            fs[i] = objective(&vi)?;
            verts[i] = vi;
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if fs[i] < fs[best] {
            best = i;
        }
    }
    Ok(NmOutcome {
        x: verts[best].clone(),
        f: fs[best],
        iterations,
        converged,
    })
}

fn logit(b: f64) -> f64 {
    (b / (1.0 - b)).ln()
}

fn logistic(y: f64) -> f64 {
    1.0 / (1.0 + (-y).exp())
}

/// A fit-model strategy: how candidate parameters map onto the
/// unconstrained simplex space. Classical fixes beta = 0.
pub trait FitModel: Sync {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn pack(&self, m: f64, beta: f64, lambda_beta: f64) -> Vec<f64>;
    fn unpack(&self, x: &[f64]) -> (f64, f64, f64);
}

struct FractionalFit;

impl FitModel for FractionalFit {
    fn name(&self) -> &'static str {
        "fractional"
    }
    fn dim(&self) -> usize {
        3
    }
    fn pack(&self, m: f64, beta: f64, lambda_beta: f64) -> Vec<f64> {
        vec![m.ln(), logit(beta), lambda_beta.ln()]
    }
    fn unpack(&self, x: &[f64]) -> (f64, f64, f64) {
        (x[0].exp(), logistic(x[1]), x[2].exp())
    }
}

struct ClassicalFit;

impl FitModel for ClassicalFit {
    fn name(&self) -> &'static str {
        "classical"
    }
    fn dim(&self) -> usize {
        2
    }
    fn pack(&self, m: f64, _beta: f64, lambda_beta: f64) -> Vec<f64> {
        vec![m.ln(), lambda_beta.ln()]
    }
    fn unpack(&self, x: &[f64]) -> (f64, f64, f64) {
        (x[0].exp(), 0.0, x[1].exp())
    }
}

static FIT_MODELS: [&dyn FitModel; 2] = [&FractionalFit, &ClassicalFit];

pub fn fit_registry() -> &'static [&'static dyn FitModel] {
    &FIT_MODELS
}

pub fn fit_lookup(name: &str) -> Result<&'static dyn FitModel> {
    fit_registry()
        .iter()
        .copied()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "fit model",
            name: name.to_string(),
            choices: "fractional, classical",
        })
}

/// Starting point when the caller gives none: M from the final-sample
/// plateau, beta = 1/2, lambda_beta by bisecting the half-settlement time
/// under those two.
fn initial_guess(ds: &CreepDataset) -> Result<(f64, f64, f64)> {
    let u_end = *ds.u.last().unwrap();
    let u_peak = ds.u.iter().cloned().fold(f64::MIN, f64::max);
    let plateau = if u_end > 0.0 { u_end } else { u_peak };
    let m0 = ds.p_a * ds.h / plateau;
    let beta0 = 0.5;
    let target = 0.5 * plateau;
    let t_half = ds
        .t
        .iter()
        .zip(&ds.u)
        .find(|(_, &u)| u >= target)
        .map(|(&t, _)| t)
        .filter(|&t| t > 0.0)
        .unwrap_or(ds.t[ds.t.len() / 2].max(ds.t[ds.t.len() - 1] * 1e-3));
    let mut lo = -60.0f64; // ln lambda_beta bracket
    let mut hi = 0.0f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let u_mid = creep_curve(m0, beta0, mid.exp(), ds.h, ds.p_a, t_half, 1e-6)
            .unwrap_or(f64::INFINITY);
        if u_mid < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((m0, beta0, (0.5 * (lo + hi)).exp()))
}

/// Fit one record with one model. The optimizer sees the series at a
/// relaxed tolerance; the reported rms is recomputed tight.
pub fn fit_creep(
    ds: &CreepDataset,
    model: &dyn FitModel,
    x0: Option<(f64, f64, f64)>,
) -> Result<FitResult> {
    ds.check_not_degenerate()?;
    let (m0, b0, l0) = match x0 {
        Some(v) => v,
        None => initial_guess(ds)?,
    };
    let start = model.pack(m0, b0, l0);
    fit_from_packed(ds, model, &start)
}

fn fit_from_packed(ds: &CreepDataset, model: &dyn FitModel, start: &[f64]) -> Result<FitResult> {
    let objective = |x: &[f64]| -> Result<f64> {
        let (m, b, l) = model.unpack(x);
        // out-of-range overflow (exp -> inf) shows up as an evaluation
        // error; rank it below every finite candidate instead of aborting
        Ok(rms_at_tol(ds, m, b, l, 1e-8).unwrap_or(f64::INFINITY))
    };
    let out = nelder_mead(objective, start, &NmOptions::default())?;
    let (m, beta, lambda_beta) = model.unpack(&out.x);
    let rms = rms_objective(ds, m, beta, lambda_beta)?;
    Ok(FitResult {
        model: model.name(),
        m,
        beta,
        lambda_beta,
        rms,
        iterations: out.iterations,
        converged: out.converged,
        warnings: ds.warnings(),
    })
}

/// Best-of-n fit over seeded starting points. Start 0 is the plain start;
/// start i jitters it in transform space with radius growing in i, so
/// later starts explore farther. Same seed, same result.
pub fn multistart_fit(
    ds: &CreepDataset,
    model: &dyn FitModel,
    n_starts: usize,
    seed: u64,
    x0: Option<(f64, f64, f64)>,
) -> Result<FitResult> {
    if n_starts == 0 {
        return Err(Error::InvalidParameter {
            name: "n_starts",
            value: 0.0,
            reason: "need at least one start",
        });
    }
    ds.check_not_degenerate()?;
    let (m0, b0, l0) = match x0 {
        Some(v) => v,
        None => initial_guess(ds)?,
    };
    let base = model.pack(m0, b0, l0);
    let mut best: Option<FitResult> = None;
    let mut failed = 0usize;
    let mut last_err: Option<Error> = None;
    for i in 0..n_starts {
        let start = if i == 0 {
            base.clone()
        } else {
            let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let radius = 0.5 * (1.0 + i as f64);
            base.iter()
                .map(|v| v + rng.gen_range(-radius..radius))
                .collect()
        };
        // A start can wander somewhere the model cannot be evaluated at
        // reporting precision; drop that start rather than the whole fit.
        match fit_from_packed(ds, model, &start) {
            Ok(fit) => {
                if best.as_ref().map_or(true, |b| fit.rms < b.rms) {
                    best = Some(fit);
                }
            }
            Err(e) => {
                failed += 1;
                last_err = Some(e);
            }
        }
    }
    match best {
        Some(mut fit) => {
            if failed > 0 {
                fit.warnings
                    .push(format!("{failed} of {n_starts} starts failed to evaluate"));
            }
            Ok(fit)
        }
        None => Err(last_err.unwrap()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    fn synth(m: f64, beta: f64, lambda_beta: f64, h: f64, p_a: f64, noise: f64, seed: u64) -> (CreepDataset, f64) {
        // geometric cadence, 40 points over 10..4500 s
        let n = 40;
        let (t0, t1) = (10.0f64, 4500.0f64);
        let mut t = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut floor_acc = 0.0;
        for i in 0..n {
            let ti = t0 * (t1 / t0).powf(i as f64 / (n - 1) as f64);
            let clean = creep_curve(m, beta, lambda_beta, h, p_a, ti, 1e-12).unwrap();
            let eps = if noise > 0.0 { noise * rng.gen_range(-1.0..1.0) } else { 0.0 };
            t.push(ti);
            u.push(clean * (1.0 + eps));
            floor_acc += (clean * eps) * (clean * eps);
        }
        let floor = (floor_acc / n as f64).sqrt();
        (CreepDataset::new("SYN", h, p_a, t, u).unwrap(), floor)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn dataset_validation() {
        assert!(CreepDataset::new("x", 1e-3, 7e4, vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(CreepDataset::new("x", 1e-3, 7e4, vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(CreepDataset::new("x", 1e-3, 7e4, vec![-1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(CreepDataset::new("x", 1e-3, 7e4, vec![0.0, 1.0], vec![0.0, f64::NAN]).is_err());
        let ds = CreepDataset::new("x", 1e-3, 7e4, vec![1.0, 2.0, 4.0], vec![1e-5, 2e-5, 3e-5]).unwrap();
        let w = ds.warnings();
        assert_eq!(w.len(), 2, "{w:?}");
        assert!(w[0].contains("samples"));
        assert!(w[1].contains("decades"));
        let flat = CreepDataset::new("x", 1e-3, 7e4, vec![1.0, 2.0], vec![5e-5, 5e-5]).unwrap();
        assert!(fit_creep(&flat, fit_lookup("fractional").unwrap(), None).is_err());
    }

    #[test]
    fn objective_zero_on_generating_candidate() {
        let (ds, _) = synth(1.27e5, 0.73, 2.95e-12, 3.7e-3, 7e4, 0.0, 0);
        let r = rms_objective(&ds, 1.27e5, 0.73, 2.95e-12).unwrap();
        assert!(r <= 1e-14, "{r}");
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| -> Result<f64> {
            Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
        };
        let out = nelder_mead(rosen, &[-1.2, 1.0], &NmOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-4, "{:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-4, "{:?}", out.x);
    }

    #[test]
    fn nelder_mead_quadratic_bowl_and_constant() {
        let bowl = |x: &[f64]| -> Result<f64> {
            Ok((x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2))
        };
        let out = nelder_mead(bowl, &[0.0, 0.0], &NmOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 3.0).abs() < 1e-8 && (out.x[1] + 1.0).abs() < 1e-8, "{:?}", out.x);

        let flat = |_: &[f64]| -> Result<f64> { Ok(42.0) };
        let out = nelder_mead(flat, &[7.0, -2.0], &NmOptions::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.x, vec![7.0, -2.0]);
        assert_eq!(out.f, 42.0);
    }

    #[test]
    fn nelder_mead_iteration_cap_flags() {
        let mut opts = NmOptions::default();
        opts.max_iter = 3;
        let rosen = |x: &[f64]| -> Result<f64> {
            Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
        };
        let out = nelder_mead(rosen, &[-1.2, 1.0], &opts).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
        assert!(out.f.is_finite());
    }

    #[test]
    fn noiseless_round_trip_tight() {
        let (ds, _) = synth(1.27e5, 0.73, 2.95e-12, 3.7e-3, 7e4, 0.0, 0);
        let fit = fit_creep(&ds, fit_lookup("fractional").unwrap(), None).unwrap();
        assert!(fit.converged);
        assert!(rel(fit.m, 1.27e5) < 1e-3, "M {}", fit.m);
        assert!(rel(fit.beta, 0.73) < 1e-3, "beta {}", fit.beta);
        assert!(rel(fit.lambda_beta, 2.95e-12) < 1e-3, "lambda {}", fit.lambda_beta);
        assert!(fit.rms < 1e-9, "rms {}", fit.rms);
    }

    #[test]
    fn noisy_round_trip_recovers_and_meets_quality_gate() {
        let (ds, floor) = synth(1.27e5, 0.73, 2.95e-12, 3.7e-3, 7e4, 0.005, 42);
        let fit = fit_creep(&ds, fit_lookup("fractional").unwrap(), None).unwrap();
        assert!(rel(fit.m, 1.27e5) < 0.05, "M {}", fit.m);
        assert!(rel(fit.beta, 0.73) < 0.05, "beta {}", fit.beta);
        assert!(rel(fit.lambda_beta, 2.95e-12) < 0.05, "lambda {}", fit.lambda_beta);
        assert!(fit.rms <= 1.5 * floor, "rms {} floor {floor}", fit.rms);
    }

    #[test]
    fn classical_fit_is_strictly_worse_on_fractional_data() {
        let (ds, _) = synth(1.27e5, 0.73, 2.95e-12, 3.7e-3, 7e4, 0.005, 7);
        let frac = fit_creep(&ds, fit_lookup("fractional").unwrap(), None).unwrap();
        let classical = fit_creep(&ds, fit_lookup("classical").unwrap(), None).unwrap();
        assert_eq!(classical.beta, 0.0);
        assert!(
            classical.rms > frac.rms,
            "classical {} vs fractional {}",
            classical.rms,
            frac.rms
        );
    }

    #[test]
    fn scaling_invariances() {
        let (ds, _) = synth(1.27e5, 0.73, 2.95e-12, 3.7e-3, 7e4, 0.002, 11);
        let model = fit_lookup("fractional").unwrap();
        let base = fit_creep(&ds, model, None).unwrap();
        let c = 3.0;

        // scaling u and P_A together changes nothing but the rms scale
        let both = CreepDataset::new(
            "scaled",
            ds.h,
            ds.p_a * c,
            ds.t.clone(),
            ds.u.iter().map(|v| v * c).collect(),
        )
        .unwrap();
        let fit_both = fit_creep(&both, model, None).unwrap();
        assert!(rel(fit_both.m, base.m) < 1e-6, "{} vs {}", fit_both.m, base.m);
        assert!(rel(fit_both.beta, base.beta) < 1e-6);
        assert!(rel(fit_both.lambda_beta, base.lambda_beta) < 1e-6);
        assert!(rel(fit_both.rms, c * base.rms) < 1e-4);

        // scaling P_A alone rescales M by c and lambda_beta by 1/c,
        // keeping the curve (and beta) fixed
        let stress_only =
            CreepDataset::new("stress", ds.h, ds.p_a * c, ds.t.clone(), ds.u.clone()).unwrap();
        let fit_stress = fit_creep(&stress_only, model, None).unwrap();
        assert!(rel(fit_stress.m, c * base.m) < 1e-4, "{} vs {}", fit_stress.m, c * base.m);
        assert!(rel(fit_stress.beta, base.beta) < 1e-4);
        assert!(rel(fit_stress.lambda_beta, base.lambda_beta / c) < 1e-4);
    }

    #[test]
    fn transforms_never_leave_bounds() {
        let (ds, _) = synth(1.27e5, 0.73, 2.95e-12, 3.7e-3, 7e4, 0.005, 3);
        let model = fit_lookup("fractional").unwrap();
        let seen = RefCell::new(Vec::new());
        let objective = |x: &[f64]| -> Result<f64> {
            let (m, b, l) = model.unpack(x);
            seen.borrow_mut().push((m, b, l));
            Ok(rms_at_tol(&ds, m, b, l, 1e-8).unwrap_or(f64::INFINITY))
        };
        let start = model.pack(5e4, 0.3, 1e-13);
        nelder_mead(objective, &start, &NmOptions::default()).unwrap();
        let seen = seen.into_inner();
        assert!(seen.len() > 50);
        for (m, b, l) in seen {
            assert!(m > 0.0);
            assert!((0.0..1.0).contains(&b));
            assert!(l > 0.0);
        }
    }

    #[test]
    fn multistart_deterministic_and_single_start_matches() {
        let (ds, _) = synth(1.27e5, 0.73, 2.95e-12, 3.7e-3, 7e4, 0.005, 5);
        let model = fit_lookup("fractional").unwrap();
        let single = fit_creep(&ds, model, None).unwrap();
        let ms1 = multistart_fit(&ds, model, 1, 99, None).unwrap();
        assert_eq!(ms1.m, single.m);
        assert_eq!(ms1.beta, single.beta);
        let a = multistart_fit(&ds, model, 4, 123, None).unwrap();
        let b = multistart_fit(&ds, model, 4, 123, None).unwrap();
        assert_eq!(a.m, b.m);
        assert_eq!(a.rms, b.rms);
        assert!(multistart_fit(&ds, model, 0, 1, None).is_err());
    }

    #[test]
    fn multistart_recovers_from_adversarial_start() {
        let (ds, _) = synth(1.27e5, 0.73, 2.95e-12, 3.7e-3, 7e4, 0.005, 9);
        let model = fit_lookup("fractional").unwrap();
        // two orders of magnitude off in M and lambda, beta near the floor
        let bad = (1.27e7, 0.05, 2.95e-15);
        let fit = multistart_fit(&ds, model, 8, 2024, Some(bad)).unwrap();
        assert!(rel(fit.m, 1.27e5) < 0.05, "M {}", fit.m);
        assert!(rel(fit.beta, 0.73) < 0.05, "beta {}", fit.beta);
        assert!(rel(fit.lambda_beta, 2.95e-12) < 0.05, "lambda {}", fit.lambda_beta);
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(fit_registry().len(), 2);
        assert!(fit_lookup("fractional").is_ok());
        assert!(fit_lookup("classical").is_ok());
        assert!(fit_lookup("biphasic").is_err());
    }
}
