//! Implicit fixed-step solver for 1D fractional consolidation.
//!
//! Reduces the coupled problem to the scalar pressure equation
//! dp/dt = lambda_bar D^beta[d2p/dz2] + gamma dP/dt, where P(t) is the
//! total applied compressive stress (uniform in z by equilibrium), then
//! recovers displacement by integrating du/dz = (-P + alpha p)/M from the
//! fixed base. Backward Euler in time; the fractional flux is a GL
//! convolution over the stored history with the current step implicit.
//! The time step is fixed for the whole run (GL weights assume it).

use crate::error::{Error, Result};
use crate::fracops::gl_coefficients;
use crate::material::ParamSet;

/// Uniform space-time grid. dz = h/(nz-1); nodes 0..nz-1 with the sealed
/// loaded face at index 0 and the drained fixed base at nz-1.
#[derive(Debug, Clone, Copy)]
pub struct Grid1D {
    pub h: f64,
    pub nz: usize,
    pub dt: f64,
    pub nt: usize,
}

impl Grid1D {
    pub fn new(h: f64, nz: usize, dt: f64, nt: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "require h > 0",
            });
        }
        if nz < 3 {
            return Err(Error::InvalidParameter {
                name: "nz",
                value: nz as f64,
                reason: "require at least 3 nodes",
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: dt,
                reason: "require dt > 0",
            });
        }
        if nt < 1 {
            return Err(Error::InvalidParameter {
                name: "nt",
                value: nt as f64,
                reason: "require at least one step",
            });
        }
        Ok(Grid1D { h, nz, dt, nt })
    }

    /// The grid used throughout the numerical comparisons: 61 nodes,
    /// dt = 0.1 s carried over 400 s.
    pub fn default_for(h: f64) -> Result<Self> {
        Grid1D::new(h, 61, 0.1, 4000)
    }

    pub fn dz(&self) -> f64 {
        self.h / (self.nz - 1) as f64
    }
}

/// Applied loading. Stress programs drive P(t) directly; the displacement
/// program imposes the loaded-face settlement and leaves P(t) unknown.
#[derive(Debug, Clone, Copy)]
pub enum LoadProgram {
    /// P jumps to p_a at t = 0+ (undrained start imposed analytically).
    StressStep { p_a: f64 },
    /// P rises linearly over [0, ramp] then holds at p_a.
    StressRampHold { p_a: f64, ramp: f64 },
    /// Preconditioning ramp to `precondition`*h, then `steps` ramps of
    /// `step`*h each at `rate`*h per second, each followed by a hold.
    DisplacementRampSteps {
        precondition: f64,
        step: f64,
        steps: usize,
        rate: f64,
        hold: f64,
    },
}

impl LoadProgram {
    /// The confined-compression relaxation protocol: 10% h preconditioning,
    /// then five 2% h compression steps at 0.3% h/s, holding `hold` seconds
    /// after every ramp.
    pub fn relaxation_protocol(hold: f64) -> Self {
        LoadProgram::DisplacementRampSteps {
            precondition: 0.10,
            step: 0.02,
            steps: 5,
            rate: 0.003,
            hold,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LoadProgram::StressStep { p_a } => {
                if !(p_a >= 0.0 && p_a.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "p_a",
                        value: p_a,
                        reason: "require finite p_a >= 0",
                    });
                }
            }
            LoadProgram::StressRampHold { p_a, ramp } => {
                if !(p_a >= 0.0 && p_a.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "p_a",
                        value: p_a,
                        reason: "require finite p_a >= 0",
                    });
                }
                if !(ramp > 0.0 && ramp.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "ramp",
                        value: ramp,
                        reason: "require ramp duration > 0 (use StressStep for a jump)",
                    });
                }
            }
            LoadProgram::DisplacementRampSteps {
                precondition,
                step,
                steps,
                rate,
                hold,
            } => {
                if !(precondition >= 0.0 && step > 0.0 && rate > 0.0 && hold >= 0.0) || steps == 0 {
                    return Err(Error::InvalidParameter {
                        name: "displacement program",
                        value: rate,
                        reason: "require step > 0, rate > 0, hold >= 0, steps >= 1",
                    });
                }
            }
        }
        Ok(())
    }

    /// Applied stress at time t for stress-controlled programs.
    fn stress_at(&self, t: f64) -> Option<f64> {
        match *self {
            LoadProgram::StressStep { p_a } => Some(if t >= 0.0 { p_a } else { 0.0 }),
            LoadProgram::StressRampHold { p_a, ramp } => {
                Some(if t <= 0.0 {
                    0.0
                } else if t < ramp {
                    p_a * t / ramp
                } else {
                    p_a
                })
            }
            LoadProgram::DisplacementRampSteps { .. } => None,
        }
    }

    /// Imposed loaded-face settlement (m) at time t, for sample height h.
    pub fn displacement_at(&self, t: f64, h: f64) -> Option<f64> {
        match *self {
            LoadProgram::DisplacementRampSteps {
                precondition,
                step,
                steps,
                rate,
                hold,
            } => {
                let v = rate * h;
                let mut delta = 0.0;
                let mut clock = 0.0;
                let mut targets = Vec::with_capacity(steps + 1);
                if precondition > 0.0 {
                    targets.push(precondition * h);
                }
                for _ in 0..steps {
                    targets.push(step * h);
                }
                for inc in targets {
                    let ramp_dur = inc / v;
                    if t <= clock {
                        return Some(delta);
                    }
                    if t < clock + ramp_dur {
                        return Some(delta + v * (t - clock));
                    }
                    delta += inc;
                    clock += ramp_dur + hold;
                }
                Some(delta)
            }
            _ => None,
        }
    }

    /// Times at which every ramp of a displacement program ends, in order.
    pub fn ramp_ends(&self, _h: f64) -> Vec<f64> {
        match *self {
            LoadProgram::DisplacementRampSteps {
                precondition,
                step,
                steps,
                rate,
                hold,
            } => {
                let mut out = Vec::new();
                let mut clock = 0.0;
                if precondition > 0.0 {
                    clock += precondition / rate;
                    out.push(clock);
                    clock += hold;
                }
                for _ in 0..steps {
                    clock += step / rate;
                    out.push(clock);
                    clock += hold;
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

/// Field history on the grid. Row k is time k*dt (row 0 is the initial
/// state); p(h, .) = 0 and u(h, .) = 0 hold exactly. flux_base is the
/// outflow per unit area at the drained face computed with the same GL
/// convolution and one-sided gradient the interior scheme conserves, so
/// the discrete fluid budget closes to round-off; its t = 0 entry is 0
/// (for a stress step the instant flux is singular in the continuum).
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub zs: Vec<f64>,
    pub ts: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub flux_base: Vec<f64>,
    pub reaction_stress_top: Vec<f64>,
}

pub fn solve(grid: &Grid1D, load: &LoadProgram, params: &ParamSet) -> Result<SolveResult> {
    solve_windowed(grid, load, params, None)
}

/// As solve, but truncating the GL memory to the most recent `window`
/// steps on both the interior update and the boundary flux (they must
/// agree or the discrete budget stops closing).
pub fn solve_windowed(
    grid: &Grid1D,
    load: &LoadProgram,
    params: &ParamSet,
    window: Option<usize>,
) -> Result<SolveResult> {
    load.validate()?;
    if let Some(w) = window {
        if w == 0 {
            return Err(Error::InvalidParameter {
                name: "window",
                value: 0.0,
                reason: "memory window must hold at least the current step",
            });
        }
    }
    let c = params.coeffs();
    let nz = grid.nz;
    let nu = nz - 1; // unknowns: 0..nz-2, Dirichlet p = 0 at nz-1
    let dz = grid.dz();
    let dt = grid.dt;
    let mu = c.lambda_bar * dt.powf(1.0 - c.beta) / (dz * dz);
    let w = gl_coefficients(c.beta, grid.nt + 1);

    let zs: Vec<f64> = (0..nz).map(|i| i as f64 * dz).collect();
    let ts: Vec<f64> = (0..=grid.nt).map(|k| k as f64 * dt).collect();

    let displacement_mode = matches!(load, LoadProgram::DisplacementRampSteps { .. });

    // initial state
    let (p0, mut stress_prev) = match load {
        LoadProgram::StressStep { p_a } => {
            // undrained start imposed exactly instead of resolving the jump
            let mut row = vec![c.gamma * p_a; nz];
            row[nz - 1] = 0.0;
            (row, *p_a)
        }
        _ => (vec![0.0; nz], 0.0),
    };

    let mut p_rows = Vec::with_capacity(grid.nt + 1);
    let mut u_rows = Vec::with_capacity(grid.nt + 1);
    let mut flux = Vec::with_capacity(grid.nt + 1);
    let mut reaction = Vec::with_capacity(grid.nt + 1);
    u_rows.push(settlement_profile(&p0, stress_prev, &c, dz));
    p_rows.push(p0);
    flux.push(0.0);
    reaction.push(stress_prev);

    // second difference with a mirror ghost at the sealed node
    let lap = |row: &[f64], out: &mut Vec<f64>| {
        out.clear();
        out.push(2.0 * (row[1] - row[0]) / (dz * dz));
        for i in 1..nu {
            out.push((row[i - 1] - 2.0 * row[i] + row[i + 1]) / (dz * dz));
        }
    };

    // tridiagonal (I - mu c1 L) over the unknowns; strictly diagonally
    // dominant, so plain elimination is stable
    let solve_tridiag = |rhs: &mut [f64]| {
        let mut diag = vec![1.0 + 2.0 * mu; nu];
        let mut upper = vec![-mu; nu];
        upper[0] = -2.0 * mu;
        let lower = -mu;
        for i in 1..nu {
            let m = lower / diag[i - 1];
            diag[i] -= m * upper[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        rhs[nu - 1] /= diag[nu - 1];
        for i in (0..nu - 1).rev() {
            rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
        }
    };

    // displacement mode: response of the pressure to a unit stress change,
    // reused every step (the matrix never changes)
    let unit_response = if displacement_mode {
        let mut s = vec![1.0; nu];
        solve_tridiag(&mut s);
        Some(s)
    } else {
        None
    };
    // trapezoid over all nodes (Dirichlet node carries p = 0)
    let quad = |row: &[f64]| -> f64 {
        let mut q = 0.5 * row[0];
        for v in row.iter().take(nz - 1).skip(1) {
            q += v;
        }
        q * dz
    };
    let quad_unit = unit_response.as_ref().map(|s| {
        let mut full = s.clone();
        full.push(0.0);
        quad(&full)
    });

    let mut lap_hist: Vec<Vec<f64>> = Vec::with_capacity(grid.nt);
    let mut grad_hist: Vec<f64> = Vec::with_capacity(grid.nt);
    let mut scratch = Vec::with_capacity(nu);

    for k in 1..=grid.nt {
        let t = k as f64 * dt;
        let reach = window.map_or(k, |w| w.min(k));
        // history part of the GL convolution: j = 2..reach hits rows k-j+1
        let mut rhs = vec![0.0; nu];
        for j in 2..=reach {
            let cw = w[j - 1];
            let past = &lap_hist[k - j]; // row index k-j+1, stored from row 1
            for i in 0..nu {
                rhs[i] += cw * past[i];
            }
        }
        let prev = &p_rows[k - 1];
        for i in 0..nu {
            rhs[i] = prev[i] + mu * dz * dz * rhs[i];
        }

        let stress_now = if let Some(s) = &unit_response {
            // eliminate the scalar unknown P through the settlement
            // constraint u(0) = delta(t): P = (M delta + alpha Int p)/h
            let delta = load.displacement_at(t, grid.h).unwrap();
            let mut r = rhs.clone();
            solve_tridiag(&mut r);
            let mut r_full = r.clone();
            r_full.push(0.0);
            let qs = quad_unit.unwrap();
            let qr = quad(&r_full);
            let p_new = (c.aggregate * delta + c.alpha * qr
                - c.alpha * c.gamma * stress_prev * qs)
                / (grid.h - c.alpha * c.gamma * qs);
            let dp = c.gamma * (p_new - stress_prev);
            let mut row: Vec<f64> = r.iter().zip(s.iter()).map(|(ri, si)| ri + dp * si).collect();
            row.push(0.0);
            p_rows.push(row);
            p_new
        } else {
            let stress_now = load.stress_at(t).unwrap();
            let source = c.gamma * (stress_now - stress_prev);
            for v in rhs.iter_mut() {
                *v += source;
            }
            solve_tridiag(&mut rhs);
            rhs.push(0.0);
            p_rows.push(rhs);
            stress_now
        };

        let row = &p_rows[k];
        lap(row, &mut scratch);
        lap_hist.push(scratch.clone());
        // one-sided gradient the interior telescoping conserves exactly
        grad_hist.push((row[nz - 1] - row[nz - 2]) / dz);

        let mut gl_grad = 0.0;
        for j in 1..=reach {
            gl_grad += w[j - 1] * grad_hist[k - j];
        }
        flux.push(-c.lambda_beta * dt.powf(-c.beta) * gl_grad);
        u_rows.push(settlement_profile(row, stress_now, &c, dz));
        reaction.push(stress_now);
        stress_prev = stress_now;
    }

    Ok(SolveResult {
        zs,
        ts,
        p: p_rows,
        u: u_rows,
        flux_base: flux,
        reaction_stress_top: reaction,
    })
}

/// u from du/dz = (-P + alpha p)/M integrated up from the fixed base.
fn settlement_profile(
    p: &[f64],
    stress: f64,
    c: &crate::material::ConsolidationCoeffs,
    dz: f64,
) -> Vec<f64> {
    let nz = p.len();
    let mut u = vec![0.0; nz];
    for i in (0..nz - 1).rev() {
        let a = stress - c.alpha * p[i];
        let b = stress - c.alpha * p[i + 1];
        u[i] = u[i + 1] + dz * (a + b) / (2.0 * c.aggregate);
    }
    u
}
