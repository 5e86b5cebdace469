use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::program::{Affine, ConvexFunction, ConvexProgram};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub initial_t: f64,
    pub mu: f64,
    /// Stop once `m / t` falls below this.
    pub gap_tolerance: f64,
    /// Centering stops when `λ²/2` falls below this.
    pub newton_tolerance: f64,
    pub max_newton_per_center: usize,
    pub max_outer: usize,
    pub armijo: f64,
    pub backtrack: f64,
    pub exp_clamp: f64,
    pub kkt_tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            initial_t: 1.0,
            mu: 10.0,
            gap_tolerance: 1e-9,
            newton_tolerance: 1e-11,
            max_newton_per_center: 50,
            max_outer: 40,
            armijo: 0.01,
            backtrack: 0.5,
            exp_clamp: 60.0,
            kkt_tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationCap,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub newton_iterations: usize,
    pub outer_iterations: usize,
    pub duality_measure: f64,
    pub kkt_residual: f64,
    pub used_phase_one: bool,
}

struct Barrier<'a> {
    prog: &'a ConvexProgram,
    settings: &'a SolverSettings,
    n: usize,
    scratch: Vec<f64>,
}

enum CenterOutcome {
    Centered,
    Stopped,
    Failed,
    Capped,
}

impl<'a> Barrier<'a> {
    fn new(prog: &'a ConvexProgram, settings: &'a SolverSettings) -> Self {
        Self { prog, settings, n: prog.num_vars, scratch: vec![0.0; prog.num_vars] }
    }

    fn num_barrier_terms(&self) -> usize {
        let boxes = self.prog.lower.iter().filter(|l| l.is_finite()).count()
            + self.prog.upper.iter().filter(|u| u.is_finite()).count();
        self.prog.constraints.len() + boxes
    }

    /// `t φ₀(z) - Σ ln(-f_i(z)) - Σ ln(box slack)`, or `None` outside the
    /// domain.
    fn phi(&self, z: &[f64], t: f64) -> Option<f64> {
        let clamp = self.settings.exp_clamp;
        let mut s = t * self.prog.neg_objective.eval_checked(z, clamp)?;
        for c in &self.prog.constraints {
            let v = c.function.eval_checked(z, clamp)?;
            if !(v < 0.0) {
                return None;
            }
            s -= (-v).ln();
        }
        for (i, &x) in z.iter().enumerate() {
            let (lo, hi) = (self.prog.lower[i], self.prog.upper[i]);
            if lo.is_finite() {
                if !(x > lo) {
                    return None;
                }
                s -= (x - lo).ln();
            }
            if hi.is_finite() {
                if !(x < hi) {
                    return None;
                }
                s -= (hi - x).ln();
            }
        }
        s.is_finite().then_some(s)
    }

    fn grad_hess(&mut self, z: &[f64], t: f64, g: &mut [f64], h: &mut [f64]) {
        let n = self.n;
        h.iter_mut().for_each(|x| *x = 0.0);
        self.prog.neg_objective.gradient(z, g);
        g.iter_mut().for_each(|x| *x *= t);
        self.prog.neg_objective.add_hessian(z, t, h, n);
        let mut nz = Vec::with_capacity(n);
        for c in &self.prog.constraints {
            let f = &c.function;
            let v = f.eval(z);
            let inv = -1.0 / v;
            f.gradient(z, &mut self.scratch);
            nz.clear();
            for (i, &gi) in self.scratch.iter().enumerate() {
                if gi != 0.0 {
                    nz.push(i);
                    g[i] += gi * inv;
                }
            }
            f.add_hessian(z, inv, h, n);
            let inv2 = inv * inv;
            for &i in &nz {
                let gi = self.scratch[i] * inv2;
                let row = &mut h[i * n..(i + 1) * n];
                for &j in &nz {
                    row[j] += gi * self.scratch[j];
                }
            }
        }
        for (i, &x) in z.iter().enumerate() {
            let (lo, hi) = (self.prog.lower[i], self.prog.upper[i]);
            if lo.is_finite() {
                let d = 1.0 / (x - lo);
                g[i] -= d;
                h[i * n + i] += d * d;
            }
            if hi.is_finite() {
                let d = 1.0 / (hi - x);
                g[i] += d;
                h[i * n + i] += d * d;
            }
        }
    }

    /// Newton direction with Jacobi scaling and escalating diagonal
    /// regularization.
    fn newton_step(&self, g: &[f64], h: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let d: Vec<f64> = (0..n)
            .map(|i| {
                let hii = h[i * n + i];
                if hii > 0.0 && hii.is_finite() {
                    1.0 / hii.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| d[i] * h[i * n + j] * d[j]);
        let rhs = DVector::from_fn(n, |i, _| -d[i] * g[i]);
        let trace: f64 = (0..n).map(|i| scaled[(i, i)]).sum();
        let base = 1.0 + trace / n as f64;
        for k in 0..4 {
            let mut m = scaled.clone();
            if k > 0 {
                let reg = 1e-10 * 10f64.powi(k - 1) * base;
                for i in 0..n {
                    m[(i, i)] += reg;
                }
            }
            if let Some(ch) = m.cholesky() {
                let y = ch.solve(&rhs);
                if y.iter().all(|v| v.is_finite()) {
                    return Some((0..n).map(|i| d[i] * y[i]).collect());
                }
            }
        }
        None
    }

    fn center(
        &mut self,
        z: &mut Vec<f64>,
        t: f64,
        tol: f64,
        max_iter: usize,
        stop: &dyn Fn(&[f64]) -> bool,
        newton: &mut usize,
    ) -> CenterOutcome {
        let n = self.n;
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n * n];
        let s = *self.settings;
        let mut trial = vec![0.0; n];
        for _ in 0..max_iter {
            let Some(phi0) = self.phi(z, t) else {
                return CenterOutcome::Failed;
            };
            self.grad_hess(z, t, &mut g, &mut h);
            let Some(dz) = self.newton_step(&g, &h) else {
                return CenterOutcome::Failed;
            };
            let slope: f64 = g.iter().zip(&dz).map(|(a, b)| a * b).sum();
            if -slope / 2.0 <= tol {
                return CenterOutcome::Centered;
            }
            let mut step = 1.0;
            let mut accepted = false;
            while step > 1e-16 {
                for i in 0..n {
                    trial[i] = z[i] + step * dz[i];
                }
                if let Some(p) = self.phi(&trial, t) {
                    if p <= phi0 + s.armijo * step * slope {
                        accepted = true;
                        break;
                    }
                }
                step *= s.backtrack;
            }
            *newton += 1;
            if !accepted {
                // no progress possible at working precision
                return CenterOutcome::Centered;
            }
            std::mem::swap(z, &mut trial);
            if stop(z) {
                return CenterOutcome::Stopped;
            }
        }
        CenterOutcome::Capped
    }

    /// Scaled stationarity measure `λ(z)·√(m+1) / t`, with `λ` the Newton
    /// decrement of the barrier function. Bounds the objective
    /// suboptimality beyond the duality measure `m/t`, and unlike the raw
    /// gradient norm it is not swamped by cancellation in tiny slacks.
    fn kkt_residual(&mut self, z: &[f64], t: f64, m: usize) -> f64 {
        let n = self.n;
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n * n];
        self.grad_hess(z, t, &mut g, &mut h);
        let Some(dz) = self.newton_step(&g, &h) else {
            return f64::INFINITY;
        };
        let dec2: f64 = -g.iter().zip(&dz).map(|(a, b)| a * b).sum::<f64>();
        dec2.max(0.0).sqrt() * ((m + 1) as f64).sqrt() / t
    }
}

struct CoreResult {
    status: SolveStatus,
    x: Vec<f64>,
    newton: usize,
    outer: usize,
    gap: f64,
    kkt: f64,
}

fn barrier_core(
    prog: &ConvexProgram,
    z0: &[f64],
    settings: &SolverSettings,
    stop: &dyn Fn(&[f64]) -> bool,
) -> CoreResult {
    let mut b = Barrier::new(prog, settings);
    let m = b.num_barrier_terms();
    let mut z = z0.to_vec();
    let mut t = settings.initial_t;
    let mut newton = 0;
    let mut outer = 0;
    let mut status = SolveStatus::IterationCap;
    let mut stopped = false;
    loop {
        match b.center(&mut z, t, settings.newton_tolerance, settings.max_newton_per_center, stop, &mut newton) {
            CenterOutcome::Stopped => {
                stopped = true;
                status = SolveStatus::Optimal;
                break;
            }
            CenterOutcome::Failed => {
                status = SolveStatus::NumericalFailure;
                break;
            }
            CenterOutcome::Centered | CenterOutcome::Capped => {}
        }
        outer += 1;
        if m == 0 || m as f64 / t <= settings.gap_tolerance {
            status = SolveStatus::Optimal;
            break;
        }
        if outer >= settings.max_outer {
            break;
        }
        t *= settings.mu;
    }
    let gap = if m == 0 { 0.0 } else { m as f64 / t };
    let mut kkt = b.kkt_residual(&z, t, m);
    if status == SolveStatus::Optimal && !stopped && !(kkt <= settings.kkt_tolerance) {
        // polish: Newton to working precision at the final t
        b.center(&mut z, t, 0.0, 8, stop, &mut newton);
        kkt = b.kkt_residual(&z, t, m);
    }
    if status == SolveStatus::Optimal && !stopped && !(kkt <= settings.kkt_tolerance) {
        status = SolveStatus::IterationCap;
    }
    CoreResult { status, x: z, newton, outer, gap, kkt }
}

fn strictly_inside_box(prog: &ConvexProgram, z: &[f64]) -> bool {
    z.iter().zip(prog.lower.iter().zip(&prog.upper)).all(|(&x, (&lo, &hi))| x > lo && x < hi)
}

fn strictly_feasible(prog: &ConvexProgram, z: &[f64], clamp: f64) -> bool {
    strictly_inside_box(prog, z)
        && prog.neg_objective.eval_checked(z, clamp).is_some()
        && prog.constraints.iter().all(|c| c.function.eval_checked(z, clamp).is_some_and(|v| v < 0.0))
}

fn box_center(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Pull `x` strictly inside `[lo, hi]`.
fn interior(x: f64, lo: f64, hi: f64) -> f64 {
    let c = box_center(lo, hi);
    let margin = if lo.is_finite() && hi.is_finite() { 1e-3 * (hi - lo) } else { 1e-3 };
    if lo.is_finite() && !(x > lo + margin) {
        return if hi.is_finite() { (lo + margin).min(c) } else { lo + margin.max(1e-3 * (1.0 + lo.abs())) };
    }
    if hi.is_finite() && !(x < hi - margin) {
        return if lo.is_finite() { (hi - margin).max(c) } else { hi - margin.max(1e-3 * (1.0 + hi.abs())) };
    }
    x
}

/// Find a point strictly inside every constraint and the box by minimizing
/// a common slack `s` with `f_i(z) ≤ s`, stopping as soon as `s < 0`.
pub fn phase1_feasible(prog: &ConvexProgram, start: Option<&[f64]>, settings: &SolverSettings) -> Option<Vec<f64>> {
    let n = prog.num_vars;
    let mut z: Vec<f64> = (0..n)
        .map(|i| {
            let (lo, hi) = (prog.lower[i], prog.upper[i]);
            match start {
                Some(s) => interior(s[i], lo, hi),
                None => box_center(lo, hi),
            }
        })
        .collect();
    if prog.constraints.is_empty() {
        return Some((0..n).map(|i| box_center(prog.lower[i], prog.upper[i])).collect());
    }
    if strictly_feasible(prog, &z, settings.exp_clamp) {
        return Some(z);
    }
    let worst = prog
        .constraints
        .iter()
        .map(|c| c.function.eval_checked(&z, settings.exp_clamp))
        .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)))?;

    let s_idx = n;
    let mut aug = ConvexProgram::new(n + 1);
    aug.lower[..n].copy_from_slice(&prog.lower);
    aug.upper[..n].copy_from_slice(&prog.upper);
    aug.set_bounds(s_idx, -1.0, f64::INFINITY);
    aug.set_objective(Affine::constant(0.0).with(s_idx, -1.0), Vec::new());
    for c in &prog.constraints {
        let mut f: ConvexFunction = c.function.clone();
        f.affine.push(s_idx, -1.0);
        aug.add_constraint(c.name.clone(), f);
    }
    z.push(worst.max(0.0) + 1.0);
    let stop = |z: &[f64]| z[s_idx] < 0.0;
    let res = barrier_core(&aug, &z, settings, &stop);
    let s = res.x[s_idx];
    let point = res.x[..n].to_vec();
    (s < 0.0 && strictly_feasible(prog, &point, settings.exp_clamp)).then_some(point)
}

/// Log-barrier interior-point method. Runs phase 1 first if `start` is not
/// strictly feasible.
pub fn solve(prog: &ConvexProgram, start: &[f64], settings: &SolverSettings) -> SolverReport {
    assert_eq!(start.len(), prog.num_vars, "start has the wrong dimension");
    if let Err(e) = prog.validate() {
        log::error!("malformed convex program: {e}");
        return SolverReport {
            status: SolveStatus::NumericalFailure,
            x: start.to_vec(),
            objective: f64::NAN,
            newton_iterations: 0,
            outer_iterations: 0,
            duality_measure: f64::INFINITY,
            kkt_residual: f64::INFINITY,
            used_phase_one: false,
        };
    }
    let mut used_phase_one = false;
    let z0 = if strictly_feasible(prog, start, settings.exp_clamp) {
        start.to_vec()
    } else {
        used_phase_one = true;
        match phase1_feasible(prog, Some(start), settings) {
            Some(z) => z,
            None => {
                return SolverReport {
                    status: SolveStatus::Infeasible,
                    objective: prog.objective(start),
                    x: start.to_vec(),
                    newton_iterations: 0,
                    outer_iterations: 0,
                    duality_measure: f64::INFINITY,
                    kkt_residual: f64::INFINITY,
                    used_phase_one,
                }
            }
        }
    };
    let res = barrier_core(prog, &z0, settings, &|_| false);
    SolverReport {
        status: res.status,
        objective: prog.objective(&res.x),
        x: res.x,
        newton_iterations: res.newton,
        outer_iterations: res.outer,
        duality_measure: res.gap,
        kkt_residual: res.kkt,
        used_phase_one,
    }
}
