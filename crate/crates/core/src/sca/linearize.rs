//! Convexification of the lifted problem around a base point.
//!
//! Every ĝ function is a signed sum of exponentials of affine forms in the
//! lifted variables. Convex parts on the wrong side of an inequality are
//! replaced by their tangent planes, which under-estimate them, so the
//! emitted program is a restriction of the lifted problem that touches it
//! at the base point.
//!
//! The solver works in normalized coefficient units `c / κ` with
//! `κ = √(P/η)`, which keeps every variable and constraint of order one.

use crate::convex::{Affine, ConvexFunction, ConvexProgram, ExpTerm};
use crate::problem::Problem;
use crate::C64;

use super::lifted::{GHat, LiftedVariables};
use super::ScaConfig;

/// Index map of the subproblem variables:
/// `[Re c_u, Im c_u, Re c_t, Im c_t, x, a_u, b_u, a_t, b_t, p_u, q_u, p_t, q_t, o, v]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub m: usize,
}

impl Layout {
    pub const RE_CU: usize = 0;
    pub const IM_CU: usize = 1;
    pub const RE_CT: usize = 2;
    pub const IM_CT: usize = 3;

    pub fn new(m: usize) -> Self {
        Self { m }
    }

    pub fn len(&self) -> usize {
        4 + 5 * self.m + 6
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, k: usize) -> usize {
        4 + k
    }
    pub fn a_u(&self, k: usize) -> usize {
        4 + self.m + k
    }
    pub fn b_u(&self, k: usize) -> usize {
        4 + 2 * self.m + k
    }
    pub fn a_t(&self, k: usize) -> usize {
        4 + 3 * self.m + k
    }
    pub fn b_t(&self, k: usize) -> usize {
        4 + 4 * self.m + k
    }
    pub fn p_u(&self) -> usize {
        4 + 5 * self.m
    }
    pub fn q_u(&self) -> usize {
        self.p_u() + 1
    }
    pub fn p_t(&self) -> usize {
        self.p_u() + 2
    }
    pub fn q_t(&self) -> usize {
        self.p_u() + 3
    }
    pub fn o(&self) -> usize {
        self.p_u() + 4
    }
    pub fn v(&self) -> usize {
        self.p_u() + 5
    }
}

/// Coefficient scale `κ = √(P/η)`.
pub fn coefficient_scale(problem: &Problem) -> f64 {
    (problem.p_max / problem.rf.path_gain).sqrt()
}

pub fn to_vector(l: &LiftedVariables, kappa: f64) -> Vec<f64> {
    let lay = Layout::new(l.num_tx());
    let shift = 2.0 * kappa.ln();
    let mut z = vec![0.0; lay.len()];
    z[Layout::RE_CU] = l.c_u.re / kappa;
    z[Layout::IM_CU] = l.c_u.im / kappa;
    z[Layout::RE_CT] = l.c_t.re / kappa;
    z[Layout::IM_CT] = l.c_t.im / kappa;
    for k in 0..lay.m {
        z[lay.x(k)] = l.x[k];
        z[lay.a_u(k)] = l.a_u[k];
        z[lay.b_u(k)] = l.b_u[k];
        z[lay.a_t(k)] = l.a_t[k];
        z[lay.b_t(k)] = l.b_t[k];
    }
    z[lay.p_u()] = l.p_u - shift;
    z[lay.q_u()] = l.q_u - shift;
    z[lay.p_t()] = l.p_t - shift;
    z[lay.q_t()] = l.q_t - shift;
    z[lay.o()] = l.o - shift;
    z[lay.v()] = l.v - shift;
    z
}

pub fn from_vector(z: &[f64], m: usize, kappa: f64) -> LiftedVariables {
    let lay = Layout::new(m);
    let shift = 2.0 * kappa.ln();
    let pick = |f: &dyn Fn(usize) -> usize| (0..m).map(|k| z[f(k)]).collect::<Vec<f64>>();
    LiftedVariables {
        c_u: C64::new(z[Layout::RE_CU], z[Layout::IM_CU]) * kappa,
        c_t: C64::new(z[Layout::RE_CT], z[Layout::IM_CT]) * kappa,
        x: pick(&|k| lay.x(k)),
        a_u: pick(&|k| lay.a_u(k)),
        b_u: pick(&|k| lay.b_u(k)),
        a_t: pick(&|k| lay.a_t(k)),
        b_t: pick(&|k| lay.b_t(k)),
        p_u: z[lay.p_u()] + shift,
        q_u: z[lay.q_u()] + shift,
        p_t: z[lay.p_t()] + shift,
        q_t: z[lay.q_t()] + shift,
        o: z[lay.o()] + shift,
        v: z[lay.v()] + shift,
    }
}

/// `Σ e^{pos} - Σ e^{neg}` with unit weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignedExpSum {
    pub pos: Vec<ExpTerm>,
    pub neg: Vec<ExpTerm>,
}

impl SignedExpSum {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.pos.iter().map(|e| e.eval(z)).sum::<f64>() - self.neg.iter().map(|e| e.eval(z)).sum::<f64>()
    }

    /// Positive part linearized at `base`, negative part kept (concave).
    pub fn minorant(&self, base: &[f64]) -> (Affine, Vec<ExpTerm>) {
        (tangent_sum(&self.pos, base), self.neg.clone())
    }

    /// Negative part linearized at `base`, positive part kept (convex).
    pub fn majorant(&self, base: &[f64]) -> (Vec<ExpTerm>, Affine) {
        let mut t = tangent_sum(&self.neg, base);
        t.scale(-1.0);
        (self.pos.clone(), t)
    }
}

fn tangent_sum(terms: &[ExpTerm], base: &[f64]) -> Affine {
    let mut a = Affine::default();
    for e in terms {
        a.add_scaled(&e.tangent(base), 1.0);
    }
    a
}

fn exp_of(terms: &[(usize, f64)]) -> ExpTerm {
    let mut a = Affine::default();
    for &(i, c) in terms {
        a.push(i, c);
    }
    ExpTerm::new(1.0, a)
}

/// The three ĝ functions, expanded into exponentials of affine forms in
/// normalized units (physical value = κ² × normalized value).
#[derive(Debug, Clone, PartialEq)]
pub struct Families {
    pub user: SignedExpSum,
    pub power: SignedExpSum,
    pub sensing: SignedExpSum,
}

pub fn families(m: usize) -> Families {
    let l = Layout::new(m);
    let mut user = SignedExpSum::default();
    let mut sensing = SignedExpSum::default();
    let mut power = SignedExpSum::default();
    for i in 0..m {
        for j in 0..m {
            user.pos.push(exp_of(&[(l.p_u(), 1.0), (l.b_u(i), 2.0), (l.b_u(j), 2.0)]));
            user.pos.push(exp_of(&[
                (l.p_t(), 1.0),
                (l.b_u(i), 1.0),
                (l.b_t(i), 1.0),
                (l.b_u(j), 1.0),
                (l.b_t(j), 1.0),
            ]));
            user.pos.push(exp_of(&[(l.o(), 1.0), (l.b_u(i), 2.0), (l.b_u(j), 1.0), (l.b_t(j), 1.0)]));
            sensing.pos.push(exp_of(&[
                (l.p_u(), 1.0),
                (l.b_u(i), 1.0),
                (l.b_t(i), 1.0),
                (l.b_u(j), 1.0),
                (l.b_t(j), 1.0),
            ]));
            sensing.pos.push(exp_of(&[(l.p_t(), 1.0), (l.b_t(i), 2.0), (l.b_t(j), 2.0)]));
            sensing.pos.push(exp_of(&[(l.o(), 1.0), (l.b_t(i), 2.0), (l.b_u(j), 1.0), (l.b_t(j), 1.0)]));
            for q in [l.q_u(), l.q_t()] {
                user.neg.push(exp_of(&[(q, 1.0), (l.a_u(i), 2.0), (l.a_u(j), 1.0), (l.a_t(j), 1.0)]));
                sensing.neg.push(exp_of(&[(q, 1.0), (l.a_t(i), 2.0), (l.a_u(j), 1.0), (l.a_t(j), 1.0)]));
            }
        }
        power.pos.push(exp_of(&[(l.q_u(), 1.0), (l.a_u(i), 2.0)]));
        power.pos.push(exp_of(&[(l.q_t(), 1.0), (l.a_t(i), 2.0)]));
        power.pos.push(exp_of(&[(l.v(), 1.0), (l.a_u(i), 1.0), (l.a_t(i), 1.0)]));
        for p in [l.p_u(), l.p_t()] {
            power.neg.push(exp_of(&[(p, 1.0), (l.b_u(i), 1.0), (l.b_t(i), 1.0)]));
        }
    }
    Families { user, power, sensing }
}

/// Convexified ĝ functions at `point` around `base`, in physical units.
pub fn evaluate_g_tilde(base: &LiftedVariables, point: &LiftedVariables, kappa: f64) -> GHat {
    let fam = families(base.num_tx());
    let zb = to_vector(base, kappa);
    let z = to_vector(point, kappa);
    let k2 = kappa * kappa;
    let (ua, uexp) = fam.user.minorant(&zb);
    let (pexp, pa) = fam.power.majorant(&zb);
    let (sa, sexp) = fam.sensing.minorant(&zb);
    let sum = |e: &[ExpTerm]| e.iter().map(|e| e.eval(&z)).sum::<f64>();
    GHat {
        user: k2 * (ua.eval(&z) - sum(&uexp)),
        power: k2 * (sum(&pexp) + pa.eval(&z)),
        sensing: k2 * (sa.eval(&z) - sum(&sexp)),
    }
}

#[derive(Debug, Clone)]
pub struct Subproblem {
    pub program: ConvexProgram,
    /// Base point in solver coordinates.
    pub base: Vec<f64>,
    pub kappa: f64,
    /// Objective of the program = normalized g̃_u / `objective_scale`.
    pub objective_scale: f64,
}

impl Subproblem {
    pub fn lifted(&self, z: &[f64]) -> LiftedVariables {
        from_vector(z, (z.len() - 10) / 5, self.kappa)
    }
}

/// Normalized sensing threshold `Γ(1+margin)σ_s²/(β η P)`.
pub fn normalized_sensing_threshold(problem: &Problem, margin: f64) -> f64 {
    problem.sensing_threshold(margin) / (problem.rf.path_gain * problem.p_max)
}

/// Emit the convex subproblem around `base`.
pub fn linearize(base: &LiftedVariables, problem: &Problem, cfg: &ScaConfig) -> Subproblem {
    let geom = &problem.geometry;
    let m = base.num_tx();
    let lay = Layout::new(m);
    let kappa = coefficient_scale(problem);
    let zb = to_vector(base, kappa);
    let fam = families(m);
    let mut prog = ConvexProgram::new(lay.len());

    let (lo, hi) = geom.x_bounds();
    for k in 0..m {
        let xk = base.x[k];
        prog.set_bounds(lay.x(k), (xk - cfg.trust_region).max(lo), (xk + cfg.trust_region).min(hi));
        for idx in [lay.a_u(k), lay.b_u(k), lay.a_t(k), lay.b_t(k)] {
            prog.set_bounds(idx, zb[idx] - cfg.log_box, zb[idx] + cfg.log_box);
        }
    }
    for (idx, &z) in zb.iter().enumerate().skip(lay.p_u()) {
        prog.set_bounds(idx, z - cfg.log_box, z + cfg.log_box);
    }

    let (ua, uexp) = fam.user.minorant(&zb);
    let objective_scale = fam.user.pos.iter().map(|e| e.eval(&zb)).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut ua = ua;
    ua.scale(1.0 / objective_scale);
    let uexp = uexp.into_iter().map(|e| ExpTerm::new(e.weight / objective_scale, e.exponent)).collect();
    prog.set_objective(ua, uexp);

    for k in 0..m {
        let xk = base.x[k];
        for (side, entity, a_idx, b_idx, b_base) in [
            ("u", geom.user, lay.a_u(k), lay.b_u(k), base.b_u[k]),
            ("t", geom.target, lay.a_t(k), lay.b_t(k), base.b_t[k]),
        ] {
            let offset = (geom.tx_y[k] - entity.y).powi(2) + geom.height * geom.height;
            let d_base = (xk - entity.x).powi(2) + offset;
            let scale = 1.0 / d_base;
            // e^{-2a} ≤ tangent of the squared distance at x̃
            let mut lower = ConvexFunction {
                affine: Affine::constant(-((xk - entity.x).powi(2) + offset - 2.0 * (xk - entity.x) * xk))
                    .with(lay.x(k), -2.0 * (xk - entity.x)),
                squares: Vec::new(),
                exps: vec![ExpTerm::new(1.0, Affine::default().with(a_idx, -2.0))],
            };
            lower.scale(scale);
            prog.add_constraint(format!("dist_{side}_lower[{k}]"), lower);
            // squared distance ≤ tangent of e^{-2b} at b̃
            let eb = (-2.0 * b_base).exp();
            let mut upper = ConvexFunction {
                affine: Affine::constant(entity.x * entity.x + offset - eb * (1.0 + 2.0 * b_base))
                    .with(lay.x(k), -2.0 * entity.x)
                    .with(b_idx, 2.0 * eb),
                squares: vec![Affine::var(lay.x(k))],
                exps: Vec::new(),
            };
            upper.scale(scale);
            prog.add_constraint(format!("dist_{side}_upper[{k}]"), upper);
        }
    }

    let cu = C64::new(zb[Layout::RE_CU], zb[Layout::IM_CU]);
    let ct = C64::new(zb[Layout::RE_CT], zb[Layout::IM_CT]);
    let sum_re = Affine::var(Layout::RE_CU).with(Layout::RE_CT, 1.0);
    let sum_im = Affine::var(Layout::IM_CU).with(Layout::IM_CT, 1.0);
    for (name, c, re, im, p_idx, q_idx) in [
        ("c_u", cu, Affine::var(Layout::RE_CU), Affine::var(Layout::IM_CU), lay.p_u(), lay.q_u()),
        ("c_t", ct, Affine::var(Layout::RE_CT), Affine::var(Layout::IM_CT), lay.p_t(), lay.q_t()),
        ("c_sum", cu + ct, sum_re, sum_im, lay.o(), lay.v()),
    ] {
        let n = c.norm_sqr().max(f64::MIN_POSITIVE);
        // e^p ≤ 2Re{c̃* c} - |c̃|²
        let mut aff = Affine::constant(n);
        aff.add_scaled(&re, -2.0 * c.re);
        aff.add_scaled(&im, -2.0 * c.im);
        let mut lower =
            ConvexFunction { affine: aff, squares: Vec::new(), exps: vec![ExpTerm::new(1.0, Affine::var(p_idx))] };
        lower.scale(1.0 / n);
        prog.add_constraint(format!("{name}_lower"), lower);
        // |c|² ≤ e^{q̃}(1 + q - q̃)
        let qb = zb[q_idx];
        let eq = qb.exp();
        let mut upper = ConvexFunction {
            affine: Affine::constant(-eq * (1.0 - qb)).with(q_idx, -eq),
            squares: vec![re, im],
            exps: Vec::new(),
        };
        upper.scale(1.0 / eq);
        prog.add_constraint(format!("{name}_upper"), upper);
    }

    // power: g̃_p ≤ 1 in normalized units
    let (pexp, mut pa) = fam.power.majorant(&zb);
    pa.constant -= 1.0;
    prog.add_constraint("power", ConvexFunction { affine: pa, squares: Vec::new(), exps: pexp });

    let tau = normalized_sensing_threshold(problem, cfg.constraint_margin);
    if tau > 0.0 {
        let (mut sa, sexp) = fam.sensing.minorant(&zb);
        sa.scale(-1.0);
        sa.constant += tau;
        let mut f = ConvexFunction { affine: sa, squares: Vec::new(), exps: sexp };
        f.scale(1.0 / tau);
        prog.add_constraint("sensing", f);
    }

    Subproblem { program: prog, base: zb, kappa, objective_scale }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamspan::SpanCoefficients;
    use crate::convex::check_derivatives;
    use crate::geometry::{GroundPoint, RfConstants, SystemGeometry};
    use crate::sca::lifted::{evaluate_g_hat, lift_tight};
    use crate::sensing::DetectionSpec;

    fn problem(m: usize) -> Problem {
        let g =
            SystemGeometry::uniform(40.0, 20.0, 3.0, m, 4, GroundPoint::new(4.0, 8.0), GroundPoint::new(-4.0, 12.0))
                .unwrap();
        Problem::new(g, RfConstants::default(), DetectionSpec::default(), 10.0, 1e-9).unwrap()
    }

    #[test]
    fn vector_round_trip() {
        let p = problem(3);
        let l =
            lift_tight(&SpanCoefficients::new(C64::new(1e3, -2e2), C64::new(3e2, 4e2)), &[1.0, -2.0, 3.0], &p.geometry);
        let k = coefficient_scale(&p);
        let back = from_vector(&to_vector(&l, k), 3, k);
        assert!((back.c_u - l.c_u).norm() < 1e-9);
        assert!((back.p_t - l.p_t).abs() < 1e-12);
        assert_eq!(back.x, l.x);
    }

    #[test]
    fn family_matches_direct_g_hat() {
        let p = problem(4);
        let mut l = lift_tight(
            &SpanCoefficients::new(C64::new(1e3, -2e2), C64::new(3e2, 4e2)),
            &[1.0, -2.0, 3.0, 0.5],
            &p.geometry,
        );
        l.a_u[1] += 0.2;
        l.b_t[2] -= 0.1;
        l.q_u += 0.3;
        l.o -= 0.05;
        let k = coefficient_scale(&p);
        let z = to_vector(&l, k);
        let fam = families(4);
        let direct = evaluate_g_hat(&l);
        let k2 = k * k;
        assert!((fam.user.eval(&z) * k2 - direct.user).abs() < 1e-10 * direct.user.abs());
        assert!((fam.power.eval(&z) * k2 - direct.power).abs() < 1e-10 * direct.power.abs());
        assert!((fam.sensing.eval(&z) * k2 - direct.sensing).abs() < 1e-10 * direct.sensing.abs());
    }

    #[test]
    fn program_is_well_formed() {
        let p = problem(2).with_gamma(0.0);
        let x = [1.0, -2.0];
        let c = SpanCoefficients::real(1.0, 0.3);
        let fp =
            crate::beamspan::evaluate_f_hat(&c, &crate::beamspan::AlignedChannelSummary::new(&p.geometry, &x), &p.rf)
                .power;
        let l = lift_tight(&c.scaled((0.5 * p.p_max / fp).sqrt()), &x, &p.geometry);
        let sub = linearize(&l, &p, &ScaConfig::default());
        sub.program.validate().unwrap();
        assert_eq!(sub.program.num_vars, 4 + 5 * 2 + 6);
        assert!(sub.program.constraints.iter().all(|c| c.name != "sensing"));
        // the tight base sits on the boundary of the lifting constraints
        let v = sub.program.max_violation(&sub.base);
        assert!(v.abs() < 1e-9, "{v}");
    }

    /// g̃ written out term by term: each `e^s·X·Y` with X, Y sums of
    /// exponentials is replaced by its tangent `V(1 + Δs) + e^s̃(dX·Y + X·dY)`.
    fn g_tilde_oracle(b: &LiftedVariables, l: &LiftedVariables) -> GHat {
        let m = b.num_tx();
        let sum = |f: &dyn Fn(usize) -> f64| (0..m).map(f).sum::<f64>();
        let (e2bu, e2bt, ebb) =
            (sum(&|i| (2.0 * b.b_u[i]).exp()), sum(&|i| (2.0 * b.b_t[i]).exp()), sum(&|i| (b.b_u[i] + b.b_t[i]).exp()));
        let d2bu = sum(&|i| 2.0 * (2.0 * b.b_u[i]).exp() * (l.b_u[i] - b.b_u[i]));
        let d2bt = sum(&|i| 2.0 * (2.0 * b.b_t[i]).exp() * (l.b_t[i] - b.b_t[i]));
        let dbb = sum(&|i| (b.b_u[i] + b.b_t[i]).exp() * (l.b_u[i] - b.b_u[i] + l.b_t[i] - b.b_t[i]));
        let tan =
            |s0: f64, s: f64, x: f64, dx: f64, y: f64, dy: f64| s0.exp() * (x * y * (1.0 + s - s0) + dx * y + x * dy);
        let (e2au, e2at, eaa) =
            (sum(&|i| (2.0 * l.a_u[i]).exp()), sum(&|i| (2.0 * l.a_t[i]).exp()), sum(&|i| (l.a_u[i] + l.a_t[i]).exp()));
        let q = l.q_u.exp() + l.q_t.exp();
        let user = tan(b.p_u, l.p_u, e2bu, d2bu, e2bu, d2bu)
            + tan(b.p_t, l.p_t, ebb, dbb, ebb, dbb)
            + tan(b.o, l.o, e2bu, d2bu, ebb, dbb)
            - q * e2au * eaa;
        let sensing = tan(b.p_u, l.p_u, ebb, dbb, ebb, dbb)
            + tan(b.p_t, l.p_t, e2bt, d2bt, e2bt, d2bt)
            + tan(b.o, l.o, e2bt, d2bt, ebb, dbb)
            - q * e2at * eaa;
        let power = l.q_u.exp() * e2au + l.q_t.exp() * e2at + l.v.exp() * eaa
            - tan(b.p_u, l.p_u, ebb, dbb, 1.0, 0.0)
            - tan(b.p_t, l.p_t, ebb, dbb, 1.0, 0.0);
        GHat { user, power, sensing }
    }

    fn perturbed(l: &LiftedVariables, s: f64) -> LiftedVariables {
        let mut out = l.clone();
        for (k, v) in out.b_u.iter_mut().enumerate() {
            *v += s * (0.3 - 0.2 * k as f64);
        }
        for (k, v) in out.b_t.iter_mut().enumerate() {
            *v -= s * (0.1 + 0.15 * k as f64);
        }
        for (k, v) in out.a_u.iter_mut().enumerate() {
            *v += s * 0.05 * k as f64;
        }
        out.p_u += 0.4 * s;
        out.p_t -= 0.25 * s;
        out.o += 0.1 * s;
        out.q_t += 0.2 * s;
        out.v -= 0.3 * s;
        out
    }

    #[test]
    fn g_tilde_matches_hand_expansion() {
        let p = problem(3);
        let base =
            lift_tight(&SpanCoefficients::new(C64::new(8e2, 1e2), C64::new(2e2, -5e2)), &[1.0, -2.0, 3.0], &p.geometry);
        let k = coefficient_scale(&p);
        for s in [0.0, 0.1, -0.7] {
            let pt = perturbed(&base, s);
            let got = evaluate_g_tilde(&base, &pt, k);
            let want = g_tilde_oracle(&base, &pt);
            for (g, w) in [(got.user, want.user), (got.power, want.power), (got.sensing, want.sensing)] {
                assert!((g - w).abs() <= 1e-10 * w.abs().max(1e-30), "{g} vs {w}");
            }
        }
    }

    #[test]
    fn g_tilde_is_tangent_and_bounds_g_hat() {
        let p = problem(4);
        let base = lift_tight(
            &SpanCoefficients::new(C64::new(1e3, 0.0), C64::new(4e2, 3e2)),
            &[2.0, -1.0, 0.0, 5.0],
            &p.geometry,
        );
        let k = coefficient_scale(&p);
        let at = evaluate_g_tilde(&base, &base, k);
        let exact = evaluate_g_hat(&base);
        assert!((at.user - exact.user).abs() <= 1e-10 * exact.user.abs());
        assert!((at.power - exact.power).abs() <= 1e-10 * exact.power.abs());
        assert!((at.sensing - exact.sensing).abs() <= 1e-10 * exact.sensing.abs());
        for s in [0.05, -0.2, 0.6] {
            let pt = perturbed(&base, s);
            let (t, h) = (evaluate_g_tilde(&base, &pt, k), evaluate_g_hat(&pt));
            assert!(t.user <= h.user * (1.0 + 1e-12));
            assert!(t.sensing <= h.sensing * (1.0 + 1e-12));
            assert!(t.power >= h.power * (1.0 - 1e-12));
        }
    }

    #[test]
    fn case_subproblem_derivatives() {
        let p = problem(2);
        let base =
            lift_tight(&SpanCoefficients::new(C64::new(6e2, 0.0), C64::new(3e2, 1e2)), &[3.5, -3.0], &p.geometry);
        let sub = linearize(&base, &p, &ScaConfig::default());
        let mut z = sub.base.clone();
        for (i, v) in z.iter_mut().enumerate() {
            *v += 1e-2 * ((i % 5) as f64 - 2.0);
        }
        assert!(check_derivatives(&sub.program, &z) < 1e-5);
    }
}
