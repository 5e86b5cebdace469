use serde::{Deserialize, Serialize};

use crate::beamspan::{FValues, SpanCoefficients};
use crate::geometry::SystemGeometry;
use crate::C64;

/// `ln 1e-30`, the floor for log lifts of vanishing coefficients.
pub const LOG_FLOOR: f64 = -69.077_552_789_821_37;

/// Log-domain auxiliaries bounding squared distances and coefficient
/// magnitudes:
/// `e^{-2a} ≤ dist² ≤ e^{-2b}`, `e^p ≤ |c|² ≤ e^q`, `e^o ≤ |c_u+c_t|² ≤ e^v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedVariables {
    pub c_u: C64,
    pub c_t: C64,
    pub x: Vec<f64>,
    pub a_u: Vec<f64>,
    pub b_u: Vec<f64>,
    pub a_t: Vec<f64>,
    pub b_t: Vec<f64>,
    pub p_u: f64,
    pub q_u: f64,
    pub p_t: f64,
    pub q_t: f64,
    pub o: f64,
    pub v: f64,
}

fn log_sq(z: C64) -> f64 {
    let n = z.norm_sqr();
    if n > 0.0 {
        n.ln().max(LOG_FLOOR)
    } else {
        LOG_FLOOR
    }
}

/// Lift with every bound tight.
pub fn lift_tight(coeffs: &SpanCoefficients, x: &[f64], geom: &SystemGeometry) -> LiftedVariables {
    let half_log = |d2: f64| -0.5 * d2.ln();
    let a_u: Vec<f64> = x.iter().enumerate().map(|(m, &x)| half_log(geom.user_distance_sq(m, x))).collect();
    let a_t: Vec<f64> = x.iter().enumerate().map(|(m, &x)| half_log(geom.target_distance_sq(m, x))).collect();
    let (p_u, p_t, o) = (log_sq(coeffs.c_u), log_sq(coeffs.c_t), log_sq(coeffs.c_u + coeffs.c_t));
    LiftedVariables {
        c_u: coeffs.c_u,
        c_t: coeffs.c_t,
        x: x.to_vec(),
        b_u: a_u.clone(),
        a_u,
        b_t: a_t.clone(),
        a_t,
        p_u,
        q_u: p_u,
        p_t,
        q_t: p_t,
        o,
        v: o,
    }
}

/// Exponential-form bounds: `ĝ_u ≤ f̂_u/η²`, `ĝ_p ≥ f̂_p/η`,
/// `ĝ_t ≤ f̂_t/η²`, each tight when the lift is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GHat {
    pub user: f64,
    pub power: f64,
    pub sensing: f64,
}

impl GHat {
    pub fn to_f(self, eta: f64) -> FValues {
        FValues { user: self.user * eta * eta, power: self.power * eta, sensing: self.sensing * eta * eta }
    }
}

pub fn evaluate_g_hat(l: &LiftedVariables) -> GHat {
    let sum = |f: &dyn Fn(usize) -> f64| (0..l.x.len()).map(f).sum::<f64>();
    let e2bu = sum(&|m| (2.0 * l.b_u[m]).exp());
    let e2bt = sum(&|m| (2.0 * l.b_t[m]).exp());
    let ebb = sum(&|m| (l.b_u[m] + l.b_t[m]).exp());
    let e2au = sum(&|m| (2.0 * l.a_u[m]).exp());
    let e2at = sum(&|m| (2.0 * l.a_t[m]).exp());
    let eaa = sum(&|m| (l.a_u[m] + l.a_t[m]).exp());
    let (pu, pt, qu, qt, o, v) = (l.p_u.exp(), l.p_t.exp(), l.q_u.exp(), l.q_t.exp(), l.o.exp(), l.v.exp());
    GHat {
        user: pu * e2bu * e2bu + pt * ebb * ebb + o * e2bu * ebb - (qu + qt) * e2au * eaa,
        power: qu * e2au + qt * e2at + v * eaa - (pu + pt) * ebb,
        sensing: pu * ebb * ebb + pt * e2bt * e2bt + o * e2bt * ebb - (qu + qt) * e2at * eaa,
    }
}

impl LiftedVariables {
    pub fn num_tx(&self) -> usize {
        self.x.len()
    }

    pub fn coefficients(&self) -> SpanCoefficients {
        SpanCoefficients::new(self.c_u, self.c_t)
    }

    /// Largest relative violation of the lifting inequalities.
    pub fn lifting_residual(&self, geom: &SystemGeometry) -> f64 {
        let mut worst = 0.0f64;
        let mut check = |lo: f64, mid: f64, hi: f64| {
            worst = worst
                .max((lo - mid) / mid.abs().max(f64::MIN_POSITIVE))
                .max((mid - hi) / mid.abs().max(f64::MIN_POSITIVE));
        };
        for m in 0..self.num_tx() {
            let du = geom.user_distance_sq(m, self.x[m]);
            let dt = geom.target_distance_sq(m, self.x[m]);
            check((-2.0 * self.a_u[m]).exp(), du, (-2.0 * self.b_u[m]).exp());
            check((-2.0 * self.a_t[m]).exp(), dt, (-2.0 * self.b_t[m]).exp());
        }
        let floor = LOG_FLOOR.exp();
        let mut check_c = |p: f64, c: C64, q: f64| {
            let n = c.norm_sqr().max(floor);
            worst = worst.max((p.exp() - n) / n).max((n - q.exp()) / n);
        };
        check_c(self.p_u, self.c_u, self.q_u);
        check_c(self.p_t, self.c_t, self.q_t);
        check_c(self.o, self.c_u + self.c_t, self.v);
        worst.max(0.0)
    }
}
