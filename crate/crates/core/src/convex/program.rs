use std::fmt;

/// Sparse affine form `Σ coef·z[idx] + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(idx: usize) -> Self {
        Self { terms: vec![(idx, 1.0)], constant: 0.0 }
    }

    pub fn with(mut self, idx: usize, coef: f64) -> Self {
        self.push(idx, coef);
        self
    }

    pub fn push(&mut self, idx: usize, coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.terms.iter_mut().find(|(i, _)| *i == idx) {
            Some(t) => t.1 += coef,
            None => self.terms.push((idx, coef)),
        }
    }

    pub fn add_scaled(&mut self, other: &Affine, s: f64) {
        for &(i, c) in &other.terms {
            self.push(i, c * s);
        }
        self.constant += other.constant * s;
    }

    pub fn scale(&mut self, s: f64) {
        self.terms.iter_mut().for_each(|t| t.1 *= s);
        self.constant *= s;
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * z[i]).sum::<f64>() + self.constant
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }
}

/// `weight · exp(exponent(z))`, weight ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub weight: f64,
    pub exponent: Affine,
}

impl ExpTerm {
    pub fn new(weight: f64, exponent: Affine) -> Self {
        Self { weight, exponent }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.weight * self.exponent.eval(z).exp()
    }

    /// First-order expansion at `base`: `w e^{e(z̃)} (1 + e(z) - e(z̃))`.
    pub fn tangent(&self, base: &[f64]) -> Affine {
        let e0 = self.exponent.eval(base);
        let v = self.weight * e0.exp();
        let mut a = Affine::constant(v * (1.0 - e0));
        a.add_scaled(&self.exponent, v);
        a
    }
}

/// Smooth convex function `affine + Σ square_k² + Σ exp_k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvexFunction {
    pub affine: Affine,
    pub squares: Vec<Affine>,
    pub exps: Vec<ExpTerm>,
}

impl ConvexFunction {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.affine.eval(z)
            + self.squares.iter().map(|s| s.eval(z).powi(2)).sum::<f64>()
            + self.exps.iter().map(|e| e.eval(z)).sum::<f64>()
    }

    /// Value, or `None` if an exponent exceeds `clamp`.
    pub fn eval_checked(&self, z: &[f64], clamp: f64) -> Option<f64> {
        let mut v = self.affine.eval(z);
        for s in &self.squares {
            v += s.eval(z).powi(2);
        }
        for e in &self.exps {
            let x = e.exponent.eval(z);
            if !(x <= clamp) {
                return None;
            }
            v += e.weight * x.exp();
        }
        v.is_finite().then_some(v)
    }

    pub fn gradient(&self, z: &[f64], g: &mut [f64]) {
        g.iter_mut().for_each(|x| *x = 0.0);
        for &(i, c) in &self.affine.terms {
            g[i] += c;
        }
        for s in &self.squares {
            let v = 2.0 * s.eval(z);
            for &(i, c) in &s.terms {
                g[i] += v * c;
            }
        }
        for e in &self.exps {
            let v = e.eval(z);
            for &(i, c) in &e.exponent.terms {
                g[i] += v * c;
            }
        }
    }

    /// Adds `scale · ∇²f` to the row-major `n×n` buffer `h`.
    pub fn add_hessian(&self, z: &[f64], scale: f64, h: &mut [f64], n: usize) {
        for s in &self.squares {
            add_outer(h, n, &s.terms, 2.0 * scale);
        }
        for e in &self.exps {
            add_outer(h, n, &e.exponent.terms, scale * e.eval(z));
        }
    }

    pub fn hessian_vector(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        for s in &self.squares {
            let d = 2.0 * s.terms.iter().map(|&(i, c)| c * v[i]).sum::<f64>();
            for &(i, c) in &s.terms {
                out[i] += d * c;
            }
        }
        for e in &self.exps {
            let d = e.eval(z) * e.exponent.terms.iter().map(|&(i, c)| c * v[i]).sum::<f64>();
            for &(i, c) in &e.exponent.terms {
                out[i] += d * c;
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        debug_assert!(s > 0.0);
        self.affine.scale(s);
        let r = s.sqrt();
        self.squares.iter_mut().for_each(|q| q.scale(r));
        self.exps.iter_mut().for_each(|e| e.weight *= s);
    }

    fn max_index(&self) -> Option<usize> {
        self.affine
            .max_index()
            .into_iter()
            .chain(self.squares.iter().filter_map(Affine::max_index))
            .chain(self.exps.iter().filter_map(|e| e.exponent.max_index()))
            .max()
    }
}

fn add_outer(h: &mut [f64], n: usize, terms: &[(usize, f64)], s: f64) {
    for &(i, ci) in terms {
        let row = &mut h[i * n..(i + 1) * n];
        for &(j, cj) in terms {
            row[j] += s * ci * cj;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Feasible when `function(z) ≤ 0`.
    pub function: ConvexFunction,
}

impl Constraint {
    pub fn new(name: impl Into<String>, function: ConvexFunction) -> Self {
        Self { name: name.into(), function }
    }
}

/// Maximize `affine(z) - Σ exps(z)` subject to `constraints ≤ 0` and
/// `lower ≤ z ≤ upper` (infinite bounds allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexProgram {
    pub num_vars: usize,
    /// Stored as the convex function `-objective`.
    pub neg_objective: ConvexFunction,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConvexProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            neg_objective: ConvexFunction::default(),
            constraints: Vec::new(),
            lower: vec![f64::NEG_INFINITY; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    /// Set the objective to `affine - Σ exps`.
    pub fn set_objective(&mut self, affine: Affine, exps: Vec<ExpTerm>) {
        let mut neg = affine;
        neg.scale(-1.0);
        self.neg_objective = ConvexFunction { affine: neg, squares: Vec::new(), exps };
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        -self.neg_objective.eval(z)
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, function: ConvexFunction) {
        self.constraints.push(Constraint::new(name, function));
    }

    pub fn set_bounds(&mut self, idx: usize, lo: f64, hi: f64) {
        self.lower[idx] = lo;
        self.upper[idx] = hi;
    }

    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let c = self.constraints.iter().map(|c| c.function.eval(z)).fold(f64::NEG_INFINITY, f64::max);
        let b = z
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&lo, &hi))| (lo - x).max(x - hi))
            .fold(f64::NEG_INFINITY, f64::max);
        c.max(b)
    }

    /// Structural checks: indices in range, nonnegative exponential weights,
    /// consistent bounds.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.num_vars;
        if self.lower.len() != n || self.upper.len() != n {
            return Err("bound vectors have the wrong length".into());
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo < hi) {
                return Err(format!("empty box on variable {i}: [{lo}, {hi}]"));
            }
        }
        let funcs = std::iter::once(("objective", &self.neg_objective))
            .chain(self.constraints.iter().map(|c| (c.name.as_str(), &c.function)));
        for (name, f) in funcs {
            if f.max_index().is_some_and(|i| i >= n) {
                return Err(format!("{name}: variable index out of range"));
            }
            if f.exps.iter().any(|e| !(e.weight >= 0.0)) {
                return Err(format!("{name}: negative exponential weight"));
            }
        }
        Ok(())
    }
}

fn write_affine(f: &mut fmt::Formatter<'_>, a: &Affine) -> fmt::Result {
    write!(f, "{:+e}", a.constant)?;
    for &(i, c) in &a.terms {
        write!(f, " {c:+e}*z{i}")?;
    }
    Ok(())
}

fn write_function(f: &mut fmt::Formatter<'_>, func: &ConvexFunction) -> fmt::Result {
    write!(f, "  affine ")?;
    write_affine(f, &func.affine)?;
    writeln!(f)?;
    for s in &func.squares {
        write!(f, "  square ")?;
        write_affine(f, s)?;
        writeln!(f)?;
    }
    for e in &func.exps {
        write!(f, "  exp {:e} ", e.weight)?;
        write_affine(f, &e.exponent)?;
        writeln!(f)?;
    }
    Ok(())
}

/// Plain-text dump: one block per function, one line per term.
impl fmt::Display for ConvexProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variables {}", self.num_vars)?;
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_finite() || hi.is_finite() {
                writeln!(f, "bound z{i} {lo:e} {hi:e}")?;
            }
        }
        writeln!(f, "minimize")?;
        write_function(f, &self.neg_objective)?;
        for c in &self.constraints {
            writeln!(f, "subject_to {} <= 0", c.name)?;
            write_function(f, &c.function)?;
        }
        Ok(())
    }
}

/// Worst relative mismatch between analytic gradients / Hessian-vector
/// products and central finite differences, over the objective and every
/// constraint.
pub fn check_derivatives(prog: &ConvexProgram, z: &[f64]) -> f64 {
    let n = prog.num_vars;
    let funcs = std::iter::once(&prog.neg_objective).chain(prog.constraints.iter().map(|c| &c.function));
    let mut worst = 0.0f64;
    let mut grad = vec![0.0; n];
    let mut gp = vec![0.0; n];
    let mut gm = vec![0.0; n];
    let dir: Vec<f64> = (0..n).map(|i| 1.0 - 0.37 * ((i * 7919) % 13) as f64 / 13.0).collect();
    for func in funcs {
        func.gradient(z, &mut grad);
        let gscale = 1.0 + grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        let mut zz = z.to_vec();
        for i in 0..n {
            let h = 1e-6 * (1.0 + z[i].abs());
            zz[i] = z[i] + h;
            let fp = func.eval(&zz);
            zz[i] = z[i] - h;
            let fm = func.eval(&zz);
            zz[i] = z[i];
            let fd = (fp - fm) / (2.0 * h);
            worst = worst.max((fd - grad[i]).abs() / gscale);
        }
        let hv = func.hessian_vector(z, &dir);
        let hscale = 1.0 + hv.iter().map(|g| g.abs()).fold(0.0, f64::max);
        let h = 1e-6 * (1.0 + z.iter().map(|x| x.abs()).fold(0.0, f64::max));
        let zp: Vec<f64> = z.iter().zip(&dir).map(|(x, d)| x + h * d).collect();
        let zm: Vec<f64> = z.iter().zip(&dir).map(|(x, d)| x - h * d).collect();
        func.gradient(&zp, &mut gp);
        func.gradient(&zm, &mut gm);
        for i in 0..n {
            let fd = (gp[i] - gm[i]) / (2.0 * h);
            worst = worst.max((fd - hv[i]).abs() / hscale);
        }
    }
    worst
}
