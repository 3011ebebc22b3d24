//! Evaluation of `f(x) = Q_out(x, g_1(Q_1(x)), ..., g_k(Q_k(x)))` and the
//! gradient of the regularized loss with respect to every coefficient.

use crate::algebra::{denominator_norm, monomial, MonomialBasis};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::expr::{Expr, UnaryOp};

use super::guards::{guard_div, guard_exp, guard_log, guard_sqrt};
use super::spec::{BaseKind, Layout, ModelSpec, Part};

/// Applies the guarded form of a base function, returning value and derivative.
#[inline]
pub fn apply_base(kind: BaseKind, q: f64) -> (f64, f64) {
    match kind {
        BaseKind::Sin => (q.sin(), q.cos()),
        BaseKind::Cos => (q.cos(), -q.sin()),
        BaseKind::Exp => guard_exp(q),
        BaseKind::Sqrt => guard_sqrt(q),
        BaseKind::Log => guard_log(q),
    }
}

/// An output-rational monomial split into its raw-variable part and the
/// powers of base-function outputs it uses.
#[derive(Debug, Clone)]
struct OutputTerm {
    base_powers: Vec<(usize, u32)>,
}

/// A compiled model spec: monomial bases and coefficient layout.
#[derive(Debug, Clone)]
pub struct Family {
    spec: ModelSpec,
    layout: Layout,
    in_num: MonomialBasis,
    in_den: MonomialBasis,
    out_num: MonomialBasis,
    out_den: Option<MonomialBasis>,
    out_num_terms: Vec<OutputTerm>,
    out_den_terms: Vec<OutputTerm>,
}

fn split_terms(basis: &MonomialBasis, n_vars: usize) -> Vec<OutputTerm> {
    basis
        .exponents()
        .iter()
        .map(|e| OutputTerm {
            base_powers: e[n_vars..]
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(j, &p)| (j, p))
                .collect(),
        })
        .collect()
}

impl Family {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let out_num = spec.output_num_basis();
        let out_den = spec.output_den_basis();
        let out_num_terms = split_terms(&out_num, spec.n_vars);
        let out_den_terms = out_den
            .as_ref()
            .map_or_else(Vec::new, |b| split_terms(b, spec.n_vars));
        Ok(Self {
            layout: spec.layout(),
            in_num: spec.input_num_basis(),
            in_den: spec.input_den_basis(),
            out_num,
            out_den,
            out_num_terms,
            out_den_terms,
            spec,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_params(&self) -> usize {
        self.layout.len()
    }

    pub fn output_num_basis(&self) -> &MonomialBasis {
        &self.out_num
    }

    pub fn output_den_basis(&self) -> Option<&MonomialBasis> {
        self.out_den.as_ref()
    }

    pub fn input_num_basis(&self) -> &MonomialBasis {
        &self.in_num
    }

    pub fn input_den_basis(&self) -> &MonomialBasis {
        &self.in_den
    }

    /// Precomputes every raw-variable monomial for `data`.
    pub fn prepare(&self, data: &Dataset) -> Result<Prepared<'_>> {
        Prepared::new(self, data)
    }

    /// L1 penalty: numerator blocks raw, denominator blocks after
    /// normalization to unit Euclidean norm.
    pub fn regularizer(&self, theta: &[f64]) -> Result<f64> {
        self.check_len(theta)?;
        let mut r = 0.0;
        for b in self.layout.blocks() {
            let vals = &theta[b.range()];
            let l1: f64 = vals.iter().map(|v| v.abs()).sum();
            r += match b.part {
                Part::Numerator => l1,
                Part::Denominator => l1 / denominator_norm(vals)?,
            };
        }
        Ok(r)
    }

    fn regularizer_grad(&self, theta: &[f64], grad: &mut [f64], lambda: f64) -> Result<()> {
        for b in self.layout.blocks() {
            let vals = &theta[b.range()];
            match b.part {
                Part::Numerator => {
                    for (g, v) in grad[b.range()].iter_mut().zip(vals) {
                        *g += lambda * sign0(*v);
                    }
                }
                Part::Denominator => {
                    let s = denominator_norm(vals)?;
                    let l1: f64 = vals.iter().map(|v| v.abs()).sum();
                    for (g, v) in grad[b.range()].iter_mut().zip(vals) {
                        *g += lambda * (sign0(*v) / s - v * l1 / (s * s * s));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: self.n_params(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Rescales every denominator block to unit Euclidean norm. The model
    /// output and the loss are unchanged.
    pub fn normalize_denominators(&self, theta: &mut [f64]) -> Result<()> {
        for b in self.layout.denominators() {
            let s = denominator_norm(&theta[b.range()])?;
            for v in &mut theta[b.range()] {
                *v /= s;
            }
        }
        Ok(())
    }

    /// Symbolic form of the model for coefficients `theta`, with zero terms
    /// dropped and constant denominators folded into the numerator.
    pub fn expression(&self, theta: &[f64]) -> Result<Expr> {
        self.check_len(theta)?;
        let n = self.spec.n_vars;
        let k = self.spec.n_base();
        let vars: Vec<Expr> = (0..n).map(Expr::Var).collect();
        let mut inputs = vars.clone();
        for (j, bf) in self.spec.base_functions.iter().enumerate() {
            let num = self.layout.block(j, Part::Numerator).expect("input numerator");
            let den = self.layout.block(j, Part::Denominator).expect("input denominator");
            let q = rational_expr(
                &theta[num.range()],
                &self.in_num,
                Some((&theta[den.range()], &self.in_den)),
                &vars,
            )?;
            inputs.push(Expr::Unary(UnaryOp::from(bf.kind), Box::new(q)));
        }
        let num = self.layout.block(k, Part::Numerator).expect("output numerator");
        let den = self
            .layout
            .block(k, Part::Denominator)
            .map(|b| (&theta[b.range()], self.out_den.as_ref().expect("output den basis")));
        let e = rational_expr(&theta[num.range()], &self.out_num, den, &inputs)?;
        Ok(e.simplify())
    }
}

#[inline]
fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn poly_expr(coeffs: &[f64], basis: &MonomialBasis, inputs: &[Expr]) -> Option<Expr> {
    let mut sum: Option<Expr> = None;
    for (&c, e) in coeffs.iter().zip(basis.exponents()) {
        if c == 0.0 {
            continue;
        }
        let mut mono: Option<Expr> = None;
        for (i, &p) in e.iter().enumerate() {
            if p == 0 {
                continue;
            }
            let factor = if p == 1 {
                inputs[i].clone()
            } else {
                Expr::Pow(Box::new(inputs[i].clone()), p)
            };
            mono = Some(match mono {
                None => factor,
                Some(m) => Expr::mul(m, factor),
            });
        }
        let term = match mono {
            None => Expr::Const(c),
            Some(m) if c == 1.0 => m,
            Some(m) if c == -1.0 => Expr::Unary(UnaryOp::Neg, Box::new(m)),
            Some(m) => Expr::mul(Expr::Const(c), m),
        };
        sum = Some(match sum {
            None => term,
            Some(s) => Expr::add(s, term),
        });
    }
    sum
}

fn rational_expr(
    num: &[f64],
    num_basis: &MonomialBasis,
    den: Option<(&[f64], &MonomialBasis)>,
    inputs: &[Expr],
) -> Result<Expr> {
    let Some((den, den_basis)) = den else {
        return Ok(poly_expr(num, num_basis, inputs).unwrap_or(Expr::Const(0.0)));
    };
    let s = denominator_norm(den)?;
    let normalized: Vec<f64> = den.iter().map(|b| b / s).collect();
    let constant_only = den_basis
        .exponents()
        .iter()
        .zip(&normalized)
        .all(|(e, &b)| b == 0.0 || e.iter().all(|&p| p == 0));
    if constant_only {
        let c = guard_div(normalized.iter().sum()).0;
        let folded: Vec<f64> = num.iter().map(|a| a / c).collect();
        return Ok(poly_expr(&folded, num_basis, inputs).unwrap_or(Expr::Const(0.0)));
    }
    let Some(n) = poly_expr(num, num_basis, inputs) else {
        return Ok(Expr::Const(0.0));
    };
    let d = poly_expr(&normalized, den_basis, inputs).expect("nonzero denominator");
    Ok(Expr::div(n, d))
}

/// A family bound to a dataset with every raw-variable monomial precomputed.
#[derive(Debug)]
pub struct Prepared<'a> {
    family: &'a Family,
    rows: usize,
    in_num: Vec<f64>,
    in_den: Vec<f64>,
    out_num: Vec<f64>,
    out_den: Vec<f64>,
    y: Vec<f64>,
}

fn table(basis: &MonomialBasis, data: &Dataset, n_vars: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(basis.len() * data.len());
    for row in data.rows() {
        for e in basis.exponents() {
            out.push(monomial(&e[..n_vars], row));
        }
    }
    out
}

/// Scratch values of one input rational at one row.
#[derive(Debug, Clone, Copy, Default)]
struct InputState {
    num: f64,
    den: f64,
    den_clamped: f64,
    den_flag: f64,
    g: f64,
    g_deriv: f64,
}

impl<'a> Prepared<'a> {
    fn new(family: &'a Family, data: &Dataset) -> Result<Self> {
        let n = family.spec.n_vars;
        if data.n_vars() != n {
            return Err(Error::DimensionMismatch {
                what: "dataset columns",
                expected: n,
                got: data.n_vars(),
            });
        }
        let k = family.spec.n_base();
        let (in_num, in_den) = if k > 0 {
            (table(&family.in_num, data, n), table(&family.in_den, data, n))
        } else {
            (Vec::new(), Vec::new())
        };
        let out_den = family
            .out_den
            .as_ref()
            .map_or_else(Vec::new, |b| table(b, data, n));
        Ok(Self {
            family,
            rows: data.len(),
            in_num,
            in_den,
            out_num: table(&family.out_num, data, n),
            out_den,
            y: data.y().to_vec(),
        })
    }

    pub fn family(&self) -> &Family {
        self.family
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Model output for every row.
    pub fn predict(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.family.check_len(theta)?;
        let norms = self.norms(theta)?;
        let mut states = vec![InputState::default(); self.family.spec.n_base()];
        let mut scratch = Scratch::new(self.family);
        (0..self.rows)
            .map(|r| {
                let v = self.forward(theta, &norms, r, &mut states, &mut scratch);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { row: r })
                }
            })
            .collect()
    }

    pub fn mse(&self, theta: &[f64]) -> Result<f64> {
        let pred = self.predict(theta)?;
        Ok(mse(&pred, &self.y))
    }

    /// `MSE + lambda * R(theta)`.
    pub fn loss(&self, theta: &[f64], lambda: f64) -> Result<f64> {
        let mse = self.mse(theta)?;
        if lambda == 0.0 {
            return Ok(mse);
        }
        Ok(mse + lambda * self.family.regularizer(theta)?)
    }

    /// Loss value and gradient in one pass. `grad` is overwritten.
    pub fn loss_grad(&self, theta: &[f64], lambda: f64, grad: &mut [f64]) -> Result<f64> {
        let fam = self.family;
        fam.check_len(theta)?;
        if grad.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                what: "gradient buffer",
                expected: theta.len(),
                got: grad.len(),
            });
        }
        grad.fill(0.0);
        let norms = self.norms(theta)?;
        let k = fam.spec.n_base();
        let lay = &fam.layout;
        let mut states = vec![InputState::default(); k];
        let mut scratch = Scratch::new(fam);
        // per-denominator accumulators of sum(gD * D_normalized)
        let mut den_acc = vec![0.0; k + 1];
        let n_rows = self.rows as f64;
        let mut sse = 0.0;

        let out_num_blk = *lay.block(k, Part::Numerator).expect("output numerator");
        let out_den_blk = lay.block(k, Part::Denominator).copied();
        let m_on = fam.out_num.len();
        let m_od = fam.out_den.as_ref().map_or(0, MonomialBasis::len);
        let m_in = fam.in_num.len();
        let m_id = fam.in_den.len();

        for r in 0..self.rows {
            let f = self.forward(theta, &norms, r, &mut states, &mut scratch);
            if !f.is_finite() {
                return Err(Error::NonFinite { row: r });
            }
            let resid = f - self.y[r];
            sse += resid * resid;
            let w = 2.0 * resid / n_rows;
            if w == 0.0 {
                continue;
            }

            // output rational
            let inv_dc = 1.0 / scratch.out_den_clamped;
            let g_num = &mut grad[out_num_blk.range()];
            for (g, v) in g_num.iter_mut().zip(&scratch.num_vals[..m_on]) {
                *g += w * v * inv_dc;
            }
            let g_d = -w * scratch.out_num * inv_dc * inv_dc * scratch.out_den_flag;
            if let Some(blk) = out_den_blk {
                let s = norms[k];
                if g_d != 0.0 {
                    let gd_row = &mut grad[blk.range()];
                    for (g, v) in gd_row.iter_mut().zip(&scratch.den_vals[..m_od]) {
                        *g += g_d * v / s;
                    }
                    den_acc[k] += g_d * scratch.out_den;
                }
            }
            if k == 0 {
                continue;
            }

            // d f / d g_j
            scratch.dg.iter_mut().for_each(|v| *v = 0.0);
            let a_out = &theta[out_num_blk.range()];
            accumulate_base_partials(
                &fam.out_num_terms,
                a_out,
                &scratch.num_xpart,
                &states,
                inv_dc * w,
                &mut scratch.dg,
            );
            if let Some(blk) = out_den_blk {
                if g_d != 0.0 {
                    accumulate_base_partials(
                        &fam.out_den_terms,
                        &theta[blk.range()],
                        &scratch.den_xpart,
                        &states,
                        g_d / norms[k],
                        &mut scratch.dg,
                    );
                }
            }

            // input rationals
            let num_mono = &self.in_num[r * m_in..(r + 1) * m_in];
            let den_mono = &self.in_den[r * m_id..(r + 1) * m_id];
            for j in 0..k {
                let st = &states[j];
                let u = scratch.dg[j] * st.g_deriv;
                if u == 0.0 {
                    continue;
                }
                let inv = 1.0 / st.den_clamped;
                let nb = lay.block(j, Part::Numerator).expect("input numerator");
                for (g, m) in grad[nb.range()].iter_mut().zip(num_mono) {
                    *g += u * m * inv;
                }
                let gd = -u * st.num * inv * inv * st.den_flag;
                if gd != 0.0 {
                    let db = lay.block(j, Part::Denominator).expect("input denominator");
                    let s = norms[j];
                    for (g, m) in grad[db.range()].iter_mut().zip(den_mono) {
                        *g += gd * m / s;
                    }
                    den_acc[j] += gd * st.den;
                }
            }
        }

        // normalization term of the denominator chain rule
        for (idx, acc) in den_acc.iter().enumerate() {
            if *acc == 0.0 {
                continue;
            }
            if let Some(blk) = lay.block(idx, Part::Denominator) {
                let s = norms[idx];
                for i in blk.range() {
                    grad[i] -= acc * theta[i] / (s * s);
                }
            }
        }

        let mut loss = sse / n_rows;
        if lambda != 0.0 {
            loss += lambda * fam.regularizer(theta)?;
            fam.regularizer_grad(theta, grad, lambda)?;
        }
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical("non-finite loss or gradient".into()));
        }
        Ok(loss)
    }

    fn norms(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let k = self.family.spec.n_base();
        let mut norms = vec![1.0; k + 1];
        for b in self.family.layout.denominators() {
            norms[b.rational] = denominator_norm(&theta[b.range()])?;
        }
        Ok(norms)
    }

    fn forward(
        &self,
        theta: &[f64],
        norms: &[f64],
        r: usize,
        states: &mut [InputState],
        scratch: &mut Scratch,
    ) -> f64 {
        let fam = self.family;
        let lay = &fam.layout;
        let k = fam.spec.n_base();
        if k > 0 {
            let m_in = fam.in_num.len();
            let m_id = fam.in_den.len();
            let num_mono = &self.in_num[r * m_in..(r + 1) * m_in];
            let den_mono = &self.in_den[r * m_id..(r + 1) * m_id];
            for (j, bf) in fam.spec.base_functions.iter().enumerate() {
                let nb = lay.block(j, Part::Numerator).expect("input numerator");
                let db = lay.block(j, Part::Denominator).expect("input denominator");
                let num = dot(&theta[nb.range()], num_mono);
                let den = dot(&theta[db.range()], den_mono) / norms[j];
                let (den_clamped, den_flag) = guard_div(den);
                let (g, g_deriv) = apply_base(bf.kind, num / den_clamped);
                states[j] = InputState {
                    num,
                    den,
                    den_clamped,
                    den_flag,
                    g,
                    g_deriv,
                };
            }
        }

        let m_on = fam.out_num.len();
        let xpart = &self.out_num[r * m_on..(r + 1) * m_on];
        scratch.num_xpart.copy_from_slice(xpart);
        fill_values(&fam.out_num_terms, xpart, states, &mut scratch.num_vals);
        let nb = lay.block(k, Part::Numerator).expect("output numerator");
        let num = dot(&theta[nb.range()], &scratch.num_vals);
        scratch.out_num = num;

        match lay.block(k, Part::Denominator) {
            None => {
                scratch.out_den = 1.0;
                scratch.out_den_clamped = 1.0;
                scratch.out_den_flag = 0.0;
                num
            }
            Some(db) => {
                let m_od = db.len;
                let xpart = &self.out_den[r * m_od..(r + 1) * m_od];
                scratch.den_xpart.copy_from_slice(xpart);
                fill_values(&fam.out_den_terms, xpart, states, &mut scratch.den_vals);
                let den = dot(&theta[db.range()], &scratch.den_vals) / norms[k];
                let (dc, flag) = guard_div(den);
                scratch.out_den = den;
                scratch.out_den_clamped = dc;
                scratch.out_den_flag = flag;
                num / dc
            }
        }
    }
}

#[derive(Debug)]
struct Scratch {
    num_xpart: Vec<f64>,
    num_vals: Vec<f64>,
    den_xpart: Vec<f64>,
    den_vals: Vec<f64>,
    dg: Vec<f64>,
    out_num: f64,
    out_den: f64,
    out_den_clamped: f64,
    out_den_flag: f64,
}

impl Scratch {
    fn new(fam: &Family) -> Self {
        let m_od = fam.out_den.as_ref().map_or(0, MonomialBasis::len);
        Self {
            num_xpart: vec![0.0; fam.out_num.len()],
            num_vals: vec![0.0; fam.out_num.len()],
            den_xpart: vec![0.0; m_od],
            den_vals: vec![0.0; m_od],
            dg: vec![0.0; fam.spec.n_base()],
            out_num: 0.0,
            out_den: 1.0,
            out_den_clamped: 1.0,
            out_den_flag: 0.0,
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn fill_values(terms: &[OutputTerm], xpart: &[f64], states: &[InputState], out: &mut [f64]) {
    for ((o, t), &xp) in out.iter_mut().zip(terms).zip(xpart) {
        let mut v = xp;
        for &(j, p) in &t.base_powers {
            v *= states[j].g.powi(p as i32);
        }
        *o = v;
    }
}

// dg[j] += scale * sum_m coeff_m * d(monomial_m)/d(g_j)
#[inline]
fn accumulate_base_partials(
    terms: &[OutputTerm],
    coeffs: &[f64],
    xpart: &[f64],
    states: &[InputState],
    scale: f64,
    dg: &mut [f64],
) {
    for ((t, &c), &xp) in terms.iter().zip(coeffs).zip(xpart) {
        if c == 0.0 || t.base_powers.is_empty() {
            continue;
        }
        for (idx, &(j, p)) in t.base_powers.iter().enumerate() {
            let mut d = c * xp * f64::from(p) * states[j].g.powi(p as i32 - 1);
            for (other, &(l, q)) in t.base_powers.iter().enumerate() {
                if other != idx {
                    d *= states[l].g.powi(q as i32);
                }
            }
            dg[j] += scale * d;
        }
    }
}

pub fn mse(pred: &[f64], y: &[f64]) -> f64 {
    let n = y.len().max(1) as f64;
    pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n
}

/// Model output per row.
pub fn evaluate(spec: &ModelSpec, theta: &[f64], x: &Dataset) -> Result<Vec<f64>> {
    let fam = Family::new(spec.clone())?;
    fam.prepare(x)?.predict(theta)
}

/// Gradient of `MSE + lambda * R` at `theta`.
pub fn gradient(spec: &ModelSpec, theta: &[f64], data: &Dataset, lambda: f64) -> Result<Vec<f64>> {
    let fam = Family::new(spec.clone())?;
    let mut grad = vec![0.0; fam.n_params()];
    fam.prepare(data)?.loss_grad(theta, lambda, &mut grad)?;
    Ok(grad)
}

/// `MSE + lambda * R` at `theta`.
pub fn loss(spec: &ModelSpec, theta: &[f64], data: &Dataset, lambda: f64) -> Result<f64> {
    let fam = Family::new(spec.clone())?;
    fam.prepare(data)?.loss(theta, lambda)
}
