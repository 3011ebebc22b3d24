//! Counting unary-binary expression trees.
//!
//! With `n` leaf kinds, `k` unary kinds and `b` binary kinds, and `l`
//! internal nodes:
//!
//! - `b_l` counts binary trees,
//! - `c_l` counts unary-binary trees with at most one unary node on every
//!   root-to-leaf path (the trees the model family can represent),
//! - `d_l` counts all unary-binary trees.
//!
//! The exact counts come from the convolution recurrences. The asymptotic
//! forms follow from the dominant singularities of the generating functions:
//! `x1` (a root of a cubic, solved by Cardano's formula) for `c_l`, and the
//! smaller root `r2` of a quadratic for `d_l`.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};

/// Residual tolerance for the cubic roots.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeParams {
    pub n: u32,
    pub k: u32,
    pub b: u32,
}

impl TreeParams {
    pub fn new(n: u32, k: u32, b: u32) -> Result<Self> {
        if n == 0 || k == 0 || b == 0 {
            return Err(Error::InvalidConfig("n, k and b must all be at least 1".into()));
        }
        Ok(Self { n, k, b })
    }

    fn nkb(&self) -> (f64, f64, f64) {
        (f64::from(self.n), f64::from(self.k), f64::from(self.b))
    }
}

/// Exact sequences `b_l`, `c_l`, `d_l` for `l = 0..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts {
    pub b: Vec<BigUint>,
    pub c: Vec<BigUint>,
    pub d: Vec<BigUint>,
}

fn convolve(seq: &[BigUint], l: usize) -> BigUint {
    (0..l).map(|i| &seq[i] * &seq[l - 1 - i]).sum()
}

pub fn exact_counts(p: TreeParams, max_l: usize) -> Counts {
    let n = BigUint::from(p.n);
    let k = BigUint::from(p.k);
    let bb = BigUint::from(p.b);
    let mut b = vec![n.clone()];
    let mut c = vec![n.clone()];
    let mut d = vec![n];
    for l in 1..=max_l {
        b.push(&bb * convolve(&b, l));
        c.push(&k * &b[l - 1] + &bb * convolve(&c, l));
        d.push(&k * &d[l - 1] + &bb * convolve(&d, l));
    }
    Counts { b, c, d }
}

/// Roots of the cubic whose smallest root `x1` is the dominant singularity
/// of the generating function of `c_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub x1: Complex64,
    pub x2: Complex64,
    pub x3: Complex64,
    pub q: f64,
    pub r: f64,
    pub v: f64,
}

/// `p(z) = 1 - 2kz + 2kz sqrt(1 - 4bnz) - 4bnz` with the principal root.
pub fn singularity_poly(p: TreeParams, z: Complex64) -> Complex64 {
    let (n, k, b) = p.nkb();
    let s = (Complex64::new(1.0, 0.0) - 4.0 * b * n * z).sqrt();
    1.0 - 2.0 * k * z + 2.0 * k * z * s - 4.0 * b * n * z
}

/// Cardano's formula with the principal cube root `e^{i phi / 3}`.
///
/// `V = Q^3 + R^2` is evaluated from its closed form: the direct sum cancels
/// catastrophically.
pub fn cardano_roots(p: TreeParams) -> Result<CubicRoots> {
    let (n, k, b) = p.nkb();
    let q = (-4.0 * b.powi(3) * n.powi(3) - 8.0 * b * b * k * n * n - 10.0 * b * k * k * n - 3.0 * k.powi(3))
        / (36.0 * b * k.powi(4) * n);
    let r = (-32.0 * b.powi(4) * n.powi(4)
        - 96.0 * b.powi(3) * k * n.powi(3)
        - 168.0 * b * b * k * k * n * n
        - 140.0 * b * k.powi(3) * n
        - 63.0 * k.powi(4))
        / (864.0 * b * k.powi(6) * n);
    let v = -(8.0 * b * b * n * n + 13.0 * b * k * n + 16.0 * k * k) / (27648.0 * b.powi(3) * k.powi(5) * n.powi(3));

    let sqrt_v = Complex64::new(v, 0.0).sqrt();
    let cbrt = |w: Complex64| w.powf(1.0 / 3.0);
    let s = cbrt(Complex64::new(r, 0.0) + sqrt_v);
    let t = cbrt(Complex64::new(r, 0.0) - sqrt_v);
    let shift = (b * n + k) / (3.0 * k * k);
    let i_sqrt3_2 = Complex64::new(0.0, 3f64.sqrt() / 2.0);
    let x1 = s + t - shift;
    let x2 = -(s + t) / 2.0 - shift + i_sqrt3_2 * (s - t);
    let x3 = -(s + t) / 2.0 - shift - i_sqrt3_2 * (s - t);

    for (name, x) in [("x1", x1), ("x2", x2)] {
        let res = singularity_poly(p, x).norm();
        if !(res < ROOT_TOL) {
            return Err(Error::Numerical(format!("{name} residual {res:e} exceeds {ROOT_TOL:e}")));
        }
    }
    if !(x1.im.abs() < ROOT_TOL) {
        return Err(Error::Numerical(format!("x1 has imaginary part {:e}", x1.im)));
    }
    Ok(CubicRoots { x1, x2, x3, q, r, v })
}

/// Constants of both asymptotic expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics {
    pub params: TreeParams,
    pub roots: CubicRoots,
    pub x1: f64,
    pub r1: f64,
    pub r2: f64,
    pub v0: f64,
    pub v1: f64,
    pub lam: f64,
    pub mu: Complex64,
}

impl Asymptotics {
    pub fn new(p: TreeParams) -> Result<Self> {
        let (n, k, b) = p.nkb();
        let roots = cardano_roots(p)?;
        let (x1c, x2, x3) = (roots.x1, roots.x2, roots.x3);
        let x1 = x1c.re;

        let disc = 2.0 * (b * n * k + b * b * n * n).sqrt();
        let r1 = (k + 2.0 * b * n + disc) / (k * k);
        let r2 = (k + 2.0 * b * n - disc) / (k * k);
        let lam = k * (r1 * r2).sqrt();

        let mu = -16.0 * k * k * b * n * x1c * x2 * x3;
        let one = Complex64::new(1.0, 0.0);
        let root_term = (one - 4.0 * b * x1c * n).sqrt();
        let h = one - 2.0 * k * x1c - 4.0 * b * n * x1c - 2.0 * k * x1c * root_term;
        let a = (mu * (one - x1c / x2) * (one - x1c / x3)).sqrt();
        let sh = h.sqrt();
        let v0 = a / sh;
        let dq = 2.0 * x1c / (x2 * x3) - one / x2 - one / x3;
        let dh = -2.0 * k - 4.0 * b * n - 2.0 * k * root_term + 4.0 * b * n * k * x1c / root_term;
        let v1 = -x1c * mu / (2.0 * a * sh) * dq + x1c * a / (2.0 * h * sh) * dh;

        Ok(Self {
            params: p,
            roots,
            x1,
            r1,
            r2,
            v0: v0.re,
            v1: v1.re,
            lam,
            mu,
        })
    }

    /// Second-order approximation of `c_l`.
    pub fn approx_c(&self, l: u32) -> f64 {
        let m = f64::from(l) + 1.0;
        let b = f64::from(self.params.b);
        let lead = 1.0 / (4.0 * PI * m.powi(3)).sqrt() + 3.0 / (8.0 * (4.0 * PI * m.powi(5)).sqrt());
        let corr = 3.0 / (4.0 * (PI * m.powi(5)).sqrt());
        (self.v0 * lead - self.v1 * corr) / (2.0 * b * self.x1.powf(m))
    }

    /// Second-order approximation of `d_l`.
    pub fn approx_d(&self, l: u32) -> f64 {
        let m = f64::from(l) + 1.0;
        let b = f64::from(self.params.b);
        let w = (1.0 - self.r2 / self.r1).sqrt();
        let lead = 1.0 / (4.0 * PI * m.powi(3)).sqrt() + 3.0 / (8.0 * (4.0 * PI * m.powi(5)).sqrt());
        let corr = 3.0 * self.r2 / (8.0 * w * (PI * m.powi(5)).sqrt() * self.r1);
        self.lam / (2.0 * b * self.r2.powf(m)) * (w * lead - corr)
    }

    /// Asymptotic growth ratio `r2 / |x1|` of `c_l / d_l`.
    pub fn ratio(&self) -> f64 {
        self.r2 / self.x1.abs()
    }
}

/// Exact `c_l / d_l` as a float.
pub fn coverage_exact(counts: &Counts, l: usize) -> f64 {
    let c = counts.c[l].to_f64().unwrap_or(f64::INFINITY);
    let d = counts.d[l].to_f64().unwrap_or(f64::INFINITY);
    if c.is_finite() && d.is_finite() {
        c / d
    } else {
        // fall back to scaled integers when the counts overflow f64
        let shift = counts.d[l].bits().saturating_sub(60);
        let c = (&counts.c[l] >> shift).to_f64().unwrap_or(0.0);
        let d = (&counts.d[l] >> shift).to_f64().unwrap_or(1.0);
        c / d
    }
}

/// Half-away-from-zero rounding to 4 decimals.
pub fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// `r2 / |x1|` for every `(n, k)` pair, rows indexed by `n`, rounded to 4
/// decimals.
pub fn ratio_table(b: u32, ks: &[u32], ns: &[u32]) -> Result<Vec<Vec<f64>>> {
    ns.iter()
        .map(|&n| {
            ks.iter()
                .map(|&k| Ok(round4(Asymptotics::new(TreeParams::new(n, k, b)?)?.ratio())))
                .collect()
        })
        .collect()
}

/// Estimated share `c_l / d_l ~ rho^l` using the tabulated (rounded) ratio.
pub fn coverage_estimate(p: TreeParams, l: u32) -> Result<f64> {
    let rho = round4(Asymptotics::new(p)?.ratio());
    Ok(rho.powi(l as i32))
}

/// Series square root of `p` (with `p[0] == 1`) to `len` terms, exactly.
/// Fails when a coefficient is not an integer.
fn series_sqrt(p: &[BigInt], len: usize) -> Result<Vec<BigInt>> {
    let one = BigInt::from(1);
    if p.first() != Some(&one) {
        return Err(Error::Numerical("series must start with 1".into()));
    }
    let two = BigInt::from(2);
    let mut s = vec![one];
    for j in 1..len {
        let pj = p.get(j).cloned().unwrap_or_default();
        let cross: BigInt = (1..j).map(|i| &s[i] * &s[j - i]).sum();
        let num = pj - cross;
        if &num % &two != BigInt::default() {
            return Err(Error::Numerical(format!("non-integer series coefficient at {j}")));
        }
        s.push(num / &two);
    }
    Ok(s)
}

// Coefficients l = 0..=max_l of (head - sqrt_series) / (2bz).
fn extract(head: &[BigInt], sqrt: &[BigInt], b: u32, max_l: usize) -> Result<Vec<BigUint>> {
    let den = BigInt::from(2 * b);
    (0..=max_l)
        .map(|l| {
            let h = head.get(l + 1).cloned().unwrap_or_default();
            let num = h - &sqrt[l + 1];
            if &num % &den != BigInt::default() {
                return Err(Error::Numerical(format!("non-integer coefficient at {l}")));
            }
            (num / &den)
                .to_biguint()
                .ok_or_else(|| Error::Numerical(format!("negative coefficient at {l}")))
        })
        .collect()
}

/// Series coefficients of the closed-form generating functions `B`, `C`, `D`
/// computed with exact integer arithmetic.
pub fn generating_function_counts(p: TreeParams, max_l: usize) -> Result<Counts> {
    let len = max_l + 2;
    let (n, k, b) = (BigInt::from(p.n), BigInt::from(p.k), BigInt::from(p.b));
    let one = BigInt::from(1);
    let bn4 = BigInt::from(4) * &b * &n;

    // B(z) = (1 - sqrt(1 - 4bnz)) / (2bz)
    let pb = vec![one.clone(), -bn4.clone()];
    let sb = series_sqrt(&pb, len)?;
    let bs = extract(&[one.clone()], &sb, p.b, max_l)?;

    // C(z) = (1 - sqrt(1 - 4bnz - 4bk z^2 B(z))) / (2bz)
    let mut pc = vec![BigInt::default(); len];
    pc[0] = one.clone();
    pc[1] = -bn4.clone();
    let bk4 = BigInt::from(4) * &b * &k;
    for (l, v) in bs.iter().enumerate() {
        if l + 2 < len {
            pc[l + 2] -= &bk4 * BigInt::from(v.clone());
        }
    }
    let sc = series_sqrt(&pc, len)?;
    let cs = extract(&[one.clone()], &sc, p.b, max_l)?;

    // D(z) = (1 - kz - sqrt(k^2 z^2 - (2k + 4bn) z + 1)) / (2bz)
    let pd = vec![one.clone(), -(BigInt::from(2) * &k + &bn4), &k * &k];
    let sd = series_sqrt(&pd, len)?;
    let ds = extract(&[one, -k], &sd, p.b, max_l)?;

    Ok(Counts { b: bs, c: cs, d: ds })
}
