//! Expression trees: guarded evaluation, simplification, node counting and
//! the fully parenthesized text form.

use std::fmt;

use crate::family::guards::{guard_div, guard_exp, guard_log, guard_sqrt};
use crate::family::BaseKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
    Neg,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Log => "log",
            UnaryOp::Neg => "-",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "sqrt" => UnaryOp::Sqrt,
            "log" => UnaryOp::Log,
            _ => return None,
        })
    }

    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            UnaryOp::Sin => v.sin(),
            UnaryOp::Cos => v.cos(),
            UnaryOp::Exp => guard_exp(v).0,
            UnaryOp::Sqrt => guard_sqrt(v).0,
            UnaryOp::Log => guard_log(v).0,
            UnaryOp::Neg => -v,
        }
    }
}

impl From<BaseKind> for UnaryOp {
    fn from(k: BaseKind) -> Self {
        match k {
            BaseKind::Sin => UnaryOp::Sin,
            BaseKind::Cos => UnaryOp::Cos,
            BaseKind::Exp => UnaryOp::Exp,
            BaseKind::Sqrt => UnaryOp::Sqrt,
            BaseKind::Log => UnaryOp::Log,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / guard_div(b).0,
        }
    }
}

/// Expression tree. `Pow` exponents are integers `>= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b))
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn pow(a: Expr, p: u32) -> Expr {
        Expr::Pow(Box::new(a), p)
    }

    /// Evaluates with the same guards as the model family.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Unary(op, a) => op.apply(a.eval(x)),
            Expr::Binary(op, a, b) => op.apply(a.eval(x), b.eval(x)),
            Expr::Pow(a, p) => a.eval(x).powi(*p as i32),
        }
    }

    /// Largest variable index plus one.
    pub fn n_vars(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.n_vars(),
            Expr::Binary(_, a, b) => a.n_vars().max(b.n_vars()),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    /// Number of nodes; a power counts its exponent as a node.
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
            Expr::Pow(a, _) => 2 + a.node_count(),
        }
    }

    /// Applies `f` to every constant.
    pub fn map_consts(&self, f: &impl Fn(f64) -> f64) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(f(*c)),
            Expr::Var(i) => Expr::Var(*i),
            Expr::Unary(op, a) => Expr::unary(*op, a.map_consts(f)),
            Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(a.map_consts(f)), Box::new(b.map_consts(f))),
            Expr::Pow(a, p) => Expr::pow(a.map_consts(f), *p),
        }
    }

    /// Folds constant subtrees and removes neutral or annihilated terms.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => simplify_unary(*op, a.simplify()),
            Expr::Binary(op, a, b) => simplify_binary(*op, a.simplify(), b.simplify()),
            Expr::Pow(a, p) => {
                let a = a.simplify();
                match (a, *p) {
                    (a, 1) => a,
                    (Expr::Const(c), p) => fold(Expr::Const(c).eval(&[]).powi(p as i32), Expr::pow(Expr::Const(c), p)),
                    (Expr::Pow(inner, q), p) => Expr::pow(*inner, q * p),
                    (a, p) => Expr::pow(a, p),
                }
            }
        }
    }
}

// Keeps `orig` when folding would produce a non-finite constant.
fn fold(v: f64, orig: Expr) -> Expr {
    if v.is_finite() {
        Expr::Const(v)
    } else {
        orig
    }
}

fn simplify_unary(op: UnaryOp, a: Expr) -> Expr {
    match (op, a) {
        (_, Expr::Const(c)) => fold(op.apply(c), Expr::unary(op, Expr::Const(c))),
        (UnaryOp::Neg, Expr::Unary(UnaryOp::Neg, inner)) => *inner,
        (UnaryOp::Neg, Expr::Binary(BinaryOp::Mul, l, r)) if l.is_const() => {
            let Expr::Const(c) = *l else { unreachable!() };
            scaled(-c, *r)
        }
        (op, a) => Expr::unary(op, a),
    }
}

// `c * e` with the unit and zero cases collapsed.
fn scaled(c: f64, e: Expr) -> Expr {
    if c == 0.0 {
        Expr::Const(0.0)
    } else if c == 1.0 {
        e
    } else if c == -1.0 {
        Expr::unary(UnaryOp::Neg, e)
    } else {
        Expr::mul(Expr::Const(c), e)
    }
}

// Splits `e` into a constant factor and the remaining expression when the
// factor is negative, so sums can be written as differences.
fn negative_part(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Const(c) if *c < 0.0 => Some(Expr::Const(-c)),
        Expr::Unary(UnaryOp::Neg, inner) => Some((**inner).clone()),
        Expr::Binary(BinaryOp::Mul, l, r) => match **l {
            Expr::Const(c) if c < 0.0 => Some(scaled(-c, (**r).clone())),
            _ => None,
        },
        _ => None,
    }
}

fn simplify_binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    use BinaryOp::*;
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        return fold(op.apply(*x, *y), Expr::Binary(op, Box::new(a), Box::new(b)));
    }
    let zero = |e: &Expr| matches!(e, Expr::Const(c) if *c == 0.0);
    let one = |e: &Expr| matches!(e, Expr::Const(c) if *c == 1.0);
    match op {
        Add => {
            if zero(&a) {
                return b;
            }
            if zero(&b) {
                return a;
            }
            if let Some(nb) = negative_part(&b) {
                return Expr::sub(a, nb);
            }
            if let Some(na) = negative_part(&a) {
                return Expr::sub(b, na);
            }
            Expr::add(a, b)
        }
        Sub => {
            if zero(&b) {
                return a;
            }
            if zero(&a) {
                return simplify_unary(UnaryOp::Neg, b);
            }
            if let Some(nb) = negative_part(&b) {
                return Expr::add(a, nb);
            }
            Expr::sub(a, b)
        }
        Mul => {
            if zero(&a) || zero(&b) {
                return Expr::Const(0.0);
            }
            match (a, b) {
                (Expr::Const(c), e) | (e, Expr::Const(c)) => match e {
                    Expr::Binary(Mul, l, r) if l.is_const() => {
                        let Expr::Const(d) = *l else { unreachable!() };
                        scaled(c * d, *r)
                    }
                    Expr::Unary(UnaryOp::Neg, inner) => scaled(-c, *inner),
                    e => scaled(c, e),
                },
                (a, b) => Expr::mul(a, b),
            }
        }
        Div => {
            if zero(&a) {
                return Expr::Const(0.0);
            }
            if one(&b) {
                return a;
            }
            if let Expr::Const(c) = b {
                if c == -1.0 {
                    return simplify_unary(UnaryOp::Neg, a);
                }
            }
            Expr::div(a, b)
        }
    }
}

/// Number of nodes of the simplified tree.
pub fn complexity(e: &Expr) -> usize {
    e.simplify().node_count()
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "({c:?})")
    } else {
        write!(f, "{c:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Unary(UnaryOp::Neg, a) => match **a {
                Expr::Const(c) => {
                    f.write_str("(-(")?;
                    write!(f, "{c:?}")?;
                    f.write_str("))")
                }
                _ => write!(f, "(-{a})"),
            },
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, p) => write!(f, "({a}^{p})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::Var(0)
    }

    #[test]
    fn complexity_examples() {
        assert_eq!(complexity(&Expr::Const(3.0)), 1);
        assert_eq!(complexity(&Expr::add(Expr::Var(0), Expr::Var(1))), 3);
        let e = Expr::sub(
            Expr::mul(
                Expr::unary(UnaryOp::Sin, Expr::pow(x(), 2)),
                Expr::unary(UnaryOp::Cos, x()),
            ),
            Expr::Const(1.0),
        );
        assert_eq!(complexity(&e), 9);
    }

    #[test]
    fn zero_terms_are_pruned() {
        let e = Expr::add(Expr::mul(Expr::Const(0.0), Expr::unary(UnaryOp::Sin, x())), x());
        assert_eq!(e.simplify(), x());
        let e = Expr::add(Expr::Const(2.0), Expr::Const(3.0));
        assert_eq!(e.simplify(), Expr::Const(5.0));
    }

    #[test]
    fn negative_terms_become_differences() {
        let e = Expr::add(x(), Expr::mul(Expr::Const(-2.0), x()));
        assert_eq!(e.simplify().to_string(), "(x0 - (2.0 * x0))");
        let e = Expr::add(x(), Expr::Const(-1.0));
        assert_eq!(e.simplify().to_string(), "(x0 - 1.0)");
    }

    #[test]
    fn display_forms() {
        assert_eq!(Expr::Const(-3.5).to_string(), "(-3.5)");
        assert_eq!(Expr::unary(UnaryOp::Neg, Expr::Const(3.5)).to_string(), "(-(3.5))");
        assert_eq!(Expr::pow(x(), 3).to_string(), "(x0^3)");
        assert_eq!(Expr::unary(UnaryOp::Cos, x()).to_string(), "cos(x0)");
        assert_eq!(Expr::Const(1e-7).to_string(), "1e-7");
    }

    #[test]
    fn evaluation_uses_guards() {
        assert_eq!(Expr::unary(UnaryOp::Sqrt, x()).eval(&[-4.0]), 2.0);
        assert!((Expr::div(Expr::Const(1.0), x()).eval(&[0.0]) - 1e5).abs() < 1e-6);
    }
}
