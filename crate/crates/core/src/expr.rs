//! Closed-form scalar fields over chart coordinates.
//!
//! Fields are immutable expression trees with shared subtrees. Evaluation is
//! generic over [`FieldScalar`] so the same tree yields plain values (for
//! finite-difference oracles) or second-order jets (for the curvature engine).

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jets::{FieldScalar, Jet2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Const(f64),
    Coord(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    PowInt(Expr, i32),
    Exp(Expr),
    Ln(Expr),
    Sqrt(Expr),
    Sin(Expr),
    Cos(Expr),
    Atan(Expr),
    /// `atan2(y, x)`.
    Atan2(Expr, Expr),
    Neg(Expr),
}

/// Shared handle to an expression node.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Node::deserialize(d).map(|n| Expr(Arc::new(n)))
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn constant(c: f64) -> Self {
        Self::wrap(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn coord(i: usize) -> Self {
        Self::wrap(Node::Coord(i))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.exp()),
            None => Self::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Self {
        match self.as_const() {
            Some(c) if c > 0.0 => Self::constant(c.ln()),
            _ => Self::wrap(Node::Ln(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Self {
        match self.as_const() {
            Some(c) if c > 0.0 => Self::constant(c.sqrt()),
            _ => Self::wrap(Node::Sqrt(self.clone())),
        }
    }

    pub fn sin(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.sin()),
            None => Self::wrap(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.cos()),
            None => Self::wrap(Node::Cos(self.clone())),
        }
    }

    pub fn atan(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.atan()),
            None => Self::wrap(Node::Atan(self.clone())),
        }
    }

    pub fn atan2(&self, x: &Expr) -> Self {
        match (self.as_const(), x.as_const()) {
            (Some(a), Some(b)) if a != 0.0 || b != 0.0 => Self::constant(a.atan2(b)),
            _ => Self::wrap(Node::Atan2(self.clone(), x.clone())),
        }
    }

    pub fn powi(&self, k: i32) -> Self {
        match (self.as_const(), k) {
            (_, 0) => Self::one(),
            (_, 1) => self.clone(),
            (Some(c), _) if k > 0 || c != 0.0 => Self::constant(c.powi(k)),
            _ => Self::wrap(Node::PowInt(self.clone(), k)),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Expr::constant(c) * self
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        let mut best = None;
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            match e.node() {
                Node::Const(_) => {}
                Node::Coord(i) => best = best.max(Some(*i)),
                Node::Add(a, b)
                | Node::Sub(a, b)
                | Node::Mul(a, b)
                | Node::Div(a, b)
                | Node::Atan2(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Node::PowInt(a, _)
                | Node::Exp(a)
                | Node::Ln(a)
                | Node::Sqrt(a)
                | Node::Sin(a)
                | Node::Cos(a)
                | Node::Atan(a)
                | Node::Neg(a) => stack.push(a.clone()),
            }
        }
        best
    }

    fn key(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }
}

fn add(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x == 0.0 => b.clone(),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => Expr::wrap(Node::Add(a.clone(), b.clone())),
    }
}

fn sub(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => Expr::wrap(Node::Sub(a.clone(), b.clone())),
    }
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
        (Some(x), _) if x == 1.0 => b.clone(),
        (_, Some(y)) if y == 1.0 => a.clone(),
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::wrap(Node::Mul(a.clone(), b.clone())),
    }
}

fn div(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
        (_, Some(y)) if y == 1.0 => a.clone(),
        _ => Expr::wrap(Node::Div(a.clone(), b.clone())),
    }
}

fn neg(a: &Expr) -> Expr {
    match a.node() {
        Node::Const(c) => Expr::constant(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::wrap(Node::Neg(a.clone())),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

/// Sum of expressions (zero for an empty iterator).
pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
    items.into_iter().fold(Expr::zero(), |acc, e| &acc + &e)
}

/// Memoizing evaluator bound to one chart point.
///
/// Shared subtrees (same `Arc`) are evaluated once per point. The memo keeps
/// a handle on every visited node so addresses cannot be recycled.
pub struct Evaluator<'p, T> {
    point: &'p [f64],
    memo: HashMap<*const Node, (Expr, T)>,
}

impl<'p, T: FieldScalar> Evaluator<'p, T> {
    pub fn new(point: &'p [f64]) -> Self {
        Self {
            point,
            memo: HashMap::new(),
        }
    }

    pub fn point(&self) -> &[f64] {
        self.point
    }

    pub fn eval(&mut self, e: &Expr) -> Result<T> {
        self.eval_inner(e).map_err(|err| err.at_point(self.point))
    }

    fn eval_inner(&mut self, e: &Expr) -> Result<T> {
        let key = e.key();
        if let Some((_, v)) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let d = self.point.len();
        let v = match e.node() {
            Node::Const(c) => T::constant(d, *c),
            Node::Coord(i) => {
                if *i >= d {
                    return Err(Error::Dimension {
                        expected: d,
                        got: i + 1,
                    });
                }
                T::coordinate(self.point, *i)
            }
            Node::Add(a, b) => self.eval_inner(a)?.add(&self.eval_inner(b)?),
            Node::Sub(a, b) => self.eval_inner(a)?.sub(&self.eval_inner(b)?),
            Node::Mul(a, b) => self.eval_inner(a)?.mul(&self.eval_inner(b)?),
            Node::Div(a, b) => self.eval_inner(a)?.div(&self.eval_inner(b)?)?,
            Node::PowInt(a, k) => self.eval_inner(a)?.powi(*k)?,
            Node::Exp(a) => self.eval_inner(a)?.exp(),
            Node::Ln(a) => self.eval_inner(a)?.ln()?,
            Node::Sqrt(a) => self.eval_inner(a)?.sqrt()?,
            Node::Sin(a) => self.eval_inner(a)?.sin(),
            Node::Cos(a) => self.eval_inner(a)?.cos(),
            Node::Atan(a) => self.eval_inner(a)?.atan(),
            Node::Atan2(y, x) => self.eval_inner(y)?.atan2(&self.eval_inner(x)?)?,
            Node::Neg(a) => self.eval_inner(a)?.neg(),
        };
        if !v.finite() {
            return Err(Error::NonFinite {
                point: self.point.to_vec(),
            });
        }
        self.memo.insert(key, (e.clone(), v.clone()));
        Ok(v)
    }

    pub fn eval_all(&mut self, es: &[Expr]) -> Result<Vec<T>> {
        es.iter().map(|e| self.eval(e)).collect()
    }
}

/// Domain restriction on chart points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Guard {
    /// |expr| > min_abs
    Nonzero {
        expr: Expr,
        #[serde(default)]
        min_abs: f64,
        #[serde(default)]
        label: Option<String>,
    },
    /// expr > min
    Positive {
        expr: Expr,
        #[serde(default)]
        min: f64,
        #[serde(default)]
        label: Option<String>,
    },
}

impl Guard {
    pub fn nonzero(expr: Expr, min_abs: f64, label: &str) -> Self {
        Guard::Nonzero {
            expr,
            min_abs,
            label: Some(label.to_string()),
        }
    }

    pub fn positive(expr: Expr, min: f64, label: &str) -> Self {
        Guard::Positive {
            expr,
            min,
            label: Some(label.to_string()),
        }
    }

    fn describe(&self) -> String {
        match self {
            Guard::Nonzero { label: Some(l), .. } | Guard::Positive { label: Some(l), .. } => {
                l.clone()
            }
            Guard::Nonzero { expr, min_abs, .. } => format!("|{expr:?}| > {min_abs}"),
            Guard::Positive { expr, min, .. } => format!("{expr:?} > {min}"),
        }
    }

    /// Ok if the point satisfies the guard.
    pub fn check(&self, p: &[f64]) -> Result<()> {
        let (expr, ok): (&Expr, Box<dyn Fn(f64) -> bool>) = match self {
            Guard::Nonzero { expr, min_abs, .. } => {
                let m = *min_abs;
                (expr, Box::new(move |v: f64| v.abs() > m))
            }
            Guard::Positive { expr, min, .. } => {
                let m = *min;
                (expr, Box::new(move |v: f64| v > m))
            }
        };
        let fail = || Error::Guard {
            guard: self.describe(),
            point: p.to_vec(),
        };
        match Evaluator::<f64>::new(p).eval(expr) {
            Ok(v) if ok(v) => Ok(()),
            _ => Err(fail()),
        }
    }
}

pub fn check_guards(guards: &[Guard], p: &[f64]) -> Result<()> {
    guards.iter().try_for_each(|g| g.check(p))
}

/// A scalar field on a chart of dimension `dim`, with its domain guards.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub dim: usize,
    pub expr: Expr,
    pub guards: Vec<Guard>,
}

impl ScalarField {
    pub fn new(dim: usize, expr: Expr, guards: Vec<Guard>) -> Result<Self> {
        if let Some(i) = expr.max_coord() {
            if i >= dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: i + 1,
                });
            }
        }
        Ok(Self { dim, expr, guards })
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: p.len(),
            });
        }
        check_guards(&self.guards, p)
    }

    pub fn jet(&self, p: &[f64]) -> Result<Jet2> {
        self.check(p)?;
        Evaluator::<Jet2>::new(p).eval(&self.expr)
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        self.check(p)?;
        Evaluator::<f64>::new(p).eval(&self.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Expr::coord(i)
    }

    #[test]
    fn json_form_round_trips() {
        let e = (x(4).powi(2) + Expr::constant(1.0)).ln();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(
            s,
            r#"{"ln":{"add":[{"pow_int":[{"coord":4},2]},{"const":1.0}]}}"#
        );
        let back: Expr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn constant_field_zero_jet() {
        let f = ScalarField::new(3, Expr::zero(), vec![]).unwrap();
        let j = f.jet(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(j, Jet2::constant(3, 0.0));
    }

    #[test]
    fn exp_t_field() {
        let f = ScalarField::new(3, x(2).exp(), vec![]).unwrap();
        let j = f.jet(&[0.3, -0.2, 1.0]).unwrap();
        let e = std::f64::consts::E;
        assert!((j.value - e).abs() < 1e-15);
        assert_eq!(j.gradient[..2], [0.0, 0.0]);
        assert!((j.gradient[2] - e).abs() < 1e-15);
        assert!((j.dd(2, 2) - e).abs() < 1e-15);
        assert_eq!(j.dd(0, 2), 0.0);
    }

    #[test]
    fn guard_violation_is_error() {
        let g = Guard::positive(x(0), 0.0, "x > 0");
        let f = ScalarField::new(1, x(0).ln(), vec![g]).unwrap();
        assert!(f.value(&[2.0]).is_ok());
        match f.value(&[-1.0]) {
            Err(Error::Guard { guard, point }) => {
                assert_eq!(guard, "x > 0");
                assert_eq!(point, vec![-1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unguarded_domain_error_reports_point() {
        let f = ScalarField::new(1, x(0).ln(), vec![]).unwrap();
        match f.jet(&[-1.0]) {
            Err(Error::Domain {
                op: "ln",
                point: Some(p),
                ..
            }) => assert_eq!(p, vec![-1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coordinate_out_of_range_rejected() {
        assert!(matches!(
            ScalarField::new(2, x(2), vec![]),
            Err(Error::Dimension {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn folding_keeps_trees_small() {
        let e = &(&x(0) * &Expr::one()) + &Expr::zero();
        assert_eq!(e, x(0));
        assert!((&x(1) * &Expr::zero()).is_zero());
        assert_eq!(-(-x(0)), x(0));
    }

    #[test]
    fn shared_subtrees_evaluated_once() {
        let s = (x(0) * x(1)).sin();
        let e = &s * &s + &s;
        let mut ev = Evaluator::<f64>::new(&[0.5, 0.25]);
        let v = ev.eval(&e).unwrap();
        let sv = (0.125f64).sin();
        assert!((v - (sv * sv + sv)).abs() < 1e-16);
        // coord(0), coord(1), product, sin, square, sum
        assert_eq!(ev.memo.len(), 6);
    }
}
