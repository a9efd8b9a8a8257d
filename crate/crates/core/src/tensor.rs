//! Dense pointwise tensors.
//!
//! Layout: covariant slots first, then contravariant slots, row-major. An
//! endomorphism φ with components φ^a_b is stored with valence (1,1) so that
//! `get(&[b, a]) = φ^a_b`.

use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Symmetry tolerance applied to inputs of the Kulkarni–Nomizu product.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Condition number above which a metric is rejected as degenerate.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    pub covariant: usize,
    pub contravariant: usize,
    pub dimension: usize,
    pub components: Vec<f64>,
}

impl Serialize for TensorValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TensorValue", 3)?;
        st.serialize_field("valence", &[self.covariant, self.contravariant])?;
        st.serialize_field("dimension", &self.dimension)?;
        st.serialize_field("components", &self.components)?;
        st.end()
    }
}

fn for_each_index(rank: usize, d: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    let total = d.pow(rank as u32);
    for _ in 0..total {
        f(&idx);
        for k in (0..rank).rev() {
            idx[k] += 1;
            if idx[k] < d {
                break;
            }
            idx[k] = 0;
        }
    }
}

impl TensorValue {
    pub fn zeros(covariant: usize, contravariant: usize, dimension: usize) -> Self {
        Self {
            covariant,
            contravariant,
            dimension,
            components: vec![0.0; dimension.pow((covariant + contravariant) as u32)],
        }
    }

    pub fn from_fn(
        covariant: usize,
        contravariant: usize,
        d: usize,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Self {
        let mut components = Vec::with_capacity(d.pow((covariant + contravariant) as u32));
        for_each_index(covariant + contravariant, d, |i| components.push(f(i)));
        Self {
            covariant,
            contravariant,
            dimension: d,
            components,
        }
    }

    pub fn from_components(
        covariant: usize,
        contravariant: usize,
        d: usize,
        components: Vec<f64>,
    ) -> Result<Self> {
        let want = d.pow((covariant + contravariant) as u32);
        if components.len() != want {
            return Err(Error::Dimension {
                expected: want,
                got: components.len(),
            });
        }
        Ok(Self {
            covariant,
            contravariant,
            dimension: d,
            components,
        })
    }

    /// (0,2) tensor from a row-major d×d matrix.
    pub fn bilinear(d: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_fn(2, 0, d, |i| f(i[0], i[1]))
    }

    pub fn covector(d: usize, f: impl Fn(usize) -> f64) -> Self {
        Self::from_fn(1, 0, d, |i| f(i[0]))
    }

    pub fn vector(d: usize, f: impl Fn(usize) -> f64) -> Self {
        Self::from_fn(0, 1, d, |i| f(i[0]))
    }

    /// Endomorphism with components `f(a, b) = φ^a_b` (image of e_b along e_a).
    pub fn endomorphism(d: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_fn(1, 1, d, |i| f(i[1], i[0]))
    }

    pub fn rank(&self) -> usize {
        self.covariant + self.contravariant
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dimension + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.components[o] = v;
    }

    #[inline]
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        self.components[i * self.dimension + j]
    }

    #[inline]
    pub fn at3(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dimension;
        self.components[(i * d + j) * d + k]
    }

    #[inline]
    pub fn at4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = self.dimension;
        self.components[((i * d + j) * d + k) * d + l]
    }

    /// φ^a_b for a (1,1) endomorphism.
    #[inline]
    pub fn endo(&self, a: usize, b: usize) -> f64 {
        self.at2(b, a)
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.dimension != o.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                got: o.dimension,
            });
        }
        if self.covariant != o.covariant || self.contravariant != o.contravariant {
            return Err(Error::Slot(format!(
                "valence ({},{}) vs ({},{})",
                self.covariant, self.contravariant, o.covariant, o.contravariant
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(self.zip(o, |a, b| a + b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(self.zip(o, |a, b| a - b))
    }

    /// `self + c * o`.
    pub fn axpy(&self, c: f64, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(self.zip(o, |a, b| a + c * b))
    }

    fn zip(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&o.components)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            components: self.components.iter().map(|a| c * a).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, o: &Self) -> Result<f64> {
        self.same_shape(o)?;
        Ok(self
            .components
            .iter()
            .zip(&o.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Linear combination of same-shaped tensors.
    pub fn combination(terms: &[(f64, &TensorValue)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Slot("empty combination".into()))?;
        let mut out = Self::zeros(first.covariant, first.contravariant, first.dimension);
        for (c, t) in terms {
            out = out.axpy(*c, t)?;
        }
        Ok(out)
    }

    /// Max |T(i,j) − T(j,i)| for a rank-2 tensor.
    pub fn asymmetry(&self) -> f64 {
        let d = self.dimension;
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                m = m.max((self.at2(i, j) - self.at2(j, i)).abs());
            }
        }
        m
    }

    /// Transposed copy of a rank-2 tensor.
    pub fn transpose2(&self) -> Self {
        let d = self.dimension;
        Self::from_fn(self.covariant, self.contravariant, d, |i| {
            self.at2(i[1], i[0])
        })
    }

    fn check_same_kind(&self, a: usize, b: usize) -> Result<()> {
        let r = self.rank();
        if a >= r || b >= r || a == b {
            return Err(Error::Slot(format!("slots {a},{b} of rank {r}")));
        }
        if (a < self.covariant) != (b < self.covariant) {
            return Err(Error::Slot(format!("slots {a},{b} are of different type")));
        }
        Ok(())
    }

    /// Symmetrization over two slots of the same type.
    pub fn symmetrize(&self, a: usize, b: usize) -> Result<Self> {
        self.check_same_kind(a, b)?;
        Ok(self.swap_combine(a, b, 0.5))
    }

    pub fn antisymmetrize(&self, a: usize, b: usize) -> Result<Self> {
        self.check_same_kind(a, b)?;
        Ok(self.swap_combine(a, b, -0.5))
    }

    fn swap_combine(&self, a: usize, b: usize, s: f64) -> Self {
        let mut sw = vec![0; self.rank()];
        Self::from_fn(self.covariant, self.contravariant, self.dimension, |i| {
            sw.copy_from_slice(i);
            sw.swap(a, b);
            0.5 * self.get(i) + s * self.get(&sw)
        })
    }

    /// Tensor product; slots ordered (cov a, cov b, contra a, contra b).
    pub fn outer(&self, o: &Self) -> Result<Self> {
        if self.dimension != o.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                got: o.dimension,
            });
        }
        let (ca, cb) = (self.covariant, o.covariant);
        let mut ia = vec![0; self.rank()];
        let mut ib = vec![0; o.rank()];
        Ok(Self::from_fn(
            ca + cb,
            self.contravariant + o.contravariant,
            self.dimension,
            |i| {
                ia[..ca].copy_from_slice(&i[..ca]);
                ib[..cb].copy_from_slice(&i[ca..ca + cb]);
                ia[ca..].copy_from_slice(&i[ca + cb..ca + cb + self.contravariant]);
                ib[cb..].copy_from_slice(&i[ca + cb + self.contravariant..]);
                self.get(&ia) * o.get(&ib)
            },
        ))
    }

    /// Trace over two slots. Mixed slots contract directly; two covariant
    /// slots need the inverse metric, two contravariant slots the metric.
    pub fn contract(&self, a: usize, b: usize, metric: Option<&MetricAtPoint>) -> Result<Self> {
        let r = self.rank();
        if a >= r || b >= r || a == b {
            return Err(Error::Slot(format!("slots {a},{b} of rank {r}")));
        }
        let d = self.dimension;
        let a_cov = a < self.covariant;
        let b_cov = b < self.covariant;
        let weight: Box<dyn Fn(usize, usize) -> f64> = match (a_cov, b_cov, metric) {
            (true, false, _) | (false, true, _) => Box::new(|i, j| if i == j { 1.0 } else { 0.0 }),
            (true, true, Some(m)) => Box::new(move |i, j| m.g_inv.at2(i, j)),
            (false, false, Some(m)) => Box::new(move |i, j| m.g.at2(i, j)),
            _ => {
                return Err(Error::Slot(
                    "contraction of two slots of the same type needs a metric".into(),
                ))
            }
        };
        let removed_cov = usize::from(a_cov) + usize::from(b_cov);
        let keep: Vec<usize> = (0..r).filter(|&s| s != a && s != b).collect();
        let mut full = vec![0; r];
        Ok(Self::from_fn(
            self.covariant - removed_cov,
            self.contravariant - (2 - removed_cov),
            d,
            |i| {
                for (k, &s) in keep.iter().enumerate() {
                    full[s] = i[k];
                }
                let mut acc = 0.0;
                for p in 0..d {
                    for q in 0..d {
                        let w = weight(p, q);
                        if w != 0.0 {
                            full[a] = p;
                            full[b] = q;
                            acc += w * self.get(&full);
                        }
                    }
                }
                acc
            },
        ))
    }

    /// `T(…, φ x_slot, …)` for a covariant slot.
    pub fn compose_phi(&self, phi: &TensorValue, slot: usize) -> Result<Self> {
        if slot >= self.covariant {
            return Err(Error::Slot(format!("slot {slot} is not covariant")));
        }
        if phi.covariant != 1 || phi.contravariant != 1 || phi.dimension != self.dimension {
            return Err(Error::Slot(
                "phi must be a (1,1) tensor of matching dimension".into(),
            ));
        }
        let d = self.dimension;
        let mut j = vec![0; self.rank()];
        Ok(Self::from_fn(self.covariant, self.contravariant, d, |i| {
            j.copy_from_slice(i);
            let mut acc = 0.0;
            for a in 0..d {
                let f = phi.endo(a, i[slot]);
                if f != 0.0 {
                    j[slot] = a;
                    acc += f * self.get(&j);
                }
            }
            acc
        }))
    }

    /// Raises covariant slot `slot`; the new index becomes contravariant slot 0.
    pub fn raise(&self, slot: usize, m: &MetricAtPoint) -> Result<Self> {
        if slot >= self.covariant {
            return Err(Error::Slot(format!("slot {slot} is not covariant")));
        }
        let d = self.dimension;
        let c = self.covariant;
        let mut j = vec![0; self.rank()];
        Ok(Self::from_fn(c - 1, self.contravariant + 1, d, |i| {
            // i: cov (c-1, with `slot` removed), new contra, old contras
            let up = i[c - 1];
            let mut k = 0;
            for s in 0..c {
                if s != slot {
                    j[s] = i[k];
                    k += 1;
                }
            }
            j[c..].copy_from_slice(&i[c..]);
            let mut acc = 0.0;
            for a in 0..d {
                j[slot] = a;
                acc += m.g_inv.at2(up, a) * self.get(&j);
            }
            acc
        }))
    }

    /// Lowers contravariant slot `slot` (0-based among contravariant slots);
    /// the new index becomes covariant slot `to`.
    pub fn lower(&self, slot: usize, m: &MetricAtPoint, to: usize) -> Result<Self> {
        if slot >= self.contravariant || to > self.covariant {
            return Err(Error::Slot(format!(
                "cannot lower contravariant slot {slot} to {to}"
            )));
        }
        let d = self.dimension;
        let c = self.covariant;
        let mut j = vec![0; self.rank()];
        Ok(Self::from_fn(c + 1, self.contravariant - 1, d, |i| {
            let down = i[to];
            let mut k = 0;
            for s in 0..=c {
                if s != to {
                    j[k] = i[s];
                    k += 1;
                }
            }
            let mut k = c;
            for s in 0..self.contravariant {
                if s != slot {
                    j[c + s] = i[c + 1 + (k - c)];
                    k += 1;
                }
            }
            let mut acc = 0.0;
            for a in 0..d {
                j[c + slot] = a;
                acc += m.g.at2(down, a) * self.get(&j);
            }
            acc
        }))
    }
}

/// Mixed absolute/relative discrepancy: max|A−B| / max(1, max|A|, max|B|).
pub fn mixed_residual(a: &TensorValue, b: &TensorValue) -> Result<f64> {
    let diff = a.max_abs_diff(b)?;
    Ok(diff / 1f64.max(a.max_abs()).max(b.max_abs()))
}

/// Scalar version of [`mixed_residual`].
pub fn mixed_scalar(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn check_symmetric2(t: &TensorValue) -> Result<()> {
    if t.covariant != 2 || t.contravariant != 0 {
        return Err(Error::Slot("expected a (0,2) tensor".into()));
    }
    let r = t.asymmetry();
    if r > SYMMETRY_TOL * 1f64.max(t.max_abs()) {
        return Err(Error::Asymmetric { residual: r });
    }
    Ok(())
}

/// (g∧h)(x,y,z,w) = g(y,z)h(x,w) − g(x,z)h(y,w) + h(y,z)g(x,w) − h(x,z)g(y,w).
pub fn kulkarni_nomizu(g: &TensorValue, h: &TensorValue) -> Result<TensorValue> {
    check_symmetric2(g)?;
    check_symmetric2(h)?;
    if g.dimension != h.dimension {
        return Err(Error::Dimension {
            expected: g.dimension,
            got: h.dimension,
        });
    }
    let d = g.dimension;
    let mut out = TensorValue::zeros(4, 0, d);
    let mut o = 0;
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                for w in 0..d {
                    out.components[o] = g.at2(y, z) * h.at2(x, w) - g.at2(x, z) * h.at2(y, w)
                        + h.at2(y, z) * g.at2(x, w)
                        - h.at2(x, z) * g.at2(y, w);
                    o += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Metric and inverse at a point, with signature record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAtPoint {
    pub g: TensorValue,
    pub g_inv: TensorValue,
    /// (positive, negative) eigenvalue counts.
    pub signature: (usize, usize),
    /// 1-norm condition number.
    pub condition: f64,
}

impl MetricAtPoint {
    pub fn new(g: TensorValue) -> Result<Self> {
        if g.covariant != 2 || g.contravariant != 0 {
            return Err(Error::Slot("metric must be a (0,2) tensor".into()));
        }
        let asym = g.asymmetry();
        if asym > 1e-12 * 1f64.max(g.max_abs()) {
            return Err(Error::Asymmetric { residual: asym });
        }
        let d = g.dimension;
        let m = DMatrix::from_row_slice(d, d, &g.components);
        let inv = m
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::DegenerateMetric {
                condition: f64::INFINITY,
            })?;
        let norm1 = |a: &DMatrix<f64>| {
            (0..d)
                .map(|j| (0..d).map(|i| a[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let condition = norm1(&m) * norm1(&inv);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::DegenerateMetric { condition });
        }
        let eig = m.symmetric_eigen();
        let pos = eig.eigenvalues.iter().filter(|e| **e > 0.0).count();
        let neg = eig.eigenvalues.iter().filter(|e| **e < 0.0).count();
        // symmetrize the inverse against rounding
        let g_inv =
            TensorValue::from_fn(0, 2, d, |i| 0.5 * (inv[(i[0], i[1])] + inv[(i[1], i[0])]));
        Ok(Self {
            g,
            g_inv,
            signature: (pos, neg),
            condition,
        })
    }

    pub fn dimension(&self) -> usize {
        self.g.dimension
    }

    /// max |g·g⁻¹ − I|.
    pub fn inverse_residual(&self) -> f64 {
        let d = self.dimension();
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let s: f64 = (0..d)
                    .map(|k| self.g.at2(i, k) * self.g_inv.at2(k, j))
                    .sum();
                m = m.max((s - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        m
    }

    /// g^{ij} T_ij for a (0,2) tensor.
    pub fn trace(&self, t: &TensorValue) -> f64 {
        let d = self.dimension();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += self.g_inv.at2(i, j) * t.at2(i, j);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(v: &[f64]) -> TensorValue {
        TensorValue::bilinear(v.len(), |i, j| if i == j { v[i] } else { 0.0 })
    }

    #[test]
    fn kn_orthonormal_plane() {
        let g = diag(&[1.0, 1.0]);
        let k = kulkarni_nomizu(&g, &g).unwrap();
        assert_eq!(k.at4(0, 1, 1, 0), 2.0);
    }

    #[test]
    fn kn_rejects_asymmetric() {
        let g = diag(&[1.0, 1.0]);
        let mut h = g.clone();
        h.components[1] = 1e-6;
        assert!(matches!(
            kulkarni_nomizu(&g, &h),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn identity_trace() {
        let id = TensorValue::endomorphism(5, |a, b| if a == b { 1.0 } else { 0.0 });
        let t = id.contract(0, 1, None).unwrap();
        assert_eq!(t.rank(), 0);
        assert_eq!(t.components, vec![5.0]);
    }

    #[test]
    fn metric_self_trace_is_dimension() {
        let g = TensorValue::bilinear(3, |i, j| {
            [[2.0, 0.3, 0.0], [0.3, -1.0, 0.1], [0.0, 0.1, 1.5]][i][j]
        });
        let m = MetricAtPoint::new(g.clone()).unwrap();
        let t = g.contract(0, 1, Some(&m)).unwrap();
        assert!((t.components[0] - 3.0).abs() < 1e-14);
        assert!(m.inverse_residual() < 1e-14);
        assert_eq!(m.signature, (2, 1));
    }

    #[test]
    fn covariant_pair_needs_metric() {
        let g = diag(&[1.0, 2.0]);
        assert!(matches!(g.contract(0, 1, None), Err(Error::Slot(_))));
    }

    #[test]
    fn degenerate_metric_rejected() {
        let g = diag(&[1.0, 1e-12]);
        assert!(matches!(
            MetricAtPoint::new(g),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    fn f0_phi(n: usize) -> TensorValue {
        let d = 2 * n + 1;
        TensorValue::endomorphism(d, |a, b| {
            if b < n && a == b + n {
                1.0
            } else if b >= n && b < 2 * n && a == b - n {
                -1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn compose_phi_twice_on_builtin() {
        let n = 2;
        let d = 2 * n + 1;
        let g = diag(&[-1.0, -1.0, 1.0, 1.0, 1.0]);
        let phi = f0_phi(n);
        let gs = g.compose_phi(&phi, 1).unwrap();
        for j in 0..d {
            assert_eq!(gs.at2(d - 1, j), 0.0);
        }
        let gss = gs.compose_phi(&phi, 1).unwrap();
        let eta = TensorValue::covector(d, |i| if i == d - 1 { 1.0 } else { 0.0 });
        let want = g.scale(-1.0).add(&eta.outer(&eta).unwrap()).unwrap();
        assert_eq!(gss, want);
    }

    #[test]
    fn serializes_with_valence() {
        let v = TensorValue::covector(2, |i| i as f64);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(
            s,
            r#"{"valence":[1,0],"dimension":2,"components":[0.0,1.0]}"#
        );
    }

    fn sym_strategy(d: usize) -> impl Strategy<Value = TensorValue> {
        prop::collection::vec(-2.0..2.0f64, d * d)
            .prop_map(move |v| TensorValue::bilinear(d, |i, j| 0.5 * (v[i * d + j] + v[j * d + i])))
    }

    fn metric_strategy(d: usize) -> impl Strategy<Value = MetricAtPoint> {
        prop::collection::vec(-0.3..0.3f64, d * d).prop_map(move |v| {
            let g = TensorValue::bilinear(d, |i, j| {
                let s = 0.5 * (v[i * d + j] + v[j * d + i]);
                if i == j {
                    s + if i % 2 == 0 { 2.0 } else { -2.0 }
                } else {
                    s
                }
            });
            MetricAtPoint::new(g).unwrap()
        })
    }

    proptest! {
        #[test]
        fn kn_algebraic_symmetries(g in sym_strategy(4), h in sym_strategy(4)) {
            let k = kulkarni_nomizu(&g, &h).unwrap();
            let k2 = kulkarni_nomizu(&h, &g).unwrap();
            prop_assert!(k.max_abs_diff(&k2).unwrap() <= 1e-12);
            for x in 0..4 { for y in 0..4 { for z in 0..4 { for w in 0..4 {
                let v = k.at4(x, y, z, w);
                prop_assert!((v + k.at4(y, x, z, w)).abs() <= 1e-12);
                prop_assert!((v + k.at4(x, y, w, z)).abs() <= 1e-12);
                prop_assert!((v - k.at4(z, w, x, y)).abs() <= 1e-12);
            }}}}
        }

        #[test]
        fn raise_then_lower_is_identity(m in metric_strategy(5), t in sym_strategy(5)) {
            let up = t.raise(1, &m).unwrap();
            prop_assert_eq!((up.covariant, up.contravariant), (1, 1));
            let back = up.lower(0, &m, 1).unwrap();
            prop_assert!(back.max_abs_diff(&t).unwrap() <= 1e-10);
            let up0 = t.raise(0, &m).unwrap();
            let back0 = up0.lower(0, &m, 0).unwrap();
            prop_assert!(back0.max_abs_diff(&t).unwrap() <= 1e-10);
        }

        #[test]
        fn projections_idempotent(t in prop::collection::vec(-1.0..1.0f64, 27)) {
            let t = TensorValue::from_components(3, 0, 3, t).unwrap();
            let s = t.symmetrize(0, 2).unwrap();
            prop_assert!(s.symmetrize(0, 2).unwrap().max_abs_diff(&s).unwrap() <= 1e-15);
            let a = t.antisymmetrize(1, 2).unwrap();
            prop_assert!(a.antisymmetrize(1, 2).unwrap().max_abs_diff(&a).unwrap() <= 1e-15);
        }
    }
}
