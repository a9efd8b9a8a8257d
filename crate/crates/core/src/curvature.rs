//! Levi-Civita machinery from metric jets.
//!
//! Conventions: R(x,y) = [∇ₓ,∇_y] − ∇_[x,y], R(x,y,z,w) = g(R(x,y)z, w),
//! ρ(y,z) = g^{ij} R(eᵢ,y,z,eⱼ), τ = g^{ij}ρᵢⱼ, τ* = g^{ij}φⱼᵏρᵢₖ, and τ̃
//! is the scalar curvature of g̃ computed with g̃'s own connection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::Jet2;
use crate::manifold::{AccRStructure, StructureJets, StructureValues};
use crate::tensor::{MetricAtPoint, TensorValue};

pub const RIEMANN_CONVENTION: &str =
    "R(x,y)=[nabla_x,nabla_y]-nabla_[x,y]; R(x,y,z,w)=g(R(x,y)z,w)";
pub const RICCI_CONVENTION: &str = "rho(y,z)=g^ij R(e_i,y,z,e_j)";
pub const TAU_STAR_CONVENTION: &str = "tau*=g^ij phi_j^k rho_ik";
pub const TAU_TILDE_CONVENTION: &str =
    "tau~ = scalar curvature of g~ with its own Levi-Civita connection";

/// Levi-Civita connection at a point, with first derivatives of Γ.
#[derive(Debug, Clone)]
pub struct Connection {
    pub metric: MetricAtPoint,
    /// ∂_k g_ij at `(i*d + j)*d + k`.
    pub dg: Vec<f64>,
    /// Γ^k_ij stored as a (2,1) tensor: `gamma.at3(i, j, k)`.
    pub gamma: TensorValue,
    /// ∂_m Γ^k_ij at `((i*d + j)*d + k)*d + m`.
    pub dgamma: Vec<f64>,
}

impl Connection {
    pub fn dim(&self) -> usize {
        self.metric.dimension()
    }

    #[inline]
    pub fn gam(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma.at3(i, j, k)
    }

    #[inline]
    pub fn dgam(&self, k: usize, i: usize, j: usize, m: usize) -> f64 {
        let d = self.dim();
        self.dgamma[((i * d + j) * d + k) * d + m]
    }
}

fn square_dim(len: usize) -> Result<usize> {
    let d = (len as f64).sqrt().round() as usize;
    if d * d != len || d == 0 {
        return Err(Error::Dimension {
            expected: d * d,
            got: len,
        });
    }
    Ok(d)
}

/// Christoffel symbols (and their derivatives) from metric component jets.
pub fn christoffel(metric_jets: &[Jet2]) -> Result<Connection> {
    let d = square_dim(metric_jets.len())?;
    if let Some(j) = metric_jets.iter().find(|j| j.dim() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: j.dim(),
        });
    }
    let g = TensorValue::bilinear(d, |i, j| metric_jets[i * d + j].value);
    let metric = MetricAtPoint::new(g)?;
    let gi = |a: usize, b: usize| metric.g_inv.at2(a, b);
    let dg_at = |i: usize, j: usize, k: usize| metric_jets[i * d + j].d(k);
    let ddg_at = |i: usize, j: usize, k: usize, m: usize| metric_jets[i * d + j].dd(k, m);

    let mut dg = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                dg[(i * d + j) * d + k] = dg_at(i, j, k);
            }
        }
    }
    // first kind Γ_{l,ij} and ∂_m Γ_{l,ij}
    let mut g1 = vec![0.0; d * d * d];
    let mut dg1 = vec![0.0; d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                g1[(l * d + i) * d + j] = 0.5 * (dg_at(l, j, i) + dg_at(l, i, j) - dg_at(i, j, l));
                for m in 0..d {
                    dg1[((l * d + i) * d + j) * d + m] =
                        0.5 * (ddg_at(l, j, i, m) + ddg_at(l, i, j, m) - ddg_at(i, j, l, m));
                }
            }
        }
    }
    // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    let mut dginv = vec![0.0; d * d * d];
    for m in 0..d {
        for k in 0..d {
            for l in 0..d {
                let mut s = 0.0;
                for a in 0..d {
                    let gka = gi(k, a);
                    if gka == 0.0 {
                        continue;
                    }
                    for b in 0..d {
                        s += gka * dg_at(a, b, m) * gi(b, l);
                    }
                }
                dginv[(k * d + l) * d + m] = -s;
            }
        }
    }
    let mut gamma = TensorValue::zeros(2, 1, d);
    let mut dgamma = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += gi(k, l) * g1[(l * d + i) * d + j];
                }
                gamma.components[(i * d + j) * d + k] = s;
                for m in 0..d {
                    let mut t = 0.0;
                    for l in 0..d {
                        t += dginv[(k * d + l) * d + m] * g1[(l * d + i) * d + j]
                            + gi(k, l) * dg1[((l * d + i) * d + j) * d + m];
                    }
                    dgamma[((i * d + j) * d + k) * d + m] = t;
                }
            }
        }
    }
    Ok(Connection {
        metric,
        dg,
        gamma,
        dgamma,
    })
}

/// R(eᵢ,eⱼ,e_k,e_l) = g(R(eᵢ,eⱼ)e_k, e_l) given Γ and ∂Γ as closures.
pub fn assemble_riemann(
    d: usize,
    g: &TensorValue,
    gam: impl Fn(usize, usize, usize) -> f64,
    dgam: impl Fn(usize, usize, usize, usize) -> f64,
) -> TensorValue {
    // R^p_{kij} = ∂_i Γ^p_jk − ∂_j Γ^p_ik + Γ^p_im Γ^m_jk − Γ^p_jm Γ^m_ik
    let mut rup = vec![0.0; d * d * d * d];
    for p in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut s = dgam(p, j, k, i) - dgam(p, i, k, j);
                    for m in 0..d {
                        s += gam(p, i, m) * gam(m, j, k) - gam(p, j, m) * gam(m, i, k);
                    }
                    rup[((p * d + k) * d + i) * d + j] = s;
                }
            }
        }
    }
    TensorValue::from_fn(4, 0, d, |idx| {
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        (0..d)
            .map(|p| g.at2(l, p) * rup[((p * d + k) * d + i) * d + j])
            .sum()
    })
}

/// (0,4) curvature tensor lowered with the connection's metric.
pub fn curvature_tensor(conn: &Connection) -> TensorValue {
    assemble_riemann(
        conn.dim(),
        &conn.metric.g,
        |k, i, j| conn.gam(k, i, j),
        |k, i, j, m| conn.dgam(k, i, j, m),
    )
}

/// ρ(y,z) = g^{ij} R(eᵢ,y,z,eⱼ).
pub fn ricci(r: &TensorValue, metric: &MetricAtPoint) -> TensorValue {
    let d = metric.dimension();
    TensorValue::bilinear(d, |y, z| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += metric.g_inv.at2(i, j) * r.at4(i, y, z, j);
            }
        }
        s
    })
}

/// Scalar curvature of a metric from its component jets.
pub fn scalar_curvature(metric_jets: &[Jet2]) -> Result<f64> {
    let conn = christoffel(metric_jets)?;
    let r = curvature_tensor(&conn);
    let rho = ricci(&r, &conn.metric);
    Ok(conn.metric.trace(&rho))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub gamma: TensorValue,
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub ricci_star: TensorValue,
    pub tau: f64,
    pub tau_star: f64,
    pub tau_tilde: f64,
    pub point: Vec<f64>,
}

/// Everything the checks need about one structure at one point.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub point: Vec<f64>,
    pub jets: StructureJets,
    pub s: StructureValues,
    pub conn: Connection,
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub ricci_star: TensorValue,
    pub tau: f64,
    pub tau_star: f64,
    pub tau_tilde: f64,
    /// F(x,y,z) = g((∇ₓφ)y, z).
    pub f: TensorValue,
}

impl Geometry {
    pub fn compute(a: &AccRStructure, p: &[f64]) -> Result<Self> {
        let jets = a.jets(p)?;
        let s = jets.values();
        let conn = christoffel(&jets.g)?;
        let riemann = curvature_tensor(&conn);
        let ricci = ricci(&riemann, &conn.metric);
        let ricci_star = ricci.compose_phi(&s.phi, 1)?;
        let tau = conn.metric.trace(&ricci);
        let tau_star = conn.metric.trace(&ricci_star);
        let tau_tilde = scalar_curvature(&jets.gt)?;
        let f = covariant_derivative_phi(&conn, &jets.phi);
        Ok(Self {
            point: p.to_vec(),
            jets,
            s,
            conn,
            riemann,
            ricci,
            ricci_star,
            tau,
            tau_star,
            tau_tilde,
            f,
        })
    }

    pub fn n(&self) -> usize {
        self.s.n
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn metric(&self) -> &MetricAtPoint {
        &self.conn.metric
    }

    pub fn report(&self) -> CurvatureReport {
        CurvatureReport {
            gamma: self.conn.gamma.clone(),
            riemann: self.riemann.clone(),
            ricci: self.ricci.clone(),
            ricci_star: self.ricci_star.clone(),
            tau: self.tau,
            tau_star: self.tau_star,
            tau_tilde: self.tau_tilde,
            point: self.point.clone(),
        }
    }

    /// ∇ξ as a (1,1) tensor: at2(i, k) = (∇ᵢξ)^k.
    pub fn nabla_xi(&self) -> TensorValue {
        covariant_derivative_vector(&self.conn, &self.jets.xi)
    }

    /// ∇η as a (0,2) tensor: at2(i, j) = (∇ᵢη)ⱼ.
    pub fn nabla_eta(&self) -> TensorValue {
        covariant_derivative_covector(&self.conn, &self.jets.eta)
    }
}

/// (∇ᵢω)ⱼ = ∂ᵢωⱼ − Γ^k_ij ω_k.
pub fn covariant_derivative_covector(conn: &Connection, w: &[Jet2]) -> TensorValue {
    let d = conn.dim();
    TensorValue::bilinear(d, |i, j| {
        w[j].d(i) - (0..d).map(|k| conn.gam(k, i, j) * w[k].value).sum::<f64>()
    })
}

/// ∇du = Hess(u) − Γ·du, symmetric.
pub fn hessian_form(conn: &Connection, u: &Jet2) -> TensorValue {
    let d = conn.dim();
    TensorValue::bilinear(d, |i, j| {
        u.dd(i, j) - (0..d).map(|k| conn.gam(k, i, j) * u.d(k)).sum::<f64>()
    })
}

/// (∇ᵢX)^k = ∂ᵢX^k + Γ^k_ij X^j, stored as at2(i, k).
pub fn covariant_derivative_vector(conn: &Connection, x: &[Jet2]) -> TensorValue {
    let d = conn.dim();
    TensorValue::from_fn(1, 1, d, |idx| {
        let (i, k) = (idx[0], idx[1]);
        x[k].d(i) + (0..d).map(|j| conn.gam(k, i, j) * x[j].value).sum::<f64>()
    })
}

/// F(eᵢ, e_b, e_z) = g((∇ᵢφ)e_b, e_z).
pub fn covariant_derivative_phi(conn: &Connection, phi: &[Jet2]) -> TensorValue {
    let d = conn.dim();
    let ph = |a: usize, b: usize| phi[a * d + b].value;
    // (∇ᵢφ)^a_b = ∂ᵢφ^a_b + Γ^a_ic φ^c_b − φ^a_c Γ^c_ib
    let mut nphi = vec![0.0; d * d * d];
    for i in 0..d {
        for a in 0..d {
            for b in 0..d {
                let mut s = phi[a * d + b].d(i);
                for c in 0..d {
                    s += conn.gam(a, i, c) * ph(c, b) - ph(a, c) * conn.gam(c, i, b);
                }
                nphi[(i * d + a) * d + b] = s;
            }
        }
    }
    let g = &conn.metric.g;
    TensorValue::from_fn(3, 0, d, |idx| {
        let (i, b, z) = (idx[0], idx[1], idx[2]);
        (0..d)
            .map(|a| g.at2(z, a) * nphi[(i * d + a) * d + b])
            .sum()
    })
}

/// (L_X g)(x,y) = g(∇ₓX, y) + g(x, ∇_yX).
pub fn lie_derivative_metric(conn: &Connection, x: &[Jet2]) -> TensorValue {
    let d = conn.dim();
    let nx = covariant_derivative_vector(conn, x);
    let g = &conn.metric.g;
    TensorValue::bilinear(d, |i, j| {
        (0..d)
            .map(|k| g.at2(j, k) * nx.at2(i, k) + g.at2(i, k) * nx.at2(j, k))
            .sum()
    })
}

/// Coordinate formula X^k∂_k g_ij + g_kj ∂ᵢX^k + g_ik ∂ⱼX^k (oracle route).
pub fn lie_derivative_coordinate(metric_jets: &[Jet2], x: &[Jet2]) -> Result<TensorValue> {
    let d = square_dim(metric_jets.len())?;
    let g = |i: usize, j: usize| &metric_jets[i * d + j];
    Ok(TensorValue::bilinear(d, |i, j| {
        (0..d)
            .map(|k| {
                x[k].value * g(i, j).d(k) + g(k, j).value * x[k].d(i) + g(i, k).value * x[k].d(j)
            })
            .sum()
    }))
}

/// max |∇_k g_ij| (metric compatibility).
pub fn metric_compatibility(conn: &Connection) -> f64 {
    let d = conn.dim();
    let g = &conn.metric.g;
    let mut m: f64 = 0.0;
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut s = conn.dg[(i * d + j) * d + k];
                for l in 0..d {
                    s -= conn.gam(l, k, i) * g.at2(l, j) + conn.gam(l, k, j) * g.at2(i, l);
                }
                m = m.max(s.abs());
            }
        }
    }
    m
}

/// max |Γ^k_ij − Γ^k_ji|.
pub fn torsion(conn: &Connection) -> f64 {
    let d = conn.dim();
    let mut m: f64 = 0.0;
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                m = m.max((conn.gam(k, i, j) - conn.gam(k, j, i)).abs());
            }
        }
    }
    m
}

/// Residuals of the algebraic curvature symmetries, relative to max(1, max|R|).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSymmetry {
    pub antisym_first: f64,
    pub antisym_second: f64,
    pub pair_exchange: f64,
    pub first_bianchi: f64,
}

impl CurvatureSymmetry {
    pub fn max(&self) -> f64 {
        self.antisym_first
            .max(self.antisym_second)
            .max(self.pair_exchange)
            .max(self.first_bianchi)
    }
}

pub fn curvature_symmetries(r: &TensorValue) -> CurvatureSymmetry {
    let d = r.dimension;
    let scale = 1f64.max(r.max_abs());
    let mut out = CurvatureSymmetry {
        antisym_first: 0.0,
        antisym_second: 0.0,
        pair_exchange: 0.0,
        first_bianchi: 0.0,
    };
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                for w in 0..d {
                    let v = r.at4(x, y, z, w);
                    out.antisym_first = out.antisym_first.max((v + r.at4(y, x, z, w)).abs());
                    out.antisym_second = out.antisym_second.max((v + r.at4(x, y, w, z)).abs());
                    out.pair_exchange = out.pair_exchange.max((v - r.at4(z, w, x, y)).abs());
                    let b = v + r.at4(y, z, x, w) + r.at4(z, x, y, w);
                    out.first_bianchi = out.first_bianchi.max(b.abs());
                }
            }
        }
    }
    out.antisym_first /= scale;
    out.antisym_second /= scale;
    out.pair_exchange /= scale;
    out.first_bianchi /= scale;
    out
}

/// δ(du), δ̃(du), du(grad u), du(φ grad u).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplacianTraces {
    pub delta: f64,
    pub delta_tilde: f64,
    pub du_grad_u: f64,
    pub du_phi_grad_u: f64,
}

pub fn laplacian_traces(
    conn: &Connection,
    s: &StructureValues,
    u: &Jet2,
) -> Result<LaplacianTraces> {
    let d = conn.dim();
    let h = hessian_form(conn, u);
    let gt = MetricAtPoint::new(s.gt.clone())?;
    let grad: Vec<f64> = (0..d)
        .map(|a| (0..d).map(|b| conn.metric.g_inv.at2(a, b) * u.d(b)).sum())
        .collect();
    let phi_grad = s.phi_vec(&grad);
    Ok(LaplacianTraces {
        delta: conn.metric.trace(&h),
        delta_tilde: gt.trace(&h),
        du_grad_u: (0..d).map(|a| u.d(a) * grad[a]).sum(),
        du_phi_grad_u: (0..d).map(|a| u.d(a) * phi_grad[a]).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Evaluator, Expr};
    use crate::jets::Jet2;

    fn metric_jets(g: &[Expr], p: &[f64]) -> Vec<Jet2> {
        Evaluator::<Jet2>::new(p).eval_all(g).unwrap()
    }

    fn x(i: usize) -> Expr {
        Expr::coord(i)
    }

    #[test]
    fn round_sphere_scalar_curvature() {
        // dθ² + sin²θ dφ²
        let g = vec![Expr::one(), Expr::zero(), Expr::zero(), x(0).sin().powi(2)];
        let tau = scalar_curvature(&metric_jets(&g, &[0.7, 0.3])).unwrap();
        assert!((tau - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_space_scalar_curvature() {
        // upper half space (dx²+dy²+dz²)/z²
        let c = x(2).powi(-2);
        let z = Expr::zero();
        let g = vec![
            c.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            c.clone(),
            z.clone(),
            z.clone(),
            z,
            c,
        ];
        let tau = scalar_curvature(&metric_jets(&g, &[0.1, -0.4, 1.3])).unwrap();
        assert!((tau + 6.0).abs() < 1e-11);
    }

    #[test]
    fn constant_metric_has_zero_christoffel() {
        let a = AccRStructure::builtin_f0(2).unwrap();
        let geo = Geometry::compute(&a, &[0.3, -1.0, 2.0, 0.5, 0.1]).unwrap();
        assert_eq!(geo.conn.gamma.max_abs(), 0.0);
        assert_eq!(geo.riemann.max_abs(), 0.0);
        assert_eq!(geo.f.max_abs(), 0.0);
        assert_eq!((geo.tau, geo.tau_star, geo.tau_tilde), (0.0, 0.0, 0.0));
    }

    #[test]
    fn flat_metric_in_curvilinear_coordinates() {
        // polar-like non-diagonal flat metric: pull back of dx² + dy² under
        // (a, b) ↦ (a + b², b)
        let b = x(1);
        let g = vec![
            Expr::one(),
            b.scale(2.0),
            b.scale(2.0),
            Expr::one() + b.powi(2).scale(4.0),
        ];
        let conn = christoffel(&metric_jets(&g, &[0.4, 0.9])).unwrap();
        assert!(curvature_tensor(&conn).max_abs() < 1e-13);
        assert!(metric_compatibility(&conn) < 1e-13);
        assert!(torsion(&conn) < 1e-15);
    }

    #[test]
    fn lie_derivative_routes_agree_on_warped_metric() {
        let g = vec![
            x(1).exp(),
            x(0) * x(1),
            x(0) * x(1),
            Expr::constant(2.0) + x(0).sin(),
        ];
        let p = [0.3, 0.6];
        let gj = metric_jets(&g, &p);
        let xv = Evaluator::<Jet2>::new(&p)
            .eval_all(&[x(1).powi(2), x(0).cos()])
            .unwrap();
        let conn = christoffel(&gj).unwrap();
        let a = lie_derivative_metric(&conn, &xv);
        let b = lie_derivative_coordinate(&gj, &xv).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-13);
    }

    #[test]
    fn killing_field_of_sphere() {
        // ∂φ is Killing for dθ² + sin²θ dφ²
        let g = vec![Expr::one(), Expr::zero(), Expr::zero(), x(0).sin().powi(2)];
        let p = [0.9, 2.0];
        let conn = christoffel(&metric_jets(&g, &p)).unwrap();
        let kv = Evaluator::<Jet2>::new(&p)
            .eval_all(&[Expr::zero(), Expr::one()])
            .unwrap();
        assert!(lie_derivative_metric(&conn, &kv).max_abs() < 1e-15);
    }

    #[test]
    fn laplacian_traces_for_t() {
        let a = AccRStructure::builtin_f0(2).unwrap();
        let p = [0.1, 0.2, 0.3, 0.4, 0.5];
        let geo = Geometry::compute(&a, &p).unwrap();
        let u = Evaluator::<Jet2>::new(&p).eval(&x(4)).unwrap();
        let t = laplacian_traces(&geo.conn, &geo.s, &u).unwrap();
        assert_eq!((t.delta, t.du_grad_u, t.du_phi_grad_u), (0.0, 1.0, 0.0));
        let c = Evaluator::<Jet2>::new(&p)
            .eval(&Expr::constant(3.0))
            .unwrap();
        let t = laplacian_traces(&geo.conn, &geo.s, &c).unwrap();
        assert_eq!(
            (t.delta, t.delta_tilde, t.du_grad_u, t.du_phi_grad_u),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn degenerate_metric_rejected() {
        let g = vec![Expr::one(), Expr::one(), Expr::one(), Expr::one()];
        assert!(matches!(
            christoffel(&metric_jets(&g, &[0.0, 0.0])),
            Err(Error::DegenerateMetric { .. })
        ));
    }
}
