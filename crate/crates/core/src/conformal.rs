//! Contact conformal (G-)transformations and the G₀ curvature relations.

use serde::{Deserialize, Serialize};

use crate::curvature::{hessian_form, laplacian_traces, Geometry, LaplacianTraces};
use crate::error::{Error, Result};
use crate::expr::{check_guards, Evaluator, Expr};
use crate::jets::Jet2;
use crate::manifold::{AccRStructure, StructureValues};
use crate::tensor::{MetricAtPoint, TensorValue};

/// Absolute tolerance of the G₀ predicate.
pub const G0_TOL: f64 = 1e-9;

/// Unchecked Kulkarni–Nomizu expansion. Used inside formulas whose inputs
/// are symmetric only up to the correctness of the formula itself.
pub fn kn_expand(g: &TensorValue, h: &TensorValue) -> TensorValue {
    let d = g.dimension;
    TensorValue::from_fn(4, 0, d, |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        g.at2(y, z) * h.at2(x, w) - g.at2(x, z) * h.at2(y, w) + h.at2(y, z) * g.at2(x, w)
            - h.at2(x, z) * g.at2(y, w)
    })
}

/// The triple (u, v, w) of a G-transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GTransform {
    pub u: Expr,
    pub v: Expr,
    pub w: Expr,
}

impl GTransform {
    pub fn identity() -> Self {
        Self {
            u: Expr::zero(),
            v: Expr::zero(),
            w: Expr::zero(),
        }
    }

    /// (−u, −v, −w).
    pub fn inverse(&self) -> Self {
        Self {
            u: -&self.u,
            v: -&self.v,
            w: -&self.w,
        }
    }

    /// ξ̄ = e^{−w}ξ, η̄ = e^{w}η,
    /// ḡ = e^{2u}cos2v·g + e^{2u}sin2v·g̃ + (e^{2w} − e^{2u}cos2v − e^{2u}sin2v)η⊗η.
    pub fn apply(&self, a: &AccRStructure) -> AccRStructure {
        let d = a.dim();
        let two = Expr::constant(2.0);
        let e2u = (&two * &self.u).exp();
        let cc = &e2u * &(&two * &self.v).cos();
        let ss = &e2u * &(&two * &self.v).sin();
        let rest = &(&(&two * &self.w).exp() - &cc) - &ss;
        let ew = self.w.exp();
        let emw = (-&self.w).exp();
        let gt = a.associated_metric();
        let mut g = vec![Expr::zero(); d * d];
        for i in 0..d {
            for j in i..d {
                let e = &(&(&cc * &a.g[i * d + j]) + &(&ss * &gt[i * d + j]))
                    + &(&rest * &(&a.eta[i] * &a.eta[j]));
                g[i * d + j] = e.clone();
                g[j * d + i] = e;
            }
        }
        AccRStructure {
            n: a.n,
            phi: a.phi.clone(),
            xi: a.xi.iter().map(|x| &emw * x).collect(),
            eta: a.eta.iter().map(|x| &ew * x).collect(),
            g,
            guards: a.guards.clone(),
        }
    }

    pub fn jets(&self, p: &[f64]) -> Result<TransformJets> {
        let mut ev = Evaluator::<Jet2>::new(p);
        Ok(TransformJets {
            u: ev.eval(&self.u)?,
            v: ev.eval(&self.v)?,
            w: ev.eval(&self.w)?,
        })
    }
}

/// Jets of u, v, w at one point.
#[derive(Debug, Clone)]
pub struct TransformJets {
    pub u: Jet2,
    pub v: Jet2,
    pub w: Jet2,
}

/// α = du∘φ + dv, β = du − dv∘φ, γ = cos2v·α + sin2v·β, δ = cos2v·β − sin2v·α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedForms {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
}

impl TransformJets {
    pub fn du(&self) -> &[f64] {
        &self.u.gradient
    }

    pub fn dv(&self) -> &[f64] {
        &self.v.gradient
    }

    pub fn dw(&self) -> &[f64] {
        &self.w.gradient
    }

    pub fn forms(&self, s: &StructureValues) -> DerivedForms {
        let d = s.dim();
        let du_phi = s.covector_phi(self.du());
        let dv_phi = s.covector_phi(self.dv());
        let alpha: Vec<f64> = (0..d).map(|i| du_phi[i] + self.dv()[i]).collect();
        let beta: Vec<f64> = (0..d).map(|i| self.du()[i] - dv_phi[i]).collect();
        let (sn, cs) = (2.0 * self.v.value).sin_cos();
        let gamma = (0..d).map(|i| cs * alpha[i] + sn * beta[i]).collect();
        let delta = (0..d).map(|i| cs * beta[i] - sn * alpha[i]).collect();
        DerivedForms {
            alpha,
            beta,
            gamma,
            delta,
        }
    }
}

fn apply_covector(w: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// F̄ predicted from F, the source structure and (u,v,w):
/// 2F̄ = 2e^{2u}cos2v F + e^{2u}sin2v[P(x,y,z)+P(x,z,y)]
///      + (e^{2w} − e^{2u}cos2v)[Q(x,y,z)+Q(x,z,y)+Q(y,z,x)+Q(z,y,x)]
///      − 2e^{2u}[γ(z)g(φx,φy) + δ(z)g(x,φy) + γ(y)g(φx,φz) + δ(y)g(x,φz)]
///      + 2e^{2w}η(x)[η(y)dw(φz) + η(z)dw(φy)].
pub fn fbar_formula(src: &Geometry, t: &TransformJets) -> Result<TensorValue> {
    let s = &src.s;
    let d = s.dim();
    let f = &src.f;
    let xi = &s.xi.components;
    let eta = &s.eta.components;
    // F(·,·,ξ)
    let f_xi = TensorValue::bilinear(d, |i, j| (0..d).map(|c| f.at3(i, j, c) * xi[c]).sum());
    let f_p0 = f.compose_phi(&s.phi, 0)?;
    let f_p1 = f.compose_phi(&s.phi, 1)?;
    let fxi_p1 = f_xi.compose_phi(&s.phi, 1)?;
    let fxi_p01 = f_xi.compose_phi(&s.phi, 0)?.compose_phi(&s.phi, 1)?;
    let p = |x: usize, y: usize, z: usize| {
        f_p0.at3(y, z, x) - f_p1.at3(y, z, x) + fxi_p1.at2(x, y) * eta[z]
    };
    let q = |x: usize, y: usize, z: usize| (f_xi.at2(x, y) + fxi_p01.at2(y, x)) * eta[z];
    let forms = t.forms(s);
    let gpp = s.g.compose_phi(&s.phi, 0)?.compose_phi(&s.phi, 1)?;
    let gs = s.g_star();
    let dw_phi = s.covector_phi(t.dw());
    let e2u = (2.0 * t.u.value).exp();
    let e2w = (2.0 * t.w.value).exp();
    let (sn, cs) = (2.0 * t.v.value).sin_cos();
    let (ga, de) = (&forms.gamma, &forms.delta);
    Ok(TensorValue::from_fn(3, 0, d, |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        let two_fbar = 2.0 * e2u * cs * f.at3(x, y, z)
            + e2u * sn * (p(x, y, z) + p(x, z, y))
            + (e2w - e2u * cs) * (q(x, y, z) + q(x, z, y) + q(y, z, x) + q(z, y, x))
            - 2.0
                * e2u
                * (ga[z] * gpp.at2(x, y)
                    + de[z] * gs.at2(x, y)
                    + ga[y] * gpp.at2(x, z)
                    + de[y] * gs.at2(x, z))
            + 2.0 * e2w * eta[x] * (eta[y] * dw_phi[z] + eta[z] * dw_phi[y]);
        0.5 * two_fbar
    }))
}

/// Residuals of du∘φ = dv∘φ², du(ξ) = 0, dv(ξ) = 0, dw∘φ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G0Residuals {
    pub du_phi_minus_dv_phi2: f64,
    pub du_xi: f64,
    pub dv_xi: f64,
    pub dw_phi: f64,
}

impl G0Residuals {
    pub fn max(&self) -> f64 {
        self.du_phi_minus_dv_phi2
            .max(self.du_xi)
            .max(self.dv_xi)
            .max(self.dw_phi)
    }
}

pub fn g0_residuals(s: &StructureValues, t: &TransformJets) -> G0Residuals {
    let du_phi = s.covector_phi(t.du());
    let dv_phi2 = s.covector_phi(&s.covector_phi(t.dv()));
    let dw_phi = s.covector_phi(t.dw());
    let xi = &s.xi.components;
    G0Residuals {
        du_phi_minus_dv_phi2: du_phi
            .iter()
            .zip(&dv_phi2)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        du_xi: apply_covector(t.du(), xi).abs(),
        dv_xi: apply_covector(t.dv(), xi).abs(),
        dw_phi: dw_phi.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// G₀ predicate over points; returns the largest residual seen.
pub fn is_g0(t: &GTransform, a: &AccRStructure, points: &[Vec<f64>]) -> Result<(bool, f64)> {
    let mut worst: f64 = 0.0;
    for p in points {
        check_guards(&a.guards, p)?;
        let s = a.values(p)?;
        worst = worst.max(g0_residuals(&s, &t.jets(p)?).max());
    }
    Ok((worst <= G0_TOL, worst))
}

/// Sign choice inside a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// S, S*, their g-traces and the Laplacian-type traces of u.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SPack {
    pub s: TensorValue,
    pub s_star: TensorValue,
    pub tr_s: f64,
    pub tr_s_star: f64,
    pub traces: LaplacianTraces,
    /// ∇du(ξ, ξ)
    pub hess_xi_xi: f64,
    /// du(ξ)
    pub du_xi: f64,
}

/// S = ∇du ± du⊗du + (du∘φ)⊗(du∘φ) + ½du(grad u)[g − η⊗η]
///     − ½du(φ grad u)[g̃ − η⊗η], built on the structure of `geo`.
pub fn s_tensor(geo: &Geometry, u: &Jet2, du_du: Sign) -> Result<SPack> {
    let s = &geo.s;
    let d = s.dim();
    let h = hessian_form(&geo.conn, u);
    let traces = laplacian_traces(&geo.conn, s, u)?;
    let du = &u.gradient;
    let du_phi = s.covector_phi(du);
    let ee = s.eta_eta();
    let sign = du_du.value();
    let (nn, mm) = (traces.du_grad_u, traces.du_phi_grad_u);
    let st = TensorValue::bilinear(d, |i, j| {
        h.at2(i, j)
            + sign * du[i] * du[j]
            + du_phi[i] * du_phi[j]
            + 0.5 * nn * (s.g.at2(i, j) - ee.at2(i, j))
            - 0.5 * mm * (s.gt.at2(i, j) - ee.at2(i, j))
    });
    let s_star = st.compose_phi(&s.phi, 1)?;
    let xi = &s.xi.components;
    let hess_xi_xi = (0..d)
        .map(|i| (0..d).map(|j| h.at2(i, j) * xi[i] * xi[j]).sum::<f64>())
        .sum();
    Ok(SPack {
        tr_s: geo.metric().trace(&st),
        tr_s_star: geo.metric().trace(&s_star),
        s: st,
        s_star,
        traces,
        hess_xi_xi,
        du_xi: apply_covector(du, xi),
    })
}

/// Closed-form traces of S and S*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormula {
    /// tr S = δ(du) + 2n du(grad u), tr S* = δ̃(du) + 2n du(φ grad u), with
    /// δ̃(du) read as g̃_{kl} g^{ki} g^{lj} (∇du)_{ij} = −g̃^{ij}(∇du)_{ij} + ∇du(ξ,ξ).
    /// That reading is the one the closed-form traces of the G₀ example need.
    Printed,
    /// Traces of S with −du⊗du: tr S = δ(du) + (n−2)du(grad u) + du(ξ)²,
    /// tr S* = −δ̃(du) + ∇du(ξ,ξ) + (n−2)du(φ grad u).
    Derived,
}

pub fn trace_formula(pack: &SPack, n: usize, which: TraceFormula) -> (f64, f64) {
    let t = &pack.traces;
    let nf = n as f64;
    match which {
        TraceFormula::Printed => (
            t.delta + 2.0 * nf * t.du_grad_u,
            -t.delta_tilde + pack.hess_xi_xi + 2.0 * nf * t.du_phi_grad_u,
        ),
        TraceFormula::Derived => (
            t.delta + (nf - 2.0) * t.du_grad_u + pack.du_xi * pack.du_xi,
            -t.delta_tilde + pack.hess_xi_xi + (nf - 2.0) * t.du_phi_grad_u,
        ),
    }
}

/// R − g∧S + g*∧S* + (η⊗η)∧S on the source structure.
pub fn curvature_relation_g0(src: &Geometry, pack: &SPack) -> TensorValue {
    let s = &src.s;
    let gs = s.g_star();
    let ee = s.eta_eta();
    let r = src.riemann.clone();
    let terms = [
        (-1.0, kn_expand(&s.g, &pack.s)),
        (1.0, kn_expand(&gs, &pack.s_star)),
        (1.0, kn_expand(&ee, &pack.s)),
    ];
    terms
        .iter()
        .fold(r, |acc, (c, t)| acc.axpy(*c, t).expect("same shape"))
}

/// Refuses non-G₀ transformations at a point.
pub fn require_g0(s: &StructureValues, t: &TransformJets) -> Result<()> {
    let r = g0_residuals(s, t).max();
    if r > G0_TOL {
        return Err(Error::NotG0 { residual: r });
    }
    Ok(())
}

/// Re-lowers the last slot of a (0,4) tensor of metric `from` with metric
/// `to`: T(x,y,z,·) ↦ to(T^♯(x,y,z), ·).
pub fn relower(t: &TensorValue, from: &MetricAtPoint, to: &TensorValue) -> TensorValue {
    let d = t.dimension;
    let mut m = vec![0.0; d * d];
    for p in 0..d {
        for l in 0..d {
            m[p * d + l] = (0..d).map(|q| from.g_inv.at2(p, q) * to.at2(q, l)).sum();
        }
    }
    TensorValue::from_fn(4, 0, d, |i| {
        (0..d)
            .map(|p| t.at4(i[0], i[1], i[2], p) * m[p * d + i[3]])
            .sum()
    })
}

/// Angle multiple in the scalar-curvature relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMultiple {
    /// e^{−4u}cos4v, e^{−4u}sin4v
    Four,
    /// e^{−2u}cos2v, e^{−2u}sin2v
    Two,
}

/// τ̄ = e^{−ku}cos(kv){τ − 4(n−1)trS} + e^{−ku}sin(kv){τ̃ + 4(n−1)trS*},
/// τ̃̄ = e^{−ku}cos(kv){τ̃ + 4(n−1)trS*} − e^{−ku}sin(kv){τ − 4(n−1)trS}.
pub fn scalar_relation_g0(
    tau: f64,
    tau_tilde: f64,
    tr_s: f64,
    tr_s_star: f64,
    u: f64,
    v: f64,
    n: usize,
    k: AngleMultiple,
) -> (f64, f64) {
    let m = match k {
        AngleMultiple::Four => 4.0,
        AngleMultiple::Two => 2.0,
    };
    let c4 = 4.0 * (n as f64 - 1.0);
    let e = (-m * u).exp();
    let (sn, cs) = (m * v).sin_cos();
    let a = tau - c4 * tr_s;
    let b = tau_tilde + c4 * tr_s_star;
    (e * (cs * a + sn * b), e * (cs * b - sn * a))
}

fn bochner_denominators(n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::BochnerDimension(n));
    }
    // 1/(2(n−2)) and 1/(8(n−1)(n−2)) from exact integer denominators
    let d1 = 2 * (n as u64 - 2);
    let d2 = 8 * (n as u64 - 1) * (n as u64 - 2);
    Ok((1.0 / d1 as f64, 1.0 / d2 as f64))
}

/// max |R(x,y,φz,φw) + R(x,y,z,w)| relative to max(1, max|R|).
pub fn kahler_residual(r: &TensorValue, phi: &TensorValue) -> Result<f64> {
    let rp = r.compose_phi(phi, 2)?.compose_phi(phi, 3)?;
    Ok(rp.add(r)?.max_abs() / 1f64.max(r.max_abs()))
}

/// Bochner tensor of φ-holomorphic type,
/// B(R) = R − 1/(2(n−2)){g∧ρ − g*∧ρ* − (η⊗η)∧ρ}
///      + 1/(8(n−1)(n−2)){τ[g∧g − g*∧g* − 2(η⊗η)∧g] + 2τ̃[g∧g* − (η⊗η)∧g*]}.
pub fn bochner(geo: &Geometry, kahler_tol: f64) -> Result<TensorValue> {
    let (c1, c2) = bochner_denominators(geo.n())?;
    let k = kahler_residual(&geo.riemann, &geo.s.phi)?;
    if k > kahler_tol {
        return Err(Error::NotKaehler { residual: k });
    }
    let s = &geo.s;
    let g = &s.g;
    let gs = s.g_star();
    let ee = s.eta_eta();
    let rho = &geo.ricci;
    let rho_s = &geo.ricci_star;
    let (tau, taut) = (geo.tau, geo.tau_tilde);
    let terms = [
        (-c1, kn_expand(g, rho)),
        (c1, kn_expand(&gs, rho_s)),
        (c1, kn_expand(&ee, rho)),
        (c2 * tau, kn_expand(g, g)),
        (-c2 * tau, kn_expand(&gs, &gs)),
        (-2.0 * c2 * tau, kn_expand(&ee, g)),
        (2.0 * c2 * taut, kn_expand(g, &gs)),
        (-2.0 * c2 * taut, kn_expand(&ee, &gs)),
    ];
    Ok(terms.iter().fold(geo.riemann.clone(), |acc, (c, t)| {
        acc.axpy(*c, t).expect("same shape")
    }))
}

/// L = ρ/(2(n−2)) − 1/(8(n−1)(n−2)){τ[g − η⊗η] + τ̃[g̃ − η⊗η]}.
pub fn l_tensor(geo: &Geometry) -> Result<TensorValue> {
    let (c1, c2) = bochner_denominators(geo.n())?;
    let s = &geo.s;
    let ee = s.eta_eta();
    let h = s.g.sub(&ee)?;
    let ht = s.gt.sub(&ee)?;
    TensorValue::combination(&[
        (c1, &geo.ricci),
        (-c2 * geo.tau, &h),
        (-c2 * geo.tau_tilde, &ht),
    ])
}

/// overall · (−g∧T + g*∧T* + (η⊗η)∧T) for a (0,2) tensor T.
pub fn kn_combination(s: &StructureValues, t: &TensorValue, overall: Sign) -> Result<TensorValue> {
    let t_star = t.compose_phi(&s.phi, 1)?;
    let gs = s.g_star();
    let ee = s.eta_eta();
    let c = overall.value();
    TensorValue::combination(&[
        (-c, &kn_expand(&s.g, t)),
        (c, &kn_expand(&gs, &t_star)),
        (c, &kn_expand(&ee, t)),
    ])
}

/// ρ = c·2(n−2)S + 1/(4(n−1)){τ[g − η⊗η] + τ̃[g̃ − η⊗η]} with c = ±1.
pub fn ricci_from_s(
    geo: &Geometry,
    s_tensor: &TensorValue,
    coefficient: Sign,
) -> Result<TensorValue> {
    let n = geo.n();
    if n < 2 {
        return Err(Error::BochnerDimension(n));
    }
    let s = &geo.s;
    let ee = s.eta_eta();
    let h = s.g.sub(&ee)?;
    let ht = s.gt.sub(&ee)?;
    let q = 1.0 / (4 * (n as u64 - 1)) as f64;
    TensorValue::combination(&[
        (coefficient.value() * 2.0 * (n as f64 - 2.0), s_tensor),
        (q * geo.tau, &h),
        (q * geo.tau_tilde, &ht),
    ])
}
