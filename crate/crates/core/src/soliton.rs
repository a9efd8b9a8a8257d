//! Almost Riemann solitons with vertical potential ϑ = kξ.

use serde::{Deserialize, Serialize};

use crate::conformal::{kahler_residual, kn_expand, TransformJets};
use crate::curvature::{lie_derivative_metric, Geometry};
use crate::error::{Error, Result};
use crate::expr::{Evaluator, Expr};
use crate::jets::Jet2;
use crate::tensor::{mixed_residual, TensorValue};

/// Potential coefficient k and soliton function σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonData {
    pub k: Expr,
    pub sigma: Expr,
}

/// Everything about the soliton at one point of the (transformed) structure.
#[derive(Debug, Clone)]
pub struct SolitonPoint {
    pub n: usize,
    pub k: Jet2,
    pub sigma: f64,
    pub du_xi: f64,
    pub dv_xi: f64,
    pub dk_xi: f64,
    /// dk⊗η + η⊗dk
    pub h1: TensorValue,
    /// η(x)dw(φ²y) + η(y)dw(φ²x)
    pub h2: TensorValue,
    /// L_ξ g, through ∇.
    pub lie_xi: TensorValue,
    /// L_ϑ g, through ∇.
    pub lie_potential: TensorValue,
    /// 2R + σ g∧g + g∧L_ϑ g
    pub residual: TensorValue,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `geo` is the structure carrying the soliton; `t` the transformation that
/// produced it from an F₀ structure (identity jets when there is none).
pub fn soliton_point(
    geo: &Geometry,
    data: &SolitonData,
    t: &TransformJets,
) -> Result<SolitonPoint> {
    let p = &geo.point;
    let mut ev = Evaluator::<Jet2>::new(p);
    let k = ev.eval(&data.k)?;
    let sigma = ev.eval(&data.sigma)?.value;
    if k.value == 0.0 {
        return Err(Error::DegeneratePotential {
            value: k.value,
            point: p.clone(),
        });
    }
    let s = &geo.s;
    let d = s.dim();
    let xi = &s.xi.components;
    let eta = &s.eta.components;
    let dw_phi2 = s.covector_phi(&s.covector_phi(t.dw()));
    let h1 = TensorValue::bilinear(d, |i, j| k.d(i) * eta[j] + eta[i] * k.d(j));
    let h2 = TensorValue::bilinear(d, |i, j| eta[i] * dw_phi2[j] + eta[j] * dw_phi2[i]);
    let lie_xi = lie_derivative_metric(&geo.conn, &geo.jets.xi);
    let potential: Vec<Jet2> = geo.jets.xi.iter().map(|x| &k * x).collect();
    let lie_potential = lie_derivative_metric(&geo.conn, &potential);
    let residual = TensorValue::combination(&[
        (2.0, &geo.riemann),
        (sigma, &kn_expand(&s.g, &s.g)),
        (1.0, &kn_expand(&s.g, &lie_potential)),
    ])?;
    Ok(SolitonPoint {
        n: geo.n(),
        du_xi: dot(t.du(), xi),
        dv_xi: dot(t.dv(), xi),
        dk_xi: dot(&k.gradient, xi),
        k,
        sigma,
        h1,
        h2,
        lie_xi,
        lie_potential,
        residual,
    })
}

/// Residual of the soliton equation relative to max(1, |2R|).
pub fn soliton_residual_size(geo: &Geometry, sp: &SolitonPoint) -> f64 {
    sp.residual.max_abs() / 1f64.max(2.0 * geo.riemann.max_abs())
}

/// L_ξg = −2[du(ξ)g(φx,φy) − dv(ξ)g(x,φy)] + h₂.
pub fn lie_xi_formula(geo: &Geometry, sp: &SolitonPoint) -> Result<TensorValue> {
    let s = &geo.s;
    let gpp = s.g.compose_phi(&s.phi, 0)?.compose_phi(&s.phi, 1)?;
    TensorValue::combination(&[
        (-2.0 * sp.du_xi, &gpp),
        (2.0 * sp.dv_xi, &s.g_star()),
        (1.0, &sp.h2),
    ])
}

/// L_ϑg = k L_ξg + h₁, both sides from the ∇ route.
pub fn lie_potential_decomposition(sp: &SolitonPoint) -> Result<f64> {
    let rhs = sp.lie_xi.scale(sp.k.value).add(&sp.h1)?;
    mixed_residual(&sp.lie_potential, &rhs)
}

/// Coefficients of g∧g, g∧g̃, g∧(η⊗η) in the predicted curvature tensor.
pub fn curvature_coefficients(sp: &SolitonPoint) -> [f64; 3] {
    let k = sp.k.value;
    [
        -(0.5 * sp.sigma + k * sp.du_xi),
        -k * sp.dv_xi,
        k * (sp.du_xi + sp.dv_xi),
    ]
}

/// Predicted R, ρ, τ, τ* for a soliton on a G-transform of an F₀ structure.
#[derive(Debug, Clone)]
pub struct Predicted {
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub tau: f64,
    pub tau_star: f64,
}

pub fn predicted_package(geo: &Geometry, sp: &SolitonPoint) -> Result<Predicted> {
    let s = &geo.s;
    let n = sp.n as f64;
    let k = sp.k.value;
    let ee = s.eta_eta();
    let [a, b, c] = curvature_coefficients(sp);
    let riemann = TensorValue::combination(&[
        (a, &kn_expand(&s.g, &s.g)),
        (b, &kn_expand(&s.g, &s.gt)),
        (c, &kn_expand(&s.g, &ee)),
        (-0.5, &kn_expand(&s.g, &sp.h1)),
        (-0.5 * k, &kn_expand(&s.g, &sp.h2)),
    ])?;
    let m = 2.0 * n - 1.0;
    let ricci = TensorValue::combination(&[
        (
            -(2.0 * n * sp.sigma + sp.dk_xi + (4.0 * n - 1.0) * k * sp.du_xi),
            &s.g,
        ),
        (-m * k * sp.dv_xi, &s.gt),
        (m * k * (sp.du_xi + sp.dv_xi), &ee),
        (-0.5 * m, &sp.h1),
        (-0.5 * m * k, &sp.h2),
    ])?;
    Ok(Predicted {
        riemann,
        ricci,
        tau: -2.0 * n * ((2.0 * n + 1.0) * sp.sigma + 2.0 * sp.dk_xi + 4.0 * n * k * sp.du_xi),
        tau_star: 2.0 * n * m * k * sp.dv_xi,
    })
}

/// Coefficients (a, b, c) of ρ = a g + b g̃ + c η⊗η once h₁ + k h₂ is
/// absorbed along the vertical direction.
pub fn ricci_el_coefficients(sp: &SolitonPoint) -> [f64; 3] {
    let n = sp.n as f64;
    let k = sp.k.value;
    let m = 2.0 * n - 1.0;
    [
        -(2.0 * n * sp.sigma + sp.dk_xi + (4.0 * n - 1.0) * k * sp.du_xi),
        -m * k * sp.dv_xi,
        -m * (sp.dk_xi - k * (sp.du_xi + sp.dv_xi)),
    ]
}

/// Pointwise residuals of the Einstein-like condition system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EinsteinConditions {
    /// dk + k dw∘φ² − dk(ξ)η
    pub almost_einstein_like: f64,
    /// dv(ξ)
    pub almost_eta_einstein: f64,
    /// dk(ξ) − k du(ξ)
    pub almost_einstein: f64,
    /// σ + 2k du(ξ), dk(ξ) − k du(ξ), k dv(ξ); constant for Einstein-like
    pub constancy: [f64; 3],
}

pub fn einstein_conditions(
    geo: &Geometry,
    sp: &SolitonPoint,
    t: &TransformJets,
) -> EinsteinConditions {
    let s = &geo.s;
    let k = sp.k.value;
    let dw_phi2 = s.covector_phi(&s.covector_phi(t.dw()));
    let eta = &s.eta.components;
    let first = (0..s.dim()).fold(0.0f64, |m, i| {
        m.max((sp.k.d(i) + k * dw_phi2[i] - sp.dk_xi * eta[i]).abs())
    });
    EinsteinConditions {
        almost_einstein_like: first,
        almost_eta_einstein: sp.dv_xi.abs(),
        almost_einstein: (sp.dk_xi - k * sp.du_xi).abs(),
        constancy: [
            sp.sigma + 2.0 * k * sp.du_xi,
            sp.dk_xi - k * sp.du_xi,
            k * sp.dv_xi,
        ],
    }
}

/// Residuals of the steps leading from a soliton on an F₀ structure to
/// flatness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessChain {
    pub soliton: f64,
    /// R = −½σ g∧g − ½g∧h₁
    pub curvature_form: f64,
    /// ρ = −{2nσ + dk(ξ)}g − ½(2n−1)h₁
    pub ricci_form: f64,
    /// τ = −2n{(2n+1)σ + 2dk(ξ)}
    pub scalar_form: f64,
    /// τ̃ = 0
    pub tau_tilde: f64,
    /// R(x,y,φz,φw) = −R(x,y,z,w)
    pub kahler: f64,
    /// dk(ξ) = −σ
    pub dk_sigma: f64,
    /// ρ = σ[g − η⊗η], τ = 2nσ
    pub ricci_reduced: f64,
    /// R = 0, σ = 0, dk = 0, ρ = 0
    pub conclusion: f64,
}

impl FlatnessChain {
    pub fn steps(&self) -> [(&'static str, f64); 8] {
        [
            ("R-RS=F0", self.curvature_form),
            ("ro-F0", self.ricci_form),
            ("tau-F0", self.scalar_form.max(self.tau_tilde)),
            ("K-F0", self.kahler),
            ("dksm", self.dk_sigma),
            ("Rrt", self.ricci_reduced),
            ("flat", self.conclusion),
            ("RS", self.soliton),
        ]
    }
}

pub fn f0_flatness_chain(geo: &Geometry, sp: &SolitonPoint, f0_tol: f64) -> Result<FlatnessChain> {
    let fmax = geo.f.max_abs();
    if fmax > f0_tol {
        return Err(Error::NotF0 { residual: fmax });
    }
    let s = &geo.s;
    let n = sp.n as f64;
    let ee = s.eta_eta();
    let r_pred = TensorValue::combination(&[
        (-0.5 * sp.sigma, &kn_expand(&s.g, &s.g)),
        (-0.5, &kn_expand(&s.g, &sp.h1)),
    ])?;
    let rho_pred = TensorValue::combination(&[
        (-(2.0 * n * sp.sigma + sp.dk_xi), &s.g),
        (-0.5 * (2.0 * n - 1.0), &sp.h1),
    ])?;
    let tau_pred = -2.0 * n * ((2.0 * n + 1.0) * sp.sigma + 2.0 * sp.dk_xi);
    let rho_red = s.g.sub(&ee)?.scale(sp.sigma);
    let tau_scale = 1f64.max(geo.tau.abs());
    let dk = sp.k.gradient.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(FlatnessChain {
        soliton: sp.residual.max_abs() / 1f64.max(2.0 * geo.riemann.max_abs()),
        curvature_form: mixed_residual(&geo.riemann, &r_pred)?,
        ricci_form: mixed_residual(&geo.ricci, &rho_pred)?,
        scalar_form: (geo.tau - tau_pred).abs() / tau_scale.max(tau_pred.abs()),
        tau_tilde: geo.tau_tilde.abs(),
        kahler: kahler_residual(&geo.riemann, &s.phi)?,
        dk_sigma: (sp.dk_xi + sp.sigma).abs(),
        ricci_reduced: mixed_residual(&geo.ricci, &rho_red)?
            .max((geo.tau - 2.0 * n * sp.sigma).abs() / tau_scale.max((2.0 * n * sp.sigma).abs())),
        conclusion: geo
            .riemann
            .max_abs()
            .max(sp.sigma.abs())
            .max(dk)
            .max(geo.ricci.max_abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::GTransform;
    use crate::manifold::AccRStructure;

    fn setup(k: Expr, sigma: Expr) -> (Geometry, SolitonPoint) {
        let a = AccRStructure::builtin_f0(2).unwrap();
        let p = [0.3, -0.2, 0.7, 1.1, 0.4];
        let geo = Geometry::compute(&a, &p).unwrap();
        let t = GTransform::identity().jets(&p).unwrap();
        let sp = soliton_point(&geo, &SolitonData { k, sigma }, &t).unwrap();
        (geo, sp)
    }

    #[test]
    fn constant_potential_is_trivial_soliton() {
        let (geo, sp) = setup(Expr::constant(2.0), Expr::zero());
        assert_eq!(sp.residual.max_abs(), 0.0);
        let chain = f0_flatness_chain(&geo, &sp, 1e-10).unwrap();
        assert!(chain.steps().iter().all(|(_, r)| *r == 0.0));
    }

    #[test]
    fn k_equals_t_gives_g_wedge_h1() {
        let (geo, sp) = setup(Expr::coord(4), Expr::zero());
        let s = &geo.s;
        let h1 = s.eta_eta().scale(2.0);
        assert_eq!(sp.h1, h1);
        let want = kn_expand(&s.g, &h1);
        assert_eq!(mixed_residual(&sp.residual, &want).unwrap(), 0.0);
        assert_eq!(sp.residual.max_abs(), 2.0);
    }

    #[test]
    fn sigma_one_gives_g_wedge_g() {
        let (geo, sp) = setup(Expr::one(), Expr::one());
        let want = kn_expand(&geo.s.g, &geo.s.g);
        assert_eq!(sp.residual, want);
    }

    #[test]
    fn zero_potential_rejected() {
        let a = AccRStructure::builtin_f0(1).unwrap();
        let p = [0.0, 0.0, 0.0];
        let geo = Geometry::compute(&a, &p).unwrap();
        let t = GTransform::identity().jets(&p).unwrap();
        let data = SolitonData {
            k: Expr::coord(2),
            sigma: Expr::zero(),
        };
        assert!(matches!(
            soliton_point(&geo, &data, &t),
            Err(Error::DegeneratePotential { .. })
        ));
    }

    #[test]
    fn h1_properties() {
        let (geo, sp) = setup((Expr::coord(4) * Expr::coord(0)).exp(), Expr::zero());
        let s = &geo.s;
        assert!(sp.h1.asymmetry() == 0.0);
        let hpp = sp
            .h1
            .compose_phi(&s.phi, 0)
            .unwrap()
            .compose_phi(&s.phi, 1)
            .unwrap();
        assert!(hpp.max_abs() < 1e-15);
        let tr = geo.metric().trace(&sp.h1);
        assert!((tr - 2.0 * sp.dk_xi).abs() < 1e-13);
        assert!(lie_potential_decomposition(&sp).unwrap() < 1e-13);
    }
}
