//! Lee forms, class predicates and the Einstein-like decomposition.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::curvature::Geometry;
use crate::error::{Error, Result};
use crate::manifold::{AccRStructure, StructureValues};
use crate::tensor::TensorValue;

/// Spread below which pointwise coefficients count as constant.
pub const CONSTANT_SPREAD: f64 = 1e-6;
/// Fewest points over which constancy may be asserted.
pub const MIN_CONSTANCY_POINTS: usize = 10;

/// θ, θ*, ω as covector components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeeForms {
    pub theta: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub omega: Vec<f64>,
}

/// Which basis the traces of θ and θ* run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeeTrace {
    /// Over a basis {eᵢ} of ker η, with ξ left out.
    Horizontal,
    /// Over a full basis of the tangent space.
    Full,
}

impl LeeForms {
    pub fn zero(d: usize) -> Self {
        Self {
            theta: vec![0.0; d],
            theta_star: vec![0.0; d],
            omega: vec![0.0; d],
        }
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let m = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        m(&self.theta, &o.theta)
            .max(m(&self.theta_star, &o.theta_star))
            .max(m(&self.omega, &o.omega))
    }

    pub fn max_abs(&self) -> f64 {
        self.theta
            .iter()
            .chain(&self.theta_star)
            .chain(&self.omega)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// θ = g^{ij}F(eᵢ,eⱼ,·), θ* = g^{ij}F(eᵢ,φeⱼ,·), ω = F(ξ,ξ,·) with the
/// traces over ker η. This is the reading under which ω(ξ)=0 together with
/// θ*∘φ = −θ∘φ² and the transformation law of the forms hold; the full trace
/// differs from it by ω in θ (θ* is the same either way since φξ = 0).
pub fn lee_forms(geo: &Geometry) -> LeeForms {
    lee_forms_traced(geo, LeeTrace::Horizontal)
}

pub fn lee_forms_traced(geo: &Geometry, trace: LeeTrace) -> LeeForms {
    let s = &geo.s;
    let d = s.dim();
    let f = &geo.f;
    let gi = &geo.metric().g_inv;
    let xi = &s.xi.components;
    let mut out = LeeForms::zero(d);
    for z in 0..d {
        for i in 0..d {
            for j in 0..d {
                let gij = gi.at2(i, j);
                out.theta[z] += gij * f.at3(i, j, z);
                let f_phi: f64 = (0..d).map(|k| s.phi.endo(k, j) * f.at3(i, k, z)).sum();
                out.theta_star[z] += gij * f_phi;
                out.omega[z] += xi[i] * xi[j] * f.at3(i, j, z);
            }
        }
    }
    if trace == LeeTrace::Horizontal {
        // g(ξ,ξ) = 1, so ξ contributes exactly F(ξ,ξ,·) to the full trace
        for z in 0..d {
            out.theta[z] -= out.omega[z];
        }
    }
    out
}

/// ω(ξ) and θ*∘φ + θ∘φ², both expected to vanish.
pub fn lee_identities(s: &StructureValues, lee: &LeeForms) -> (f64, f64) {
    let omega_xi: f64 = lee
        .omega
        .iter()
        .zip(&s.xi.components)
        .map(|(a, b)| a * b)
        .sum();
    let ts_phi = s.covector_phi(&lee.theta_star);
    let t_phi2 = s.covector_phi(&s.covector_phi(&lee.theta));
    let r = ts_phi
        .iter()
        .zip(&t_phi2)
        .fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
    (omega_xi.abs(), r)
}

/// max |F| over the points; the structure is F₀ when it is ≤ tol.
pub fn is_f0(a: &AccRStructure, points: &[Vec<f64>], tol: f64) -> Result<(bool, f64)> {
    let mut worst: f64 = 0.0;
    for p in points {
        let geo = Geometry::compute(a, p)?;
        worst = worst.max(geo.f.max_abs());
    }
    Ok((worst <= tol, worst))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Both sides vanish.
    Vacuous,
}

/// F(x,y,z) = −¼θ*(ξ){g(x,φy)η(z) + g(x,φz)η(y)}; returns the residual and
/// the size of the right-hand side.
pub fn f5_form_residual(geo: &Geometry) -> (f64, f64) {
    let s = &geo.s;
    let d = s.dim();
    let lee = lee_forms(geo);
    let ts_xi: f64 = lee
        .theta_star
        .iter()
        .zip(&s.xi.components)
        .map(|(a, b)| a * b)
        .sum();
    let gs = s.g_star();
    let eta = &s.eta.components;
    let rhs = TensorValue::from_fn(3, 0, d, |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        -0.25 * ts_xi * (gs.at2(x, y) * eta[z] + gs.at2(x, z) * eta[y])
    });
    let diff = geo.f.max_abs_diff(&rhs).expect("same shape");
    (
        diff / 1f64.max(geo.f.max_abs()).max(rhs.max_abs()),
        rhs.max_abs(),
    )
}

pub fn f5_form_check(a: &AccRStructure, points: &[Vec<f64>], tol: f64) -> Result<(Verdict, f64)> {
    let mut worst: f64 = 0.0;
    let mut size: f64 = 0.0;
    let mut f_size: f64 = 0.0;
    for p in points {
        let geo = Geometry::compute(a, p)?;
        let (r, s) = f5_form_residual(&geo);
        worst = worst.max(r);
        size = size.max(s);
        f_size = f_size.max(geo.f.max_abs());
    }
    let v = if worst > tol {
        Verdict::Fails
    } else if size <= tol && f_size <= tol {
        Verdict::Vacuous
    } else {
        Verdict::Holds
    };
    Ok((v, worst))
}

/// ρ ≈ a·g + b·g̃ + c·η⊗η at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EinsteinLikeFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Mixed residual of the fit.
    pub residual: f64,
}

fn inner(x: &TensorValue, y: &TensorValue) -> f64 {
    x.components
        .iter()
        .zip(&y.components)
        .map(|(a, b)| a * b)
        .sum()
}

/// Least-squares fit through the Gram system of component inner products.
pub fn einstein_like_decompose(rho: &TensorValue, s: &StructureValues) -> Result<EinsteinLikeFit> {
    let ee = s.eta_eta();
    let basis = [&s.g, &s.gt, &ee];
    let gram = Matrix3::from_fn(|i, j| inner(basis[i], basis[j]));
    let rhs = Vector3::from_fn(|i, _| inner(basis[i], rho));
    let scale = gram.abs().max();
    let lu = gram.lu();
    if lu.determinant().abs() <= 1e-12 * scale.powi(3) {
        return Err(Error::SingularGram);
    }
    let x = lu.solve(&rhs).ok_or(Error::SingularGram)?;
    let fit = TensorValue::combination(&[(x[0], &s.g), (x[1], &s.gt), (x[2], &ee)])?;
    let residual = crate::tensor::mixed_residual(rho, &fit)?;
    Ok(EinsteinLikeFit {
        a: x[0],
        b: x[1],
        c: x[2],
        residual,
    })
}

/// Classification tag from fits at several points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    /// einstein_like / eta_einstein / einstein, "almost_" prefixed when the
    /// coefficients vary; "none" when ρ is not of the form at all.
    pub tag: String,
    pub fits: Vec<EinsteinLikeFit>,
    pub spread: [f64; 3],
    pub constant: bool,
}

pub fn classify(fits: &[EinsteinLikeFit], fit_tol: f64, zero_tol: f64) -> Classification {
    let coeffs = |k: usize| fits.iter().map(move |f| [f.a, f.b, f.c][k]);
    let mut spread = [0.0; 3];
    for (k, sp) in spread.iter_mut().enumerate() {
        let max = coeffs(k).fold(f64::NEG_INFINITY, f64::max);
        let min = coeffs(k).fold(f64::INFINITY, f64::min);
        let size = coeffs(k).fold(0.0f64, |m, v| m.max(v.abs()));
        *sp = if fits.is_empty() {
            0.0
        } else {
            (max - min) / 1f64.max(size)
        };
    }
    let constant =
        fits.len() >= MIN_CONSTANCY_POINTS && spread.iter().all(|s| *s <= CONSTANT_SPREAD);
    let fitted = fits.iter().all(|f| f.residual <= fit_tol);
    let b_zero = coeffs(1).all(|b| b.abs() <= zero_tol);
    let c_zero = coeffs(2).all(|c| c.abs() <= zero_tol);
    let base = if !fitted || fits.is_empty() {
        "none"
    } else if b_zero && c_zero {
        "einstein"
    } else if b_zero {
        "eta_einstein"
    } else {
        "einstein_like"
    };
    let tag = if base == "none" || constant {
        base.to_string()
    } else {
        format!("almost_{base}")
    };
    Classification {
        tag,
        fits: fits.to_vec(),
        spread,
        constant,
    }
}

/// Relative residual of R(x,y,φz,φw) = −R(x,y,z,w).
pub fn kahler_property_check(r: &TensorValue, phi: &TensorValue) -> Result<f64> {
    crate::conformal::kahler_residual(r, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn builtin_values(n: usize) -> StructureValues {
        let a = AccRStructure::builtin_f0(n).unwrap();
        let d = a.dim();
        a.values(&vec![0.5; d]).unwrap()
    }

    #[test]
    fn builtin_lee_forms_vanish() {
        let a = AccRStructure::builtin_f0(2).unwrap();
        let geo = Geometry::compute(&a, &[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert_eq!(lee_forms(&geo).max_abs(), 0.0);
        assert_eq!(is_f0(&a, &[vec![0.0; 5]], 1e-8).unwrap(), (true, 0.0));
        let (v, _) = f5_form_check(&a, &[vec![0.0; 5]], 1e-8).unwrap();
        assert_eq!(v, Verdict::Vacuous);
    }

    #[test]
    fn trivial_decompositions() {
        let s = builtin_values(2);
        let f = einstein_like_decompose(&s.g.scale(2.0), &s).unwrap();
        assert!((f.a - 2.0).abs() < 1e-14 && f.b.abs() < 1e-14 && f.c.abs() < 1e-14);
        let f = einstein_like_decompose(&s.gt, &s).unwrap();
        assert!((f.b - 1.0).abs() < 1e-14 && f.a.abs() < 1e-14);
        let fits = vec![f; 10];
        assert_eq!(classify(&fits, 1e-8, 1e-10).tag, "einstein_like");
        let one = einstein_like_decompose(&s.g, &s).unwrap();
        assert_eq!(classify(&[one], 1e-8, 1e-10).tag, "almost_einstein");
    }

    #[test]
    fn unfittable_tensor_is_none() {
        let s = builtin_values(1);
        let mut rho = TensorValue::zeros(2, 0, 3);
        rho.set(&[0, 2], 1.0);
        rho.set(&[2, 0], 1.0);
        let f = einstein_like_decompose(&rho, &s).unwrap();
        assert!(f.residual > 0.1);
        assert_eq!(classify(&[f; 10], 1e-8, 1e-10).tag, "none");
    }

    proptest! {
        #[test]
        fn decomposition_round_trip(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, n in 1usize..4) {
            let s = builtin_values(n);
            let rho = TensorValue::combination(&[(a, &s.g), (b, &s.gt), (c, &s.eta_eta())]).unwrap();
            let f = einstein_like_decompose(&rho, &s).unwrap();
            prop_assert!((f.a - a).abs() <= 1e-10 && (f.b - b).abs() <= 1e-10 && (f.c - c).abs() <= 1e-10);
            prop_assert!(f.residual <= 1e-12);
        }
    }
}
