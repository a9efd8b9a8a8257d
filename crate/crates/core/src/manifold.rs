//! Almost contact B-metric structures on a chart of ℝ^{2n+1}.
//!
//! Coordinates are ordered (x¹..xⁿ, y¹..yⁿ, t).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{check_guards, sum, Evaluator, Expr, Guard};
use crate::jets::Jet2;
use crate::tensor::{mixed_residual, mixed_scalar, MetricAtPoint, TensorValue};

/// Residual threshold for the structure identities.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Default number of sampled points per check.
pub const DEFAULT_POINTS: usize = 25;

/// (φ, ξ, η, g) as component fields. `phi[a * d + b]` is φ^a_b; `g` is
/// stored full but built symmetric (mirrored entries share one expression).
#[derive(Debug, Clone, PartialEq)]
pub struct AccRStructure {
    pub n: usize,
    pub phi: Vec<Expr>,
    pub xi: Vec<Expr>,
    pub eta: Vec<Expr>,
    pub g: Vec<Expr>,
    pub guards: Vec<Guard>,
}

impl AccRStructure {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// The flat cosymplectic structure: φ∂xᵢ=∂yᵢ, φ∂yᵢ=−∂xᵢ, φ∂t=0, ξ=∂t,
    /// η=dt, g = diag(−1,…,−1, 1,…,1, 1).
    pub fn builtin_f0(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
            });
        }
        let d = 2 * n + 1;
        let c = |v: f64| Expr::constant(v);
        let mut phi = vec![Expr::zero(); d * d];
        for i in 0..n {
            phi[(n + i) * d + i] = c(1.0);
            phi[i * d + n + i] = c(-1.0);
        }
        let unit = |k: usize| {
            (0..d)
                .map(|i| c(if i == k { 1.0 } else { 0.0 }))
                .collect::<Vec<_>>()
        };
        let mut g = vec![Expr::zero(); d * d];
        for i in 0..d {
            g[i * d + i] = c(if i < n { -1.0 } else { 1.0 });
        }
        Ok(Self {
            n,
            phi,
            xi: unit(d - 1),
            eta: unit(d - 1),
            g,
            guards: vec![],
        })
    }

    /// g̃(x,y) = g(x,φy) + η(x)η(y), built from the upper triangle.
    pub fn associated_metric(&self) -> Vec<Expr> {
        let d = self.dim();
        let mut gt = vec![Expr::zero(); d * d];
        for a in 0..d {
            for b in a..d {
                let e = &sum((0..d).map(|c| &self.g[a * d + c] * &self.phi[c * d + b]))
                    + &(&self.eta[a] * &self.eta[b]);
                gt[a * d + b] = e.clone();
                gt[b * d + a] = e;
            }
        }
        gt
    }

    /// Adds `eps` to φ^a_b (negative controls).
    pub fn corrupt_phi(&mut self, a: usize, b: usize, eps: f64) {
        let d = self.dim();
        self.phi[a * d + b] = &self.phi[a * d + b] + &Expr::constant(eps);
    }

    pub fn in_domain(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: p.len(),
            });
        }
        check_guards(&self.guards, p)
    }

    /// Jets of every structure component (and of g̃) at `p`.
    pub fn jets(&self, p: &[f64]) -> Result<StructureJets> {
        self.in_domain(p)?;
        let mut ev = Evaluator::<Jet2>::new(p);
        Ok(StructureJets {
            n: self.n,
            phi: ev.eval_all(&self.phi)?,
            xi: ev.eval_all(&self.xi)?,
            eta: ev.eval_all(&self.eta)?,
            g: ev.eval_all(&self.g)?,
            gt: ev.eval_all(&self.associated_metric())?,
        })
    }

    /// Plain values at `p`.
    pub fn values(&self, p: &[f64]) -> Result<StructureValues> {
        self.in_domain(p)?;
        let d = self.dim();
        let mut ev = Evaluator::<f64>::new(p);
        let phi = ev.eval_all(&self.phi)?;
        let xi = ev.eval_all(&self.xi)?;
        let eta = ev.eval_all(&self.eta)?;
        let g = ev.eval_all(&self.g)?;
        let gt = ev.eval_all(&self.associated_metric())?;
        Ok(StructureValues {
            n: self.n,
            phi: TensorValue::endomorphism(d, |a, b| phi[a * d + b]),
            xi: TensorValue::vector(d, |i| xi[i]),
            eta: TensorValue::covector(d, |i| eta[i]),
            g: TensorValue::bilinear(d, |i, j| g[i * d + j]),
            gt: TensorValue::bilinear(d, |i, j| gt[i * d + j]),
        })
    }
}

/// Jets of the structure components at one point.
#[derive(Debug, Clone)]
pub struct StructureJets {
    pub n: usize,
    pub phi: Vec<Jet2>,
    pub xi: Vec<Jet2>,
    pub eta: Vec<Jet2>,
    pub g: Vec<Jet2>,
    pub gt: Vec<Jet2>,
}

impl StructureJets {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn values(&self) -> StructureValues {
        let d = self.dim();
        StructureValues {
            n: self.n,
            phi: TensorValue::endomorphism(d, |a, b| self.phi[a * d + b].value),
            xi: TensorValue::vector(d, |i| self.xi[i].value),
            eta: TensorValue::covector(d, |i| self.eta[i].value),
            g: TensorValue::bilinear(d, |i, j| self.g[i * d + j].value),
            gt: TensorValue::bilinear(d, |i, j| self.gt[i * d + j].value),
        }
    }
}

/// Structure tensors at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureValues {
    pub n: usize,
    pub phi: TensorValue,
    pub xi: TensorValue,
    pub eta: TensorValue,
    pub g: TensorValue,
    pub gt: TensorValue,
}

impl StructureValues {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn eta_eta(&self) -> TensorValue {
        self.eta.outer(&self.eta).expect("same dimension")
    }

    /// g* = g(·, φ·).
    pub fn g_star(&self) -> TensorValue {
        self.g.compose_phi(&self.phi, 1).expect("valid slot")
    }

    /// Composite φ ∘ φ as an endomorphism.
    pub fn phi_squared(&self) -> TensorValue {
        let d = self.dim();
        TensorValue::endomorphism(d, |a, b| {
            (0..d)
                .map(|c| self.phi.endo(a, c) * self.phi.endo(c, b))
                .sum()
        })
    }

    /// η(x)ξ as an endomorphism.
    pub fn eta_xi(&self) -> TensorValue {
        let d = self.dim();
        TensorValue::endomorphism(d, |a, b| self.xi.components[a] * self.eta.components[b])
    }

    /// Applies φ to a vector.
    pub fn phi_vec(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|a| (0..d).map(|b| self.phi.endo(a, b) * v[b]).sum())
            .collect()
    }

    /// ω∘φ for a covector.
    pub fn covector_phi(&self, w: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|b| (0..d).map(|a| w[a] * self.phi.endo(a, b)).sum())
            .collect()
    }
}

/// Identities of the structure: names and residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub max_residual: f64,
    pub worst_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub identities: Vec<IdentityResidual>,
    pub tolerance: f64,
    pub pass: bool,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.identities
            .iter()
            .fold(0.0, |m, r| m.max(r.max_residual))
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.identities
            .iter()
            .filter(|r| r.max_residual > self.tolerance)
            .map(|r| r.name)
            .collect()
    }
}

/// Residuals of φξ=0, φ²=−ι+η⊗ξ, η∘φ=0, η(ξ)=1, g(φx,φy)=−g(x,y)+η(x)η(y)
/// and their consequences at one point.
pub fn structure_identities(s: &StructureValues) -> Result<Vec<(&'static str, f64)>> {
    let d = s.dim();
    let id = TensorValue::endomorphism(d, |a, b| if a == b { 1.0 } else { 0.0 });
    let ee = s.eta_eta();
    let xi = &s.xi.components;
    let eta = &s.eta.components;
    let phi_xi = TensorValue::vector(d, |a| (0..d).map(|b| s.phi.endo(a, b) * xi[b]).sum());
    let eta_phi = TensorValue::covector(d, |b| (0..d).map(|a| eta[a] * s.phi.endo(a, b)).sum());
    let eta_of_xi: f64 = (0..d).map(|a| eta[a] * xi[a]).sum();
    let phi2_rhs = id.scale(-1.0).add(&s.eta_xi())?;
    let g_pp = s.g.compose_phi(&s.phi, 0)?.compose_phi(&s.phi, 1)?;
    let g_pp_rhs = s.g.scale(-1.0).add(&ee)?;
    let g_phi_first = s.g.compose_phi(&s.phi, 0)?;
    let g_phi_second = s.g_star();
    let g_xi = TensorValue::covector(d, |a| (0..d).map(|b| s.g.at2(a, b) * xi[b]).sum());
    let g_xi_xi: f64 = (0..d).map(|a| g_xi.components[a] * xi[a]).sum();
    let zero_v = TensorValue::zeros(0, 1, d);
    let zero_c = TensorValue::zeros(1, 0, d);
    Ok(vec![
        ("phi_xi", mixed_residual(&phi_xi, &zero_v)?),
        ("phi_squared", mixed_residual(&s.phi_squared(), &phi2_rhs)?),
        ("eta_phi", mixed_residual(&eta_phi, &zero_c)?),
        ("eta_xi", mixed_scalar(eta_of_xi, 1.0)),
        ("g_phi_phi", mixed_residual(&g_pp, &g_pp_rhs)?),
        (
            "g_phi_symmetric",
            mixed_residual(&g_phi_first, &g_phi_second)?,
        ),
        ("g_xi_eta", mixed_residual(&g_xi, &s.eta)?),
        ("g_xi_xi", mixed_scalar(g_xi_xi, 1.0)),
    ])
}

/// Residuals of the associated-metric definition and of its B-metric
/// properties at one point.
pub fn associated_metric_identities(s: &StructureValues) -> Result<Vec<(&'static str, f64)>> {
    let d = s.dim();
    let ee = s.eta_eta();
    let direct = s.g_star().add(&ee)?;
    let xi = &s.xi.components;
    let gt_xi_xi: f64 = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .map(|(a, b)| s.gt.at2(a, b) * xi[a] * xi[b])
        .sum();
    let gt_pp = s.gt.compose_phi(&s.phi, 0)?.compose_phi(&s.phi, 1)?;
    let gt_pp_rhs = s.gt.scale(-1.0).add(&ee)?;
    let gt_xi = TensorValue::covector(d, |a| (0..d).map(|b| s.gt.at2(a, b) * xi[b]).sum());
    Ok(vec![
        ("gt_definition", mixed_residual(&s.gt, &direct)?),
        ("gt_symmetric", s.gt.asymmetry() / 1f64.max(s.gt.max_abs())),
        ("gt_xi_xi", mixed_scalar(gt_xi_xi, 1.0)),
        ("gt_xi_eta", mixed_residual(&gt_xi, &s.eta)?),
        ("gt_phi_phi", mixed_residual(&gt_pp, &gt_pp_rhs)?),
    ])
}

fn accumulate(acc: &mut Vec<IdentityResidual>, rows: Vec<(&'static str, f64)>, p: &[f64]) {
    for (name, r) in rows {
        match acc.iter_mut().find(|x| x.name == name) {
            Some(x) => {
                if r > x.max_residual || x.worst_point.is_none() {
                    x.max_residual = x.max_residual.max(r);
                    x.worst_point = Some(p.to_vec());
                }
            }
            None => acc.push(IdentityResidual {
                name,
                max_residual: r,
                worst_point: Some(p.to_vec()),
            }),
        }
    }
}

/// Checks all structure and associated-metric identities over `points`.
pub fn validate_structure(a: &AccRStructure, points: &[Vec<f64>]) -> Result<ValidationReport> {
    let mut identities = Vec::new();
    for p in points {
        let s = a.values(p)?;
        accumulate(&mut identities, structure_identities(&s)?, p);
        accumulate(&mut identities, associated_metric_identities(&s)?, p);
    }
    let pass = identities.iter().all(|r| r.max_residual <= STRUCTURE_TOL);
    Ok(ValidationReport {
        identities,
        tolerance: STRUCTURE_TOL,
        pass,
    })
}

/// Signature (positive, negative) of g at `p`; a B-metric has (n+1, n).
pub fn signature(a: &AccRStructure, p: &[f64]) -> Result<(usize, usize)> {
    let s = a.values(p)?;
    Ok(MetricAtPoint::new(s.g)?.signature)
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SampleBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Deterministic rejection sampler: uniform points in `bx` that satisfy
/// `guards` and `accept`.
pub fn sample_points(
    bx: &SampleBox,
    count: usize,
    seed: u64,
    guards: &[Guard],
    accept: impl Fn(&[f64]) -> bool,
) -> Result<Vec<Vec<f64>>> {
    if bx.lower.len() != bx.upper.len() {
        return Err(Error::Dimension {
            expected: bx.lower.len(),
            got: bx.upper.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_tries = 1000 * count.max(1);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        if tries == max_tries {
            return Err(Error::SamplerExhausted {
                wanted: count,
                tries,
            });
        }
        tries += 1;
        let p: Vec<f64> = bx
            .lower
            .iter()
            .zip(&bx.upper)
            .map(|(lo, hi)| {
                if hi > lo {
                    rng.random_range(*lo..*hi)
                } else {
                    *lo
                }
            })
            .collect();
        if check_guards(guards, &p).is_ok() && accept(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(d: usize) -> SampleBox {
        SampleBox {
            lower: vec![-2.0; d],
            upper: vec![2.0; d],
        }
    }

    #[test]
    fn builtin_metric_matrix() {
        let a = AccRStructure::builtin_f0(2).unwrap();
        let s = a.values(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let diag: Vec<f64> = (0..5).map(|i| s.g.at2(i, i)).collect();
        assert_eq!(diag, vec![-1.0, -1.0, 1.0, 1.0, 1.0]);
        assert_eq!(s.g.asymmetry(), 0.0);
        let eta_xi: f64 = (0..5)
            .map(|i| s.eta.components[i] * s.xi.components[i])
            .sum();
        assert_eq!(eta_xi, 1.0);
    }

    #[test]
    fn builtin_validates_exactly() {
        for n in 1..=3 {
            let a = AccRStructure::builtin_f0(n).unwrap();
            let pts = sample_points(&cube(a.dim()), DEFAULT_POINTS, 11, &[], |_| true).unwrap();
            let r = validate_structure(&a, &pts).unwrap();
            assert!(r.pass);
            assert_eq!(r.max_residual(), 0.0);
            assert_eq!(signature(&a, &pts[0]).unwrap(), (n + 1, n));
        }
    }

    #[test]
    fn associated_metric_of_builtin() {
        let a = AccRStructure::builtin_f0(2).unwrap();
        let s = a.values(&[0.0; 5]).unwrap();
        // g~(∂x¹, ∂y¹) = g(∂x¹, φ∂y¹) = −g(∂x¹, ∂x¹) = 1
        assert_eq!(s.gt.at2(0, 2), 1.0);
        for j in 0..5 {
            assert_eq!(s.gt.at2(4, j), s.eta.components[j]);
        }
    }

    #[test]
    fn corrupted_phi_fails_phi_squared() {
        let mut a = AccRStructure::builtin_f0(2).unwrap();
        a.corrupt_phi(2, 0, 1e-3);
        let pts = sample_points(&cube(5), 5, 3, &[], |_| true).unwrap();
        let r = validate_structure(&a, &pts).unwrap();
        assert!(!r.pass);
        assert!(r.failing().contains(&"phi_squared"));
    }

    #[test]
    fn sampler_is_deterministic_and_guarded() {
        let guards = vec![Guard::positive(Expr::coord(0), 0.5, "x > 0.5")];
        let a = sample_points(&cube(3), 20, 7, &guards, |_| true).unwrap();
        let b = sample_points(&cube(3), 20, 7, &guards, |_| true).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p[0] > 0.5));
        let c = sample_points(&cube(3), 20, 8, &guards, |_| true).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampler_exhaustion_is_reported() {
        let guards = vec![Guard::positive(Expr::coord(0), 5.0, "x > 5")];
        assert!(matches!(
            sample_points(&cube(1), 3, 1, &guards, |_| true),
            Err(Error::SamplerExhausted { wanted: 3, .. })
        ));
    }
}
