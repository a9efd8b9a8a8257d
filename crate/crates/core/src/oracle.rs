//! Finite-difference oracles. They only use plain f64 evaluation of the
//! expression trees, never the jets.

use crate::curvature::assemble_riemann;
use crate::error::Result;
use crate::expr::{Evaluator, Expr};
use crate::jets::Jet2;
use crate::manifold::AccRStructure;
use crate::tensor::{MetricAtPoint, TensorValue};

/// Step of first-derivative differences.
pub const GRADIENT_STEP: f64 = 1e-4;
/// Step of second-derivative differences.
pub const HESSIAN_STEP: f64 = 1e-3;
/// Outer step when differentiating Christoffel symbols.
pub const CHRISTOFFEL_STEP: f64 = 1e-3;

fn shifted(p: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(i, h) in moves {
        q[i] += h;
    }
    q
}

fn richardson(mut d: impl FnMut(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Central differences of a vector-valued map, Richardson-extrapolated.
/// Row i of the result is ∂ᵢ of every output.
pub fn fd_jacobian(
    f: &impl Fn(&[f64]) -> Result<Vec<f64>>,
    p: &[f64],
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let diff = |h: f64| -> Result<Vec<f64>> {
            let a = f(&shifted(p, &[(i, h)]))?;
            let b = f(&shifted(p, &[(i, -h)]))?;
            Ok(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect())
        };
        let coarse = diff(h)?;
        let fine = diff(0.5 * h)?;
        out.push(
            fine.iter()
                .zip(&coarse)
                .map(|(f, c)| (4.0 * f - c) / 3.0)
                .collect(),
        );
    }
    Ok(out)
}

pub fn fd_gradient(f: &impl Fn(&[f64]) -> Result<f64>, p: &[f64], h: f64) -> Result<Vec<f64>> {
    (0..p.len())
        .map(|i| {
            richardson(
                |h| Ok((f(&shifted(p, &[(i, h)]))? - f(&shifted(p, &[(i, -h)]))?) / (2.0 * h)),
                h,
            )
        })
        .collect()
}

/// Row-major Hessian.
pub fn fd_hessian(f: &impl Fn(&[f64]) -> Result<f64>, p: &[f64], h: f64) -> Result<Vec<f64>> {
    let d = p.len();
    let f0 = f(p)?;
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let v = if i == j {
                richardson(
                    |h| {
                        Ok(
                            (f(&shifted(p, &[(i, h)]))? - 2.0 * f0 + f(&shifted(p, &[(i, -h)]))?)
                                / (h * h),
                        )
                    },
                    h,
                )?
            } else {
                richardson(
                    |h| {
                        let pp = f(&shifted(p, &[(i, h), (j, h)]))?;
                        let pm = f(&shifted(p, &[(i, h), (j, -h)]))?;
                        let mp = f(&shifted(p, &[(i, -h), (j, h)]))?;
                        let mm = f(&shifted(p, &[(i, -h), (j, -h)]))?;
                        Ok((pp - pm - mp + mm) / (4.0 * h * h))
                    },
                    h,
                )?
            };
            out[i * d + j] = v;
            out[j * d + i] = v;
        }
    }
    Ok(out)
}

fn mixed(a: &[f64], b: &[f64]) -> f64 {
    let size = a.iter().chain(b).fold(1f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / size
}

/// Relative disagreement of the jet gradient and Hessian with the oracle.
pub fn jet_vs_fd(e: &Expr, p: &[f64]) -> Result<f64> {
    let jet = Evaluator::<Jet2>::new(p).eval(e)?;
    let f = |q: &[f64]| Evaluator::<f64>::new(q).eval(e);
    let g = fd_gradient(&f, p, GRADIENT_STEP)?;
    let h = fd_hessian(&f, p, HESSIAN_STEP)?;
    Ok(mixed(&jet.gradient, &g).max(mixed(&jet.hessian, &h)))
}

fn metric_values(g: &[Expr], q: &[f64]) -> Result<Vec<f64>> {
    Evaluator::<f64>::new(q).eval_all(g)
}

/// Γ^k_ij at `(i*d + j)*d + k` from differenced metric values.
fn christoffel_fd(gx: &[Expr], q: &[f64]) -> Result<Vec<f64>> {
    let d = q.len();
    let g = metric_values(gx, q)?;
    let m = MetricAtPoint::new(TensorValue::from_components(2, 0, d, g)?)?;
    let dg = fd_jacobian(&|x: &[f64]| metric_values(gx, x), q, GRADIENT_STEP)?;
    let dgc = |i: usize, j: usize, k: usize| dg[k][i * d + j];
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                out[(i * d + j) * d + k] = (0..d)
                    .map(|l| 0.5 * m.g_inv.at2(k, l) * (dgc(l, j, i) + dgc(l, i, j) - dgc(i, j, l)))
                    .sum();
            }
        }
    }
    Ok(out)
}

/// (0,4) curvature tensor of the structure's metric from differenced
/// Christoffel symbols.
pub fn curvature_fd(a: &AccRStructure, p: &[f64]) -> Result<TensorValue> {
    curvature_fd_metric(&a.g, p)
}

/// Same for metric components given row-major over the coordinates of `p`.
pub fn curvature_fd_metric(gx: &[Expr], p: &[f64]) -> Result<TensorValue> {
    let d = p.len();
    let gamma = christoffel_fd(gx, p)?;
    let dgamma = fd_jacobian(&|x: &[f64]| christoffel_fd(gx, x), p, CHRISTOFFEL_STEP)?;
    let g = TensorValue::from_components(2, 0, d, metric_values(gx, p)?)?;
    Ok(assemble_riemann(
        d,
        &g,
        |k, i, j| gamma[(i * d + j) * d + k],
        |k, i, j, m| dgamma[m][(i * d + j) * d + k],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::Geometry;
    use crate::tensor::mixed_residual;

    #[test]
    fn polynomial_derivatives() {
        let x = Expr::coord(0);
        let y = Expr::coord(1);
        let e = &(&x * &x) * &y + (&y).sin();
        assert!(jet_vs_fd(&e, &[0.7, -1.2]).unwrap() < 1e-9);
    }

    #[test]
    fn sphere_curvature_oracle() {
        let s = Expr::coord(0).sin();
        let g = vec![Expr::one(), Expr::zero(), Expr::zero(), &s * &s];
        let p = [0.9, 0.3];
        let fd = curvature_fd_metric(&g, &p).unwrap();
        // R(θ,φ,φ,θ) = sin²θ: sectional curvature 1
        assert!((fd.at4(0, 1, 1, 0) - 0.9f64.sin().powi(2)).abs() < 1e-7);
    }

    #[test]
    fn transformed_structure_oracle() {
        let a = AccRStructure::builtin_f0(1).unwrap();
        let t = crate::conformal::GTransform {
            u: Expr::coord(0).sin().scale(0.3),
            v: &Expr::coord(1) * &Expr::coord(2).scale(0.2),
            w: Expr::coord(2).scale(0.5),
        };
        let b = t.apply(&a);
        let p = [0.2, -0.4, 0.6];
        let direct = Geometry::compute(&b, &p).unwrap().riemann;
        assert!(mixed_residual(&direct, &curvature_fd(&b, &p).unwrap()).unwrap() < 1e-7);
    }
}
