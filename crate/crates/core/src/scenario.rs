//! Scenario files and the builtin scenario library.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conformal::GTransform;
use crate::error::{Error, Result};
use crate::expr::{sum, Expr, Guard};
use crate::manifold::SampleBox;
use crate::soliton::SolitonData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureSpec {
    BuiltinF0,
}

/// φ^row_col += eps on the source structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiPerturbation {
    pub row: usize,
    pub col: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SampleSpec {
    pub fn sample_box(&self) -> SampleBox {
        SampleBox {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub explicit: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// Operation name.
    pub name: String,
    /// Name in the report; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
    /// Marks a check that a negative control is meant to break.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expect_fail: bool,
}

impl CheckSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            label: None,
            tol: None,
            params: Value::Null,
            expect_fail: false,
        }
    }

    pub fn label(mut self, l: &str) -> Self {
        self.label = Some(l.to_string());
        self
    }

    pub fn tol(mut self, t: f64) -> Self {
        self.tol = Some(t);
        self
    }

    pub fn params(mut self, p: Value) -> Self {
        self.params = p;
        self
    }

    /// Sets the report anchor of an operation that has none of its own.
    pub fn anchor(mut self, a: &str) -> Self {
        if !self.params.is_object() {
            self.params = json!({});
        }
        self.params["anchor"] = json!(a);
        self
    }

    pub fn expect_fail(mut self) -> Self {
        self.expect_fail = true;
        self
    }

    pub fn report_name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub structure: StructureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_perturbation: Option<PhiPerturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<GTransform>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonData>,
    #[serde(default)]
    pub points: PointsSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub guards: Vec<Guard>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let bad = |m: String| Err(Error::Scenario(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        for p in &self.points.explicit {
            if p.len() != d {
                return bad(format!(
                    "explicit point {p:?} has {} coordinates, expected {d}",
                    p.len()
                ));
            }
        }
        if let Some(s) = &self.points.sample {
            if s.lower.len() != d || s.upper.len() != d {
                return bad(format!("sample box must have {d} coordinates"));
            }
            if s.lower.iter().zip(&s.upper).any(|(a, b)| a > b) {
                return bad("sample box has lower > upper".into());
            }
        }
        let mut exprs: Vec<(&str, &Expr)> = Vec::new();
        if let Some(t) = &self.transform {
            exprs.extend([
                ("transform.u", &t.u),
                ("transform.v", &t.v),
                ("transform.w", &t.w),
            ]);
        }
        if let Some(s) = &self.soliton {
            exprs.extend([("soliton.k", &s.k), ("soliton.sigma", &s.sigma)]);
        }
        for (name, e) in exprs {
            if let Some(c) = e.max_coord() {
                if c >= d {
                    return bad(format!(
                        "{name} uses coordinate {c} but the dimension is {d}"
                    ));
                }
            }
        }
        if let Some(p) = &self.phi_perturbation {
            if p.row >= d || p.col >= d {
                return bad("phi_perturbation index out of range".into());
            }
        }
        Ok(())
    }
}

fn c(v: f64) -> Expr {
    Expr::constant(v)
}

fn x(i: usize) -> Expr {
    Expr::coord(i)
}

fn ser(e: &Expr) -> Value {
    serde_json::to_value(e).expect("expr serializes")
}

/// Names accepted by `builtin:<name>`.
pub const BUILTINS: &[&str] = &[
    "f0-flat",
    "f0-flat-negative-k",
    "f0-flat-negative-sigma",
    "negative-control-phi",
    "example-4.1",
    "example-4.1-solved-soliton",
    "example-5.1",
    "property-suite",
];

/// Scenarios `verify` runs, with the n they are built for.
pub const VERIFY_SET: &[(&str, usize)] = &[
    ("f0-flat", 2),
    ("f0-flat-negative-k", 2),
    ("f0-flat-negative-sigma", 2),
    ("example-4.1", 2),
    ("example-4.1-solved-soliton", 2),
    ("example-5.1", 1),
    ("example-5.1", 2),
    ("example-5.1", 3),
    ("property-suite", 1),
    ("property-suite", 2),
];

/// Builds a builtin scenario. `n` is honored by the families that take it;
/// the F₅ examples are five-dimensional.
pub fn builtin(name: &str, n: Option<usize>, seed: u64) -> Result<Scenario> {
    match name {
        "f0-flat" => Ok(f0_flat(n.unwrap_or(2), c(2.0), c(0.0), "f0-flat")),
        "f0-flat-negative-k" => Ok(f0_negative_k(n.unwrap_or(2))),
        "f0-flat-negative-sigma" => Ok(f0_negative_sigma(n.unwrap_or(2))),
        "negative-control-phi" => Ok(negative_control_phi(n.unwrap_or(2))),
        "example-4.1" | "example-4.1-solved-soliton" => {
            if let Some(m) = n {
                if m != 2 {
                    return Err(Error::Scenario(format!(
                        "{name} is five-dimensional (n = 2), got n = {m}"
                    )));
                }
            }
            Ok(if name == "example-4.1" {
                example_41()
            } else {
                example_41_solved()
            })
        }
        "example-5.1" => example_51(n.unwrap_or(2)),
        "property-suite" => Ok(property_suite(n.unwrap_or(2), seed)),
        _ => Err(Error::Scenario(format!(
            "unknown builtin `{name}` (known: {})",
            BUILTINS.join(", ")
        ))),
    }
}

fn unit_box(n: usize, half: f64, seed: u64, count: usize) -> SampleSpec {
    let d = 2 * n + 1;
    SampleSpec {
        count,
        seed,
        lower: vec![-half; d],
        upper: vec![half; d],
    }
}

fn oracle_checks() -> Vec<CheckSpec> {
    vec![
        CheckSpec::new("jet_fd_oracle").params(json!({"sample_count": 100})),
        CheckSpec::new("curvature_fd_oracle").params(json!({"points": 5})),
        CheckSpec::new("connection_compatibility"),
        CheckSpec::new("curvature_symmetries"),
    ]
}

fn property_checks() -> Vec<CheckSpec> {
    let p = json!({"sample_count": 25});
    vec![
        CheckSpec::new("structure_algebra").params(p.clone()),
        CheckSpec::new("associated_metric").params(p.clone()),
        CheckSpec::new("signature").params(p.clone()),
        CheckSpec::new("lee_identities").params(p.clone()),
        CheckSpec::new("distribution_preservation").params(p.clone()),
        CheckSpec::new("inverse_round_trip").params(p),
    ]
}

fn f0_flat(n: usize, k: Expr, sigma: Expr, name: &str) -> Scenario {
    let mut checks = property_checks();
    checks.extend([
        CheckSpec::new("is_f0").params(json!({"expect": true})),
        CheckSpec::new("soliton_residual").tol(0.0),
        CheckSpec::new("f0_flatness"),
        CheckSpec::new("bR_prediction"),
        CheckSpec::new("bro_prediction"),
        CheckSpec::new("btau_prediction"),
        CheckSpec::new("btau_star_prediction"),
        CheckSpec::new("lie_potential_decomposition"),
        CheckSpec::new("h_tensor_properties"),
        CheckSpec::new("einstein_like")
            .label("defEl-tag")
            .params(json!({"expected_tag": "einstein"})),
    ]);
    checks.extend(oracle_checks());
    Scenario {
        name: name.to_string(),
        n,
        structure: StructureSpec::BuiltinF0,
        phi_perturbation: None,
        transform: None,
        soliton: Some(SolitonData { k, sigma }),
        points: PointsSpec {
            explicit: vec![],
            sample: Some(unit_box(n, 2.0, 11, 10)),
        },
        guards: vec![],
        checks,
    }
}

fn f0_negative_k(n: usize) -> Scenario {
    let t = x(2 * n);
    let mut s = f0_flat(n, t.clone(), c(0.0), "f0-flat-negative-k");
    s.guards.push(Guard::nonzero(t, 0.1, "t != 0"));
    s.checks = vec![
        // 2R + g∧L_ϑg = g∧h₁ with h₁ = 2η⊗η
        CheckSpec::new("curvature_combo")
            .label("KNp")
            .tol(0.0)
            .params(json!({"quantity": "soliton_residual", "terms": {"g_h1": ser(&c(1.0))}}))
            .anchor("KNp"),
        CheckSpec::new("curvature_combo")
            .label("KNp-eta")
            .tol(0.0)
            .params(json!({"quantity": "soliton_residual", "terms": {"g_eta_eta": ser(&c(2.0))}}))
            .anchor("KNp"),
        CheckSpec::new("scalar_value")
            .label("KNp-max-component")
            .tol(0.0)
            .params(json!({"quantity": "soliton_residual_max", "expected": ser(&c(2.0))}))
            .anchor("KNp"),
        CheckSpec::new("soliton_residual").params(json!({"expect": false})),
        CheckSpec::new("f0_flatness"),
        CheckSpec::new("lie_potential_decomposition"),
    ];
    s
}

fn f0_negative_sigma(n: usize) -> Scenario {
    let mut s = f0_flat(n, c(1.0), c(1.0), "f0-flat-negative-sigma");
    s.checks = vec![
        CheckSpec::new("curvature_combo")
            .label("KNp")
            .tol(0.0)
            .params(json!({"quantity": "soliton_residual", "terms": {"g_g": ser(&c(1.0))}}))
            .anchor("KNp"),
        CheckSpec::new("soliton_residual").params(json!({"expect": false})),
        CheckSpec::new("f0_flatness"),
    ];
    s
}

/// Builtin F₀ with φ perturbed: the algebraic structure checks must fail
/// while metric-only checks keep passing.
fn negative_control_phi(n: usize) -> Scenario {
    let mut s = f0_flat(n, c(2.0), c(0.0), "negative-control-phi");
    s.phi_perturbation = Some(PhiPerturbation {
        row: 0,
        col: n,
        eps: 1e-3,
    });
    s.soliton = None;
    let p = json!({"sample_count": 25});
    s.checks = vec![
        CheckSpec::new("structure_algebra")
            .params(p.clone())
            .expect_fail(),
        CheckSpec::new("associated_metric")
            .params(p.clone())
            .expect_fail(),
        CheckSpec::new("lee_identities").params(p.clone()),
        CheckSpec::new("signature").params(p),
        CheckSpec::new("jet_fd_oracle").params(json!({"sample_count": 20})),
        CheckSpec::new("curvature_fd_oracle").params(json!({"points": 2})),
        CheckSpec::new("curvature_symmetries"),
    ];
    s
}

/// (u, v) of the five-dimensional F₅ example; coordinates x¹ x² y¹ y² t.
pub fn example_41_fields() -> (Expr, Expr) {
    let a = x(0) + x(3);
    let b = x(1) - x(2);
    let r2 = &a * &a + &b * &b;
    let u = (x(4) / r2).ln().scale(0.5);
    // sign chosen so that dv = −du∘φ
    let v = -(a / b).atan();
    (u, v)
}

/// v with the opposite sign, for which dv = +du∘φ.
pub fn example_41_v_printed() -> Expr {
    ((x(0) + x(3)) / (x(1) - x(2))).atan()
}

fn example_41_guards() -> Vec<Guard> {
    vec![
        Guard::nonzero(x(0) + x(3), 0.1, "x1 + y2 != 0"),
        Guard::nonzero(x(1) - x(2), 0.1, "x2 - y1 != 0"),
        Guard::positive(x(4), 0.0, "t > 0"),
    ]
}

fn example_41_base(name: &str, k: Expr, sigma: Expr) -> Scenario {
    let (u, v) = example_41_fields();
    Scenario {
        name: name.to_string(),
        n: 2,
        structure: StructureSpec::BuiltinF0,
        phi_perturbation: None,
        transform: Some(GTransform { u, v, w: c(0.0) }),
        soliton: Some(SolitonData { k, sigma }),
        points: PointsSpec {
            explicit: vec![vec![1.0, 1.0, 0.0, 1.0, 1.0]],
            sample: Some(SampleSpec {
                count: 10,
                seed: 41,
                lower: vec![-2.0, -2.0, -2.0, -2.0, 0.5],
                upper: vec![2.0, 2.0, 2.0, 2.0, 2.0],
            }),
        },
        guards: example_41_guards(),
        checks: vec![],
    }
}

fn inv_t2(coef: f64) -> Expr {
    c(coef) / (x(4) * x(4))
}

fn example_41() -> Scenario {
    let t = x(4);
    let mut s = example_41_base("example-4.1", c(-1.0) / (c(6.0) * &t), inv_t2(1.0 / 3.0));
    let mut checks = property_checks();
    checks.extend([
        CheckSpec::new("is_f0").params(json!({"expect": false})),
        CheckSpec::new("f5_form"),
        CheckSpec::new("is_g0").params(json!({"expect": false})),
        CheckSpec::new("eta_nabla_xi"),
        CheckSpec::new("fbar_formula"),
        CheckSpec::new("lee_transform"),
        CheckSpec::new("scalar_value")
            .label("theta*(xi)")
            .tol(1e-8)
            .params(json!({"quantity": "theta_star_xi", "expected": ser(&(c(2.0) / &t))}))
            .anchor("ex-4.1"),
        CheckSpec::new("scalar_value")
            .label("du(xi)")
            .tol(1e-8)
            .params(json!({"quantity": "du_xi", "expected": ser(&(c(0.5) / &t))}))
            .anchor("ex-4.1"),
        CheckSpec::new("scalar_value")
            .label("dv(xi)")
            .tol(1e-8)
            .params(json!({"quantity": "dv_xi", "expected": ser(&c(0.0))}))
            .anchor("ex-4.1"),
        CheckSpec::new("curvature_combo").label("bR-exF5").params(json!({
            "quantity": "riemann",
            "terms": {"g_g": ser(&inv_t2(-0.25)), "g_eta_eta": ser(&inv_t2(0.25))}
        }))
            .anchor("bR-exF5"),
        CheckSpec::new("scalar_value")
            .label("Rtau-tau")
            .params(json!({"quantity": "tau", "expected": ser(&inv_t2(-8.0))}))
            .anchor("Rtau"),
        CheckSpec::new("scalar_value")
            .label("Rtau-tau*")
            .params(json!({"quantity": "tau_star", "expected": ser(&c(0.0))}))
            .anchor("Rtau"),
        CheckSpec::new("scalar_value")
            .label("tau~")
            .params(json!({"quantity": "tau_tilde", "expected": ser(&inv_t2(-1.0))}))
            .anchor("ex-4.1"),
        CheckSpec::new("tau_tilde_relation_f5"),
        CheckSpec::new("soliton_residual").label("RS-smk"),
        CheckSpec::new("tensor_combo")
            .label("h1")
            .params(json!({"quantity": "h1", "terms": {"eta_eta": ser(&inv_t2(-1.0 / 3.0))}}))
            .anchor("h1"),
        CheckSpec::new("tensor_combo").label("h2").params(json!({"quantity": "h2", "terms": {}}))
            .anchor("h2"),
        CheckSpec::new("h_tensor_properties"),
        CheckSpec::new("lie_xi_formula"),
        CheckSpec::new("lie_potential_decomposition"),
        CheckSpec::new("lie_coordinate_oracle"),
        CheckSpec::new("bR_coefficients").label("koef-bR-exF5").params(json!({
            "expected": [ser(&inv_t2(-0.25)), ser(&c(0.0)), ser(&inv_t2(1.0 / 12.0))]
        })),
        CheckSpec::new("bR_prediction"),
        CheckSpec::new("bro_prediction"),
        CheckSpec::new("btau_prediction"),
        CheckSpec::new("btau_star_prediction"),
        CheckSpec::new("tensor_combo").label("bro-exF5").params(json!({
            "quantity": "ricci",
            "terms": {"g": ser(&inv_t2(-7.0 / 4.0)), "eta_eta": ser(&inv_t2(3.0 / 4.0))}
        }))
            .anchor("ex-4.1"),
        CheckSpec::new("einstein_like")
            .label("defEl-tag")
            .params(json!({"expected_tag": "almost_eta_einstein", "excluded_tags": ["almost_einstein", "einstein"]})),
        CheckSpec::new("einstein_like").label("defEl-coefficients").params(json!({
            "expected": [ser(&inv_t2(-7.0 / 4.0)), ser(&c(0.0)), ser(&inv_t2(3.0 / 4.0))]
        })),
        CheckSpec::new("einstein_conditions").params(json!({
            "expect": {"almost_einstein_like": true, "almost_eta_einstein": true, "almost_einstein": false}
        })),
        CheckSpec::new("cor_v"),
        CheckSpec::new("bro_ael_coefficients"),
        CheckSpec::new("usl1").params(json!({"expect": false})),
        CheckSpec::new("kahler_property").params(json!({"informational": true})),
    ]);
    checks.extend(oracle_checks());
    s.checks = checks;
    s
}

/// The five-dimensional example with the soliton solved from its curvature:
/// k = 1/(3t), σ = −1/(12t²).
fn example_41_solved() -> Scenario {
    let t = x(4);
    let mut s = example_41_base(
        "example-4.1-solved-soliton",
        c(1.0) / (c(3.0) * &t),
        inv_t2(-1.0 / 12.0),
    );
    s.checks = vec![
        CheckSpec::new("soliton_residual"),
        CheckSpec::new("curvature_combo").label("R-direct").params(json!({
            "quantity": "riemann",
            "terms": {"g_g": ser(&inv_t2(-1.0 / 8.0)), "g_eta_eta": ser(&inv_t2(0.5))}
        }))
            .anchor("ex-4.1"),
        CheckSpec::new("tensor_combo").label("ro-direct").params(json!({
            "quantity": "ricci",
            "terms": {"g": ser(&inv_t2(-0.5)), "eta_eta": ser(&inv_t2(1.5))}
        }))
            .anchor("ex-4.1"),
        CheckSpec::new("scalar_value")
            .label("tau-direct")
            .params(json!({"quantity": "tau", "expected": ser(&inv_t2(-1.0))}))
            .anchor("ex-4.1"),
        CheckSpec::new("tensor_combo")
            .label("h1")
            .params(json!({"quantity": "h1", "terms": {"eta_eta": ser(&inv_t2(-2.0 / 3.0))}}))
            .anchor("h1"),
        CheckSpec::new("h_tensor_properties"),
        CheckSpec::new("lie_xi_formula"),
        CheckSpec::new("lie_potential_decomposition"),
        CheckSpec::new("bR_coefficients").params(json!({
            "expected": [ser(&inv_t2(-1.0 / 8.0)), ser(&c(0.0)), ser(&inv_t2(1.0 / 6.0))]
        })),
        CheckSpec::new("bR_prediction"),
        CheckSpec::new("bro_prediction"),
        CheckSpec::new("btau_prediction"),
        CheckSpec::new("btau_star_prediction"),
        CheckSpec::new("cor_v"),
        CheckSpec::new("einstein_like")
            .label("defEl-tag")
            .params(json!({"expected_tag": "almost_eta_einstein", "excluded_tags": ["almost_einstein", "einstein"]})),
        CheckSpec::new("einstein_conditions").params(json!({
            "expect": {"almost_einstein_like": true, "almost_eta_einstein": true, "almost_einstein": false}
        })),
        CheckSpec::new("bro_ael_coefficients"),
        CheckSpec::new("usl1").params(json!({"expect": false})),
    ];
    s
}

/// (u, v, w) of the G₀ example in dimension 2n+1.
pub fn example_51_transform(n: usize) -> GTransform {
    let u = sum((0..n).map(|i| (x(i) * x(i) + x(n + i) * x(n + i)).ln().scale(0.5)));
    let v = sum((0..n).map(|i| (x(n + i) / x(i)).atan()));
    GTransform {
        u,
        v,
        w: x(2 * n).exp(),
    }
}

/// Closed forms of tr S and tr S*, with denominators (xᵢ² − yᵢ²)² as
/// printed or (xᵢ² + yᵢ²)².
pub fn example_51_closed_traces(n: usize, p: &[f64], plus: bool) -> (f64, f64) {
    let nf = n as f64;
    let mut ts = 0.0;
    let mut tss = 0.0;
    for i in 0..n {
        let (a, b) = (p[i], p[n + i]);
        let den = if plus { a * a + b * b } else { a * a - b * b };
        ts += (a * a - b * b) / (den * den);
        tss += a * b / (den * den);
    }
    (-2.0 * (nf - 1.0) * ts, -4.0 * (nf - 1.0) * tss)
}

fn example_51(n: usize) -> Result<Scenario> {
    if !(1..=6).contains(&n) {
        return Err(Error::Scenario(format!(
            "example-5.1 supports 1 <= n <= 6, got {n}"
        )));
    }
    let mut guards = Vec::new();
    for i in 0..n {
        guards.push(Guard::nonzero(x(i), 0.1, &format!("x{} != 0", i + 1)));
        guards.push(Guard::nonzero(
            x(i) * x(i) - x(n + i) * x(n + i),
            0.05,
            &format!("x{0}^2 != y{0}^2", i + 1),
        ));
    }
    let d = 2 * n + 1;
    let mut lower = vec![-2.0; d];
    let mut upper = vec![2.0; d];
    lower[2 * n] = -1.0;
    upper[2 * n] = 1.0;
    let mut checks = property_checks();
    let variants = |op: &str, anchor: &str, tol: f64| {
        vec![
            CheckSpec::new(op)
                .label(anchor)
                .tol(tol)
                .params(json!({"variant": "printed"})),
            CheckSpec::new(op)
                .label(&format!("{anchor}/amended"))
                .tol(tol)
                .params(json!({"variant": "amended"})),
        ]
    };
    checks.extend([
        CheckSpec::new("is_g0").params(json!({"expect": true})),
        CheckSpec::new("is_f0").params(json!({"expect": true})),
        CheckSpec::new("is_f0")
            .label("is_f0-source")
            .params(json!({"expect": true, "on": "source"})),
        CheckSpec::new("fbar_formula"),
        CheckSpec::new("lee_transform"),
        CheckSpec::new("kahler_property"),
    ]);
    checks.extend(variants("s_tensor_trace", "trStrS*", 1e-8));
    checks.push(CheckSpec::new("ex_trace_closed_form").label("ex-trStrS*"));
    checks.extend(variants("curvature_relation_g0", "RbarR-F0", 1e-8));
    checks.extend(variants("scalar_relation_g0", "btt*-G0", 1e-7));
    if n == 1 {
        checks.push(CheckSpec::new("scalar_flat"));
    }
    if n >= 3 {
        checks.extend([
            CheckSpec::new("bochner_vanishes"),
            CheckSpec::new("bochner_invariance"),
        ]);
        checks.extend(variants("bochner_reconstruction", "L-RbarR-F0", 1e-7));
        checks.extend(variants("ricci_from_s", "SQ-F0B=0", 1e-7));
        checks.extend(variants("rbar0r", "Rbar0R-F0", 1e-7));
    }
    checks.extend(oracle_checks());
    Ok(Scenario {
        name: format!("example-5.1-n{n}"),
        n,
        structure: StructureSpec::BuiltinF0,
        phi_perturbation: None,
        transform: Some(example_51_transform(n)),
        soliton: None,
        points: PointsSpec {
            explicit: vec![],
            sample: Some(SampleSpec {
                count: 25,
                seed: 51,
                lower,
                upper,
            }),
        },
        guards,
        checks,
    })
}

/// A seeded random G-transformation built from bounded smooth terms.
pub fn random_transform(n: usize, seed: u64) -> GTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2 * n + 1;
    let mut field = |scale: f64| {
        let mut terms = Vec::new();
        terms.push(c(rng.random_range(-0.5..0.5)));
        for i in 0..d {
            let a: f64 = rng.random_range(-1.0..1.0) * scale;
            let j = rng.random_range(0..d);
            let b: f64 = rng.random_range(-0.5..0.5);
            terms.push(c(a) * (x(i) + c(b) * x(j)).sin());
        }
        sum(terms)
    };
    let u = field(0.4);
    let v = field(0.4);
    let w = field(0.3);
    GTransform { u, v, w }
}

/// Random G-transforms of the builtin F₀ structure: structure algebra,
/// two-route identities and oracles.
fn property_suite(n: usize, seed: u64) -> Scenario {
    let mut checks = property_checks();
    checks.extend([
        CheckSpec::new("fbar_formula"),
        CheckSpec::new("lee_transform"),
        CheckSpec::new("eta_nabla_xi"),
        CheckSpec::new("lie_xi_formula"),
        CheckSpec::new("lie_potential_decomposition"),
        CheckSpec::new("lie_coordinate_oracle"),
        CheckSpec::new("h_tensor_properties"),
        CheckSpec::new("kn_symmetries").params(json!({"samples": 50})),
        CheckSpec::new("s_tensor_trace")
            .label("trace-identity")
            .params(json!({"variant": "amended"})),
    ]);
    checks.extend(oracle_checks());
    let mut bx = unit_box(n, 1.5, seed, 10);
    bx.seed = seed;
    Scenario {
        name: format!("property-suite-n{n}"),
        n,
        structure: StructureSpec::BuiltinF0,
        phi_perturbation: None,
        transform: Some(random_transform(n, seed)),
        soliton: Some(SolitonData {
            k: (x(2 * n) + x(0).scale(0.5)).exp(),
            sigma: x(1).cos(),
        }),
        points: PointsSpec {
            explicit: vec![],
            sample: Some(bx),
        },
        guards: vec![],
        checks,
    }
}

/// Per-check tolerance overrides from `--tol name=value`.
pub type TolOverrides = BTreeMap<String, f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip_through_json() {
        for &(name, n) in VERIFY_SET {
            let s = builtin(name, Some(n), 7).unwrap();
            let back = Scenario::from_json(&s.to_json()).unwrap();
            assert_eq!(s, back, "{name}");
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let e = Scenario::from_json(r#"{"name":"x","n":1,"structure":"builtin_f0","chekcs":[]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("chekcs"));
    }

    #[test]
    fn coordinate_out_of_range_rejected() {
        let text = r#"{"name":"x","n":1,"structure":"builtin_f0",
            "transform":{"u":{"coord":3},"v":{"const":0.0},"w":{"const":0.0}}}"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::Scenario(_))));
    }

    #[test]
    fn closed_forms_vanish_for_n1() {
        assert_eq!(
            example_51_closed_traces(1, &[0.3, 0.7, 0.1], false),
            (0.0, 0.0)
        );
    }

    #[test]
    fn random_transform_is_seeded() {
        assert_eq!(random_transform(2, 5), random_transform(2, 5));
        assert_ne!(random_transform(2, 5), random_transform(2, 6));
    }
}
