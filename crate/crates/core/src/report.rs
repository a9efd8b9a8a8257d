//! Versioned JSON reports and their text rendering.

use serde::ser::Serializer;
use serde::Serialize;
use serde_json::value::RawValue;
use serde_json::Value;

use crate::curvature::{
    RICCI_CONVENTION, RIEMANN_CONVENTION, TAU_STAR_CONVENTION, TAU_TILDE_CONVENTION,
};

pub const REPORT_VERSION: u32 = 1;

/// Tags a `paper_anchor` may take.
pub const KNOWN_ANCHORS: &[&str] = &[
    "KNp",
    "strM",
    "F=nfi",
    "F-prop",
    "t",
    "cct",
    "ff",
    "ttbartt",
    "RS",
    "Lbvt",
    "LL",
    "h1",
    "thm:aRs-F0",
    "R-RS=F0",
    "ro-F0",
    "tau-F0",
    "K-F0",
    "dksm",
    "Rrt",
    "bR",
    "h2",
    "Lxi0",
    "Lxi0=",
    "bro",
    "btau",
    "btau*",
    "cor:v",
    "defEl",
    "bro-aEl",
    "thm:aEl",
    "thm:aEl-eEl-El",
    "usl1",
    "ex-4.1",
    "ex2-uv",
    "Rtau",
    "smk",
    "koef-bR-exF5",
    "bR-exF5",
    "G0",
    "RbarR-F0",
    "S-F0",
    "btt*-G0",
    "trStrS*",
    "BR",
    "SQ-F0B=0",
    "L-RbarR-F0",
    "L",
    "Rbar0R-F0",
    "ex-uv",
    "ex-btt*-G0",
    "ex-trStrS*",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
    Hypothetical,
    Informational,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Vacuous => "vacuous",
            Status::Hypothetical => "hypothetical",
            Status::Informational => "informational",
        }
    }
}

/// 17 significant digits, so reports are byte-stable and lossless.
fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !v.is_finite() {
        return s.serialize_none();
    }
    let raw = RawValue::from_string(format!("{v:.16e}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_f64(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub operation: String,
    pub paper_anchor: Option<String>,
    /// None when the check could not be evaluated.
    #[serde(serialize_with = "ser_opt_f64")]
    pub max_residual: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub tolerance: f64,
    pub status: Status,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub expect_fail: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub riemann: &'static str,
    pub ricci: &'static str,
    pub tau_star: &'static str,
    pub tau_tilde: &'static str,
    pub residual: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            riemann: RIEMANN_CONVENTION,
            ricci: RICCI_CONVENTION,
            tau_star: TAU_STAR_CONVENTION,
            tau_tilde: TAU_TILDE_CONVENTION,
            residual: "max|A-B| / max(1, max|A|, max|B|) unless a check says otherwise",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub vacuous: usize,
    pub hypothetical: usize,
    pub informational: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub inverse: bool,
    pub negative_control: bool,
    pub conventions: Conventions,
    pub points: Vec<Vec<f64>>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(scenario: &str, seed: u64, points: Vec<Vec<f64>>) -> Self {
        Self {
            report_version: REPORT_VERSION,
            scenario: scenario.to_string(),
            seed,
            inverse: false,
            negative_control: false,
            conventions: Conventions::default(),
            points,
            checks: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, c: CheckRecord) {
        match c.status {
            Status::Pass => self.summary.pass += 1,
            Status::Fail => self.summary.fail += 1,
            Status::Vacuous => self.summary.vacuous += 1,
            Status::Hypothetical => self.summary.hypothetical += 1,
            Status::Informational => self.summary.informational += 1,
        }
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    /// Failed checks that were not marked as expected failures, and
    /// expected failures that did not fail.
    pub fn negative_control_mismatches(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| (c.status == Status::Fail) != c.expect_fail)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Several scenario reports from one `verify` run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub report_version: u32,
    pub seed: u64,
    pub reports: Vec<Report>,
    /// Scenarios that could not be built or run.
    pub errors: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.reports.iter().all(Report::passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn render_one(r: &Value, out: &mut String) {
    let name = r["scenario"].as_str().unwrap_or("?");
    out.push_str(&format!("scenario {name} (seed {})\n", r["seed"]));
    if let Some(checks) = r["checks"].as_array() {
        for c in checks {
            let status = c["status"].as_str().unwrap_or("?").to_uppercase();
            let anchor = c["paper_anchor"]
                .as_str()
                .map(|a| format!(" [{a}]"))
                .unwrap_or_default();
            let res = match &c["max_residual"] {
                Value::Null => "n/a".to_string(),
                v => format!("{:.3e}", v.as_f64().unwrap_or(f64::NAN)),
            };
            let tol = format!("{:.1e}", c["tolerance"].as_f64().unwrap_or(f64::NAN));
            let mark = if c["expect_fail"].as_bool() == Some(true) {
                " (expected to fail)"
            } else {
                ""
            };
            out.push_str(&format!(
                "  {status:<13} {}{anchor}  residual {res}  tol {tol}  points {}{mark}\n",
                c["name"].as_str().unwrap_or("?"),
                c["points"]
            ));
            if let Some(n) = c["note"].as_str() {
                out.push_str(&format!("                {n}\n"));
            }
        }
    }
    let s = &r["summary"];
    out.push_str(&format!(
        "  summary: {} pass, {} fail, {} vacuous, {} hypothetical, {} informational\n",
        s["pass"], s["fail"], s["vacuous"], s["hypothetical"], s["informational"]
    ));
}

/// Text rendering of a report or suite report, produced from its JSON.
pub fn render_text(json: &str) -> String {
    let v: Value = serde_json::from_str(json).expect("report JSON parses");
    let mut out = String::new();
    if let Some(reports) = v["reports"].as_array() {
        for r in reports {
            render_one(r, &mut out);
        }
        if let Some(errs) = v["errors"].as_array() {
            for e in errs {
                out.push_str(&format!("ERROR {}\n", e.as_str().unwrap_or("?")));
            }
        }
    } else {
        render_one(&v, &mut out);
    }
    out
}
