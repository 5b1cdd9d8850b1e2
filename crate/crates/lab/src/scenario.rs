//! Scenario files: UTF-8 JSON describing a function, an operator, targets,
//! a radius schedule and the tasks to run.

use std::path::Path;

use nevlab_core::{QuadratureConfig, C64};
use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::error::{LabError, Result};

/// A complex number written as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex(pub C64);

impl<'de> Deserialize<'de> for Complex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let num = |v: &serde_json::Value| v.as_f64();
        match &v {
            serde_json::Value::Number(_) => Ok(Complex(C64::new(num(&v).unwrap_or(f64::NAN), 0.0))),
            serde_json::Value::Array(a) if a.len() == 2 => match (num(&a[0]), num(&a[1])) {
                (Some(re), Some(im)) => Ok(Complex(C64::new(re, im))),
                _ => Err(de::Error::custom("complex value must be a number or [re, im]")),
            },
            _ => Err(de::Error::custom("complex value must be a number or [re, im]")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSpec {
    pub at: Complex,
    #[serde(default = "one")]
    pub mult: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTerm {
    pub coef: Complex,
    pub freq: Complex,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CombineSpec {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// Ascending coefficient lists.
    Rational {
        numerator: Vec<Complex>,
        #[serde(default = "unit_poly")]
        denominator: Vec<Complex>,
    },
    RationalRoots {
        lead: Complex,
        #[serde(default)]
        zeros: Vec<RootSpec>,
        #[serde(default)]
        poles: Vec<RootSpec>,
    },
    ExpPoly { terms: Vec<ExpTerm> },
    JacobiSn { k: f64 },
    Constant { value: Complex },
    Identity,
    /// `inner(a z + b)`.
    Affine { inner: Box<FunctionSpec>, a: Complex, b: Complex },
    Combine { op: CombineSpec, lhs: Box<FunctionSpec>, rhs: Box<FunctionSpec> },
    Apply { operator: Box<OperatorSpec>, inner: Box<FunctionSpec> },
    Opaque { inner: Box<FunctionSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Value(Complex),
    Function(FunctionSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumTerm {
    pub coef: Coefficient,
    pub operator: OperatorSpec,
}

/// Operator node; `inner` (default identity) is applied first.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity,
    Derivative {
        #[serde(default = "one")]
        order: u32,
        #[serde(default)]
        inner: Option<Box<OperatorSpec>>,
    },
    Shift {
        c: Complex,
        #[serde(default)]
        inner: Option<Box<OperatorSpec>>,
    },
    QScale {
        q: Complex,
        #[serde(default)]
        inner: Option<Box<OperatorSpec>>,
    },
    Sum { terms: Vec<SumTerm> },
    Difference,
    CentralSecondDifference,
    Compose { outer: Box<OperatorSpec>, inner: Box<OperatorSpec> },
    Power { base: Box<OperatorSpec>, n: u32 },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Characteristic,
    Jensen,
    Smt21,
    SmtLinear,
    Deficiency,
    Picard,
    SyntheticValiron,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Characteristic,
        Task::Jensen,
        Task::Smt21,
        Task::SmtLinear,
        Task::Deficiency,
        Task::Picard,
        Task::SyntheticValiron,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Task::Characteristic => "characteristic",
            Task::Jensen => "jensen",
            Task::Smt21 => "smt21",
            Task::SmtLinear => "smt-linear",
            Task::Deficiency => "deficiency",
            Task::Picard => "picard",
            Task::SyntheticValiron => "synthetic-valiron",
        }
    }

    /// Base name of the task's main CSV.
    pub fn file_stem(&self) -> &'static str {
        match self {
            Task::SmtLinear => "smt_linear",
            Task::SyntheticValiron => "synthetic_valiron",
            t => t.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub r0: f64,
    pub ratio: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub base_nodes: usize,
    pub max_refinements: u32,
    pub singularity_guard: f64,
    pub target_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        QuadratureSpec {
            base_nodes: q.base_nodes,
            max_refinements: q.max_refinements,
            singularity_guard: q.singularity_guard,
            target_tol: q.target_tol,
        }
    }
}

impl QuadratureSpec {
    pub fn config(&self) -> QuadratureConfig {
        QuadratureConfig {
            base_nodes: self.base_nodes,
            max_refinements: self.max_refinements,
            singularity_guard: self.singularity_guard,
            target_tol: self.target_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EngineSpec {
    pub force_subdivision: bool,
    pub blind: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub p: u32,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest accepted Jensen residual.
    pub jensen: f64,
    /// Random circle points for the pointwise inequalities.
    pub pointwise_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { jensen: 1e-8, pointwise_samples: 100 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub function: FunctionSpec,
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    /// Auxiliary function of the second main theorem; defaults to `L(f)`,
    /// or `f'` without an operator.
    #[serde(default)]
    pub g: Option<FunctionSpec>,
    #[serde(default)]
    pub targets: Vec<FunctionSpec>,
    /// Picard candidates; default to the targets.
    #[serde(default)]
    pub candidates: Option<Vec<FunctionSpec>>,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub engine: EngineSpec,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Trailing fraction of the schedule used for liminf/limsup proxies.
    #[serde(default)]
    pub window: Option<f64>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn one() -> u32 {
    1
}

fn unit_poly() -> Vec<Complex> {
    vec![Complex(C64::new(1.0, 0.0))]
}

impl Scenario {
    pub fn from_str(text: &str, file: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| LabError::Parse {
            file: file.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_str(&text, &path.display().to_string())
    }

    /// Schema-level checks that need no numerics.
    pub fn validate(&self) -> Result<()> {
        let s = &self.schedule;
        if !(s.r0 > 0.0 && s.r0.is_finite()) {
            return Err(LabError::input("schedule.r0", format!("must be positive, got {}", s.r0)));
        }
        if !(s.ratio > 1.0 && s.ratio.is_finite()) {
            return Err(LabError::input("schedule.ratio", format!("must exceed 1, got {}", s.ratio)));
        }
        if s.count < 2 {
            return Err(LabError::input("schedule.count", format!("must be at least 2, got {}", s.count)));
        }
        if self.tasks.is_empty() {
            return Err(LabError::input("tasks", "must name at least one task"));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            if self.tasks[..i].contains(t) {
                return Err(LabError::input(format!("tasks[{i}]"), format!("duplicate task {}", t.name())));
            }
        }
        self.quadrature
            .config()
            .validate()
            .map_err(|e| LabError::input("quadrature", e.to_string()))?;
        if let Some(w) = self.window {
            if !(w > 0.0 && w <= 1.0) {
                return Err(LabError::input("window", format!("must lie in (0, 1], got {w}")));
            }
        }
        if !(self.tolerances.jensen > 0.0) {
            return Err(LabError::input("tolerances.jensen", "must be positive"));
        }
        for t in &self.tasks {
            let needs_operator = matches!(t, Task::SmtLinear | Task::Deficiency | Task::Picard);
            if needs_operator && self.operator.is_none() {
                return Err(LabError::input("operator", format!("task {} needs an operator", t.name())));
            }
            let needs_targets = matches!(t, Task::Smt21 | Task::SmtLinear);
            if needs_targets && self.targets.is_empty() {
                return Err(LabError::input("targets", format!("task {} needs at least one target", t.name())));
            }
            if *t == Task::Picard && self.candidates.as_ref().unwrap_or(&self.targets).is_empty() {
                return Err(LabError::input("candidates", "task picard needs at least one candidate"));
            }
            if *t == Task::SyntheticValiron && self.synthetic.is_none() {
                return Err(LabError::input("synthetic", "task synthetic-valiron needs {\"p\", \"delta\"}"));
            }
        }
        Ok(())
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| "scenario".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "function": {"family": "jacobi-sn", "k": 0.5},
        "operator": {"op": "derivative", "order": 2},
        "targets": [{"family": "constant", "value": 0}, {"family": "constant", "value": [1.5, 0]}],
        "schedule": {"r0": 2.0, "ratio": 1.2, "count": 4},
        "tasks": ["smt21", "deficiency"]
    }"#;

    #[test]
    fn parses_nested_specs() {
        let s = Scenario::from_str(BASE, "t.json").unwrap();
        assert_eq!(s.tasks, vec![Task::Smt21, Task::Deficiency]);
        assert!(matches!(s.function, FunctionSpec::JacobiSn { k } if k == 0.5));
        assert!(matches!(s.operator, Some(OperatorSpec::Derivative { order: 2, inner: None })));
        let text = r#"{"op": "sum", "terms": [
            {"coef": 1, "operator": {"op": "shift", "c": [0, 1]}},
            {"coef": {"family": "identity"}, "operator": {"op": "q-scale", "q": 2}}
        ]}"#;
        let op: OperatorSpec = serde_json::from_str(text).unwrap();
        let OperatorSpec::Sum { terms } = op else { panic!() };
        assert!(matches!(terms[0].coef, Coefficient::Value(Complex(c)) if c == C64::new(1.0, 0.0)));
        assert!(matches!(terms[1].coef, Coefficient::Function(FunctionSpec::Identity)));
    }

    #[test]
    fn field_diagnostics() {
        let bad = BASE.replace("\"ratio\": 1.2", "\"ratio\": 0.9");
        let e = Scenario::from_str(&bad, "t.json").unwrap_err();
        assert!(e.to_string().starts_with("schedule.ratio"), "{e}");
        assert_eq!(e.exit_code(), 1);
        let bad = BASE.replace("\"k\": 0.5", "\"k\": 0.5, \"bogus\": 1");
        let e = Scenario::from_str(&bad, "t.json").unwrap_err();
        assert!(matches!(e, LabError::Parse { line, .. } if line == 2), "{e}");
        let bad = BASE.replace("\"tasks\": [\"smt21\", \"deficiency\"]", "\"tasks\": []");
        assert!(Scenario::from_str(&bad, "t.json").is_err());
        let bad = BASE.replace("\"value\": 0", "\"value\": \"zero\"");
        assert!(Scenario::from_str(&bad, "t.json").is_err());
    }
}
