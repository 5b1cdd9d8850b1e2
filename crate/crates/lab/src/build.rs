//! Turns scenario specs into core handles and operators.

use nevlab_core::{
    apply, combine, compose_affine, identity, make_constant, make_exp_poly, make_jacobi_sn, make_rational,
    make_rational_from_roots, ApplyOptions, CombineOp, EngineOptions, FunctionHandle, OperatorExpr, RadiusSchedule,
    C64,
};

use crate::error::{LabError, Result};
use crate::scenario::{Coefficient, CombineSpec, FunctionSpec, OperatorSpec, Scenario};

fn core_err(path: &str) -> impl Fn(nevlab_core::Error) -> LabError + '_ {
    move |e| LabError::input(path, e.to_string())
}

pub fn function(spec: &FunctionSpec, path: &str) -> Result<FunctionHandle> {
    let c = |v: &[crate::scenario::Complex]| v.iter().map(|x| x.0).collect::<Vec<C64>>();
    match spec {
        FunctionSpec::Rational { numerator, denominator } => {
            make_rational(&c(numerator), &c(denominator)).map_err(core_err(path))
        }
        FunctionSpec::RationalRoots { lead, zeros, poles } => {
            let z: Vec<(C64, u32)> = zeros.iter().map(|r| (r.at.0, r.mult)).collect();
            let p: Vec<(C64, u32)> = poles.iter().map(|r| (r.at.0, r.mult)).collect();
            make_rational_from_roots(lead.0, &z, &p).map_err(core_err(path))
        }
        FunctionSpec::ExpPoly { terms } => {
            let t: Vec<(C64, C64)> = terms.iter().map(|t| (t.coef.0, t.freq.0)).collect();
            make_exp_poly(&t).map_err(core_err(path))
        }
        FunctionSpec::JacobiSn { k } => make_jacobi_sn(*k).map_err(core_err(path)),
        FunctionSpec::Constant { value } => Ok(make_constant(value.0)),
        FunctionSpec::Identity => Ok(identity()),
        FunctionSpec::Affine { inner, a, b } => {
            let f = function(inner, &format!("{path}.inner"))?;
            compose_affine(&f, a.0, b.0).map_err(core_err(path))
        }
        FunctionSpec::Combine { op, lhs, rhs } => {
            let f = function(lhs, &format!("{path}.lhs"))?;
            let g = function(rhs, &format!("{path}.rhs"))?;
            let op = match op {
                CombineSpec::Add => CombineOp::Add,
                CombineSpec::Sub => CombineOp::Sub,
                CombineSpec::Mul => CombineOp::Mul,
                CombineSpec::Div => CombineOp::Div,
            };
            combine(op, &f, &g).map_err(core_err(path))
        }
        FunctionSpec::Apply { operator: op, inner } => {
            let l = operator(op, &format!("{path}.operator"))?;
            let f = function(inner, &format!("{path}.inner"))?;
            apply(&l, &f, &ApplyOptions::default()).map_err(core_err(path))
        }
        FunctionSpec::Opaque { inner } => Ok(function(inner, &format!("{path}.inner"))?.opaque()),
    }
}

fn inner_op(inner: &Option<Box<OperatorSpec>>, path: &str) -> Result<OperatorExpr> {
    match inner {
        Some(i) => operator(i, &format!("{path}.inner")),
        None => Ok(OperatorExpr::Identity),
    }
}

pub fn operator(spec: &OperatorSpec, path: &str) -> Result<OperatorExpr> {
    let l = match spec {
        OperatorSpec::Identity => OperatorExpr::Identity,
        OperatorSpec::Derivative { order, inner } => OperatorExpr::derivative(*order).compose(&inner_op(inner, path)?),
        OperatorSpec::Shift { c, inner } => OperatorExpr::shift(c.0).compose(&inner_op(inner, path)?),
        OperatorSpec::QScale { q, inner } => OperatorExpr::q_scale(q.0).compose(&inner_op(inner, path)?),
        OperatorSpec::Sum { terms } => {
            let mut out = Vec::with_capacity(terms.len());
            for (i, t) in terms.iter().enumerate() {
                let p = format!("{path}.terms[{i}]");
                let coef = match &t.coef {
                    Coefficient::Value(v) => make_constant(v.0),
                    Coefficient::Function(f) => function(f, &format!("{p}.coef"))?,
                };
                out.push((coef, operator(&t.operator, &format!("{p}.operator"))?));
            }
            OperatorExpr::Sum(out)
        }
        OperatorSpec::Difference => OperatorExpr::difference(),
        OperatorSpec::CentralSecondDifference => OperatorExpr::central_second_difference(),
        OperatorSpec::Compose { outer, inner } => {
            operator(outer, &format!("{path}.outer"))?.compose(&operator(inner, &format!("{path}.inner"))?)
        }
        OperatorSpec::Power { base, n } => operator(base, &format!("{path}.base"))?.power(*n),
    };
    l.validate().map_err(core_err(path))?;
    Ok(l)
}

/// Everything a task needs, built once per scenario.
pub struct Built {
    pub f: FunctionHandle,
    pub l: Option<OperatorExpr>,
    pub g: FunctionHandle,
    pub targets: Vec<FunctionHandle>,
    pub candidates: Vec<FunctionHandle>,
    pub schedule: RadiusSchedule,
    pub engine: EngineOptions,
}

impl Built {
    pub fn new(s: &Scenario) -> Result<Self> {
        let f = function(&s.function, "function")?;
        let l = s.operator.as_ref().map(|o| operator(o, "operator")).transpose()?;
        let g = match (&s.g, &l) {
            (Some(g), _) => function(g, "g")?,
            (None, Some(l)) => apply(l, &f, &ApplyOptions::default()).map_err(core_err("operator"))?,
            (None, None) => apply(&OperatorExpr::derivative(1), &f, &ApplyOptions::default()).map_err(core_err("g"))?,
        };
        let list = |specs: &[FunctionSpec], name: &str| -> Result<Vec<FunctionHandle>> {
            specs.iter().enumerate().map(|(i, t)| function(t, &format!("{name}[{i}]"))).collect()
        };
        let targets = list(&s.targets, "targets")?;
        let candidates = match &s.candidates {
            Some(c) => list(c, "candidates")?,
            None => targets.clone(),
        };
        let sc = s.schedule;
        let schedule = RadiusSchedule::geometric(sc.r0, sc.ratio, sc.count).map_err(core_err("schedule"))?;
        let engine = EngineOptions {
            force_subdivision: s.engine.force_subdivision,
            blind: s.engine.blind,
            ..EngineOptions::default()
        };
        Ok(Built { f, l, g, targets, candidates, schedule, engine })
    }
}
