//! One runner per scenario task. Each returns its tables and a summary
//! record. Nothing is written here.

use nevlab_core::{
    characteristic, deficiencies, deficiency_sum, jensen_check, picard_check, pointwise_check, synthetic_valiron,
    verify_linear_smt, ApplyOptions, DeficiencyTarget, DeficiencyWindow, PicardVerdict, QuadratureConfig, Requirement,
    SmtReport, SyntheticDivisorModel, Thm21Setup, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::build::Built;
use crate::error::core_exit_code;
use crate::scenario::{Scenario, Task};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Assertion { name: name.into(), passed, detail }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Perturbed {
    pub task: String,
    pub r: f64,
    pub r_eff: f64,
    pub nudges: u32,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TaskSummary {
    pub task: String,
    pub status: String,
    pub files: Vec<String>,
    pub rows: usize,
    pub certified_rows: usize,
    pub certification_rate: f64,
    pub assertions: Vec<Assertion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TaskOutput {
    pub tables: Vec<(String, Table)>,
    pub summary: TaskSummary,
    pub perturbed: Vec<Perturbed>,
    /// Exit code demanded by a failed task (0 when it ran).
    pub failure: u8,
}

impl TaskOutput {
    pub fn assertions_passed(&self) -> bool {
        self.summary.assertions.iter().all(|a| a.passed)
    }

    pub fn fully_certified(&self) -> bool {
        self.summary.certified_rows == self.summary.rows
    }
}

struct Ctx<'a> {
    s: &'a Scenario,
    b: &'a Built,
    quad: QuadratureConfig,
    apply: ApplyOptions,
}

struct Partial {
    tables: Vec<(String, Table)>,
    rows: usize,
    certified_rows: usize,
    assertions: Vec<Assertion>,
    verdict: Option<String>,
    window: Option<[f64; 2]>,
    details: Option<serde_json::Value>,
    perturbed: Vec<(f64, f64, u32)>,
}

impl Partial {
    fn new() -> Self {
        Partial {
            tables: Vec::new(),
            rows: 0,
            certified_rows: 0,
            assertions: Vec::new(),
            verdict: None,
            window: None,
            details: None,
            perturbed: Vec::new(),
        }
    }

    fn count(&mut self, certified: bool) {
        self.rows += 1;
        self.certified_rows += certified as usize;
    }
}

type TaskResult = Result<Partial, nevlab_core::Error>;

pub fn run_task(task: Task, s: &Scenario, b: &Built) -> TaskOutput {
    let ctx = Ctx { s, b, quad: s.quadrature.config(), apply: ApplyOptions::default() };
    let res = match task {
        Task::Characteristic => characteristic_task(&ctx),
        Task::Jensen => jensen_task(&ctx),
        Task::Smt21 => smt21_task(&ctx),
        Task::SmtLinear => smt_linear_task(&ctx),
        Task::Deficiency => deficiency_task(&ctx),
        Task::Picard => picard_task(&ctx),
        Task::SyntheticValiron => valiron_task(&ctx),
    };
    let name = task.name().to_string();
    match res {
        Ok(p) => {
            let passed = p.assertions.iter().all(|a| a.passed);
            let status = if !passed {
                "assertion-failed"
            } else if p.certified_rows < p.rows {
                "uncertified-rows"
            } else {
                "ok"
            };
            let rate = if p.rows == 0 { 1.0 } else { p.certified_rows as f64 / p.rows as f64 };
            TaskOutput {
                summary: TaskSummary {
                    task: name.clone(),
                    status: status.into(),
                    files: p.tables.iter().map(|(f, _)| f.clone()).collect(),
                    rows: p.rows,
                    certified_rows: p.certified_rows,
                    certification_rate: rate,
                    assertions: p.assertions,
                    verdict: p.verdict,
                    window: p.window,
                    details: p.details,
                    error: None,
                },
                tables: p.tables,
                perturbed: p
                    .perturbed
                    .into_iter()
                    .filter(|x| x.2 > 0)
                    .map(|(r, r_eff, nudges)| Perturbed { task: name.clone(), r, r_eff, nudges })
                    .collect(),
                failure: 0,
            }
        }
        Err(e) => TaskOutput {
            tables: Vec::new(),
            summary: TaskSummary {
                task: name,
                status: "error".into(),
                files: Vec::new(),
                rows: 0,
                certified_rows: 0,
                certification_rate: 0.0,
                assertions: Vec::new(),
                verdict: None,
                window: None,
                details: None,
                error: Some(e.to_string()),
            },
            perturbed: Vec::new(),
            failure: core_exit_code(&e),
        },
    }
}

fn nudges_of(r: f64, r_eff: f64) -> u32 {
    ((r_eff / r - 1.0) / 1e-3).round().max(0.0) as u32
}

fn characteristic_task(c: &Ctx) -> TaskResult {
    let b = c.b;
    let tab = characteristic(&b.f, &b.targets, &b.schedule, &c.quad, &b.engine)?;
    let mut cols: Vec<String> = ["r", "r_eff", "nudges", "m", "N", "T"].map(String::from).to_vec();
    cols.extend((1..=b.targets.len()).map(|j| format!("N_target_{j}")));
    cols.extend(["error", "certified"].map(String::from));
    let mut t = Table::new(cols);
    let mut p = Partial::new();
    for row in &tab.samples {
        let mut cells: Vec<Cell> =
            vec![row.r.into(), row.r_eff.into(), row.nudges.into(), row.m.into(), row.n.into(), row.t.into()];
        cells.extend(row.per_target_n.iter().map(|&x| Cell::from(x)));
        cells.extend([row.error.into(), row.certified.into()]);
        t.push(cells);
        p.count(row.certified);
        p.perturbed.push((row.r, row.r_eff, row.nudges));
    }
    p.assertions.push(Assertion::new("T nondecreasing", tab.monotone, format!("{} radii", tab.samples.len())));
    p.tables.push(("characteristic.csv".into(), t));
    Ok(p)
}

fn jensen_task(c: &Ctx) -> TaskResult {
    let b = c.b;
    let reports: Vec<_> = b
        .schedule
        .radii()
        .par_iter()
        .map(|&r| jensen_check(&b.f, r, &c.quad, &b.engine).map(|j| (r, j)))
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(["r", "r_eff", "mean_log", "divisor_side", "residual", "error", "certified"]);
    let mut p = Partial::new();
    let mut worst: f64 = 0.0;
    for (r, j) in &reports {
        t.push(vec![
            (*r).into(),
            j.r_eff.into(),
            j.mean_log.into(),
            j.divisor_side.into(),
            j.residual.into(),
            j.error.into(),
            j.certified.into(),
        ]);
        p.count(j.certified);
        p.perturbed.push((*r, j.r_eff, nudges_of(*r, j.r_eff)));
        if j.certified {
            worst = worst.max(j.residual);
        }
    }
    let tol = c.s.tolerances.jensen;
    p.assertions.push(Assertion::new(
        "jensen residual",
        worst < tol,
        format!("max certified residual {worst:e} against {tol:e}"),
    ));
    p.tables.push(("jensen.csv".into(), t));
    Ok(p)
}

fn smt_columns(q: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["r", "m", "N", "T"].map(String::from).to_vec();
    cols.extend((1..=q).map(|j| format!("N_target_{j}")));
    cols.extend(["N_g", "lhs", "rhs", "remainder_total", "slack", "certified"].map(String::from));
    cols
}

fn smt_cells(row: &SmtReport) -> Vec<Cell> {
    let mut cells: Vec<Cell> = vec![row.r.into(), row.m.into(), row.n.into(), row.t.into()];
    cells.extend(row.per_target_n.iter().map(|&x| Cell::from(x)));
    cells.extend([
        row.ramification.into(),
        row.lhs.into(),
        row.rhs.into(),
        row.remainder.total.into(),
        row.slack.into(),
        row.certified.into(),
    ]);
    cells
}

fn remainder_table(rows: &[SmtReport]) -> Table {
    let mut t = Table::new([
        "r",
        "r_eff",
        "nudges",
        "sum_T_targets",
        "log_sum_ratio",
        "l_term",
        "const_term",
        "ilc_terms",
        "total",
        "margin",
    ]);
    for row in rows {
        let br = &row.remainder;
        t.push(vec![
            row.r.into(),
            row.r_eff.into(),
            row.nudges.into(),
            br.sum_t_targets.into(),
            br.log_sum_ratio.into(),
            br.l_term.into(),
            br.const_term.into(),
            br.ilc_terms.into(),
            br.total.into(),
            row.margin.into(),
        ]);
    }
    t
}

fn inequality_assertion(rows: &[SmtReport]) -> Assertion {
    let worst = rows.iter().filter(|r| r.certified).map(|r| r.slack + r.margin).fold(f64::INFINITY, f64::min);
    let bad = rows.iter().filter(|r| !r.holds()).count();
    Assertion::new(
        "slack >= -margin",
        bad == 0,
        format!("{bad} violating rows, min slack + margin {}", crate::table::format_float(worst)),
    )
}

fn smt_partial(rows: &[SmtReport], p: &mut Partial) {
    for row in rows {
        p.count(row.certified);
        p.perturbed.push((row.r, row.r_eff, row.nudges));
    }
    p.assertions.push(inequality_assertion(rows));
}

/// Random points on the schedule circles, reproducible from the seed.
fn circle_points(c: &Ctx) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.s.seed);
    let radii = c.b.schedule.radii();
    (0..c.s.tolerances.pointwise_samples)
        .map(|_| {
            let r = radii[rng.gen_range(0..radii.len())];
            C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

fn smt21_task(c: &Ctx) -> TaskResult {
    let b = c.b;
    let setup = Thm21Setup::new(&b.f, &b.g, &b.targets, b.schedule.max(), &c.quad, &b.engine)?;
    let rows: Vec<SmtReport> = b.schedule.radii().par_iter().map(|&r| setup.row(r)).collect::<Result<_, _>>()?;
    let mut t = Table::new(smt_columns(b.targets.len()));
    for row in &rows {
        t.push(smt_cells(row));
    }
    let mut p = Partial::new();
    smt_partial(&rows, &mut p);
    let pts = circle_points(c);
    let pw = pointwise_check(&b.f, &b.g, &b.targets, &pts);
    p.assertions.push(Assertion::new(
        "pointwise inequalities",
        pw.sum_violations == 0 && pw.proximity_violations == 0,
        format!(
            "{} samples, {} + {} violations",
            pw.samples, pw.sum_violations, pw.proximity_violations
        ),
    ));
    p.details = Some(json!({
        "pointwise_samples": pw.samples,
        "min_sum_gap": pw.min_sum_gap,
        "min_proximity_gap": pw.min_proximity_gap,
    }));
    p.tables.push(("smt21.csv".into(), t));
    p.tables.push(("smt21_remainder.csv".into(), remainder_table(&rows)));
    Ok(p)
}

fn operator<'a>(c: &'a Ctx) -> &'a nevlab_core::OperatorExpr {
    c.b.l.as_ref().expect("validated: task needs an operator")
}

fn smt_linear_task(c: &Ctx) -> TaskResult {
    let b = c.b;
    let l = operator(c);
    let rep = verify_linear_smt(&b.f, l, &b.targets, &b.schedule, &c.quad, &b.engine, &c.apply)?;
    let mut cols = smt_columns(b.targets.len());
    cols.extend(["remainder_ratio", "logderiv", "logderiv_ratio"].map(String::from));
    let mut t = Table::new(cols);
    for (i, row) in rep.rows.iter().enumerate() {
        let mut cells = smt_cells(row);
        cells.extend([rep.remainder_ratio[i].into(), rep.logderiv[i].into(), rep.logderiv_ratio[i].into()]);
        t.push(cells);
    }
    let mut p = Partial::new();
    smt_partial(&rep.rows, &mut p);
    let app = rep.applicability;
    let req = match app.requirement {
        Requirement::Meromorphic => "meromorphic",
        Requirement::HyperOrderBelowOne => "hyper-order < 1",
        Requirement::ZeroOrder => "order 0",
    };
    p.verdict = Some(format!(
        "growth hypothesis ({req}): {}",
        match app.satisfied {
            Some(true) => "satisfied",
            Some(false) => "violated",
            None => "undeclared",
        }
    ));
    p.details = Some(json!({ "target_residuals": rep.target_residuals }));
    p.tables.push(("smt_linear.csv".into(), t));
    p.tables.push(("smt_linear_remainder.csv".into(), remainder_table(&rep.rows)));
    Ok(p)
}

fn deficiency_task(c: &Ctx) -> TaskResult {
    let b = c.b;
    let window = DeficiencyWindow::Fraction(c.s.window.unwrap_or(0.25));
    let est = deficiencies(&b.f, operator(c), &b.targets, &b.schedule, &c.quad, &b.engine, &c.apply, window)?;
    let sum = deficiency_sum(&est);
    let mut t = Table::new([
        "target",
        "delta",
        "delta_raw",
        "valiron",
        "valiron_raw",
        "theta",
        "window_lo",
        "window_hi",
        "certified",
    ]);
    let mut p = Partial::new();
    for e in &est {
        t.push(vec![
            e.target.label().into(),
            e.delta.into(),
            e.delta_raw.into(),
            e.valiron.into(),
            e.valiron_raw.into(),
            e.theta.into(),
            e.window.0.into(),
            e.window.1.into(),
            e.certified.into(),
        ]);
        p.count(e.certified);
    }
    let mut cols = vec!["r".to_string()];
    cols.extend(est.iter().map(|e| format!("N_over_T_{}", e.target.label())));
    cols.extend(est.iter().map(|e| format!("theta_ratio_{}", e.target.label())));
    let mut ratios = Table::new(cols);
    for (i, &r) in b.schedule.radii().iter().enumerate() {
        let mut row: Vec<Cell> = vec![r.into()];
        row.extend(est.iter().map(|e| Cell::from(e.counting_ratio[i])));
        row.extend(est.iter().map(|e| Cell::from(e.theta_ratio[i])));
        ratios.push(row);
    }
    if let Some(e) = est.first() {
        p.window = Some([e.window.0, e.window.1]);
    }
    let inf_bound = est.iter().find(|e| matches!(e.target, DeficiencyTarget::Infinity)).map(|e| e.theta);
    p.assertions.push(Assertion::new(
        "deficiency relation",
        sum.within_bound,
        format!("total {:.6} against 2 + {}", sum.total, sum.tolerance),
    ));
    p.verdict = Some(format!(
        "finite sum {:.6}, infinity {}, total {:.6}",
        sum.finite,
        sum.infinity.map_or("n/a".into(), |x| format!("{x:.6}")),
        sum.total
    ));
    p.details = Some(json!({
        "finite": sum.finite,
        "infinity": sum.infinity,
        "total": sum.total,
        "theta_infinity": inf_bound,
    }));
    p.tables.push(("deficiency.csv".into(), t));
    p.tables.push(("deficiency_ratios.csv".into(), ratios));
    Ok(p)
}

fn picard_task(c: &Ctx) -> TaskResult {
    let b = c.b;
    let rep = picard_check(&b.f, operator(c), &b.candidates, &b.schedule, &b.engine, &c.apply)?;
    let mut t = Table::new(["candidate", "kernel_residual", "a_points", "covered", "status"]);
    let mut p = Partial::new();
    for cand in &rep.candidates {
        t.push(vec![
            cand.index.into(),
            cand.kernel_residual.into(),
            cand.a_points.into(),
            cand.covered.into(),
            cand.status.to_string().into(),
        ]);
    }
    p.count(rep.verdict != PicardVerdict::Inconclusive);
    p.assertions.push(Assertion::new(
        "no finite-radius contradiction",
        !matches!(rep.verdict, PicardVerdict::ThresholdMet { .. }),
        rep.verdict.to_string(),
    ));
    p.verdict = Some(rep.verdict.to_string());
    p.details = Some(json!({
        "radius": rep.radius,
        "threshold": rep.threshold,
        "exceptional_count": rep.exceptional_count,
        "entire": rep.entire,
        "f_residual": rep.f_residual,
    }));
    p.tables.push(("picard.csv".into(), t));
    Ok(p)
}

fn valiron_task(c: &Ctx) -> TaskResult {
    let spec = c.s.synthetic.expect("validated: synthetic model present");
    let model = SyntheticDivisorModel::from_valiron(spec.p, spec.delta, c.b.schedule.radii())?;
    let v = synthetic_valiron(&model)?;
    let mut t = Table::new([
        "p",
        "bound",
        "bound_num",
        "bound_den",
        "delta",
        "theta_lower",
        "multiplicity_holds",
        "consistent",
    ]);
    t.push(vec![
        v.p.into(),
        v.bound.into(),
        v.bound_fraction.0.into(),
        v.bound_fraction.1.into(),
        v.delta.into(),
        v.theta_lower.into(),
        v.multiplicity_holds.into(),
        v.consistent.into(),
    ]);
    let mut p = Partial::new();
    p.count(true);
    p.verdict = Some(if v.consistent {
        format!("consistent: Delta {} >= bound {}/{}", v.delta, v.bound_fraction.0, v.bound_fraction.1)
    } else {
        format!("inconsistent: theta >= {} exceeds 2", v.theta_lower)
    });
    p.tables.push(("synthetic_valiron.csv".into(), t));
    Ok(p)
}
