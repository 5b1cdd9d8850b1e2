//! Finite-radius deficiency estimates, exceptionality checks and the
//! synthetic Valiron-deficiency calculus.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::characteristic::{proximity, RadiusSchedule, TargetTables};
use crate::divisor::{joint_from_table, resolve_radius, DivisorTable, EngineOptions, TABLE_MARGIN};
use crate::function::FunctionHandle;
use crate::operators::{apply, kernel_check, ApplyOptions, OperatorExpr, SampleSpec};
use crate::quadrature::QuadratureConfig;
use crate::region::PointKind;
use crate::{Error, Result};

/// Tolerance of the deficiency-relation verdict.
pub const SUM_TOLERANCE: f64 = 0.2;

/// Trailing part of a schedule standing in for `r → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeficiencyWindow {
    /// Fraction of the schedule, rounded up.
    Fraction(f64),
    Count(usize),
}

impl Default for DeficiencyWindow {
    fn default() -> Self {
        DeficiencyWindow::Fraction(0.25)
    }
}

impl DeficiencyWindow {
    /// Number of trailing radii used.
    pub fn resolve(&self, schedule_len: usize) -> Result<usize> {
        let n = match *self {
            DeficiencyWindow::Fraction(x) => {
                if !(x > 0.0 && x <= 1.0) {
                    return Err(Error::InvalidParameter(format!("window fraction must lie in (0, 1], got {x}")));
                }
                ((x * schedule_len as f64).ceil() as usize).max(1)
            }
            DeficiencyWindow::Count(n) => n,
        };
        if n == 0 || n > schedule_len {
            return Err(Error::InvalidWindow { window: n, schedule: schedule_len });
        }
        Ok(n)
    }
}

#[derive(Debug, Clone)]
pub enum DeficiencyTarget {
    /// Index into the target list (from 1) and the handle.
    Finite(usize, FunctionHandle),
    Infinity,
}

impl DeficiencyTarget {
    pub fn label(&self) -> String {
        match self {
            DeficiencyTarget::Finite(i, _) => format!("a{i}"),
            DeficiencyTarget::Infinity => "inf".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeficiencyEstimate {
    pub target: DeficiencyTarget,
    /// `δ` clamped to `[0, 1]`.
    pub delta: f64,
    pub delta_raw: f64,
    /// Valiron `Δ` clamped to `[0, 1]`.
    pub valiron: f64,
    pub valiron_raw: f64,
    /// `θ_{L,f}`, unclamped.
    pub theta: f64,
    /// `(r_first, r_last)` of the trailing window.
    pub window: (f64, f64),
    /// Counting ratio `N/T` per radius.
    pub counting_ratio: Vec<f64>,
    /// Ratio inside the `θ` liminf per radius.
    pub theta_ratio: Vec<f64>,
    pub certified: bool,
}

/// Deficiency data for every finite target (all in `ker L`) and for `∞`.
pub fn deficiencies(
    f: &FunctionHandle,
    l: &OperatorExpr,
    targets: &[FunctionHandle],
    schedule: &RadiusSchedule,
    quad: &QuadratureConfig,
    opts: &EngineOptions,
    apply_opts: &ApplyOptions,
    window: DeficiencyWindow,
) -> Result<Vec<DeficiencyEstimate>> {
    let w = window.resolve(schedule.len())?;
    quad.validate()?;
    let spec = SampleSpec::default();
    for (i, a) in targets.iter().enumerate() {
        let k = kernel_check(l, a, &spec, apply_opts)?;
        if !k.passed {
            return Err(Error::InvalidTarget { index: i + 1, residual: k.max });
        }
    }
    let lf = apply(l, f, apply_opts)?;
    let tables = TargetTables::build(f, targets, schedule.max(), opts)?;
    let lf_table = DivisorTable::build(&lf, schedule.max() * TABLE_MARGIN, opts)?;
    let mut all = tables.all();
    all.push(&lf_table);
    let certified = tables.certified() && lf_table.divisor.certified;

    let q = targets.len();
    let mut t_series = Vec::with_capacity(schedule.len());
    let mut n_ratio: Vec<Vec<f64>> = (0..=q).map(|_| Vec::with_capacity(schedule.len())).collect();
    let mut th_ratio: Vec<Vec<f64>> = (0..=q).map(|_| Vec::with_capacity(schedule.len())).collect();
    let mut quad_ok = true;
    for &r in schedule.radii() {
        let (r_eff, _) = resolve_radius(r, &all, opts.guard)?;
        let m = proximity(f, r_eff, quad)?;
        quad_ok &= m.certified;
        let n_inf = tables.f.counting(r_eff, PointKind::Pole);
        let t = m.value + n_inf;
        t_series.push(t);
        for j in 0..q {
            n_ratio[j].push(tables.diff_tables[j].counting(r_eff, PointKind::Zero) / t);
            let joint = joint_from_table(f, &targets[j], &lf, &lf_table, r_eff, opts.match_tol);
            let pts: Vec<(f64, u32)> = joint.zeros().map(|p| (p.location.norm(), p.multiplicity)).collect();
            th_ratio[j].push(crate::divisor::counting_sum(&pts, r_eff) / t);
        }
        n_ratio[q].push(n_inf / t);
        th_ratio[q].push((2.0 * n_inf - lf_table.counting(r_eff, PointKind::Pole)) / t);
    }
    let radii = schedule.radii();
    let start = radii.len() - w;
    let span = (radii[start], radii[radii.len() - 1]);
    let tail = |v: &[f64]| -> (f64, f64) {
        v[start..].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let positive_t = t_series.iter().all(|t| *t > 0.0 && t.is_finite());
    let mut out = Vec::with_capacity(q + 1);
    for j in 0..=q {
        let (lo, hi) = tail(&n_ratio[j]);
        let (theta, _) = tail(&th_ratio[j]);
        let delta_raw = 1.0 - hi;
        let valiron_raw = 1.0 - lo;
        out.push(DeficiencyEstimate {
            target: if j < q { DeficiencyTarget::Finite(j + 1, targets[j].clone()) } else { DeficiencyTarget::Infinity },
            delta: delta_raw.clamp(0.0, 1.0),
            delta_raw,
            valiron: valiron_raw.clamp(0.0, 1.0),
            valiron_raw,
            theta,
            window: span,
            counting_ratio: n_ratio[j].clone(),
            theta_ratio: th_ratio[j].clone(),
            certified: certified && quad_ok && positive_t,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficiencySum {
    /// `Σ (δ + θ)` over finite targets.
    pub finite: f64,
    /// `δ(∞) + θ(∞)`, when present.
    pub infinity: Option<f64>,
    pub total: f64,
    pub tolerance: f64,
    /// `total <= 2 + tolerance`.
    pub within_bound: bool,
}

pub fn deficiency_sum(estimates: &[DeficiencyEstimate]) -> DeficiencySum {
    let mut finite = 0.0;
    let mut infinity = None;
    for e in estimates {
        let v = e.delta + e.theta;
        match e.target {
            DeficiencyTarget::Finite(..) => finite += v,
            DeficiencyTarget::Infinity => infinity = Some(v),
        }
    }
    let total = finite + infinity.unwrap_or(0.0);
    DeficiencySum { finite, infinity, total, tolerance: SUM_TOLERANCE, within_bound: total <= 2.0 + SUM_TOLERANCE }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateStatus {
    Exceptional,
    NotExceptional,
    Inconclusive,
}

impl fmt::Display for CandidateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateStatus::Exceptional => "exceptional",
            CandidateStatus::NotExceptional => "not exceptional",
            CandidateStatus::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateReport {
    pub index: usize,
    pub kernel_residual: f64,
    pub status: CandidateStatus,
    /// a-points of `f` (with multiplicity) inside the tested disc.
    pub a_points: u64,
    /// a-points covered by zeros of `L(f)` of at least the same multiplicity.
    pub covered: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardVerdict {
    /// `f` itself lies in the kernel.
    InKernel,
    /// Fewer exceptional candidates than the corollary needs.
    NoContradiction { count: usize, threshold: usize },
    /// Enough exceptional candidates at the tested radius although
    /// `L(f) ≠ 0`; the containment only holds on a finite disc.
    ThresholdMet { count: usize, threshold: usize },
    Inconclusive,
}

impl fmt::Display for PicardVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PicardVerdict::InKernel => f.write_str("L(f) = 0 (numerically)"),
            PicardVerdict::NoContradiction { threshold, .. } => {
                write!(f, "threshold {threshold} not met, no contradiction")
            }
            PicardVerdict::ThresholdMet { threshold, .. } => {
                write!(f, "threshold {threshold} met at finite radius, L(f) != 0")
            }
            PicardVerdict::Inconclusive => f.write_str("inconclusive: uncertified divisors"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// Containment is tested in `|z| < radius`.
    pub radius: f64,
    pub candidates: Vec<CandidateReport>,
    pub exceptional_count: usize,
    pub threshold: usize,
    pub entire: bool,
    /// Kernel residual of `f` itself.
    pub f_residual: f64,
    pub verdict: PicardVerdict,
}

/// Exceptionality of each candidate at the largest schedule radius, and the
/// comparison with the number of exceptional functions that forces
/// `L(f) = 0` (`n + 2` for meromorphic `f`, 2 for entire `f`).
pub fn picard_check(
    f: &FunctionHandle,
    l: &OperatorExpr,
    candidates: &[FunctionHandle],
    schedule: &RadiusSchedule,
    opts: &EngineOptions,
    apply_opts: &ApplyOptions,
) -> Result<PicardReport> {
    let spec = SampleSpec::default();
    let mut residuals = Vec::with_capacity(candidates.len());
    for (i, a) in candidates.iter().enumerate() {
        let k = kernel_check(l, a, &spec, apply_opts)?;
        if !k.passed {
            return Err(Error::InvalidTarget { index: i + 1, residual: k.max });
        }
        residuals.push(k.max);
    }
    let entire = f.is_entire();
    let threshold = if entire { 2 } else { l.highest_derivative_order() as usize + 2 };
    let own = kernel_check(l, f, &spec, apply_opts)?;
    let r_max = schedule.max();
    if own.passed {
        return Ok(PicardReport {
            radius: r_max,
            candidates: Vec::new(),
            exceptional_count: 0,
            threshold,
            entire,
            f_residual: own.max,
            verdict: PicardVerdict::InKernel,
        });
    }
    let lf = apply(l, f, apply_opts)?;
    let tables = TargetTables::build(f, candidates, r_max, opts)?;
    let lf_table = DivisorTable::build(&lf, r_max * TABLE_MARGIN, opts)?;
    let mut all = tables.all();
    all.push(&lf_table);
    let (radius, _) = resolve_radius(r_max, &all, opts.guard)?;
    let zeros_lf: Vec<_> = lf_table.restrict(radius).zeros().copied().collect();
    let certified = tables.certified() && lf_table.divisor.certified;
    let mut reports = Vec::with_capacity(candidates.len());
    for (i, t) in tables.diff_tables.iter().enumerate() {
        let apts: Vec<_> = t.restrict(radius).zeros().copied().collect();
        let mut covered = 0u64;
        let mut total = 0u64;
        for p in &apts {
            total += p.multiplicity as u64;
            let tol = 1e-6 * (1.0 + p.location.norm());
            if zeros_lf.iter().any(|z| (z.location - p.location).norm() < tol && z.multiplicity >= p.multiplicity) {
                covered += p.multiplicity as u64;
            }
        }
        let status = if !certified {
            CandidateStatus::Inconclusive
        } else if covered == total {
            CandidateStatus::Exceptional
        } else {
            CandidateStatus::NotExceptional
        };
        reports.push(CandidateReport { index: i + 1, kernel_residual: residuals[i], status, a_points: total, covered });
    }
    let count = reports.iter().filter(|c| c.status == CandidateStatus::Exceptional).count();
    let verdict = if !certified {
        PicardVerdict::Inconclusive
    } else if count >= threshold {
        PicardVerdict::ThresholdMet { count, threshold }
    } else {
        PicardVerdict::NoContradiction { count, threshold }
    };
    Ok(PicardReport {
        radius,
        candidates: reports,
        exceptional_count: count,
        threshold,
        entire,
        f_residual: own.max,
        verdict,
    })
}

/// Sampled divisor data for one target `a` of a hypothetical `f` whose
/// a-points are simple and sit on zeros of `L(f)` of multiplicity `>= p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDivisorModel {
    pub radii: Vec<f64>,
    /// `T(r, f)`.
    pub t: Vec<f64>,
    /// `N(r, 1/(f - a))`.
    pub counting: Vec<f64>,
    /// `N|_{f=a}(r, 1/L(f))`.
    pub joint: Vec<f64>,
    pub p: u32,
}

impl SyntheticDivisorModel {
    /// `T = r²`, `N = (1 - Δ) T`, joint count `p N`.
    pub fn from_valiron(p: u32, delta: f64, radii: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidModel(format!("Valiron deficiency {delta} outside [0, 1]")));
        }
        let t: Vec<f64> = radii.iter().map(|r| r * r).collect();
        let counting: Vec<f64> = t.iter().map(|t| (1.0 - delta) * t).collect();
        let joint = counting.iter().map(|n| p as f64 * n).collect();
        let m = SyntheticDivisorModel { radii: radii.to_vec(), t, counting, joint, p };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.radii.len();
        if self.p < 2 {
            return Err(Error::InvalidModel(format!("p must be at least 2, got {}", self.p)));
        }
        if n == 0 || self.t.len() != n || self.counting.len() != n || self.joint.len() != n {
            return Err(Error::InvalidModel("series lengths differ or are empty".into()));
        }
        if self.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModel("radii must be strictly increasing".into()));
        }
        if self.t.iter().any(|t| !(*t > 0.0 && t.is_finite())) || self.t.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidModel("T must be positive and nondecreasing".into()));
        }
        for i in 0..n {
            if !(self.counting[i] >= 0.0) || self.counting[i] > self.t[i] * (1.0 + 1e-9) {
                return Err(Error::InvalidModel(format!("counting function exceeds T at r = {}", self.radii[i])));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValironCheck {
    pub p: u32,
    /// `1 - 2/p`, evaluated as `(p - 2)/p`.
    pub bound: f64,
    /// `bound` as a reduced fraction.
    pub bound_fraction: (u32, u32),
    /// Liminf proxy of `Δ` from the model.
    pub delta: f64,
    /// `(1 - Δ) p`, the implied lower bound on `θ`.
    pub theta_lower: f64,
    /// `inf (joint / N) >= p` over the window.
    pub multiplicity_holds: bool,
    /// `theta_lower <= 2`, equivalently `Δ >= bound`.
    pub consistent: bool,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Runs the chain `T <= N/(1-Δ)`, `joint >= p N`, `θ >= (1-Δ)p` on the
/// trailing quarter of the model and compares with `θ <= 2`.
pub fn synthetic_valiron(model: &SyntheticDivisorModel) -> Result<ValironCheck> {
    model.validate()?;
    let p = model.p;
    let g = gcd(p - 2, p).max(1);
    let bound = (p - 2) as f64 / p as f64;
    let n = model.radii.len();
    let start = n - DeficiencyWindow::default().resolve(n)?;
    let mut liminf = f64::INFINITY;
    let mut mult = f64::INFINITY;
    for i in start..n {
        liminf = liminf.min(model.counting[i] / model.t[i]);
        if model.counting[i] > 0.0 {
            mult = mult.min(model.joint[i] / model.counting[i]);
        }
    }
    let delta = 1.0 - liminf;
    let theta_lower = (1.0 - delta) * p as f64;
    let tol = 1e-12;
    Ok(ValironCheck {
        p,
        bound,
        bound_fraction: ((p - 2) / g, p / g),
        delta,
        theta_lower,
        multiplicity_holds: mult >= p as f64 * (1.0 - tol),
        consistent: theta_lower <= 2.0 + tol,
    })
}
