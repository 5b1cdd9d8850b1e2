//! Both sides of the second main theorem with an arbitrary ramification
//! function `g`, the full remainder, and the linear-operator variant.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::characteristic::{RadiusSchedule, TargetTables};
use crate::divisor::{resolve_radius, DivisorTable, EngineOptions, TABLE_MARGIN};
use crate::function::FunctionHandle;
use crate::laurent::ilc;
use crate::operators::{apply, kernel_check, logderiv_with, Applicability, ApplyOptions, OperatorExpr, SampleSpec};
use crate::quadrature::{circle_average_many, log_plus, QuadratureConfig};
use crate::region::PointKind;
use crate::{Error, Result, C64};

/// Two targets closer than this everywhere on a circle are treated as equal.
pub const DEGENERATE_TARGET_TOL: f64 = 1e-12;
/// Multiplier turning achieved quadrature error into an assertion margin.
pub const MARGIN_FACTOR: f64 = 10.0;
/// Relative error above which an initial Laurent coefficient is rejected.
const ILC_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderBreakdown {
    /// `Σ T(r, a_m)`.
    pub sum_t_targets: f64,
    /// Mean of `log Σ |g / (f - a_m)|`.
    pub log_sum_ratio: f64,
    /// `(q - 1)` times the mean of `log⁺(2 / l)`.
    pub l_term: f64,
    /// `(q - 1) log 2`.
    pub const_term: f64,
    /// `Σ log|ilc(f - a_m, 0)| - log|ilc(g, 0)|`.
    pub ilc_terms: f64,
    pub total: f64,
}

impl RemainderBreakdown {
    fn new(sum_t_targets: f64, log_sum_ratio: f64, l_term: f64, const_term: f64, ilc_terms: f64) -> Self {
        let total = sum_t_targets + log_sum_ratio + l_term + const_term + ilc_terms;
        RemainderBreakdown { sum_t_targets, log_sum_ratio, l_term, const_term, ilc_terms, total }
    }
}

/// One radius of the second main theorem.
#[derive(Debug, Clone, PartialEq)]
pub struct SmtReport {
    pub r: f64,
    pub r_eff: f64,
    pub nudges: u32,
    pub m: f64,
    /// `N(r, f)`.
    pub n: f64,
    pub t: f64,
    /// `N(r, 1/(f - a_j))`.
    pub per_target_n: Vec<f64>,
    /// `N(r, g)`.
    pub n_g_poles: f64,
    /// `N(r, 1/g)`.
    pub n_g_zeros: f64,
    /// `N_g(r, f) = 2N(r, f) - N(r, g) + N(r, 1/g)`.
    pub ramification: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub remainder: RemainderBreakdown,
    pub slack: f64,
    /// `10 ×` the quadrature error carried into `slack`.
    pub margin: f64,
    pub certified: bool,
}

impl SmtReport {
    /// The inequality up to the numerical margin; uncertified rows pass.
    pub fn holds(&self) -> bool {
        !self.certified || self.slack >= -self.margin
    }
}

/// Precomputed divisor tables and Laurent data for a fixed `(f, g, targets)`.
/// Rows for different radii are independent.
pub struct Thm21Setup {
    f: FunctionHandle,
    g: FunctionHandle,
    targets: Vec<FunctionHandle>,
    tables: TargetTables,
    g_table: DivisorTable,
    /// Pole tables of the non-constant targets.
    target_tables: Vec<Option<DivisorTable>>,
    ilc_terms: f64,
    ilc_ok: bool,
    guard: f64,
    quad: QuadratureConfig,
}

impl Thm21Setup {
    /// Tables cover radii up to `r_max` including nudges.
    pub fn new(
        f: &FunctionHandle,
        g: &FunctionHandle,
        targets: &[FunctionHandle],
        r_max: f64,
        quad: &QuadratureConfig,
        opts: &EngineOptions,
    ) -> Result<Self> {
        quad.validate()?;
        if g.is_identically_zero() {
            return Err(Error::IdenticallyZero);
        }
        if targets.is_empty() {
            return Err(Error::InvalidParameter("at least one target is required".into()));
        }
        check_distinct_constants(targets)?;
        let tables = TargetTables::build(f, targets, r_max, opts)?;
        let g_table = DivisorTable::build(g, r_max * TABLE_MARGIN, opts)?;
        let mut target_tables = Vec::with_capacity(targets.len());
        for a in targets {
            target_tables.push(match a.as_constant() {
                Some(_) => None,
                None => Some(DivisorTable::build(a, r_max * TABLE_MARGIN, opts)?),
            });
        }
        let zero = C64::new(0.0, 0.0);
        let mut ilc_terms = 0.0;
        let mut ilc_ok = true;
        for d in &tables.diffs {
            let c = ilc(d, zero)?;
            ilc_ok &= c.error <= ILC_REL_TOL * c.coefficient.norm();
            ilc_terms += c.coefficient.norm().ln();
        }
        let cg = ilc(g, zero)?;
        ilc_ok &= cg.error <= ILC_REL_TOL * cg.coefficient.norm();
        ilc_terms -= cg.coefficient.norm().ln();
        Ok(Thm21Setup {
            f: f.clone(),
            g: g.clone(),
            targets: targets.to_vec(),
            tables,
            g_table,
            target_tables,
            ilc_terms,
            ilc_ok,
            guard: opts.guard,
            quad: *quad,
        })
    }

    fn all_tables(&self) -> Vec<&DivisorTable> {
        let mut v = self.tables.all();
        v.push(&self.g_table);
        v.extend(self.target_tables.iter().flatten());
        v
    }

    fn tables_certified(&self) -> bool {
        self.all_tables().iter().all(|t| t.divisor.certified)
    }

    /// Row at `r`, nudged off every divisor point.
    pub fn row(&self, r: f64) -> Result<SmtReport> {
        let (r_eff, nudges) = resolve_radius(r, &self.all_tables(), self.guard)?;
        let mut row = self.evaluate(r_eff)?;
        row.r = r;
        row.nudges = nudges;
        Ok(row)
    }

    /// Row at exactly `r_eff`, which must already be guarded.
    pub fn evaluate(&self, r_eff: f64) -> Result<SmtReport> {
        let q = self.targets.len();
        let qm1 = (q - 1) as f64;
        let varying: Vec<usize> = (0..q).filter(|&j| self.target_tables[j].is_some()).collect();
        let mut pair_max = vec![0.0f64; q * q];
        let mut a_vals = vec![C64::new(0.0, 0.0); q];
        let avg = circle_average_many(r_eff, 3 + varying.len(), &self.quad, |z, _, out| {
            let fz = self.f.eval(z);
            let gz = self.g.eval(z).norm();
            for (j, a) in self.targets.iter().enumerate() {
                a_vals[j] = a.eval(z);
            }
            out[0] = log_plus(fz.norm());
            let mut s = 0.0;
            for a in &a_vals {
                s += gz / (fz - a).norm();
            }
            out[1] = s.ln();
            if q > 1 {
                let mut l = f64::INFINITY;
                for i in 0..q {
                    for j in i + 1..q {
                        let d = (a_vals[i] - a_vals[j]).norm();
                        l = l.min(d);
                        let slot = &mut pair_max[i * q + j];
                        *slot = slot.max(d);
                    }
                }
                out[2] = log_plus(2.0 / l);
            }
            for (k, &j) in varying.iter().enumerate() {
                out[3 + k] = log_plus(a_vals[j].norm());
            }
        });
        for i in 0..q {
            for j in i + 1..q {
                if pair_max[i * q + j] < DEGENERATE_TARGET_TOL {
                    return Err(Error::DegenerateTargets(i + 1, j + 1));
                }
            }
        }
        let mut sum_t_targets = 0.0;
        let mut k = 0;
        for (j, a) in self.targets.iter().enumerate() {
            sum_t_targets += match (&self.target_tables[j], a.as_constant()) {
                (None, Some(c)) => log_plus(c.norm()),
                (Some(t), _) => {
                    k += 1;
                    avg[2 + k].value + t.counting(r_eff, PointKind::Pole)
                }
                (None, None) => unreachable!("non-constant targets carry a table"),
            };
        }
        let rem = RemainderBreakdown::new(
            sum_t_targets,
            avg[1].value,
            qm1 * avg[2].value,
            qm1 * LN_2,
            self.ilc_terms,
        );
        let m = avg[0].value;
        let n = self.tables.f.counting(r_eff, PointKind::Pole);
        let t = m + n;
        let per_target_n: Vec<f64> =
            self.tables.diff_tables.iter().map(|d| d.counting(r_eff, PointKind::Zero)).collect();
        let n_g_poles = self.g_table.counting(r_eff, PointKind::Pole);
        let n_g_zeros = self.g_table.counting(r_eff, PointKind::Zero);
        let ramification = 2.0 * n - n_g_poles + n_g_zeros;
        let lhs = qm1 * t + ramification;
        let rhs = n + per_target_n.iter().sum::<f64>() + rem.total;
        let quad_error = qm1 * avg[0].error
            + avg[1].error
            + if q > 1 { qm1 * avg[2].error } else { 0.0 }
            + avg[3..].iter().map(|a| a.error).sum::<f64>();
        let quad_ok = avg[0].certified && avg[1].certified && (q == 1 || avg[2].certified) && avg[3..].iter().all(|a| a.certified);
        let finite = lhs.is_finite() && rhs.is_finite();
        Ok(SmtReport {
            r: r_eff,
            r_eff,
            nudges: 0,
            m,
            n,
            t,
            per_target_n,
            n_g_poles,
            n_g_zeros,
            ramification,
            lhs,
            rhs,
            remainder: rem,
            slack: rhs - lhs,
            margin: MARGIN_FACTOR * quad_error,
            certified: quad_ok && finite && self.ilc_ok && self.tables_certified(),
        })
    }
}

fn check_distinct_constants(targets: &[FunctionHandle]) -> Result<()> {
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            if let (Some(a), Some(b)) = (targets[i].as_constant(), targets[j].as_constant()) {
                if (a - b).norm() < DEGENERATE_TARGET_TOL {
                    return Err(Error::DegenerateTargets(i + 1, j + 1));
                }
            }
        }
    }
    Ok(())
}

/// `ℛ(r, f, g)` at a circle that already avoids the divisors of `f`, `g`,
/// the targets and every `f - a_m`.
pub fn remainder(
    f: &FunctionHandle,
    g: &FunctionHandle,
    targets: &[FunctionHandle],
    r: f64,
    quad: &QuadratureConfig,
    opts: &EngineOptions,
) -> Result<RemainderBreakdown> {
    let setup = Thm21Setup::new(f, g, targets, r, quad, opts)?;
    if !setup.all_tables().iter().all(|t| t.clear_of(r, opts.guard)) {
        return Err(Error::BoundaryDegeneracy { radius: r });
    }
    Ok(setup.evaluate(r)?.remainder)
}

/// One report per schedule radius.
pub fn verify_thm21(
    f: &FunctionHandle,
    g: &FunctionHandle,
    targets: &[FunctionHandle],
    schedule: &RadiusSchedule,
    quad: &QuadratureConfig,
    opts: &EngineOptions,
) -> Result<Vec<SmtReport>> {
    let setup = Thm21Setup::new(f, g, targets, schedule.max(), quad, opts)?;
    schedule.radii().iter().map(|&r| setup.row(r)).collect()
}

/// The operator form with `g = L(f)` and smallness diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSmtReport {
    pub rows: Vec<SmtReport>,
    /// `ℛ / T(r, f)` per radius.
    pub remainder_ratio: Vec<f64>,
    /// `m(r, L(f)/f)` per radius.
    pub logderiv: Vec<f64>,
    /// `m(r, L(f)/f) / T(r, f)` per radius.
    pub logderiv_ratio: Vec<f64>,
    pub target_residuals: Vec<f64>,
    pub applicability: Applicability,
}

pub fn verify_linear_smt(
    f: &FunctionHandle,
    l: &OperatorExpr,
    targets: &[FunctionHandle],
    schedule: &RadiusSchedule,
    quad: &QuadratureConfig,
    opts: &EngineOptions,
    apply_opts: &ApplyOptions,
) -> Result<LinearSmtReport> {
    let spec = SampleSpec::default();
    let mut target_residuals = Vec::with_capacity(targets.len());
    for (i, a) in targets.iter().enumerate() {
        let k = kernel_check(l, a, &spec, apply_opts)?;
        if !k.passed {
            return Err(Error::InvalidTarget { index: i + 1, residual: k.max });
        }
        target_residuals.push(k.max);
    }
    let own = kernel_check(l, f, &spec, apply_opts)?;
    if own.passed {
        return Err(Error::InKernel { residual: own.max });
    }
    let lf = apply(l, f, apply_opts)?;
    let setup = Thm21Setup::new(f, &lf, targets, schedule.max(), quad, opts)?;
    let mut rows = Vec::with_capacity(schedule.len());
    let mut remainder_ratio = Vec::with_capacity(schedule.len());
    let mut logderiv = Vec::with_capacity(schedule.len());
    let mut logderiv_ratio = Vec::with_capacity(schedule.len());
    for &r in schedule.radii() {
        let row = setup.row(r)?;
        let ld = logderiv_with(&lf, f, row.r_eff, quad).value;
        remainder_ratio.push(row.remainder.total / row.t);
        logderiv.push(ld);
        logderiv_ratio.push(ld / row.t);
        rows.push(row);
    }
    Ok(LinearSmtReport {
        rows,
        remainder_ratio,
        logderiv,
        logderiv_ratio,
        target_residuals,
        applicability: l.applicability(f),
    })
}

/// Pointwise inequalities from the proof, evaluated at sample points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseReport {
    pub samples: usize,
    /// Violations of `Σ_{m≠s} log|f-a_m| <= Σ_m log|f-a_m| - log|g| + log Σ_m |g/(f-a_m)|`.
    pub sum_violations: usize,
    /// Violations of the `(q-1) log⁺|f|` bound.
    pub proximity_violations: usize,
    /// Smallest right-minus-left gap of the first inequality.
    pub min_sum_gap: f64,
    pub min_proximity_gap: f64,
}

/// Both pointwise inequalities at each of `points`, where `s` minimizes
/// `|f - a_s|`. Points where any quantity is non-finite are skipped.
pub fn pointwise_check(f: &FunctionHandle, g: &FunctionHandle, targets: &[FunctionHandle], points: &[C64]) -> PointwiseReport {
    let q = targets.len();
    let mut rep = PointwiseReport {
        samples: 0,
        sum_violations: 0,
        proximity_violations: 0,
        min_sum_gap: f64::INFINITY,
        min_proximity_gap: f64::INFINITY,
    };
    for &z in points {
        let fz = f.eval(z);
        let gz = g.eval(z);
        let a: Vec<C64> = targets.iter().map(|t| t.eval(z)).collect();
        let d: Vec<f64> = a.iter().map(|aj| (fz - aj).norm()).collect();
        let Some(s) = (0..q).min_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(core::cmp::Ordering::Equal)) else {
            continue;
        };
        let all_log: f64 = d.iter().map(|x| x.ln()).sum();
        let others_log = all_log - d[s].ln();
        let ratio: f64 = d.iter().map(|x| gz.norm() / x).sum();
        let rhs = all_log - gz.norm().ln() + ratio.ln();
        let l = (0..q)
            .flat_map(|i| (i + 1..q).map(move |j| (i, j)))
            .map(|(i, j)| (a[i] - a[j]).norm())
            .fold(f64::INFINITY, f64::min);
        let qm1 = (q - 1) as f64;
        let others_plus: f64 = (0..q).filter(|&m| m != s).map(|m| log_plus(a[m].norm())).sum();
        let l_term = if q > 1 { qm1 * log_plus(2.0 / l) } else { 0.0 };
        let prox_lhs = qm1 * log_plus(fz.norm());
        let prox_rhs = others_log + others_plus + l_term + qm1 * LN_2;
        if !(others_log.is_finite() && rhs.is_finite() && prox_lhs.is_finite() && prox_rhs.is_finite()) {
            continue;
        }
        rep.samples += 1;
        let scale = 1e-12 * (1.0 + all_log.abs() + rhs.abs());
        let gap = rhs - others_log;
        rep.min_sum_gap = rep.min_sum_gap.min(gap);
        if gap < -scale {
            rep.sum_violations += 1;
        }
        let pgap = prox_rhs - prox_lhs;
        rep.min_proximity_gap = rep.min_proximity_gap.min(pgap);
        if pgap < -1e-12 * (1.0 + prox_lhs.abs() + prox_rhs.abs()) {
            rep.proximity_violations += 1;
        }
    }
    rep
}
