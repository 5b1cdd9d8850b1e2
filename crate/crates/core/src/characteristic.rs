//! Proximity, counting and characteristic functions, and Jensen's formula.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::divisor::{resolve_radius, DivisorTable, EngineOptions, TABLE_MARGIN};
use crate::function::{combine, CombineOp, FunctionHandle};
use crate::laurent::ilc;
use crate::quadrature::{circle_average, circle_average_many, log_plus, CircleAverage, QuadratureConfig};
use crate::region::PointKind;
use crate::{Error, Result};

/// Increasing list of positive radii.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSchedule {
    radii: Vec<f64>,
}

impl RadiusSchedule {
    /// `r0, r0·ratio, …, r0·ratio^(count-1)`.
    pub fn geometric(r0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidSchedule(format!("r0 must be positive, got {r0}")));
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::InvalidSchedule(format!("ratio must exceed 1, got {ratio}")));
        }
        if count < 2 {
            return Err(Error::InvalidSchedule(format!("count must be at least 2, got {count}")));
        }
        let radii = (0..count).map(|i| r0 * ratio.powi(i as i32)).collect();
        Self::explicit(radii)
    }

    /// Geometric schedule from `r0` to `r1` inclusive.
    pub fn spanning(r0: f64, r1: f64, count: usize) -> Result<Self> {
        if !(r1 > r0) || count < 2 {
            return Err(Error::InvalidSchedule(format!("need r0 < r1 and count >= 2, got {r0}, {r1}, {count}")));
        }
        let ratio = (r1 / r0).powf(1.0 / (count - 1) as f64);
        let mut s = Self::geometric(r0, ratio, count)?;
        *s.radii.last_mut().expect("count >= 2") = r1;
        Ok(s)
    }

    pub fn explicit(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidSchedule("schedule is empty".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidSchedule("radii must be positive and finite".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSchedule("radii must be strictly increasing".into()));
        }
        Ok(RadiusSchedule { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }
}

/// `m(r, f)` at the given radius. No radius perturbation happens here; the
/// table-building entry points resolve radii first.
pub fn proximity(f: &FunctionHandle, r: f64, quad: &QuadratureConfig) -> Result<CircleAverage> {
    quad.validate()?;
    Ok(circle_average(r, quad, |z| log_plus(f.eval(z).norm())))
}

/// `N(r, f)` for poles or `N(r, 1/f)` for zeros, in `|z| <= r`.
pub fn counting(f: &FunctionHandle, r: f64, kind: PointKind, opts: &EngineOptions) -> Result<f64> {
    let table = DivisorTable::build(f, r * TABLE_MARGIN, opts)?;
    Ok(table.counting(r, kind))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSample {
    /// Nominal radius from the schedule.
    pub r: f64,
    /// Radius actually used after boundary nudges.
    pub r_eff: f64,
    pub nudges: u32,
    pub m: f64,
    pub n: f64,
    pub t: f64,
    /// `N(r, 1/(f - a_j))` per target.
    pub per_target_n: Vec<f64>,
    /// Quadrature error estimate of `m`.
    pub error: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicTable {
    pub samples: Vec<CharacteristicSample>,
    /// `T` nondecreasing along the schedule within quadrature error.
    pub monotone: bool,
    pub certified: bool,
}

/// Divisor tables for `f` and each `f - a_j`, built once at the largest
/// radius of a schedule.
pub(crate) struct TargetTables {
    pub f: DivisorTable,
    pub diffs: Vec<FunctionHandle>,
    pub diff_tables: Vec<DivisorTable>,
}

impl TargetTables {
    pub fn build(f: &FunctionHandle, targets: &[FunctionHandle], r_max: f64, opts: &EngineOptions) -> Result<Self> {
        let radius = r_max * TABLE_MARGIN;
        let f_table = DivisorTable::build(f, radius, opts)?;
        let mut diffs = Vec::with_capacity(targets.len());
        let mut diff_tables = Vec::with_capacity(targets.len());
        for (j, a) in targets.iter().enumerate() {
            let d = combine(CombineOp::Sub, f, a)?;
            if d.is_identically_zero() {
                return Err(Error::InvalidParameter(format!("f coincides with target {}", j + 1)));
            }
            diff_tables.push(DivisorTable::build(&d, radius, opts)?);
            diffs.push(d);
        }
        Ok(TargetTables { f: f_table, diffs, diff_tables })
    }

    pub fn all(&self) -> Vec<&DivisorTable> {
        let mut v = alloc::vec![&self.f];
        v.extend(self.diff_tables.iter());
        v
    }

    pub fn certified(&self) -> bool {
        self.all().iter().all(|t| t.divisor.certified)
    }
}

/// Characteristic table of `f` over a schedule, with per-target counting
/// functions. Each radius is nudged off the divisors of `f` and `f - a_j`.
pub fn characteristic(
    f: &FunctionHandle,
    targets: &[FunctionHandle],
    schedule: &RadiusSchedule,
    quad: &QuadratureConfig,
    opts: &EngineOptions,
) -> Result<CharacteristicTable> {
    quad.validate()?;
    let tables = TargetTables::build(f, targets, schedule.max(), opts)?;
    let all = tables.all();
    let base_certified = tables.certified();
    let mut samples = Vec::with_capacity(schedule.len());
    for &r in schedule.radii() {
        let (r_eff, nudges) = resolve_radius(r, &all, opts.guard)?;
        let m = proximity(f, r_eff, quad)?;
        let n = tables.f.counting(r_eff, PointKind::Pole);
        let per_target_n = tables.diff_tables.iter().map(|t| t.counting(r_eff, PointKind::Zero)).collect();
        samples.push(CharacteristicSample {
            r,
            r_eff,
            nudges,
            m: m.value,
            n,
            t: m.value + n,
            per_target_n,
            error: m.error,
            certified: m.certified && base_certified,
        });
    }
    let monotone = samples.windows(2).all(|w| w[1].t >= w[0].t - 10.0 * (w[0].error + w[1].error) - 1e-12);
    let certified = samples.iter().all(|s| s.certified);
    Ok(CharacteristicTable { samples, monotone, certified })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenReport {
    pub r_eff: f64,
    /// `(1/2π) ∫ log|h|`.
    pub mean_log: f64,
    /// `N(r, 1/h) - N(r, h) + log|ilc(h, 0)|`.
    pub divisor_side: f64,
    pub residual: f64,
    pub error: f64,
    pub certified: bool,
}

/// Both sides of Jensen's formula at radius `r` (nudged if needed).
pub fn jensen_check(h: &FunctionHandle, r: f64, quad: &QuadratureConfig, opts: &EngineOptions) -> Result<JensenReport> {
    quad.validate()?;
    let table = DivisorTable::build(h, r * TABLE_MARGIN, opts)?;
    let (r_eff, _) = resolve_radius(r, &[&table], opts.guard)?;
    let c = ilc(h, crate::C64::new(0.0, 0.0))?;
    let avg = circle_average_many(r_eff, 2, quad, |z, _, out| {
        let a = h.eval(z).norm();
        out[0] = log_plus(a);
        out[1] = log_plus(1.0 / a);
    });
    let mean_log = avg[0].value - avg[1].value;
    let divisor_side =
        table.counting(r_eff, PointKind::Zero) - table.counting(r_eff, PointKind::Pole) + c.coefficient.norm().ln();
    Ok(JensenReport {
        r_eff,
        mean_log,
        divisor_side,
        residual: (mean_log - divisor_side).abs(),
        error: avg[0].error + avg[1].error,
        certified: avg[0].certified && avg[1].certified && table.divisor.certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{make_exp_poly, make_jacobi_sn, make_rational};
    use crate::C64;
    use core::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn proximity_examples() {
        let q = QuadratureConfig::default();
        let z = make_rational(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert!((proximity(&z, E, &q).unwrap().value - 1.0).abs() < 1e-13);
        let inv = make_rational(&[c(1.0, 0.0)], &[c(-2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(proximity(&inv, 4.0, &q).unwrap().value, 0.0);
        let ez = make_exp_poly(&[(c(1.0, 0.0), c(1.0, 0.0))]).unwrap();
        assert!((proximity(&ez, 10.0, &q).unwrap().value - 10.0 / PI).abs() < 1e-9);
    }

    #[test]
    fn counting_examples() {
        let o = EngineOptions::default();
        let inv = make_rational(&[c(1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((counting(&inv, E, PointKind::Pole, &o).unwrap() - 1.0).abs() < 1e-15);
        let p = make_rational(&[c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let expect = 2.0 - 2f64.ln();
        assert!((counting(&p, E, PointKind::Zero, &o).unwrap() - expect).abs() < 1e-12);
        assert_eq!(counting(&p, E, PointKind::Pole, &o).unwrap(), 0.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(RadiusSchedule::geometric(1.0, 0.9, 5).is_err());
        assert!(RadiusSchedule::geometric(0.0, 2.0, 5).is_err());
        assert!(RadiusSchedule::geometric(1.0, 2.0, 1).is_err());
        assert!(RadiusSchedule::explicit(alloc::vec![1.0, 1.0]).is_err());
        let s = RadiusSchedule::spanning(1.1, 50.0, 9).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s.max(), 50.0);
    }

    #[test]
    fn identity_characteristic_is_log_r() {
        let z = make_rational(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let s = RadiusSchedule::geometric(1.5, 2.0, 5).unwrap();
        let t = characteristic(&z, &[], &s, &QuadratureConfig::default(), &EngineOptions::default()).unwrap();
        assert!(t.certified && t.monotone);
        for row in &t.samples {
            assert!((row.t - row.r_eff.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn jensen_examples() {
        let q = QuadratureConfig::default();
        let o = EngineOptions::default();
        let h = make_rational(&[c(-1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let j = jensen_check(&h, 2.0, &q, &o).unwrap();
        assert!(j.residual < 1e-8 && (j.mean_log - 2f64.ln()).abs() < 1e-8);
        let z2 = make_rational(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let j = jensen_check(&z2, 3.0, &q, &o).unwrap();
        assert!((j.divisor_side - 2.0 * 3f64.ln()).abs() < 1e-12 && j.residual < 1e-8);
        let sn = make_jacobi_sn(0.5).unwrap();
        let j = jensen_check(&sn, 7.0, &q, &o).unwrap();
        assert!(j.residual < 1e-5, "{j:?}");
    }
}
