//! Initial Laurent coefficients.

use alloc::format;


use crate::divisor::ORIGIN_SNAP;
use crate::divisor::winding::{circle_winding, BOUNDARY_THRESHOLD};
use crate::function::FunctionHandle;
use crate::region::Region;
use crate::{Error, Result, C64};

/// `f(z) = (z - a)^order (coefficient + o(1))` near `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ilc {
    pub coefficient: C64,
    pub order: i64,
    /// Agreement of the 64- and 128-node coefficient estimates.
    pub error: f64,
}

/// Initial Laurent coefficient of `f` at `a`.
///
/// The order comes from the closed-form divisor when available, otherwise
/// from the winding on two nested small circles. The coefficient is the
/// mean of `f(z) (z - a)^{-m}` over a circle around `a` that excludes every
/// other zero and pole, which is exact up to the Laurent tail aliasing.
pub fn ilc(f: &FunctionHandle, a: C64) -> Result<Ilc> {
    if f.is_identically_zero() {
        return Err(Error::IdenticallyZero);
    }
    if let Some(c) = f.as_constant() {
        return Ok(Ilc { coefficient: c, order: 0, error: 0.0 });
    }
    let probe = Region::disc(a, 1.0)?;
    let (mut rho, oracle_order) = match f.divisor(probe) {
        Some(d) => {
            let mut order = 0;
            let mut nearest: f64 = 1.0;
            for p in &d.points {
                let dist = (p.location - a).norm();
                if dist <= ORIGIN_SNAP * (1.0 + a.norm()) {
                    order += p.signed();
                } else {
                    nearest = nearest.min(dist);
                }
            }
            (0.5 * nearest.min(0.1), Some(order))
        }
        None => (0.05, None),
    };
    if let Some(cands) = f.pole_candidates(probe) {
        for p in cands {
            let dist = (p - a).norm();
            if dist > ORIGIN_SNAP * (1.0 + a.norm()) {
                rho = rho.min(0.5 * dist);
            }
        }
    }
    let order = match oracle_order {
        Some(m) => m,
        None => {
            let mut found = None;
            for _ in 0..8 {
                let outer = circle_winding(f, a, rho, BOUNDARY_THRESHOLD);
                let inner = circle_winding(f, a, 0.5 * rho, BOUNDARY_THRESHOLD);
                if let (Ok((w1, _)), Ok((w2, _))) = (outer, inner) {
                    if w1 == w2 {
                        found = Some(w1);
                        break;
                    }
                }
                rho *= 0.25;
            }
            found.ok_or_else(|| Error::Uncertified(format!("order of f at {a} could not be certified")))?
        }
    };
    let c64 = mean_coefficient(f, a, rho, order, 64);
    let c128 = mean_coefficient(f, a, rho, order, 128);
    if !(c128.norm() > 0.0) || !c128.re.is_finite() || !c128.im.is_finite() {
        return Err(Error::Uncertified(format!("laurent coefficient at {a} is not finite and nonzero")));
    }
    Ok(Ilc { coefficient: c128, order, error: (c128 - c64).norm() })
}

fn mean_coefficient(f: &FunctionHandle, a: C64, rho: f64, m: i64, n: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let w = C64::from_polar(rho, core::f64::consts::TAU * (j as f64 + 0.5) / n as f64);
        acc += f.eval(a + w) * w.powi(-(m as i32));
    }
    acc / n as f64
}
