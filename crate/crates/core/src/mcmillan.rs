//! The McMillan map `f(z+1) + f(z-1) = (αf + β)/(1 - f²)` and the zero locus
//! of its centered second difference.

use alloc::vec::Vec;


use crate::function::FunctionHandle;
use crate::operators::{apply, ApplyOptions, OperatorExpr, SampleSpec};
use crate::poly;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMillan {
    pub alpha: C64,
    pub beta: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMillanCheck {
    pub samples: usize,
    /// `max |f(z+1) + f(z-1) - (αf+β)/(1-f²)|`.
    pub equation_residual: f64,
    /// `max |Δ²f - 2Π(f-γ_i)/(1-f²)|` with the centered `Δ²`.
    pub factored_residual: f64,
}

impl McMillan {
    pub fn new(alpha: C64, beta: C64) -> Self {
        McMillan { alpha, beta }
    }

    /// Roots of `2x³ + (α-2)x + β`.
    pub fn gammas(&self) -> Result<[C64; 3]> {
        let rs = poly::roots(&[self.beta, self.alpha - 2.0, C64::new(0.0, 0.0), C64::new(2.0, 0.0)]);
        let mut out = Vec::with_capacity(3);
        for (z, m) in rs.roots {
            for _ in 0..m {
                out.push(z);
            }
        }
        out.try_into().map_err(|_| Error::InvalidParameter("cubic must have three roots".into()))
    }

    /// Whether the three roots are pairwise separated by more than `tol`.
    pub fn distinct(&self, tol: f64) -> Result<bool> {
        let g = self.gammas()?;
        Ok((g[0] - g[1]).norm() > tol && (g[0] - g[2]).norm() > tol && (g[1] - g[2]).norm() > tol)
    }

    /// Residuals of the map and of its factored form for a handle claimed to
    /// solve it. Points where `f = ±1` would divide by zero are skipped.
    pub fn check(&self, f: &FunctionHandle, spec: &SampleSpec, opts: &ApplyOptions) -> Result<McMillanCheck> {
        let g = self.gammas()?;
        let d2 = apply(&OperatorExpr::central_second_difference(), f, opts)?;
        let mut eq: f64 = 0.0;
        let mut fac: f64 = 0.0;
        let mut n = 0;
        for z in spec.points() {
            let fz = f.eval(z);
            let den = C64::new(1.0, 0.0) - fz * fz;
            if den.norm() < 1e-8 {
                continue;
            }
            let lhs = f.eval(z + 1.0) + f.eval(z - 1.0);
            let e = (lhs - (self.alpha * fz + self.beta) / den).norm();
            let prod = (fz - g[0]) * (fz - g[1]) * (fz - g[2]) * 2.0;
            let d = (d2.eval(z) - prod / den).norm();
            if !(e.is_finite() && d.is_finite()) {
                continue;
            }
            eq = eq.max(e);
            fac = fac.max(d);
            n += 1;
        }
        if n == 0 {
            return Err(Error::InsufficientSamples);
        }
        Ok(McMillanCheck { samples: n, equation_residual: eq, factored_residual: fac })
    }
}
