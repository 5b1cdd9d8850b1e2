//! Linear operators built from derivatives, shifts, q-scalings and
//! coefficient-weighted sums.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;


use crate::function::{combine, compose_affine, make_constant, CombineOp, Family, FunctionHandle};
use crate::quadrature::{circle_average, log_plus, CircleAverage, QuadratureConfig};
use crate::region::Region;
use crate::{Error, Result, C64};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Residual threshold for kernel membership.
pub const KERNEL_TOL: f64 = 1e-8;

/// Operator syntax tree. `Derivative`, `Shift` and `QScale` act on the
/// result of `inner`; `Sum` weights each term by a coefficient function.
#[derive(Debug, Clone)]
pub enum OperatorExpr {
    Identity,
    Derivative { order: u32, inner: Box<OperatorExpr> },
    /// `h ↦ h(z + c)`.
    Shift { c: C64, inner: Box<OperatorExpr> },
    /// `h ↦ h(q z)`.
    QScale { q: C64, inner: Box<OperatorExpr> },
    Sum(Vec<(FunctionHandle, OperatorExpr)>),
}

/// Growth hypothesis under which the logarithmic-derivative lemma (or its
/// difference or q-difference analogue) gives `m(r, L(f)/f) = o(T(r, f))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    /// Differential operators: any meromorphic `f`.
    Meromorphic,
    /// Shifts present: hyper-order below one.
    HyperOrderBelowOne,
    /// q-scalings present: order zero.
    ZeroOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Applicability {
    pub requirement: Requirement,
    /// `None` when the needed growth metadata is undeclared.
    pub satisfied: Option<bool>,
}

impl OperatorExpr {
    pub fn identity() -> Self {
        OperatorExpr::Identity
    }

    pub fn derivative(order: u32) -> Self {
        OperatorExpr::Derivative { order, inner: Box::new(OperatorExpr::Identity) }
    }

    pub fn shift(c: C64) -> Self {
        OperatorExpr::Shift { c, inner: Box::new(OperatorExpr::Identity) }
    }

    pub fn q_scale(q: C64) -> Self {
        OperatorExpr::QScale { q, inner: Box::new(OperatorExpr::Identity) }
    }

    /// Constant-coefficient combination `Σ c_i E_i`.
    pub fn linear(terms: Vec<(C64, OperatorExpr)>) -> Self {
        OperatorExpr::Sum(terms.into_iter().map(|(c, e)| (make_constant(c), e)).collect())
    }

    /// Forward difference `Δh = h(z+1) - h(z)`.
    pub fn difference() -> Self {
        Self::linear(vec![(ONE, Self::shift(ONE)), (-ONE, Self::Identity)])
    }

    /// Centered second difference `h(z+1) - 2h(z) + h(z-1)`.
    pub fn central_second_difference() -> Self {
        Self::linear(vec![
            (ONE, Self::shift(ONE)),
            (C64::new(-2.0, 0.0), Self::Identity),
            (ONE, Self::shift(-ONE)),
        ])
    }

    /// `self ∘ inner`: substitutes `inner` for every identity leaf.
    pub fn compose(&self, inner: &OperatorExpr) -> OperatorExpr {
        match self {
            OperatorExpr::Identity => inner.clone(),
            OperatorExpr::Derivative { order, inner: e } => {
                OperatorExpr::Derivative { order: *order, inner: Box::new(e.compose(inner)) }
            }
            OperatorExpr::Shift { c, inner: e } => OperatorExpr::Shift { c: *c, inner: Box::new(e.compose(inner)) },
            OperatorExpr::QScale { q, inner: e } => OperatorExpr::QScale { q: *q, inner: Box::new(e.compose(inner)) },
            OperatorExpr::Sum(terms) => {
                OperatorExpr::Sum(terms.iter().map(|(a, e)| (a.clone(), e.compose(inner))).collect())
            }
        }
    }

    /// `self` applied `n` times.
    pub fn power(&self, n: u32) -> OperatorExpr {
        let mut out = OperatorExpr::Identity;
        for _ in 0..n {
            out = self.compose(&out);
        }
        out
    }

    /// Total derivative order of the highest derivative.
    pub fn highest_derivative_order(&self) -> u32 {
        match self {
            OperatorExpr::Identity => 0,
            OperatorExpr::Derivative { order, inner } => order + inner.highest_derivative_order(),
            OperatorExpr::Shift { inner, .. } | OperatorExpr::QScale { inner, .. } => inner.highest_derivative_order(),
            OperatorExpr::Sum(terms) => terms
                .iter()
                .filter(|(a, _)| !a.is_identically_zero())
                .map(|(_, e)| e.highest_derivative_order())
                .max()
                .unwrap_or(0),
        }
    }

    fn has_shift(&self) -> bool {
        match self {
            OperatorExpr::Identity => false,
            OperatorExpr::Shift { c, inner } => *c != C64::new(0.0, 0.0) || inner.has_shift(),
            OperatorExpr::Derivative { inner, .. } | OperatorExpr::QScale { inner, .. } => inner.has_shift(),
            OperatorExpr::Sum(t) => t.iter().any(|(_, e)| e.has_shift()),
        }
    }

    fn has_q_scale(&self) -> bool {
        match self {
            OperatorExpr::Identity => false,
            OperatorExpr::QScale { q, inner } => *q != ONE || inner.has_q_scale(),
            OperatorExpr::Derivative { inner, .. } | OperatorExpr::Shift { inner, .. } => inner.has_q_scale(),
            OperatorExpr::Sum(t) => t.iter().any(|(_, e)| e.has_q_scale()),
        }
    }

    pub fn requirement(&self) -> Requirement {
        if self.has_q_scale() {
            Requirement::ZeroOrder
        } else if self.has_shift() {
            Requirement::HyperOrderBelowOne
        } else {
            Requirement::Meromorphic
        }
    }

    /// Checks the declared growth of `f` against [`Self::requirement`].
    pub fn applicability(&self, f: &FunctionHandle) -> Applicability {
        let requirement = self.requirement();
        let g = f.growth();
        let satisfied = match requirement {
            Requirement::Meromorphic => Some(true),
            Requirement::HyperOrderBelowOne => g.hyper_order.map(|s| s < 1.0),
            Requirement::ZeroOrder => g.order.map(|o| o == 0.0),
        };
        Applicability { requirement, satisfied }
    }

    /// Structural checks: finite parameters, nonzero q, and coefficients
    /// that are constants, rationals or declared small.
    pub fn validate(&self) -> Result<()> {
        let finite = |c: C64| c.re.is_finite() && c.im.is_finite();
        match self {
            OperatorExpr::Identity => Ok(()),
            OperatorExpr::Derivative { inner, .. } => inner.validate(),
            OperatorExpr::Shift { c, inner } => {
                if !finite(*c) {
                    return Err(Error::InvalidParameter("shift must be finite".into()));
                }
                inner.validate()
            }
            OperatorExpr::QScale { q, inner } => {
                if !finite(*q) || *q == C64::new(0.0, 0.0) {
                    return Err(Error::InvalidParameter(format!("q-scale factor must be finite and nonzero, got {q}")));
                }
                inner.validate()
            }
            OperatorExpr::Sum(terms) => {
                if terms.is_empty() {
                    return Err(Error::InvalidParameter("empty operator sum".into()));
                }
                for (a, e) in terms {
                    let small = matches!(a.family(), Family::Constant | Family::Rational) || a.growth().declared_small;
                    if !small {
                        return Err(Error::InvalidParameter(format!(
                            "coefficient {} is neither rational nor declared small",
                            a.describe()
                        )));
                    }
                    e.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            OperatorExpr::Identity => "I".into(),
            OperatorExpr::Derivative { order, inner } => format!("D^{order}[{}]", inner.describe()),
            OperatorExpr::Shift { c, inner } => format!("E[{c}][{}]", inner.describe()),
            OperatorExpr::QScale { q, inner } => format!("Q[{q}][{}]", inner.describe()),
            OperatorExpr::Sum(terms) => {
                let parts: Vec<String> = terms.iter().map(|(a, e)| format!("{}*{}", a.describe(), e.describe())).collect();
                format!("({})", parts.join(" + "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApplyOptions {
    /// Use Cauchy-integral differentiation when no closed-form rule exists.
    pub allow_fallback: bool,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        ApplyOptions { allow_fallback: true }
    }
}

/// The handle `L(f)`.
pub fn apply(l: &OperatorExpr, f: &FunctionHandle, opts: &ApplyOptions) -> Result<FunctionHandle> {
    l.validate()?;
    apply_inner(l, f, opts)
}

fn apply_inner(l: &OperatorExpr, f: &FunctionHandle, opts: &ApplyOptions) -> Result<FunctionHandle> {
    match l {
        OperatorExpr::Identity => Ok(f.clone()),
        OperatorExpr::Derivative { order, inner } => {
            let mut h = apply_inner(inner, f, opts)?;
            for done in 0..*order {
                match h.derivative() {
                    Some(d) => h = d,
                    None if opts.allow_fallback => return Ok(h.numeric_derivative(order - done)),
                    None => return Err(Error::UnsupportedDerivative { order: *order }),
                }
            }
            Ok(h)
        }
        OperatorExpr::Shift { c, inner } => compose_affine(&apply_inner(inner, f, opts)?, ONE, *c),
        OperatorExpr::QScale { q, inner } => compose_affine(&apply_inner(inner, f, opts)?, *q, C64::new(0.0, 0.0)),
        OperatorExpr::Sum(terms) => {
            let mut acc: Option<FunctionHandle> = None;
            for (a, e) in terms {
                if a.is_identically_zero() {
                    continue;
                }
                let t = combine(CombineOp::Mul, a, &apply_inner(e, f, opts)?)?;
                acc = Some(match acc {
                    None => t,
                    Some(s) => combine(CombineOp::Add, &s, &t)?,
                });
            }
            Ok(acc.unwrap_or_else(|| make_constant(C64::new(0.0, 0.0))))
        }
    }
}

/// Sample points on concentric circles for residual probes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub center: C64,
    pub radii: Vec<f64>,
    pub points_per_circle: usize,
    /// Sample points closer than this to a known pole are skipped.
    pub pole_clearance: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { center: C64::new(0.0, 0.0), radii: vec![0.75, 1.6], points_per_circle: 32, pole_clearance: 0.05 }
    }
}

impl SampleSpec {
    pub fn points(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.radii.len() * self.points_per_circle);
        for (i, &r) in self.radii.iter().enumerate() {
            for j in 0..self.points_per_circle {
                // Offset angles so no sample sits on the real axis.
                let t = TAU * (j as f64 + 0.3 + 0.2 * i as f64) / self.points_per_circle as f64;
                out.push(self.center + C64::from_polar(r, t));
            }
        }
        out
    }

    /// Points kept after removing those near known poles of any handle.
    fn admissible(&self, handles: &[&FunctionHandle]) -> Vec<C64> {
        let reach = self.radii.iter().fold(0.0f64, |a, r| a.max(*r)) + 1.0;
        let region = Region::Disc { center: self.center, radius: reach };
        let mut poles: Vec<C64> = Vec::new();
        for h in handles {
            if let Some(p) = h.pole_candidates(region) {
                poles.extend(p);
            }
        }
        self.points()
            .into_iter()
            .filter(|z| poles.iter().all(|p| (p - z).norm() >= self.pole_clearance))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
    pub tol: f64,
    /// `max < tol`.
    pub passed: bool,
}

fn residual_report<F: Fn(C64) -> C64>(points: &[C64], tol: f64, residual: F) -> Result<ResidualReport> {
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    let mut n = 0usize;
    for &z in points {
        let v = residual(z).norm();
        if !v.is_finite() {
            continue;
        }
        max = max.max(v);
        sum += v;
        n += 1;
    }
    if n == 0 {
        return Err(Error::InsufficientSamples);
    }
    Ok(ResidualReport { max, mean: sum / n as f64, samples: n, tol, passed: max < tol })
}

/// `max |L(a)|` over the sample set; membership iff below [`KERNEL_TOL`].
pub fn kernel_check(l: &OperatorExpr, a: &FunctionHandle, spec: &SampleSpec, opts: &ApplyOptions) -> Result<ResidualReport> {
    let la = apply(l, a, opts)?;
    let pts = spec.admissible(&[a, &la]);
    residual_report(&pts, KERNEL_TOL, |z| la.eval(z))
}

/// `max |L(αf + βg) - αL(f) - βL(g)|` over the sample set.
pub fn linearity_probe(
    l: &OperatorExpr,
    f: &FunctionHandle,
    g: &FunctionHandle,
    alpha: C64,
    beta: C64,
    spec: &SampleSpec,
    opts: &ApplyOptions,
) -> Result<ResidualReport> {
    let af = combine(CombineOp::Mul, &make_constant(alpha), f)?;
    let bg = combine(CombineOp::Mul, &make_constant(beta), g)?;
    let mix = combine(CombineOp::Add, &af, &bg)?;
    let lmix = apply(l, &mix, opts)?;
    let lf = apply(l, f, opts)?;
    let lg = apply(l, g, opts)?;
    let pts = spec.admissible(&[f, g, &lmix, &lf, &lg]);
    residual_report(&pts, KERNEL_TOL, |z| lmix.eval(z) - alpha * lf.eval(z) - beta * lg.eval(z))
}

/// `m(r, L(f)/f)`, the logarithmic-derivative diagnostic, at radius `r`.
pub fn logderiv_proximity(
    l: &OperatorExpr,
    f: &FunctionHandle,
    r: f64,
    quad: &QuadratureConfig,
    opts: &ApplyOptions,
) -> Result<CircleAverage> {
    quad.validate()?;
    let lf = apply(l, f, opts)?;
    Ok(logderiv_with(&lf, f, r, quad))
}

pub(crate) fn logderiv_with(lf: &FunctionHandle, f: &FunctionHandle, r: f64, quad: &QuadratureConfig) -> CircleAverage {
    circle_average(r, quad, |z| log_plus((lf.eval(z) / f.eval(z)).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{identity, make_exp_poly, make_jacobi_sn, make_rational};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z2() -> FunctionHandle {
        make_rational(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let o = ApplyOptions::default();
        let d = apply(&OperatorExpr::derivative(1), &z2(), &o).unwrap();
        let delta = apply(&OperatorExpr::difference(), &z2(), &o).unwrap();
        for z in SampleSpec::default().points() {
            assert!((d.eval(z) - z * 2.0).norm() < 1e-13);
            assert!((delta.eval(z) - (z * 2.0 + 1.0)).norm() < 1e-13);
        }
        let ez = make_exp_poly(&[(ONE, ONE)]).unwrap();
        let l = OperatorExpr::linear(vec![(ONE, OperatorExpr::derivative(1)), (-ONE, OperatorExpr::Identity)]);
        let r = kernel_check(&l, &ez, &SampleSpec::default(), &o).unwrap();
        assert!(r.passed && r.max < 1e-9);
    }

    #[test]
    fn kernel_examples() {
        let o = ApplyOptions::default();
        let s = SampleSpec::default();
        let five = make_constant(c(5.0, 0.0));
        assert_eq!(kernel_check(&OperatorExpr::difference(), &five, &s, &o).unwrap().max, 0.0);
        assert_eq!(kernel_check(&OperatorExpr::derivative(2), &identity(), &s, &o).unwrap().max, 0.0);
        let l = OperatorExpr::linear(vec![(ONE, OperatorExpr::derivative(1)), (-ONE, OperatorExpr::Identity)]);
        let r = kernel_check(&l, &make_constant(ONE), &s, &o).unwrap();
        assert!(r.max >= 0.9 && !r.passed);
    }

    #[test]
    fn fallback_matches_closed_form() {
        let sn = make_jacobi_sn(0.5).unwrap();
        let o = ApplyOptions::default();
        let exact = apply(&OperatorExpr::derivative(2), &sn, &o).unwrap();
        let numeric = apply(&OperatorExpr::derivative(2), &sn.opaque(), &o).unwrap();
        for z in SampleSpec::default().points() {
            assert!((exact.eval(z) - numeric.eval(z)).norm() < 1e-8 * (1.0 + exact.eval(z).norm()));
        }
        let strict = ApplyOptions { allow_fallback: false };
        assert!(matches!(
            apply(&OperatorExpr::derivative(1), &sn.opaque(), &strict),
            Err(Error::UnsupportedDerivative { .. })
        ));
    }

    #[test]
    fn linearity_examples() {
        let o = ApplyOptions::default();
        let s = SampleSpec::default();
        let r = linearity_probe(&OperatorExpr::difference(), &z2(), &identity(), c(2.0, 0.0), -ONE, &s, &o).unwrap();
        assert!(r.max < 1e-12);
        let l = OperatorExpr::linear(vec![
            (ONE, OperatorExpr::shift(ONE).compose(&OperatorExpr::derivative(2))),
            (ONE, OperatorExpr::Identity),
        ]);
        let f = make_rational(&[ONE, c(0.5, 0.0)], &[c(3.0, 0.0), ONE, ONE]).unwrap();
        let r = linearity_probe(&l, &f, &z2(), c(0.3, 1.0), c(-2.0, 0.5), &s, &o).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn orders_and_requirements() {
        let d2 = OperatorExpr::derivative(2);
        assert_eq!(d2.highest_derivative_order(), 2);
        assert_eq!(OperatorExpr::difference().power(2).highest_derivative_order(), 0);
        assert_eq!(OperatorExpr::difference().requirement(), Requirement::HyperOrderBelowOne);
        assert_eq!(OperatorExpr::q_scale(c(2.0, 0.0)).requirement(), Requirement::ZeroOrder);
        assert!(OperatorExpr::q_scale(c(0.0, 0.0)).validate().is_err());
        let sn = make_jacobi_sn(0.5).unwrap();
        let bad = OperatorExpr::Sum(vec![(sn, OperatorExpr::Identity)]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn logderiv_examples() {
        let q = QuadratureConfig::default();
        let o = ApplyOptions::default();
        let ez = make_exp_poly(&[(ONE, ONE)]).unwrap();
        assert_eq!(logderiv_proximity(&OperatorExpr::derivative(1), &ez, 5.0, &q, &o).unwrap().value, 0.0);
        assert_eq!(logderiv_proximity(&OperatorExpr::derivative(1), &z2(), 4.0, &q, &o).unwrap().value, 0.0);
    }
}
