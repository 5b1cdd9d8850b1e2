//! Meromorphic function handles.
//!
//! A [`FunctionHandle`] is an immutable, cheaply clonable expression tree
//! over a closed set of families (rational functions, exponential
//! polynomials, Jacobi `sn` and its derivatives, constants) closed under
//! field arithmetic and affine change of variable. Each node knows how to
//! evaluate itself, and where possible how to differentiate itself in closed
//! form and how to enumerate its zeros and poles exactly.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::elliptic::Jacobi;
use crate::poly;
use crate::region::{Divisor, Region};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Declared growth of a function. Nothing here is estimated numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthMeta {
    pub order: Option<f64>,
    pub hyper_order: Option<f64>,
    /// Set when a caller asserts membership in the small-function field of
    /// some other function. Recorded, never verified.
    pub declared_small: bool,
}

impl GrowthMeta {
    pub const fn known(order: f64, hyper_order: f64) -> Self {
        GrowthMeta { order: Some(order), hyper_order: Some(hyper_order), declared_small: false }
    }

    pub const fn unknown() -> Self {
        GrowthMeta { order: None, hyper_order: None, declared_small: false }
    }

    fn join(a: GrowthMeta, b: GrowthMeta) -> GrowthMeta {
        let max = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
        GrowthMeta {
            order: max(a.order, b.order),
            hyper_order: max(a.hyper_order, b.hyper_order),
            declared_small: a.declared_small && b.declared_small,
        }
    }
}

/// Family tag of a handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Rational,
    ExpPoly,
    JacobiSn,
    AffineComposition,
    FieldCombination,
    Constant,
    /// Derivative evaluated by the Cauchy integral on a small circle.
    NumericDerivative,
    /// A wrapper that hides derivative rules and divisor information.
    Opaque,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Rational => "rational",
            Family::ExpPoly => "exp-poly",
            Family::JacobiSn => "jacobi-sn",
            Family::AffineComposition => "affine-composition",
            Family::FieldCombination => "field-combination",
            Family::Constant => "constant",
            Family::NumericDerivative => "numeric-derivative",
            Family::Opaque => "opaque",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone)]
struct Rational {
    num: Vec<C64>,
    den: Vec<C64>,
    zeros: Vec<(C64, u32)>,
    poles: Vec<(C64, u32)>,
    /// Evaluate as `lead * prod (z - z_j)^{m_j} / prod (z - p_k)^{n_k}`.
    factored_lead: Option<C64>,
    certified: bool,
}

impl Rational {
    fn eval(&self, z: C64) -> C64 {
        match self.factored_lead {
            Some(lead) => {
                let mut v = lead;
                for &(r, m) in &self.zeros {
                    v *= (z - r).powu(m);
                }
                for &(p, n) in &self.poles {
                    v /= (z - p).powu(n);
                }
                v
            }
            None => poly::eval(&self.num, z) / poly::eval(&self.den, z),
        }
    }

    /// `f' = (p' q_red - p S) / (q q_red)` with `q_red = prod (z - p_k)` and
    /// `S = sum n_k prod_{j != k} (z - p_j)`, already in lowest terms.
    fn derivative(&self) -> Rational {
        let (p, q) = match self.factored_lead {
            Some(lead) => (poly::from_roots(lead, &self.zeros), poly::from_roots(ONE, &self.poles)),
            None => (self.num.clone(), self.den.clone()),
        };
        let simple: Vec<(C64, u32)> = self.poles.iter().map(|&(z, _)| (z, 1)).collect();
        let q_red = poly::from_roots(ONE, &simple);
        let mut s = vec![ZERO];
        for (k, &(_, n)) in self.poles.iter().enumerate() {
            let others: Vec<(C64, u32)> =
                simple.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, r)| *r).collect();
            s = poly::add(&s, &poly::scale(&poly::from_roots(ONE, &others), C64::new(n as f64, 0.0)));
        }
        let num = poly::trim(&poly::add(
            &poly::mul(&poly::derivative(&p), &q_red),
            &poly::scale(&poly::mul(&p, &s), -ONE),
        ));
        let den = poly::mul(&q, &q_red);
        let roots = poly::roots(&num);
        let zeros = if poly::is_zero(&num) { Vec::new() } else { roots.roots };
        Rational {
            num,
            den,
            zeros,
            poles: self.poles.iter().map(|&(z, n)| (z, n + 1)).collect(),
            factored_lead: None,
            certified: self.certified && roots.certified,
        }
    }

    fn degree(&self) -> u32 {
        let dz: u32 = self.zeros.iter().map(|r| r.1).sum();
        let dp: u32 = self.poles.iter().map(|r| r.1).sum();
        dz.max(dp)
    }
}

#[derive(Debug, Clone)]
struct ExpPoly {
    /// (coefficient, frequency) with distinct frequencies and nonzero
    /// coefficients.
    terms: Vec<(C64, C64)>,
}

impl ExpPoly {
    fn eval(&self, z: C64) -> C64 {
        let mut acc = ZERO;
        for &(c, l) in &self.terms {
            acc += c * (l * z).exp();
        }
        acc
    }
}

/// `P(sn)` or `P(sn)·sn'` with a real polynomial `P`.
#[derive(Debug, Clone)]
struct JacobiFn {
    jac: Jacobi,
    poly: Vec<f64>,
    times_derivative: bool,
}

impl JacobiFn {
    fn eval(&self, z: C64) -> C64 {
        let (s, ds) = self.jac.sn_and_derivative(z);
        let p = self.poly.iter().rev().fold(ZERO, |acc, &c| acc * s + c);
        if self.times_derivative {
            p * ds
        } else {
            p
        }
    }

    fn is_plain_sn(&self) -> bool {
        !self.times_derivative && self.poly.len() == 2 && self.poly[0] == 0.0 && self.poly[1] == 1.0
    }

    fn pole_order(&self) -> u32 {
        let d = self.poly.len().saturating_sub(1) as u32;
        d + if self.times_derivative { 2 } else { 0 }
    }

    fn derivative(&self) -> JacobiFn {
        let k2 = self.jac.modulus() * self.jac.modulus();
        let dp = real_poly_derivative(&self.poly);
        if self.times_derivative {
            // d/dz [R(s) s'] = R'(s) Q(s) + R(s) Q'(s)/2, Q = (1-s²)(1-k²s²).
            let q = [1.0, 0.0, -(1.0 + k2), 0.0, k2];
            let half_dq = [0.0, -(1.0 + k2), 0.0, 2.0 * k2];
            let a = real_poly_mul(&dp, &q);
            let b = real_poly_mul(&self.poly, &half_dq);
            JacobiFn { jac: self.jac, poly: real_poly_trim(real_poly_add(&a, &b)), times_derivative: false }
        } else {
            JacobiFn { jac: self.jac, poly: real_poly_trim(dp), times_derivative: true }
        }
    }
}

fn real_poly_derivative(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

fn real_poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn real_poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0)).collect()
}

fn real_poly_trim(mut p: Vec<f64>) -> Vec<f64> {
    while p.len() > 1 && p.last() == Some(&0.0) {
        p.pop();
    }
    p
}

#[derive(Debug)]
enum Repr {
    Constant(C64),
    Rational(Rational),
    ExpPoly(ExpPoly),
    Jacobi(JacobiFn),
    /// `factor * inner(a z + b)`.
    Affine { inner: FunctionHandle, a: C64, b: C64, factor: C64 },
    Combine { op: CombineOp, lhs: FunctionHandle, rhs: FunctionHandle },
    NumericDerivative { inner: FunctionHandle, order: u32 },
    Opaque(FunctionHandle),
}

#[derive(Debug)]
struct Node {
    repr: Repr,
    growth: GrowthMeta,
}

/// Immutable handle to a meromorphic function. Cloning is cheap; handles
/// are `Send + Sync` and evaluation is pure.
#[derive(Debug, Clone)]
pub struct FunctionHandle(Arc<Node>);

impl FunctionHandle {
    fn new(repr: Repr, growth: GrowthMeta) -> Self {
        FunctionHandle(Arc::new(Node { repr, growth }))
    }

    pub fn family(&self) -> Family {
        match &self.0.repr {
            Repr::Constant(_) => Family::Constant,
            Repr::Rational(_) => Family::Rational,
            Repr::ExpPoly(_) => Family::ExpPoly,
            Repr::Jacobi(_) => Family::JacobiSn,
            Repr::Affine { .. } => Family::AffineComposition,
            Repr::Combine { .. } => Family::FieldCombination,
            Repr::NumericDerivative { .. } => Family::NumericDerivative,
            Repr::Opaque(_) => Family::Opaque,
        }
    }

    pub fn growth(&self) -> GrowthMeta {
        self.0.growth
    }

    /// Returns a copy carrying the small-function assertion.
    pub fn declare_small(&self) -> FunctionHandle {
        let mut g = self.0.growth;
        g.declared_small = true;
        self.with_growth(g)
    }

    /// Returns a copy with replaced growth metadata.
    pub fn with_growth(&self, growth: GrowthMeta) -> FunctionHandle {
        let repr = match &self.0.repr {
            Repr::Constant(c) => Repr::Constant(*c),
            Repr::Rational(r) => Repr::Rational(r.clone()),
            Repr::ExpPoly(e) => Repr::ExpPoly(e.clone()),
            Repr::Jacobi(j) => Repr::Jacobi(j.clone()),
            Repr::Affine { inner, a, b, factor } => {
                Repr::Affine { inner: inner.clone(), a: *a, b: *b, factor: *factor }
            }
            Repr::Combine { op, lhs, rhs } => Repr::Combine { op: *op, lhs: lhs.clone(), rhs: rhs.clone() },
            Repr::NumericDerivative { inner, order } => {
                Repr::NumericDerivative { inner: inner.clone(), order: *order }
            }
            Repr::Opaque(h) => Repr::Opaque(h.clone()),
        };
        FunctionHandle::new(repr, growth)
    }

    /// Hides the closed-form derivative rule and divisor oracle.
    pub fn opaque(&self) -> FunctionHandle {
        FunctionHandle::new(Repr::Opaque(self.clone()), self.growth())
    }

    /// Value at `z`. Finite away from poles; non-finite at poles.
    pub fn eval(&self, z: C64) -> C64 {
        match &self.0.repr {
            Repr::Constant(c) => *c,
            Repr::Rational(r) => r.eval(z),
            Repr::ExpPoly(e) => e.eval(z),
            Repr::Jacobi(j) => j.eval(z),
            Repr::Affine { inner, a, b, factor } => factor * inner.eval(a * z + b),
            Repr::Combine { op, lhs, rhs } => {
                let (x, y) = (lhs.eval(z), rhs.eval(z));
                match op {
                    CombineOp::Add => x + y,
                    CombineOp::Sub => x - y,
                    CombineOp::Mul => x * y,
                    CombineOp::Div => x / y,
                }
            }
            Repr::NumericDerivative { inner, order } => cauchy_derivative(inner, z, *order),
            Repr::Opaque(h) => h.eval(z),
        }
    }

    /// Constant value, if the handle is structurally constant.
    pub fn as_constant(&self) -> Option<C64> {
        match &self.0.repr {
            Repr::Constant(c) => Some(*c),
            _ => None,
        }
    }

    /// Structural check for the zero function.
    pub fn is_identically_zero(&self) -> bool {
        matches!(self.as_constant(), Some(c) if c == ZERO)
    }

    /// Structural check: true when no node can introduce poles.
    pub fn is_entire(&self) -> bool {
        match &self.0.repr {
            Repr::Constant(_) | Repr::ExpPoly(_) => true,
            Repr::Rational(r) => r.poles.is_empty(),
            Repr::Jacobi(j) => j.pole_order() == 0,
            Repr::Affine { inner, .. } => inner.is_entire(),
            Repr::Combine { op, lhs, rhs } => match op {
                CombineOp::Div => lhs.is_entire() && rhs.as_constant().is_some(),
                _ => lhs.is_entire() && rhs.is_entire(),
            },
            Repr::NumericDerivative { inner, .. } | Repr::Opaque(inner) => inner.is_entire(),
        }
    }

    /// Closed-form derivative, when every node in the tree has a rule.
    pub fn derivative(&self) -> Option<FunctionHandle> {
        let g = self.growth();
        Some(match &self.0.repr {
            Repr::Constant(_) => make_constant(ZERO),
            Repr::Rational(r) => {
                if r.zeros.is_empty() && r.poles.is_empty() {
                    make_constant(ZERO)
                } else {
                    FunctionHandle::new(Repr::Rational(r.derivative()), g)
                }
            }
            Repr::ExpPoly(e) => {
                let terms: Vec<(C64, C64)> = e
                    .terms
                    .iter()
                    .map(|&(c, l)| (c * l, l))
                    .filter(|(c, _)| *c != ZERO)
                    .collect();
                exp_poly_from_terms(terms)
            }
            Repr::Jacobi(j) => {
                let d = j.derivative();
                if d.poly.iter().all(|c| *c == 0.0) {
                    make_constant(ZERO)
                } else {
                    FunctionHandle::new(Repr::Jacobi(d), g)
                }
            }
            Repr::Affine { inner, a, b, factor } => {
                let d = inner.derivative()?;
                if d.is_identically_zero() {
                    return Some(make_constant(ZERO));
                }
                FunctionHandle::new(Repr::Affine { inner: d, a: *a, b: *b, factor: factor * a }, g)
            }
            Repr::Combine { op, lhs, rhs } => {
                let (df, dg) = (lhs.derivative()?, rhs.derivative()?);
                match op {
                    CombineOp::Add => combine_unchecked(CombineOp::Add, df, dg),
                    CombineOp::Sub => combine_unchecked(CombineOp::Sub, df, dg),
                    CombineOp::Mul => combine_unchecked(
                        CombineOp::Add,
                        combine_unchecked(CombineOp::Mul, df, rhs.clone()),
                        combine_unchecked(CombineOp::Mul, lhs.clone(), dg),
                    ),
                    CombineOp::Div => combine_unchecked(
                        CombineOp::Div,
                        combine_unchecked(
                            CombineOp::Sub,
                            combine_unchecked(CombineOp::Mul, df, rhs.clone()),
                            combine_unchecked(CombineOp::Mul, lhs.clone(), dg),
                        ),
                        combine_unchecked(CombineOp::Mul, rhs.clone(), rhs.clone()),
                    ),
                }
            }
            Repr::NumericDerivative { .. } | Repr::Opaque(_) => return None,
        })
    }

    /// Derivative by Cauchy's integral on a small circle; always available.
    pub fn numeric_derivative(&self, order: u32) -> FunctionHandle {
        match &self.0.repr {
            Repr::NumericDerivative { inner, order: o } => {
                FunctionHandle::new(Repr::NumericDerivative { inner: inner.clone(), order: o + order }, self.growth())
            }
            _ => FunctionHandle::new(Repr::NumericDerivative { inner: self.clone(), order }, self.growth()),
        }
    }

    /// Closed-form divisor inside `region`, if the family supports one.
    pub fn divisor(&self, region: Region) -> Option<Divisor> {
        match &self.0.repr {
            Repr::Constant(c) => {
                if *c == ZERO {
                    None
                } else {
                    Some(Divisor::empty(region))
                }
            }
            Repr::Rational(r) => {
                let items = r
                    .zeros
                    .iter()
                    .map(|&(z, m)| (z, m as i64))
                    .chain(r.poles.iter().map(|&(z, m)| (z, -(m as i64))));
                Some(Divisor::from_signed(region, items, r.certified))
            }
            Repr::ExpPoly(e) => match e.terms.len() {
                0 => None,
                1 => Some(Divisor::empty(region)),
                2 => {
                    let (c1, l1) = e.terms[0];
                    let (c2, l2) = e.terms[1];
                    // c1 e^{l1 z} + c2 e^{l2 z} = 0  <=>  e^{(l1-l2) z} = -c2/c1.
                    let dl = l1 - l2;
                    let base = (-c2 / c1).ln() / dl;
                    let step = C64::new(0.0, 2.0 * PI) / dl;
                    let (center, radius) = region.bounding_disc();
                    let sn = step.norm();
                    let t = ((center - base) * step.conj()).re / (sn * sn);
                    let span = (radius / sn).ceil() as i64 + 1;
                    let k0 = t.round() as i64;
                    let items = (k0 - span..=k0 + span).map(|k| (base + step * k as f64, 1i64));
                    Some(Divisor::from_signed(region, items, true))
                }
                _ => None,
            },
            Repr::Jacobi(j) => {
                let mut items: Vec<(C64, i64)> = Vec::new();
                let order = j.pole_order() as i64;
                if order > 0 {
                    items.extend(jacobi_lattice(&j.jac, region, true).into_iter().map(|z| (z, -order)));
                }
                if j.is_plain_sn() {
                    items.extend(jacobi_lattice(&j.jac, region, false).into_iter().map(|z| (z, 1)));
                } else if order > 0 {
                    return None;
                }
                Some(Divisor::from_signed(region, items, true))
            }
            Repr::Affine { inner, a, b, factor } => {
                if *factor == ZERO {
                    return None;
                }
                let (c, r) = region.bounding_disc();
                let image = Region::Disc { center: a * c + b, radius: a.norm() * r * (1.0 + 1e-12) };
                let d = inner.divisor(image)?;
                let items = d.points.iter().map(|p| ((p.location - b) / a, p.signed()));
                Some(Divisor::from_signed(region, items, d.certified))
            }
            Repr::Combine { op, lhs, rhs } => match op {
                CombineOp::Mul | CombineOp::Div => {
                    let dl = lhs.divisor(region)?;
                    let dr = rhs.divisor(region)?;
                    let sign = if *op == CombineOp::Mul { 1 } else { -1 };
                    let items = dl
                        .points
                        .iter()
                        .map(|p| (p.location, p.signed()))
                        .chain(dr.points.iter().map(|p| (p.location, sign * p.signed())));
                    Some(Divisor::from_signed(region, items, dl.certified && dr.certified))
                }
                _ => None,
            },
            Repr::NumericDerivative { .. } | Repr::Opaque(_) => None,
        }
    }

    /// A superset of the pole locations inside `region`, when the tree makes
    /// one available. `None` means nothing is known about the poles.
    pub fn pole_candidates(&self, region: Region) -> Option<Vec<C64>> {
        let out: Vec<C64> = match &self.0.repr {
            Repr::Constant(_) | Repr::ExpPoly(_) => Vec::new(),
            Repr::Rational(r) => r.poles.iter().map(|p| p.0).filter(|z| region.contains(*z)).collect(),
            Repr::Jacobi(j) => {
                if j.pole_order() > 0 {
                    jacobi_lattice(&j.jac, region, true)
                } else {
                    Vec::new()
                }
            }
            Repr::Affine { inner, a, b, .. } => {
                let (c, r) = region.bounding_disc();
                let image = Region::Disc { center: a * c + b, radius: a.norm() * r * (1.0 + 1e-12) };
                inner
                    .pole_candidates(image)?
                    .into_iter()
                    .map(|w| (w - b) / a)
                    .filter(|z| region.contains(*z))
                    .collect()
            }
            Repr::Combine { op, lhs, rhs } => {
                let mut v = lhs.pole_candidates(region)?;
                match op {
                    CombineOp::Div => {
                        let d = rhs.divisor(region)?;
                        v.extend(d.zeros().map(|p| p.location));
                    }
                    _ => v.extend(rhs.pole_candidates(region)?),
                }
                v
            }
            Repr::NumericDerivative { inner, .. } => inner.pole_candidates(region)?,
            Repr::Opaque(_) => return None,
        };
        Some(dedup_points(out))
    }

    /// Degree of a rational handle.
    pub fn rational_degree(&self) -> Option<u32> {
        match &self.0.repr {
            Repr::Rational(r) => Some(r.degree()),
            _ => None,
        }
    }

    /// The Jacobi modulus when the handle is `sn` or one of its derivatives.
    pub fn jacobi(&self) -> Option<Jacobi> {
        match &self.0.repr {
            Repr::Jacobi(j) => Some(j.jac),
            _ => None,
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match &self.0.repr {
            Repr::Constant(c) => fmt_c(*c),
            Repr::Rational(r) => format!("rational(deg {})", r.degree()),
            Repr::ExpPoly(e) => {
                let parts: Vec<String> =
                    e.terms.iter().map(|(c, l)| format!("{}*exp({}z)", fmt_c(*c), fmt_c(*l))).collect();
                parts.join(" + ")
            }
            Repr::Jacobi(j) => {
                if j.is_plain_sn() {
                    format!("sn(z; k={})", j.jac.modulus())
                } else {
                    format!("P(sn){}(z; k={})", if j.times_derivative { "*sn'" } else { "" }, j.jac.modulus())
                }
            }
            Repr::Affine { inner, a, b, factor } => {
                format!("{}*[{}]({}z+{})", fmt_c(*factor), inner.describe(), fmt_c(*a), fmt_c(*b))
            }
            Repr::Combine { op, lhs, rhs } => {
                let s = match op {
                    CombineOp::Add => "+",
                    CombineOp::Sub => "-",
                    CombineOp::Mul => "*",
                    CombineOp::Div => "/",
                };
                format!("({} {} {})", lhs.describe(), s, rhs.describe())
            }
            Repr::NumericDerivative { inner, order } => format!("D^{}[{}]", order, inner.describe()),
            Repr::Opaque(h) => format!("opaque[{}]", h.describe()),
        }
    }
}

fn fmt_c(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

pub(crate) fn dedup_points(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(core::cmp::Ordering::Equal));
    let mut out: Vec<C64> = Vec::with_capacity(v.len());
    for z in v {
        if !out.iter().rev().take(8).any(|w| crate::region::same_location(*w, z)) {
            out.push(z);
        }
    }
    out
}

/// Lattice points `2mK + 2niK'` (zeros) or `2mK + (2n+1)iK'` (poles) in the region.
fn jacobi_lattice(jac: &Jacobi, region: Region, poles: bool) -> Vec<C64> {
    let (center, radius) = region.bounding_disc();
    let sx = 2.0 * jac.quarter_period();
    let sy = 2.0 * jac.quarter_period_prime();
    let off = if poles { 0.5 * sy } else { 0.0 };
    let m0 = ((center.re - radius) / sx).floor() as i64 - 1;
    let m1 = ((center.re + radius) / sx).ceil() as i64 + 1;
    let n0 = ((center.im - radius - off) / sy).floor() as i64 - 1;
    let n1 = ((center.im + radius - off) / sy).ceil() as i64 + 1;
    let mut out = Vec::new();
    for m in m0..=m1 {
        for n in n0..=n1 {
            let z = C64::new(sx * m as f64, sy * n as f64 + off);
            if region.contains(z) {
                out.push(z);
            }
        }
    }
    out
}

/// Cauchy-integral derivative of order `n` at `z` on a circle of radius
/// `min(0.1, half the distance to the nearest known pole)`.
fn cauchy_derivative(f: &FunctionHandle, z: C64, n: u32) -> C64 {
    let mut rho: f64 = 0.1;
    if let Ok(region) = Region::disc(z, 0.25) {
        if let Some(poles) = f.pole_candidates(region) {
            for p in poles {
                let d = (p - z).norm();
                if d > 0.0 {
                    rho = rho.min(0.5 * d);
                }
            }
        }
    }
    const NODES: usize = 48;
    let mut acc = ZERO;
    for j in 0..NODES {
        let w = C64::from_polar(1.0, 2.0 * PI * j as f64 / NODES as f64);
        acc += f.eval(z + w * rho) * w.powi(-(n as i32));
    }
    let mut fact = 1.0;
    for i in 2..=n {
        fact *= i as f64;
    }
    acc * (fact / (NODES as f64 * rho.powi(n as i32)))
}

// ---------------------------------------------------------------------------
// Constructors

pub fn make_constant(c: C64) -> FunctionHandle {
    FunctionHandle::new(Repr::Constant(c), GrowthMeta::known(0.0, 0.0))
}

/// Rational function from ascending coefficient lists.
pub fn make_rational(numerator: &[C64], denominator: &[C64]) -> Result<FunctionHandle> {
    if denominator.is_empty() || poly::is_zero(denominator) {
        return Err(Error::InvalidFamily("rational denominator is identically zero".into()));
    }
    if numerator.is_empty() || poly::is_zero(numerator) {
        return Ok(make_constant(ZERO));
    }
    let num = poly::trim(numerator);
    let den = poly::trim(denominator);
    if num.iter().chain(den.iter()).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidFamily("rational coefficients must be finite".into()));
    }
    if num.len() == 1 && den.len() == 1 {
        return Ok(make_constant(num[0] / den[0]));
    }
    let zr = poly::roots(&num);
    let pr = poly::roots(&den);
    let mut zeros = zr.roots.clone();
    let mut poles = pr.roots.clone();
    let mut cancelled = false;
    for z in zeros.iter_mut() {
        for p in poles.iter_mut() {
            if z.1 > 0 && p.1 > 0 && (z.0 - p.0).norm() <= 1e-7 * (1.0 + z.0.norm()) {
                let c = z.1.min(p.1);
                z.1 -= c;
                p.1 -= c;
                cancelled = true;
            }
        }
    }
    zeros.retain(|r| r.1 > 0);
    poles.retain(|r| r.1 > 0);
    let certified = zr.certified && pr.certified;
    let growth = GrowthMeta::known(0.0, 0.0);
    let lead = num[num.len() - 1] / den[den.len() - 1];
    if zeros.is_empty() && poles.is_empty() {
        return Ok(make_constant(lead));
    }
    let rat = if cancelled {
        Rational {
            num: poly::from_roots(lead, &zeros),
            den: poly::from_roots(ONE, &poles),
            zeros,
            poles,
            factored_lead: Some(lead),
            certified,
        }
    } else {
        Rational { num, den, zeros, poles, factored_lead: None, certified }
    };
    Ok(FunctionHandle::new(Repr::Rational(rat), growth))
}

/// Rational function `lead * prod (z - z_j)^{m_j} / prod (z - p_k)^{n_k}`
/// with an exact divisor and factored evaluation.
pub fn make_rational_from_roots(
    lead: C64,
    zeros: &[(C64, u32)],
    poles: &[(C64, u32)],
) -> Result<FunctionHandle> {
    if lead == ZERO {
        return Ok(make_constant(ZERO));
    }
    let mut items: Vec<(C64, i64)> = Vec::new();
    items.extend(zeros.iter().map(|&(z, m)| (z, m as i64)));
    items.extend(poles.iter().map(|&(z, m)| (z, -(m as i64))));
    let mut acc: Vec<(C64, i64)> = Vec::new();
    for (z, m) in items {
        if m == 0 {
            continue;
        }
        match acc.iter_mut().find(|(w, _)| *w == z) {
            Some(slot) => slot.1 += m,
            None => acc.push((z, m)),
        }
    }
    let zeros: Vec<(C64, u32)> = acc.iter().filter(|r| r.1 > 0).map(|r| (r.0, r.1 as u32)).collect();
    let poles: Vec<(C64, u32)> = acc.iter().filter(|r| r.1 < 0).map(|r| (r.0, (-r.1) as u32)).collect();
    if zeros.is_empty() && poles.is_empty() {
        return Ok(make_constant(lead));
    }
    let rat = Rational {
        num: poly::from_roots(lead, &zeros),
        den: poly::from_roots(ONE, &poles),
        zeros,
        poles,
        factored_lead: Some(lead),
        certified: true,
    };
    Ok(FunctionHandle::new(Repr::Rational(rat), GrowthMeta::known(0.0, 0.0)))
}

/// `sum c_k exp(lambda_k z)`.
pub fn make_exp_poly(terms: &[(C64, C64)]) -> Result<FunctionHandle> {
    if terms.is_empty() {
        return Err(Error::InvalidFamily("exp-poly needs at least one term".into()));
    }
    if terms.iter().any(|(c, l)| !(c.re.is_finite() && c.im.is_finite() && l.re.is_finite() && l.im.is_finite())) {
        return Err(Error::InvalidFamily("exp-poly parameters must be finite".into()));
    }
    Ok(exp_poly_from_terms(terms.to_vec()))
}

fn exp_poly_from_terms(raw: Vec<(C64, C64)>) -> FunctionHandle {
    let mut terms: Vec<(C64, C64)> = Vec::new();
    for (c, l) in raw {
        match terms.iter_mut().find(|t| t.1 == l) {
            Some(t) => t.0 += c,
            None => terms.push((c, l)),
        }
    }
    terms.retain(|t| t.0 != ZERO);
    match terms.len() {
        0 => make_constant(ZERO),
        1 if terms[0].1 == ZERO => make_constant(terms[0].0),
        _ => {
            let growth = if terms.iter().all(|t| t.1 == ZERO) {
                GrowthMeta::known(0.0, 0.0)
            } else {
                GrowthMeta::known(1.0, 0.0)
            };
            FunctionHandle::new(Repr::ExpPoly(ExpPoly { terms }), growth)
        }
    }
}

/// Jacobi `sn(z, k)` for `0 < k < 1`.
pub fn make_jacobi_sn(k: f64) -> Result<FunctionHandle> {
    let jac = Jacobi::new(k)?;
    Ok(FunctionHandle::new(
        Repr::Jacobi(JacobiFn { jac, poly: vec![0.0, 1.0], times_derivative: false }),
        GrowthMeta::known(2.0, 0.0),
    ))
}

fn combine_unchecked(op: CombineOp, f: FunctionHandle, g: FunctionHandle) -> FunctionHandle {
    if let (Some(a), Some(b)) = (f.as_constant(), g.as_constant()) {
        return make_constant(match op {
            CombineOp::Add => a + b,
            CombineOp::Sub => a - b,
            CombineOp::Mul => a * b,
            CombineOp::Div => a / b,
        });
    }
    match op {
        CombineOp::Add if g.is_identically_zero() => return f,
        CombineOp::Add if f.is_identically_zero() => return g,
        CombineOp::Sub if g.is_identically_zero() => return f,
        CombineOp::Mul if f.is_identically_zero() || g.is_identically_zero() => return make_constant(ZERO),
        CombineOp::Mul if g.as_constant() == Some(ONE) => return f,
        CombineOp::Mul if f.as_constant() == Some(ONE) => return g,
        CombineOp::Div if g.as_constant() == Some(ONE) => return f,
        _ => {}
    }
    let growth = GrowthMeta::join(f.growth(), g.growth());
    FunctionHandle::new(Repr::Combine { op, lhs: f, rhs: g }, growth)
}

/// Pointwise field operation.
pub fn combine(op: CombineOp, f: &FunctionHandle, g: &FunctionHandle) -> Result<FunctionHandle> {
    if op == CombineOp::Div && g.is_identically_zero() {
        return Err(Error::InvalidCombination("division by the zero function".into()));
    }
    Ok(combine_unchecked(op, f.clone(), g.clone()))
}

/// `z ↦ f(a z + b)`.
pub fn compose_affine(f: &FunctionHandle, a: C64, b: C64) -> Result<FunctionHandle> {
    if a == ZERO {
        return Err(Error::InvalidComposition("affine factor a must be nonzero".into()));
    }
    if let Some(c) = f.as_constant() {
        return Ok(make_constant(c));
    }
    if a == ONE && b == ZERO {
        return Ok(f.clone());
    }
    // Collapse nested affine maps: factor * g(a' (a z + b) + b').
    if let Repr::Affine { inner, a: a2, b: b2, factor } = &f.0.repr {
        return Ok(FunctionHandle::new(
            Repr::Affine { inner: inner.clone(), a: a2 * a, b: a2 * b + b2, factor: *factor },
            f.growth(),
        ));
    }
    Ok(FunctionHandle::new(Repr::Affine { inner: f.clone(), a, b, factor: ONE }, f.growth()))
}

/// The identity map `z`.
pub fn identity() -> FunctionHandle {
    make_rational_from_roots(ONE, &[(ZERO, 1)], &[]).expect("identity is a valid rational")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::PointKind;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rational_basics() {
        let f = make_rational(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert_eq!(f.eval(c(2.0, 1.0)), c(2.0, 1.0));
        let g = make_rational(&[c(-1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let d = g.divisor(Region::centered_disc(2.0).unwrap()).unwrap();
        assert_eq!(d.points.len(), 1);
        assert!((d.points[0].location - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(d.points[0].multiplicity, 1);
        let h = make_rational(&[c(1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let d = h.divisor(Region::centered_disc(1.0).unwrap()).unwrap();
        assert_eq!(d.points, vec![crate::region::DivisorPoint::pole(c(0.0, 0.0), 1)]);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(make_rational(&[c(1.0, 0.0)], &[c(0.0, 0.0)]), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn common_roots_cancel() {
        // (z-1)(z+2) / ((z-1) z)
        let num = poly::from_roots(ONE, &[(c(1.0, 0.0), 1), (c(-2.0, 0.0), 1)]);
        let den = poly::from_roots(ONE, &[(c(1.0, 0.0), 1), (c(0.0, 0.0), 1)]);
        let f = make_rational(&num, &den).unwrap();
        let d = f.divisor(Region::centered_disc(5.0).unwrap()).unwrap();
        assert_eq!(d.count(PointKind::Zero), 1);
        assert_eq!(d.count(PointKind::Pole), 1);
        assert!((f.eval(c(1.0, 0.0)) - c(3.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn exp_poly_zeros_and_derivative() {
        let f = make_exp_poly(&[(ONE, ONE)]).unwrap();
        assert_eq!(f.eval(ZERO), ONE);
        let df = f.derivative().unwrap();
        for z in [c(0.3, 0.2), c(-1.0, 2.0)] {
            assert!((df.eval(z) - f.eval(z)).norm() < 1e-15);
        }
        let g = make_exp_poly(&[(ONE, ONE), (-ONE, ZERO)]).unwrap();
        let d = g.divisor(Region::centered_disc(7.0).unwrap()).unwrap();
        assert_eq!(d.points.len(), 3);
        for p in &d.points {
            assert_eq!(p.multiplicity, 1);
            assert!(g.eval(p.location).norm() < 1e-12);
        }
    }

    #[test]
    fn combine_and_affine() {
        let z = identity();
        let sq = combine(CombineOp::Mul, &z, &z).unwrap();
        let d = sq.divisor(Region::centered_disc(1.0).unwrap()).unwrap();
        assert_eq!(d.points, vec![crate::region::DivisorPoint::zero(ZERO, 2)]);
        let shifted = compose_affine(&z, ONE, ONE).unwrap();
        assert_eq!(shifted.eval(c(2.0, 0.0)), c(3.0, 0.0));
        let scaled = compose_affine(&sq, c(2.0, 0.0), ZERO).unwrap();
        assert!((scaled.eval(c(1.5, 0.5)) - c(1.5, 0.5).powu(2) * 4.0).norm() < 1e-13);
        assert!(compose_affine(&z, ZERO, ONE).is_err());
        let zero = make_constant(ZERO);
        assert!(combine(CombineOp::Div, &z, &zero).is_err());
        let a = make_constant(c(0.5, 0.0));
        let diff = combine(CombineOp::Sub, &sq, &a).unwrap();
        assert_eq!(diff.eval(c(2.0, 0.0)), c(3.5, 0.0));
    }

    #[test]
    fn reciprocal_of_sn_swaps_divisor() {
        let sn = make_jacobi_sn(0.5).unwrap();
        let inv = combine(CombineOp::Div, &make_constant(ONE), &sn).unwrap();
        let reg = Region::centered_disc(6.0).unwrap();
        let a = sn.divisor(reg).unwrap();
        let b = inv.divisor(reg).unwrap();
        assert_eq!(a.reciprocal(), b);
    }
}
