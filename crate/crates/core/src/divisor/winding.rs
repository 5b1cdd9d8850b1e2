//! Argument tracking along paths and contour moments.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::function::FunctionHandle;
use crate::C64;

/// Default certification threshold: boundary values must satisfy
/// `|h| >= threshold * scale`, with `scale` the geometric mean of `|h|` over
/// the coarse samples of the path.
pub(crate) const BOUNDARY_THRESHOLD: f64 = 1e-7;

const MAX_STEP: f64 = PI / 6.0;
const MAX_DEPTH: u32 = 44;
const MAX_RATIO: f64 = 2.0;
/// Difference length relative to the step it tests.
const SLOPE_STEP: f64 = 1e-3;

/// `(t, z, h(z), |h'/h|)`.
type Sample = (f64, C64, C64, f64);

#[derive(Debug, Clone, Copy)]
pub(crate) struct Degenerate {
    #[cfg_attr(not(test), allow(dead_code))]
    pub at: C64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Phase {
    /// Continuous change of `arg h` along the path.
    pub increment: f64,
    /// `min |h| / scale` over all samples.
    pub min_relative: f64,
}

fn valid(v: C64) -> bool {
    v.re.is_finite() && v.im.is_finite() && (v.re != 0.0 || v.im != 0.0)
}

/// Moduli within a factor `MAX_RATIO`; a sharp dip flags a nearby zero whose
/// phase swing the samples could otherwise alias.
fn gentle(a: C64, b: C64) -> bool {
    let (x, y) = (a.norm(), b.norm());
    x <= MAX_RATIO * y && y <= MAX_RATIO * x
}

/// `|h'/h|` at `z` by a forward difference of length `e`.
fn slope(h: &FunctionHandle, z: C64, v: C64, e: f64) -> f64 {
    let s = ((h.eval(z + e) - v) / (e * v)).norm();
    if s.is_finite() {
        s
    } else {
        f64::INFINITY
    }
}

/// Argument increment of `h` along `path(t)`, `t ∈ [0, 1]`, refining each
/// coarse piece until consecutive samples differ by less than π/6 in phase
/// and by at most `MAX_RATIO` in modulus, and the step times `|h'/h|` at
/// its samples stays below π/6. The last test sees zeros of even order
/// that sampling alone can alias.
pub(crate) fn phase_along<P>(h: &FunctionHandle, path: P, pieces: usize, threshold: f64) -> Result<Phase, Degenerate>
where
    P: Fn(f64) -> C64,
{
    let pieces = pieces.max(2);
    let mut ts: Vec<f64> = Vec::with_capacity(pieces + 1);
    let mut zs: Vec<C64> = Vec::with_capacity(pieces + 1);
    let mut vs: Vec<C64> = Vec::with_capacity(pieces + 1);
    let mut log_sum = 0.0;
    for j in 0..=pieces {
        let t = j as f64 / pieces as f64;
        let z = path(t);
        let v = h.eval(z);
        if !valid(v) {
            return Err(Degenerate { at: z });
        }
        log_sum += v.norm().ln();
        ts.push(t);
        zs.push(z);
        vs.push(v);
    }
    let scale = (log_sum / (pieces + 1) as f64).exp();
    let floor = threshold * scale;
    let mut min_rel = f64::INFINITY;
    for v in &vs {
        min_rel = min_rel.min(v.norm() / scale);
    }
    if min_rel < threshold {
        return Err(Degenerate { at: path(0.0) });
    }
    let mut total = 0.0;
    let coarse = (zs[1] - zs[0]).norm();
    let ss: Vec<f64> = zs.iter().zip(&vs).map(|(&z, &v)| slope(h, z, v, SLOPE_STEP * coarse)).collect();
    let mut stack: Vec<(Sample, Sample, u32)> = Vec::new();
    for j in (0..pieces).rev() {
        stack.push(((ts[j], zs[j], vs[j], ss[j]), (ts[j + 1], zs[j + 1], vs[j + 1], ss[j + 1]), 0));
    }
    while let Some((a, b, depth)) = stack.pop() {
        let tm = 0.5 * (a.0 + b.0);
        let zm = path(tm);
        let vm = h.eval(zm);
        if !valid(vm) || vm.norm() < floor {
            return Err(Degenerate { at: zm });
        }
        min_rel = min_rel.min(vm.norm() / scale);
        let half = (b.1 - a.1).norm() * 0.5;
        let m = (tm, zm, vm, slope(h, zm, vm, SLOPE_STEP * half));
        let d1 = (vm / a.2).arg();
        let d2 = (b.2 / vm).arg();
        let reach = half * a.3.max(b.3).max(m.3);
        if d1.abs() < MAX_STEP && d2.abs() < MAX_STEP && reach < MAX_STEP && gentle(a.2, vm) && gentle(vm, b.2) {
            total += d1 + d2;
        } else {
            if depth >= MAX_DEPTH {
                return Err(Degenerate { at: zm });
            }
            // Push right half first so the left half is processed next.
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    Ok(Phase { increment: total, min_relative: min_rel })
}

pub(crate) fn segment_phase(h: &FunctionHandle, a: C64, b: C64, threshold: f64) -> Result<Phase, Degenerate> {
    phase_along(h, |t| a + (b - a) * t, 8, threshold)
}

/// Winding number of `h` around the circle `|z - c| = rho`.
pub(crate) fn circle_winding(h: &FunctionHandle, c: C64, rho: f64, threshold: f64) -> Result<(i64, f64), Degenerate> {
    let ph = phase_along(h, |t| c + C64::from_polar(rho, TAU * t), 32, threshold)?;
    let w = ph.increment / TAU;
    let r = w.round();
    if (w - r).abs() > 0.05 {
        return Err(Degenerate { at: c + rho });
    }
    Ok((r as i64, ph.min_relative))
}

/// Power sums of the divisor inside a circle relative to its centre:
/// `p[k-1] = Σ_zeros (z-c)^k − Σ_poles (z-c)^k`.
#[derive(Debug, Clone)]
pub(crate) struct Moments {
    pub winding: i64,
    pub p: Vec<C64>,
}

impl Moments {
    /// Largest normalised deviation `|p_k/m − (p_1/m)^k| / ρ^k` from the
    /// power sums of a single point of multiplicity `m`; zero when all
    /// enclosed points coincide.
    pub fn deviation(&self, rho: f64) -> f64 {
        if self.winding == 0 {
            return f64::INFINITY;
        }
        let w = self.winding as f64;
        let mean = self.p[0] / w;
        let mut worst: f64 = 0.0;
        let mut pow = mean;
        let mut rk = rho;
        for pk in self.p.iter().skip(1) {
            pow *= mean;
            rk *= rho;
            worst = worst.max((pk / w - pow).norm() / rk);
        }
        worst
    }

    pub fn centroid(&self, c: C64) -> C64 {
        c + self.p[0] / self.winding as f64
    }
}

/// Computes power sums up to order `max(2, |winding| + 1)` from the Fourier
/// coefficients of `log h` on the circle: the coefficient of `e^{-ikθ}`
/// equals `-p_k / (k ρ^k)`.
pub(crate) fn circle_moments(h: &FunctionHandle, c: C64, rho: f64) -> Option<Moments> {
    let mut prev: Option<Moments> = None;
    let mut n = 64usize;
    while n <= 16384 {
        if let Some(m) = moments_at(h, c, rho, n) {
            if let Some(old) = &prev {
                let tol = 1e-13 * rho * (1.0 + m.winding.unsigned_abs() as f64);
                if old.winding == m.winding && (m.p[0] - old.p[0]).norm() <= tol {
                    return Some(m);
                }
            }
            prev = Some(m);
        }
        n *= 2;
    }
    None
}

fn moments_at(h: &FunctionHandle, c: C64, rho: f64, n: usize) -> Option<Moments> {
    let mut vals: Vec<C64> = Vec::with_capacity(n);
    for j in 0..n {
        let v = h.eval(c + C64::from_polar(rho, TAU * j as f64 / n as f64));
        if !valid(v) {
            return None;
        }
        vals.push(v);
    }
    let mut phase = Vec::with_capacity(n);
    let mut acc = vals[0].arg();
    phase.push(acc);
    for j in 1..=n {
        let d = (vals[j % n] / vals[j - 1]).arg();
        if d.abs() > PI / 3.0 {
            return None;
        }
        acc += d;
        if j < n {
            phase.push(acc);
        }
    }
    let total = acc - vals[0].arg();
    let w = (total / TAU).round();
    if (total / TAU - w).abs() > 1e-6 {
        return None;
    }
    let kmax = (w.abs() as usize + 1).max(2).min(n / 8);
    let mut g = alloc::vec![C64::new(0.0, 0.0); kmax];
    for j in 0..n {
        let th = TAU * j as f64 / n as f64;
        let v = C64::new(vals[j].norm().ln(), phase[j] - w * th);
        let step = C64::from_polar(1.0, th);
        let mut e = step;
        for gk in g.iter_mut() {
            *gk += v * e;
            e *= step;
        }
    }
    let mut p = Vec::with_capacity(kmax);
    let mut rk = 1.0;
    for (k, gk) in g.iter().enumerate() {
        rk *= rho;
        p.push(-gk / n as f64 * ((k + 1) as f64 * rk));
    }
    Some(Moments { winding: w as i64, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{make_rational_from_roots, make_jacobi_sn};

    #[test]
    fn winding_counts_zeros_minus_poles() {
        let h = make_rational_from_roots(
            C64::new(1.0, 0.0),
            &[(C64::new(0.2, 0.1), 2), (C64::new(-0.5, 0.0), 1)],
            &[(C64::new(0.0, -0.6), 1)],
        )
        .unwrap();
        let (w, _) = circle_winding(&h, C64::new(0.0, 0.0), 1.0, BOUNDARY_THRESHOLD).unwrap();
        assert_eq!(w, 2);
        let (w, _) = circle_winding(&h, C64::new(0.0, -0.6), 0.1, BOUNDARY_THRESHOLD).unwrap();
        assert_eq!(w, -1);
    }

    #[test]
    fn moments_locate_multiple_zero() {
        let z0 = C64::new(0.31, -0.17);
        let h = make_rational_from_roots(C64::new(2.0, 0.0), &[(z0, 3)], &[(C64::new(3.0, 0.0), 1)]).unwrap();
        let c = C64::new(0.25, -0.1);
        let m = circle_moments(&h, c, 0.5).unwrap();
        assert_eq!(m.winding, 3);
        assert!((m.centroid(c) - z0).norm() < 1e-13);
        assert!(m.deviation(0.5) < 1e-12);
    }

    #[test]
    fn moments_detect_two_points() {
        let h = make_rational_from_roots(
            C64::new(1.0, 0.0),
            &[(C64::new(0.1, 0.0), 1), (C64::new(-0.1, 0.0), 1)],
            &[],
        )
        .unwrap();
        let m = circle_moments(&h, C64::new(0.0, 0.0), 0.5).unwrap();
        assert_eq!(m.winding, 2);
        assert!((m.deviation(0.5) - 0.04).abs() < 1e-12);
        // Cube roots of unity: p1 = p2 = 0, so only p3 tells them apart.
        let h = make_rational_from_roots(
            C64::new(1.0, 0.0),
            &[(C64::new(1.0, 0.0), 1), (C64::from_polar(1.0, TAU / 3.0), 1), (C64::from_polar(1.0, -TAU / 3.0), 1)],
            &[],
        )
        .unwrap();
        let m = circle_moments(&h, C64::new(0.0, 0.0), 2.0).unwrap();
        assert_eq!(m.winding, 3);
        assert!((m.deviation(2.0) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn degenerate_when_zero_on_path() {
        let sn = make_jacobi_sn(0.5).unwrap();
        let e = segment_phase(&sn, C64::new(-1.0, 0.0), C64::new(1.0, 0.0), BOUNDARY_THRESHOLD).unwrap_err();
        assert!(e.at.norm() < 1e-3, "{}", e.at);
    }

    #[test]
    fn periodic_double_zeros_are_not_aliased() {
        // sn + 1 has a column of double zeros 0.027 from this segment with
        // a period close to the coarse sample spacing.
        let sn = make_jacobi_sn(0.5).unwrap();
        let h = crate::function::combine(
            crate::function::CombineOp::Add,
            &sn,
            &crate::function::make_constant(C64::new(1.0, 0.0)),
        )
        .unwrap();
        let x = -1.712_586_816_084_202_8;
        let (a, m, b) = (C64::new(x, -15.161_968_879_845_53), C64::new(x, 0.115_878_604_572_849), C64::new(x, 15.393_726_088_991_23));
        let whole = segment_phase(&h, a, b, BOUNDARY_THRESHOLD).unwrap().increment;
        let lo = segment_phase(&h, a, m, BOUNDARY_THRESHOLD).unwrap().increment;
        let hi = segment_phase(&h, m, b, BOUNDARY_THRESHOLD).unwrap().increment;
        assert!((whole - lo - hi).abs() < 1e-9, "{whole} vs {}", lo + hi);
    }
}
