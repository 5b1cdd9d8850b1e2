//! Circle averages `(1/2π) ∫ φ(re^{iθ}) dθ`.
//!
//! The circle is cut into a uniform dyadic panel grid; each panel carries an
//! 8-point Gauss–Legendre estimate and the estimate on its two halves. Panels
//! whose two estimates disagree are bisected, largest error first, until the
//! summed error estimate drops below the target. Kinks of `log⁺` and
//! integrable logarithmic singularities near the circle are refined locally;
//! no node is ever dropped.
//!
//! Several integrands can share one adaptive node set, which keeps the
//! differences of averages that enter the second main theorem consistent.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::sum::Compensated;
use crate::{Error, Result, C64};

const GL_X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
const GL_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Nodes of the coarsest uniform level (power of two, at least 64).
    pub base_nodes: usize,
    /// Maximum bisection depth of any panel.
    pub max_refinements: u32,
    /// Relative distance `d / r` that divisor points are kept from the circle.
    pub singularity_guard: f64,
    /// Target absolute error of each circle average.
    pub target_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { base_nodes: 256, max_refinements: 20, singularity_guard: 1e-4, target_tol: 1e-11 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base_nodes < 64 || !self.base_nodes.is_power_of_two() {
            return Err(Error::InvalidParameter(alloc::format!(
                "base_nodes must be a power of two >= 64, got {}",
                self.base_nodes
            )));
        }
        if !(self.target_tol > 0.0) {
            return Err(Error::InvalidParameter("target_tol must be positive".into()));
        }
        if !(self.singularity_guard > 0.0 && self.singularity_guard < 0.01) {
            return Err(Error::InvalidParameter("singularity_guard must lie in (0, 0.01)".into()));
        }
        Ok(())
    }

    /// Panels of the coarsest level for radius `r`: enough that a panel
    /// spans at most about half a unit of arc.
    fn base_panels(&self, r: f64) -> usize {
        let by_nodes = self.base_nodes / GL_N;
        let by_arc = (4.0 * PI * r).ceil() as usize / GL_N;
        by_nodes.max(by_arc).next_power_of_two().min(1 << 16)
    }
}

/// Result of one circle average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleAverage {
    pub value: f64,
    /// Achieved error estimate (never below the roundoff floor).
    pub error: f64,
    pub certified: bool,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    /// Estimates on the two halves.
    left: Vec<f64>,
    right: Vec<f64>,
    error: f64,
}

struct Ranked {
    error: f64,
    index: usize,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.index.cmp(&self.index))
    }
}

struct Integrator<'a, F> {
    r: f64,
    k: usize,
    f: &'a mut F,
    buf: Vec<f64>,
    evals: usize,
}

impl<'a, F: FnMut(C64, f64, &mut [f64])> Integrator<'a, F> {
    /// Gauss–Legendre estimate of each component over `[a, b]`.
    fn gl(&mut self, a: f64, b: f64) -> Vec<f64> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut out = vec![0.0; self.k];
        for i in 0..4 {
            for s in [-1.0, 1.0] {
                let t = mid + s * half * GL_X[i];
                let z = C64::from_polar(self.r, t);
                for v in self.buf.iter_mut() {
                    *v = 0.0;
                }
                (self.f)(z, t, &mut self.buf);
                self.evals += 1;
                for (o, v) in out.iter_mut().zip(self.buf.iter()) {
                    *o += GL_W[i] * v;
                }
            }
        }
        for o in out.iter_mut() {
            *o *= half;
        }
        out
    }

    fn panel(&mut self, a: f64, b: f64, depth: u32, whole: Option<Vec<f64>>) -> Panel {
        let m = 0.5 * (a + b);
        let whole = match whole {
            Some(w) => w,
            None => self.gl(a, b),
        };
        let left = self.gl(a, m);
        let right = self.gl(m, b);
        let mut error: f64 = 0.0;
        for i in 0..self.k {
            let d = (whole[i] - left[i] - right[i]).abs();
            error = error.max(if d.is_finite() { d } else { f64::INFINITY });
        }
        Panel { a, b, depth, left, right, error }
    }
}

/// Averages `k` integrands over the circle `|z| = r` on a shared adaptive
/// node set. The callback receives `z = re^{iθ}`, `θ`, and an output slot per
/// integrand.
pub fn circle_average_many<F>(r: f64, k: usize, cfg: &QuadratureConfig, mut integrand: F) -> Vec<CircleAverage>
where
    F: FnMut(C64, f64, &mut [f64]),
{
    let n0 = cfg.base_panels(r);
    let tol = cfg.target_tol * 2.0 * PI;
    let mut it = Integrator { r, k, f: &mut integrand, buf: vec![0.0; k], evals: 0 };
    let width = 2.0 * PI / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0).map(|j| it.panel(width * j as f64, width * (j + 1) as f64, 0, None)).collect();
    let mut heap: BinaryHeap<Ranked> =
        panels.iter().enumerate().map(|(index, p)| Ranked { error: p.error, index }).collect();
    let mut total: f64 = panels.iter().map(|p| p.error).sum();
    while total > tol {
        let Some(top) = heap.pop() else { break };
        let p = &panels[top.index];
        if p.depth >= cfg.max_refinements.max(1) || p.error == 0.0 {
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (a, b, depth) = (p.a, p.b, p.depth);
        let m = 0.5 * (a + b);
        let (lw, rw) = (p.left.clone(), p.right.clone());
        total -= p.error;
        let left = it.panel(a, m, depth + 1, Some(lw));
        let right = it.panel(m, b, depth + 1, Some(rw));
        total += left.error + right.error;
        panels[top.index] = left;
        heap.push(Ranked { error: panels[top.index].error, index: top.index });
        panels.push(right);
        heap.push(Ranked { error: panels[panels.len() - 1].error, index: panels.len() - 1 });
        // Recompute occasionally to keep the running total from drifting.
        if panels.len() % 4096 == 0 {
            total = panels.iter().map(|p| p.error).sum();
        }
        if panels.len() > 400_000 {
            break;
        }
    }
    let evals = it.evals;
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
    let err_total = crate::sum::sum_iter(panels.iter().map(|p| p.error)) / (2.0 * PI);
    (0..k)
        .map(|i| {
            let mut acc = Compensated::new();
            let mut mag = 0.0;
            for p in &panels {
                let v = p.left[i] + p.right[i];
                acc.add(v);
                mag += v.abs();
            }
            let value = acc.value() / (2.0 * PI);
            let floor = 32.0 * f64::EPSILON * mag / (2.0 * PI);
            let error = err_total.max(floor);
            let certified = value.is_finite() && error <= cfg.target_tol.max(floor);
            CircleAverage { value, error, certified, evaluations: evals }
        })
        .collect()
}

/// Scalar form of [`circle_average_many`].
pub fn circle_average<F>(r: f64, cfg: &QuadratureConfig, mut integrand: F) -> CircleAverage
where
    F: FnMut(C64) -> f64,
{
    circle_average_many(r, 1, cfg, |z, _, out| out[0] = integrand(z))[0]
}

/// `log⁺ x = max(log x, 0)`.
pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}
