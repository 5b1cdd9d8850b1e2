//! Argument-principle subdivision of a rectangle.
//!
//! Each cell carries the phase increments of `h` along its four edges, so a
//! split only evaluates the new interior edge and the halves of the two cut
//! edges. With pole candidates available the zero count of a cell is
//! `winding + enclosed pole order`, which keeps zero/pole pairs from hiding
//! inside a cell of winding zero. Without candidates (blind mode) cells of
//! winding zero are refined down to a minimum size and then discarded.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::winding::{circle_moments, circle_winding, segment_phase, Moments};
#[allow(unused_imports)]
use num_traits::Float;

use crate::function::FunctionHandle;
use crate::C64;

const SPLIT_OFFSETS: [f64; 7] = [0.5, 0.4375, 0.5625, 0.375, 0.625, 0.3125, 0.6875];
const MAX_CELL_DEPTH: u32 = 64;
const SPREAD_TOL: f64 = 1e-9;
const POLE_PROBE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SubdivisionStats {
    pub cells: usize,
    pub max_depth: u32,
    /// Splits where the halves of a cut edge did not reproduce its phase.
    pub additivity_violations: usize,
    /// Cells that could neither be split nor resolved.
    pub failed_cells: usize,
    /// Multiple points whose spread could not be certified below tolerance.
    pub unresolved_clusters: usize,
    /// Smallest `|h| / scale` met on any accepted edge.
    pub min_boundary_modulus: f64,
}

pub(crate) struct Outcome {
    pub points: Vec<(C64, i64)>,
    pub stats: SubdivisionStats,
    pub budget_exhausted: bool,
}

pub(crate) struct Setup<'a> {
    pub h: &'a FunctionHandle,
    /// Poles with their orders; `None` selects blind mode.
    pub poles: Option<&'a [(C64, u32)]>,
    pub threshold: f64,
    pub max_cells: usize,
    /// Blind mode: cells of winding zero smaller than this are discarded.
    pub min_cell: f64,
}

struct Cell {
    lo: C64,
    hi: C64,
    /// Phase increments along bottom, right, top, left (counter-clockwise).
    edges: [f64; 4],
    poles: Vec<usize>,
    depth: u32,
}

impl Cell {
    fn winding(&self) -> Option<i64> {
        let w = self.edges.iter().sum::<f64>() / TAU;
        let r = w.round();
        if (w - r).abs() < 0.05 {
            Some(r as i64)
        } else {
            None
        }
    }

    fn side(&self) -> f64 {
        (self.hi.re - self.lo.re).max(self.hi.im - self.lo.im)
    }
}

struct Engine<'a> {
    s: Setup<'a>,
    stats: SubdivisionStats,
}

impl<'a> Engine<'a> {
    fn edge(&mut self, a: C64, b: C64) -> Option<f64> {
        match segment_phase(self.s.h, a, b, self.s.threshold) {
            Ok(p) => {
                self.stats.min_boundary_modulus = self.stats.min_boundary_modulus.min(p.min_relative);
                Some(p.increment)
            }
            Err(_) => None,
        }
    }

    fn pole_list(&self) -> &[(C64, u32)] {
        self.s.poles.unwrap_or(&[])
    }

    /// Splits along the longer side, trying several offsets so the cut
    /// avoids poles and boundary-grazing zeros.
    fn split(&mut self, c: &Cell) -> Option<(Cell, Cell)> {
        let vertical = c.hi.re - c.lo.re >= c.hi.im - c.lo.im;
        let short = (c.hi.re - c.lo.re).min(c.hi.im - c.lo.im);
        let gap = 0.02 * short;
        let (lo, hi) = (c.lo, c.hi);
        for t in SPLIT_OFFSETS {
            let s = if vertical { lo.re + t * (hi.re - lo.re) } else { lo.im + t * (hi.im - lo.im) };
            let clear = c.poles.iter().all(|&i| {
                let p = self.pole_list()[i].0;
                (if vertical { p.re } else { p.im } - s).abs() > gap
            });
            if !clear {
                continue;
            }
            let children = if vertical {
                let (b0, b1) = (lo, C64::new(s, lo.im));
                let (t0, t1) = (C64::new(s, hi.im), C64::new(lo.re, hi.im));
                let Some(bl) = self.edge(b0, b1) else { continue };
                let Some(br) = self.edge(b1, C64::new(hi.re, lo.im)) else { continue };
                let Some(tr) = self.edge(hi, t0) else { continue };
                let Some(tl) = self.edge(t0, t1) else { continue };
                let Some(mid) = self.edge(b1, t0) else { continue };
                self.check_additivity(bl + br, c.edges[0]);
                self.check_additivity(tr + tl, c.edges[2]);
                let left = Cell { lo, hi: t0, edges: [bl, mid, tl, c.edges[3]], poles: Vec::new(), depth: c.depth + 1 };
                let right = Cell { lo: b1, hi, edges: [br, c.edges[1], tr, -mid], poles: Vec::new(), depth: c.depth + 1 };
                (left, right)
            } else {
                let (r0, r1) = (C64::new(hi.re, lo.im), C64::new(hi.re, s));
                let (l0, l1) = (C64::new(lo.re, hi.im), C64::new(lo.re, s));
                let Some(rb) = self.edge(r0, r1) else { continue };
                let Some(rt) = self.edge(r1, hi) else { continue };
                let Some(lt) = self.edge(l0, l1) else { continue };
                let Some(lb) = self.edge(l1, lo) else { continue };
                let Some(mid) = self.edge(l1, r1) else { continue };
                self.check_additivity(rb + rt, c.edges[1]);
                self.check_additivity(lt + lb, c.edges[3]);
                let bottom = Cell { lo, hi: r1, edges: [c.edges[0], rb, -mid, lb], poles: Vec::new(), depth: c.depth + 1 };
                let top = Cell { lo: l1, hi, edges: [mid, rt, c.edges[2], lt], poles: Vec::new(), depth: c.depth + 1 };
                (bottom, top)
            };
            let (mut a, mut b) = children;
            for &i in &c.poles {
                let p = self.pole_list()[i].0;
                if (if vertical { p.re } else { p.im }) < s {
                    a.poles.push(i);
                } else {
                    b.poles.push(i);
                }
            }
            // A negative zero count means the cut ran through a zero.
            let negative = |n: Option<i64>| matches!(n, Some(z) if z < 0);
            if self.s.poles.is_some() && (negative(self.zero_count(&a)) || negative(self.zero_count(&b))) {
                continue;
            }
            return Some((a, b));
        }
        None
    }

    /// `winding + enclosed pole order`, when the winding is integral.
    fn zero_count(&self, c: &Cell) -> Option<i64> {
        let enclosed: i64 = c.poles.iter().map(|&i| self.pole_list()[i].1 as i64).sum();
        c.winding().map(|w| w + enclosed)
    }

    fn check_additivity(&mut self, halves: f64, whole: f64) {
        if (halves - whole).abs() > 1e-3 {
            self.stats.additivity_violations += 1;
        }
    }

    /// Locates the `count` (signed) points of a cell with one disc moment
    /// computation, shrinking around multiple points to certify them.
    fn isolate(&mut self, c: &Cell, count: i64) -> Option<C64> {
        let center = (c.lo + c.hi) * 0.5;
        let rho = 0.5 * (c.hi - c.lo).norm() * 1.02;
        if self.pole_list().iter().any(|p| (p.0 - center).norm() < rho * 1.05) {
            return None;
        }
        let m = circle_moments(self.s.h, center, rho)?;
        if m.winding != count || m.deviation(rho) > SPREAD_TOL {
            return None;
        }
        let mut loc = m.centroid(center);
        if count.abs() >= 2 {
            // The first shrink must succeed; later ones only sharpen.
            match self.probe(loc, 1e-2 * rho, count) {
                Some(next) => loc = next.centroid(loc),
                None if c.side() < 1e-7 * (1.0 + center.norm()) => self.stats.unresolved_clusters += 1,
                None => return None,
            }
            let mut r = 1e-2 * rho;
            for _ in 0..2 {
                r *= 1e-2;
                match self.probe(loc, r, count) {
                    Some(next) => loc = next.centroid(loc),
                    None => break,
                }
            }
        }
        Some(loc)
    }

    fn probe(&self, c: C64, r: f64, count: i64) -> Option<Moments> {
        let (w, _) = circle_winding(self.s.h, c, r, self.s.threshold).ok()?;
        if w != count {
            return None;
        }
        let m = circle_moments(self.s.h, c, r)?;
        (m.winding == count && m.deviation(r) <= SPREAD_TOL).then_some(m)
    }
}

pub(crate) fn subdivide(setup: Setup<'_>, lo: C64, hi: C64) -> Option<Outcome> {
    let blind = setup.poles.is_none();
    let mut e = Engine { s: setup, stats: SubdivisionStats { min_boundary_modulus: f64::INFINITY, ..Default::default() } };
    let corners = [lo, C64::new(hi.re, lo.im), hi, C64::new(lo.re, hi.im)];
    let mut edges = [0.0; 4];
    for i in 0..4 {
        edges[i] = e.edge(corners[i], corners[(i + 1) % 4])?;
    }
    let inside = |p: C64| p.re > lo.re && p.re < hi.re && p.im > lo.im && p.im < hi.im;
    let poles: Vec<usize> = (0..e.pole_list().len()).filter(|&i| inside(e.pole_list()[i].0)).collect();
    let mut points: Vec<(C64, i64)> = poles.iter().map(|&i| (e.pole_list()[i].0, -(e.pole_list()[i].1 as i64))).collect();
    let mut queue = VecDeque::new();
    queue.push_back(Cell { lo, hi, edges, poles, depth: 0 });
    let mut exhausted = false;
    while let Some(cell) = queue.pop_front() {
        e.stats.cells += 1;
        e.stats.max_depth = e.stats.max_depth.max(cell.depth);
        if e.stats.cells > e.s.max_cells {
            exhausted = true;
            break;
        }
        let winding = cell.winding();
        if let Some(w) = winding {
            if blind {
                if w == 0 && cell.side() < e.s.min_cell {
                    continue;
                }
                if w != 0 {
                    if let Some(z) = e.isolate(&cell, w) {
                        points.push((z, w));
                        continue;
                    }
                }
            } else {
                let zeros = e.zero_count(&cell).unwrap_or(w);
                if zeros == 0 {
                    continue;
                }
                if zeros > 0 && cell.poles.is_empty() {
                    if let Some(z) = e.isolate(&cell, zeros) {
                        points.push((z, zeros));
                        continue;
                    }
                }
            }
        } else {
            e.stats.additivity_violations += 1;
        }
        if cell.depth >= MAX_CELL_DEPTH {
            e.stats.failed_cells += 1;
            continue;
        }
        match e.split(&cell) {
            Some((a, b)) => {
                queue.push_back(a);
                queue.push_back(b);
            }
            None => e.stats.failed_cells += 1,
        }
    }
    Some(Outcome { points, stats: e.stats, budget_exhausted: exhausted })
}

/// Orders of the candidate poles, from the winding on two concentric circles
/// of radius about `POLE_PROBE (1 + |p|)` that must agree. Zero-order
/// candidates are dropped. The probe is tiny because a candidate's own
/// a-points can sit arbitrarily close to it.
pub(crate) fn pole_orders(h: &FunctionHandle, candidates: &[C64], threshold: f64) -> Option<Vec<(C64, u32)>> {
    let mut out = Vec::new();
    for (i, &p) in candidates.iter().enumerate() {
        let mut nearest = f64::INFINITY;
        for (j, &q) in candidates.iter().enumerate() {
            if i != j {
                nearest = nearest.min((p - q).norm());
            }
        }
        let mut rho = (POLE_PROBE * (1.0 + p.norm())).min(0.4 * nearest);
        let mut order = None;
        for _ in 0..8 {
            let a = circle_winding(h, p, rho, threshold);
            let b = circle_winding(h, p, 0.25 * rho, threshold);
            if let (Ok((wa, _)), Ok((wb, _))) = (a, b) {
                if wa == wb {
                    order = Some(if wa < 0 { (-wa) as u32 } else { 0 });
                    break;
                }
            }
            rho *= 0.25;
        }
        match order? {
            0 => {}
            n => out.push((p, n)),
        }
    }
    Some(out)
}
