//! Zero and pole counting in discs.
//!
//! Closed-form divisors are used when a handle provides them; otherwise, or
//! when forced, the argument-principle subdivision in [`subdivide`] locates
//! every zero and pole of `h` in a square around the disc.

mod subdivide;
pub(crate) mod winding;

use alloc::vec::Vec;

pub use subdivide::SubdivisionStats;

#[allow(unused_imports)]
use num_traits::Float;

use crate::function::FunctionHandle;
use crate::region::{Divisor, DivisorPoint, PointKind, Region};
use crate::{Error, Result, C64};

/// Divisor tables are built this much beyond the nominal radius so that
/// outward radius nudges stay inside the table.
pub const TABLE_MARGIN: f64 = 1.011;
/// Located points closer than this to the origin are placed at the origin,
/// matching the initial-Laurent-coefficient order there, whose smallest
/// probe circle is far larger.
pub const ORIGIN_SNAP: f64 = 1e-8;
/// Number of outward radius nudges `r(1 + j·1e-3)` tried.
pub const MAX_NUDGES: u32 = 10;
/// Offset of the subdivision square's centre, relative to its half-side.
const SQUARE_SHIFT: (f64, f64) = (0.013_1, 0.007_7);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    /// Ignore closed-form divisors and subdivide.
    pub force_subdivision: bool,
    /// Ignore pole candidates even when the handle provides them.
    pub blind: bool,
    /// Relative modulus floor on cell boundaries.
    pub boundary_threshold: f64,
    pub max_cells: usize,
    /// Blind mode: cells of winding zero below `min_cell_fraction` times the
    /// half-side of the bounding square are discarded.
    pub min_cell_fraction: f64,
    /// Relative distance `d / r` divisor points must keep from a circle.
    pub guard: f64,
    /// `|f - a|` below which a zero of `L(f)` counts as an a-point of `f`.
    pub match_tol: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            force_subdivision: false,
            blind: false,
            boundary_threshold: winding::BOUNDARY_THRESHOLD,
            max_cells: 500_000,
            min_cell_fraction: 1.0 / 128.0,
            guard: 1e-4,
            match_tol: 1e-6,
        }
    }
}

/// All zeros and poles of a handle in `|z| < radius`.
#[derive(Debug, Clone)]
pub struct DivisorTable {
    pub divisor: Divisor,
    pub radius: f64,
    pub from_oracle: bool,
    pub stats: SubdivisionStats,
}

impl DivisorTable {
    pub fn build(h: &FunctionHandle, radius: f64, opts: &EngineOptions) -> Result<Self> {
        let region = Region::centered_disc(radius)?;
        if h.is_identically_zero() {
            return Err(Error::IdenticallyZero);
        }
        if !opts.force_subdivision {
            if let Some(d) = h.divisor(region) {
                let divisor = snap_origin(d);
                return Ok(DivisorTable { divisor, radius, from_oracle: true, stats: SubdivisionStats::default() });
            }
        }
        let (divisor, stats) = subdivide_disc(h, radius, opts)?;
        Ok(DivisorTable { divisor: snap_origin(divisor), radius, from_oracle: false, stats })
    }

    /// `n(t)`: multiplicity of `kind` in the closed disc `|z| <= t`.
    pub fn n(&self, t: f64, kind: PointKind) -> u64 {
        self.divisor
            .points
            .iter()
            .filter(|p| p.kind == kind && p.location.norm() <= t)
            .map(|p| p.multiplicity as u64)
            .sum()
    }

    /// Integrated counting function `N(r)` of `kind` (sum form).
    pub fn counting(&self, r: f64, kind: PointKind) -> f64 {
        counting_sum(&self.moduli(r, kind), r)
    }

    /// `(|z|, multiplicity)` of the points of `kind` with `|z| <= r`.
    pub fn moduli(&self, r: f64, kind: PointKind) -> Vec<(f64, u32)> {
        self.divisor
            .points
            .iter()
            .filter(|p| p.kind == kind && p.location.norm() <= r)
            .map(|p| (p.location.norm(), p.multiplicity))
            .collect()
    }

    /// Whether every point keeps relative distance `guard` from `|z| = r`.
    pub fn clear_of(&self, r: f64, guard: f64) -> bool {
        self.divisor.points.iter().all(|p| (p.location.norm() - r).abs() >= guard * r)
    }

    pub fn restrict(&self, r: f64) -> Divisor {
        let region = Region::Disc { center: C64::new(0.0, 0.0), radius: r };
        self.divisor.restrict(region)
    }
}

fn snap_origin(d: Divisor) -> Divisor {
    if !d.points.iter().any(|p| p.location.norm() < ORIGIN_SNAP && p.location != C64::new(0.0, 0.0)) {
        return d;
    }
    let items = d.points.iter().map(|p| {
        let z = if p.location.norm() < ORIGIN_SNAP { C64::new(0.0, 0.0) } else { p.location };
        (z, p.signed())
    });
    Divisor::from_signed(d.region, items, d.certified)
}

fn subdivide_disc(h: &FunctionHandle, radius: f64, opts: &EngineOptions) -> Result<(Divisor, SubdivisionStats)> {
    let region = Region::centered_disc(radius)?;
    for j in 0..16 {
        let half = radius * (1.0 + 0.0017 * (j as f64 + 1.0));
        // Off-centre square so that the origin and other round values never
        // sit on a dyadic cut, where an even-order zero is phase-invisible.
        let shift = C64::new(SQUARE_SHIFT.0, SQUARE_SHIFT.1) * half;
        let side = half + shift.norm();
        let square = Region::Disc { center: shift, radius: side * 1.5 };
        let poles = if opts.blind {
            None
        } else {
            match h.pole_candidates(square) {
                Some(c) => {
                    let c: Vec<C64> = c
                        .into_iter()
                        .filter(|z| (z.re - shift.re).abs() < side * 1.001 && (z.im - shift.im).abs() < side * 1.001)
                        .collect();
                    match subdivide::pole_orders(h, &c, opts.boundary_threshold) {
                        Some(p) => Some(p),
                        None => return Err(Error::Uncertified("pole order could not be certified".into())),
                    }
                }
                None => None,
            }
        };
        // Keep the outer square off the poles.
        if let Some(p) = &poles {
            let near = p.iter().any(|(z, _)| {
                ((z.re - shift.re).abs() - side).abs() < 1e-3 * side
                    || ((z.im - shift.im).abs() - side).abs() < 1e-3 * side
            });
            if near {
                continue;
            }
        }
        let setup = subdivide::Setup {
            h,
            poles: poles.as_deref(),
            threshold: opts.boundary_threshold,
            max_cells: opts.max_cells,
            min_cell: opts.min_cell_fraction * side * 1.001,
        };
        let lo = shift - C64::new(side, side);
        let hi = shift + C64::new(side, side);
        let Some(out) = subdivide::subdivide(setup, lo, hi) else { continue };
        let certified = !out.budget_exhausted
            && out.stats.failed_cells == 0
            && out.stats.additivity_violations == 0
            && out.stats.unresolved_clusters == 0;
        let mut d = Divisor::from_signed(region, out.points, certified);
        if d.certified {
            d.certified = argument_check(h, &d, radius, opts.boundary_threshold);
        }
        if out.budget_exhausted {
            return Err(Error::UncertifiedDivisor { cells: out.stats.cells, partial: d });
        }
        return Ok((d, out.stats));
    }
    Err(Error::Uncertified("no admissible bounding square for subdivision".into()))
}

/// Total winding on `|z| = r` against the divisor's net count. The circle is
/// skipped (treated as consistent) when a point sits too close to it.
fn argument_check(h: &FunctionHandle, d: &Divisor, r: f64, threshold: f64) -> bool {
    if d.points.iter().any(|p| (p.location.norm() - r).abs() < 1e-4 * r) {
        return true;
    }
    match winding::circle_winding(h, C64::new(0.0, 0.0), r, threshold) {
        Ok((w, _)) => w == d.net(),
        Err(_) => true,
    }
}

/// Smallest nudge `r(1 + j·1e-3)`, `j = 0..=10`, that keeps every table's
/// points at relative distance `guard` from the circle. Returns the radius
/// and `j`.
pub fn resolve_radius(r: f64, tables: &[&DivisorTable], guard: f64) -> Result<(f64, u32)> {
    for j in 0..=MAX_NUDGES {
        let rj = r * (1.0 + j as f64 * 1e-3);
        if tables.iter().all(|t| t.clear_of(rj, guard)) {
            return Ok((rj, j));
        }
    }
    Err(Error::BoundaryDegeneracy { radius: r })
}

/// Certified divisor of `h` in `|z| < r'`, where `r'` is `r` nudged outward
/// if a point lies too close to the circle. The returned region records `r'`.
pub fn count_in_disc(h: &FunctionHandle, r: f64, opts: &EngineOptions) -> Result<Divisor> {
    let table = DivisorTable::build(h, r * TABLE_MARGIN, opts)?;
    let (r_eff, _) = resolve_radius(r, &[&table], opts.guard)?;
    Ok(table.restrict(r_eff))
}

/// Zeros of `lf` in `|z| < r` at which `|f - a| < match_tol`, carrying the
/// multiplicity of the zero of `lf`.
pub fn joint_count(
    f: &FunctionHandle,
    a: &FunctionHandle,
    lf: &FunctionHandle,
    r: f64,
    opts: &EngineOptions,
) -> Result<Divisor> {
    let table = DivisorTable::build(lf, r * TABLE_MARGIN, opts)?;
    let (r_eff, _) = resolve_radius(r, &[&table], opts.guard)?;
    Ok(joint_from_table(f, a, lf, &table, r_eff, opts.match_tol))
}

/// As [`joint_count`] with a prebuilt table of `lf`.
pub fn joint_from_table(
    f: &FunctionHandle,
    a: &FunctionHandle,
    lf: &FunctionHandle,
    table: &DivisorTable,
    r: f64,
    match_tol: f64,
) -> Divisor {
    let d = table.restrict(r);
    let dlf = lf.derivative();
    let mut points = Vec::new();
    for p in d.zeros() {
        let z = polish(lf, dlf.as_ref(), p.location, p.multiplicity);
        if (f.eval(z) - a.eval(z)).norm() < match_tol {
            points.push(DivisorPoint::zero(p.location, p.multiplicity));
        }
    }
    Divisor { points, region: d.region, certified: d.certified }
}

/// One modified Newton step `z - m h/h'`, kept only if it reduces `|h|`.
fn polish(h: &FunctionHandle, dh: Option<&FunctionHandle>, z: C64, m: u32) -> C64 {
    let v = h.eval(z);
    let dv = match dh {
        Some(d) => d.eval(z),
        None => h.numeric_derivative(1).eval(z),
    };
    let step = v / dv * m as f64;
    if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 1e-3 * (1.0 + z.norm()) {
        return z;
    }
    let w = z - step;
    if h.eval(w).norm() < v.norm() {
        w
    } else {
        z
    }
}

/// `N(r) = Σ m_j log(r/|z_j|) + n(0) log r` over `(|z_j|, m_j)` with
/// `|z_j| <= r`.
pub fn counting_sum(points: &[(f64, u32)], r: f64) -> f64 {
    let mut acc = crate::sum::Compensated::new();
    for &(t, m) in points {
        if t > r {
            continue;
        }
        let l = if t == 0.0 { r.ln() } else { (r / t).ln() };
        acc.add(m as f64 * l);
    }
    acc.value()
}

/// `N(r) = ∫_0^r (n(t) - n(0)) dt/t + n(0) log r`, integrating the step
/// function `n(t)` exactly between consecutive moduli.
pub fn integrate_counting(points: &[(f64, u32)], r: f64) -> f64 {
    let mut pts: Vec<(f64, u32)> = points.iter().copied().filter(|p| p.0 <= r).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let n0: u64 = pts.iter().filter(|p| p.0 == 0.0).map(|p| p.1 as u64).sum();
    let mut acc = crate::sum::Compensated::new();
    acc.add(n0 as f64 * r.ln());
    let rest: Vec<(f64, u32)> = pts.into_iter().filter(|p| p.0 > 0.0).collect();
    let mut cum = 0u64;
    for (i, &(t, m)) in rest.iter().enumerate() {
        cum += m as u64;
        let next = rest.get(i + 1).map_or(r, |p| p.0);
        if next > t {
            acc.add(cum as f64 * (next / t).ln());
        }
    }
    acc.value()
}
