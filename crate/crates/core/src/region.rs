//! Regions of the plane and divisors (finite multisets of zeros and poles).

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disc { center: C64, radius: f64 },
    Annulus { center: C64, r_in: f64, r_out: f64 },
    Rectangle { lo: C64, hi: C64 },
}

impl Region {
    pub fn disc(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidRegion(format!("disc radius {radius} must be positive")));
        }
        Ok(Region::Disc { center, radius })
    }

    pub fn centered_disc(radius: f64) -> Result<Self> {
        Self::disc(C64::new(0.0, 0.0), radius)
    }

    pub fn annulus(center: C64, r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in > 0.0) || !(r_in < r_out) || !r_out.is_finite() {
            return Err(Error::InvalidRegion(format!(
                "annulus radii must satisfy 0 < r_in < r_out, got {r_in}, {r_out}"
            )));
        }
        Ok(Region::Annulus { center, r_in, r_out })
    }

    pub fn rectangle(lo: C64, hi: C64) -> Result<Self> {
        if !(lo.re < hi.re && lo.im < hi.im) {
            return Err(Error::InvalidRegion(format!(
                "corner {lo} must lie strictly below-left of {hi}"
            )));
        }
        Ok(Region::Rectangle { lo, hi })
    }

    /// Open-set membership.
    pub fn contains(&self, z: C64) -> bool {
        match *self {
            Region::Disc { center, radius } => (z - center).norm() < radius,
            Region::Annulus { center, r_in, r_out } => {
                let d = (z - center).norm();
                d > r_in && d < r_out
            }
            Region::Rectangle { lo, hi } => {
                z.re > lo.re && z.re < hi.re && z.im > lo.im && z.im < hi.im
            }
        }
    }

    /// Smallest disc (center, radius) containing the region.
    pub fn bounding_disc(&self) -> (C64, f64) {
        match *self {
            Region::Disc { center, radius } => (center, radius),
            Region::Annulus { center, r_out, .. } => (center, r_out),
            Region::Rectangle { lo, hi } => {
                let c = (lo + hi) * 0.5;
                (c, (hi - c).norm())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointKind {
    Zero,
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisorPoint {
    pub location: C64,
    pub multiplicity: u32,
    pub kind: PointKind,
}

impl DivisorPoint {
    pub fn zero(location: C64, multiplicity: u32) -> Self {
        DivisorPoint { location, multiplicity, kind: PointKind::Zero }
    }

    pub fn pole(location: C64, multiplicity: u32) -> Self {
        DivisorPoint { location, multiplicity, kind: PointKind::Pole }
    }

    /// Multiplicity with sign: positive for zeros, negative for poles.
    pub fn signed(&self) -> i64 {
        match self.kind {
            PointKind::Zero => self.multiplicity as i64,
            PointKind::Pole => -(self.multiplicity as i64),
        }
    }
}

/// Finite multiset of zeros and poles inside a region.
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor {
    pub points: Vec<DivisorPoint>,
    pub region: Region,
    pub certified: bool,
}

pub(crate) fn same_location(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-10 * (1.0 + a.norm().max(b.norm()))
}

impl Divisor {
    pub fn empty(region: Region) -> Self {
        Divisor { points: Vec::new(), region, certified: true }
    }

    /// Builds a divisor from signed contributions, merging coincident
    /// locations, dropping points outside the region and net-zero points.
    pub fn from_signed<I>(region: Region, items: I, certified: bool) -> Self
    where
        I: IntoIterator<Item = (C64, i64)>,
    {
        let mut acc: Vec<(C64, i64)> = Vec::new();
        for (z, m) in items {
            if !region.contains(z) || m == 0 {
                continue;
            }
            match acc.iter_mut().find(|(w, _)| same_location(*w, z)) {
                Some(slot) => slot.1 += m,
                None => acc.push((z, m)),
            }
        }
        let mut points: Vec<DivisorPoint> = acc
            .into_iter()
            .filter(|(_, m)| *m != 0)
            .map(|(z, m)| {
                if m > 0 {
                    DivisorPoint::zero(z, m as u32)
                } else {
                    DivisorPoint::pole(z, (-m) as u32)
                }
            })
            .collect();
        sort_points(&mut points);
        Divisor { points, region, certified }
    }

    pub fn zeros(&self) -> impl Iterator<Item = &DivisorPoint> {
        self.points.iter().filter(|p| p.kind == PointKind::Zero)
    }

    pub fn poles(&self) -> impl Iterator<Item = &DivisorPoint> {
        self.points.iter().filter(|p| p.kind == PointKind::Pole)
    }

    /// Total multiplicity of the given kind.
    pub fn count(&self, kind: PointKind) -> u64 {
        self.points.iter().filter(|p| p.kind == kind).map(|p| p.multiplicity as u64).sum()
    }

    /// Zeros minus poles, with multiplicity.
    pub fn net(&self) -> i64 {
        self.points.iter().map(|p| p.signed()).sum()
    }

    /// Divisor with zeros and poles exchanged (divisor of `1/h`).
    pub fn reciprocal(&self) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| DivisorPoint {
                kind: match p.kind {
                    PointKind::Zero => PointKind::Pole,
                    PointKind::Pole => PointKind::Zero,
                },
                ..*p
            })
            .collect();
        let mut d = Divisor { points, region: self.region, certified: self.certified };
        sort_points(&mut d.points);
        d
    }

    /// Restriction to a sub-region.
    pub fn restrict(&self, region: Region) -> Self {
        let points = self.points.iter().copied().filter(|p| region.contains(p.location)).collect();
        Divisor { points, region, certified: self.certified }
    }

    /// Same points, kinds and multiplicities, locations within `tol`.
    pub fn matches(&self, other: &Divisor, tol: f64) -> bool {
        if self.points.len() != other.points.len() {
            return false;
        }
        let mut used = alloc::vec![false; other.points.len()];
        for p in &self.points {
            let hit = other.points.iter().enumerate().position(|(j, q)| {
                !used[j] && q.kind == p.kind && q.multiplicity == p.multiplicity && (q.location - p.location).norm() < tol
            });
            match hit {
                Some(j) => used[j] = true,
                None => return false,
            }
        }
        true
    }

    /// Checks the structural invariants: points inside the region, no
    /// duplicates, positive multiplicities.
    pub fn is_well_formed(&self) -> bool {
        for (i, p) in self.points.iter().enumerate() {
            if p.multiplicity == 0 || !self.region.contains(p.location) {
                return false;
            }
            if self.points[i + 1..].iter().any(|q| same_location(q.location, p.location)) {
                return false;
            }
        }
        true
    }
}

/// Deterministic order: by modulus, then argument, then kind.
pub(crate) fn sort_points(points: &mut [DivisorPoint]) {
    points.sort_by(|a, b| {
        let ka = (a.location.norm(), a.location.arg(), a.kind);
        let kb = (b.location.norm(), b.location.arg(), b.kind);
        ka.partial_cmp(&kb).unwrap_or(core::cmp::Ordering::Equal)
    });
}
