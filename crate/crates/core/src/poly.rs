//! Dense complex polynomials (ascending coefficients) and a simultaneous
//! root finder that reports multiplicities.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

/// Strips trailing (highest-degree) zero coefficients.
pub fn trim(coeffs: &[C64]) -> Vec<C64> {
    let mut v = coeffs.to_vec();
    while v.len() > 1 && v.last().map_or(false, |c| *c == C64::new(0.0, 0.0)) {
        v.pop();
    }
    v
}

pub fn is_zero(coeffs: &[C64]) -> bool {
    coeffs.iter().all(|c| *c == C64::new(0.0, 0.0))
}

pub fn degree(coeffs: &[C64]) -> usize {
    trim(coeffs).len().saturating_sub(1)
}

pub fn eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Value and first derivative by Horner.
pub fn eval_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    if coeffs.len() <= 1 {
        return vec![C64::new(0.0, 0.0)];
    }
    coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default())
        .collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|c| c * s).collect()
}

/// `lead * prod (z - r)^m`.
pub fn from_roots(lead: C64, roots: &[(C64, u32)]) -> Vec<C64> {
    let mut p = vec![lead];
    for &(r, m) in roots {
        for _ in 0..m {
            p = mul(&p, &[-r, C64::new(1.0, 0.0)]);
        }
    }
    p
}

/// Roots grouped by multiplicity.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub roots: Vec<(C64, u32)>,
    /// False when a cluster could not be separated cleanly from its
    /// neighbours, so the multiplicity assignment is ambiguous.
    pub certified: bool,
}

/// Finds all roots of a polynomial by Aberth–Ehrlich iteration and groups
/// them into clusters of coincident roots.
pub fn roots(coeffs: &[C64]) -> RootSet {
    let p = trim(coeffs);
    let n = p.len() - 1;
    if n == 0 {
        return RootSet { roots: Vec::new(), certified: true };
    }
    // Exact roots at the origin first.
    let zero_mult = p.iter().take_while(|c| **c == C64::new(0.0, 0.0)).count();
    let q: Vec<C64> = p[zero_mult..].to_vec();
    let mut out = Vec::new();
    if zero_mult > 0 {
        out.push((C64::new(0.0, 0.0), zero_mult as u32));
    }
    let m = q.len() - 1;
    if m == 0 {
        return RootSet { roots: out, certified: true };
    }
    let raw = aberth(&q);
    let (clusters, certified) = cluster(&raw);
    out.extend(clusters);
    RootSet { roots: out, certified }
}

fn aberth(p: &[C64]) -> Vec<C64> {
    let n = p.len() - 1;
    let lead = p[n];
    let monic: Vec<C64> = p.iter().map(|c| c / lead).collect();
    if n == 1 {
        return vec![-monic[0]];
    }
    // Fujiwara-type bound for the initial circle.
    let mut bound: f64 = 0.0;
    for k in 0..n {
        let v = monic[k].norm().powf(1.0 / (n - k) as f64);
        bound = bound.max(v);
    }
    let radius = if bound > 0.0 { bound } else { 1.0 };
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut converged = vec![false; n];
    for _ in 0..2000 {
        let mut all = true;
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let (v, dv) = eval_with_derivative(&monic, z[i]);
            if v == C64::new(0.0, 0.0) {
                converged[i] = true;
                continue;
            }
            let ratio = v / dv;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d != C64::new(0.0, 0.0) {
                        s += d.inv();
                    }
                }
            }
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                let nudge = 1e-8 * (1.0 + z[i].norm());
                z[i] += C64::new(nudge, 0.0);
                all = false;
                continue;
            }
            z[i] -= w;
            if w.norm() <= 4.0 * f64::EPSILON * (1.0 + z[i].norm()) {
                converged[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    z
}

/// Single-linkage clustering with a tolerance loose enough to absorb the
/// `eps^(1/m)` scatter of an m-fold root.
fn cluster(raw: &[C64]) -> (Vec<(C64, u32)>, bool) {
    let n = raw.len();
    let scale = raw.iter().fold(1.0f64, |a, z| a.max(z.norm()));
    let tol = 1e-5 * scale;
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    let mut ambiguous = false;
    for i in 0..n {
        for j in i + 1..n {
            let d = (raw[i] - raw[j]).norm();
            if d < tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b] = a;
                }
            } else if d < 100.0 * tol {
                ambiguous = true;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, v)) => v.push(raw[i]),
            None => groups.push((r, vec![raw[i]])),
        }
    }
    let out = groups
        .into_iter()
        .map(|(_, v)| {
            let c = v.iter().fold(C64::new(0.0, 0.0), |a, z| a + z) / v.len() as f64;
            (c, v.len() as u32)
        })
        .collect();
    (out, !ambiguous)
}
