//! Jacobi elliptic functions on the whole complex plane.
//!
//! Real arguments use the arithmetic–geometric mean with descending Landen
//! back-substitution; complex arguments are reduced modulo the period
//! lattice `4K ℤ + 2iK' ℤ` and assembled with Jacobi's imaginary-argument
//! addition formulas.

use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

const MAX_AGM_STEPS: usize = 16;

/// Arithmetic–geometric mean of two positive reals.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 2.0 * f64::EPSILON * an {
            return an;
        }
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, `K(k)` for modulus `k`.
pub fn complete_k(k: f64) -> f64 {
    let kp = (1.0 - k * k).sqrt();
    FRAC_PI_2 / agm(1.0, kp)
}

/// `(sn, cn, dn)` for real `u` and modulus `0 <= k < 1`.
pub fn sncndn_real(u: f64, k: f64) -> (f64, f64, f64) {
    if k == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    let mut a = [0.0f64; MAX_AGM_STEPS + 1];
    let mut c = [0.0f64; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    let mut b = (1.0 - k * k).sqrt();
    c[0] = k;
    let mut n = 0;
    while n < MAX_AGM_STEPS && c[n].abs() > f64::EPSILON {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] * phi.sin() / a[j]).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // dn > 0 on the real line.
    let dn = (1.0 - k * k * sn * sn).sqrt();
    (sn, cn, dn)
}

/// Jacobi elliptic functions for a fixed modulus `k ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    k: f64,
    kp: f64,
    quarter: f64,
    quarter_prime: f64,
}

impl Jacobi {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::InvalidFamily(alloc::format!(
                "jacobi-sn modulus must lie in (0, 1), got {k}"
            )));
        }
        let kp = (1.0 - k * k).sqrt();
        Ok(Jacobi { k, kp, quarter: complete_k(k), quarter_prime: complete_k(kp) })
    }

    pub fn modulus(&self) -> f64 {
        self.k
    }

    /// Quarter period `K(k)`.
    pub fn quarter_period(&self) -> f64 {
        self.quarter
    }

    /// Complementary quarter period `K'(k) = K(sqrt(1-k²))`.
    pub fn quarter_period_prime(&self) -> f64 {
        self.quarter_prime
    }

    /// Reduces `z` into `[-2K, 2K) × [-K', K')`. Both `sn` and the product
    /// `cn·dn` are invariant under this reduction.
    pub fn reduce(&self, z: C64) -> C64 {
        let px = 4.0 * self.quarter;
        let py = 2.0 * self.quarter_prime;
        let x = z.re - px * (z.re / px).round();
        let y = z.im - py * (z.im / py).round();
        C64::new(x, y)
    }

    /// `(sn, cn, dn)` at a complex point, without lattice reduction.
    pub fn sncndn(&self, z: C64) -> (C64, C64, C64) {
        let (s, c, d) = sncndn_real(z.re, self.k);
        if z.im == 0.0 {
            return (C64::new(s, 0.0), C64::new(c, 0.0), C64::new(d, 0.0));
        }
        let (s1, c1, d1) = sncndn_real(z.im, self.kp);
        let k2 = self.k * self.k;
        let den = c1 * c1 + k2 * s * s * s1 * s1;
        let sn = C64::new(s * d1, c * d * s1 * c1) / den;
        let cn = C64::new(c * c1, -s * d * s1 * d1) / den;
        let dn = C64::new(d * c1 * d1, -k2 * s * c * s1) / den;
        (sn, cn, dn)
    }

    pub fn sn(&self, z: C64) -> C64 {
        self.sncndn(self.reduce(z)).0
    }

    /// `sn(z)` together with `sn'(z) = cn(z) dn(z)`.
    pub fn sn_and_derivative(&self, z: C64) -> (C64, C64) {
        let (s, c, d) = self.sncndn(self.reduce(z));
        (s, c * d)
    }
}
