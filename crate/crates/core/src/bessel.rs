//! Bessel functions J0 and Y0 for real positive arguments, used by the 2D
//! Helmholtz kernel through H0^(1)(z) = J0(z) + i Y0(z).
//!
//! Three regimes:
//! * `z <= 8`: ascending power series.
//! * `8 < z <= 25`: Miller backward recurrence for J_{2k}, normalised with
//!   J0 + 2 sum J_{2k} = 1, and the Neumann series for Y0.
//! * `z > 25`: Hankel asymptotic expansion.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Returns `(J0(z), Y0(z))`. `z` must be positive and finite.
pub fn j0_y0(z: f64) -> (f64, f64) {
    debug_assert!(z > 0.0 && z.is_finite());
    if z <= SERIES_LIMIT {
        series(z)
    } else if z <= ASYMPTOTIC_LIMIT {
        miller(z)
    } else {
        asymptotic(z)
    }
}

fn series(z: f64) -> (f64, f64) {
    let x = 0.25 * z * z;
    let mut term = 1.0;
    let mut j0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        term *= -x / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += term;
        // Y0 tail carries (-1)^{k+1} H_k x^k / (k!)^2 = -H_k * term.
        tail -= harmonic * term;
        if term.abs() < 1e-18 * j0.abs().max(1e-300) && term.abs() * harmonic < 1e-18 {
            break;
        }
    }
    let y0 = FRAC_2_PI * ((0.5 * z).ln() + EULER_GAMMA) * j0 + FRAC_2_PI * tail;
    (j0, y0)
}

fn miller(z: f64) -> (f64, f64) {
    // Start well past the turning point n ~ z; J_n decays super-exponentially beyond it.
    let mut m = (1.2 * z) as usize + 40;
    m += m % 2;
    let two_over_z = 2.0 / z;

    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-30; // J_n
    let mut norm = 0.0;
    let mut neumann = 0.0;
    for n in (1..=m).rev() {
        let prev = (n as f64) * two_over_z * cur - next; // J_{n-1}
        next = cur;
        cur = prev;
        let order = n - 1;
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * cur;
            let k = (order / 2) as f64;
            let sign = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
            neumann += sign * cur / k;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            neumann *= 1e-250;
        }
    }
    norm += cur;
    let j0 = cur / norm;
    let neumann = neumann / norm;
    let y0 = FRAC_2_PI * ((0.5 * z).ln() + EULER_GAMMA) * j0 - 2.0 * FRAC_2_PI * neumann;
    (j0, y0)
}

fn asymptotic(z: f64) -> (f64, f64) {
    // a_k = prod_{j=1..k} (-(2j-1)^2) / (k! 8^k) for order zero.
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut zk = 1.0;
    for k in 0..40 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= -(odd * odd) / (k as f64 * 8.0);
            zk *= z;
        }
        let term = a / zk;
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if k > 2 && term.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - FRAC_PI_4;
    let amp = (2.0 / (PI * z)).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}
