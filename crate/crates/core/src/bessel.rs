//! Bessel functions of the first kind for integer order and their zeros.
//!
//! Small arguments use the power series, large arguments (relative to the
//! order) the Hankel asymptotic expansion, and everything in between Miller's
//! backward recurrence normalised by `J0 + 2 (J2 + J4 + ...) = 1`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

const SERIES_MAX: f64 = 8.0;

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    sum
}

fn asymptotic(n: u32, x: f64) -> Option<f64> {
    let mu = 4.0 * (n as f64).powi(2);
    let z = 8.0 * x;
    // P ~ sum (-1)^k a_{2k} / z^{2k}, Q ~ sum (-1)^k a_{2k+1} / z^{2k+1}.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let kk = (2 * k - 1) as f64;
        term *= (mu - kk * kk) / (k as f64 * z);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    if last > 1e-15 {
        return None;
    }
    let chi = x - (n as f64 * FRAC_PI_2 + FRAC_PI_4);
    Some((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()))
}

fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut start = (top + 30.0 + (50.0 * top).sqrt()) as usize;
    start += start % 2;
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        // j now holds J_{k-1} (unnormalised).
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j;
        }
        if k - 1 == n as usize {
            result = j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
    }
    // J0 enters the normalisation sum once.
    norm += j;
    result / norm
}

/// `J_n(x)` for integer `n >= 0`, `x >= 0`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_MAX {
        return series(n, x);
    }
    if x >= 30.0 && 2.0 * (n as f64).powi(2) <= x {
        if let Some(v) = asymptotic(n, x) {
            return v;
        }
    }
    miller(n, x)
}

/// `J_n'(x)`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= 1e-15 * m.max(1.0) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Positive zeros of `f` on `(from, limit)` found by scanning with a fixed step
/// and bisecting each sign change.
fn zeros_in<F: Fn(f64) -> f64>(f: F, from: f64, limit: f64, max: usize) -> Vec<f64> {
    let step = 0.05;
    let mut out = Vec::new();
    let mut a = from.max(1e-6);
    let mut fa = f(a);
    while a < limit && out.len() < max {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if (fa > 0.0) != (fb > 0.0) {
            out.push(bisect(&f, a, b));
        }
        a = b;
        fa = fb;
    }
    out.retain(|&z| z < limit);
    out
}

/// Zeros of `J_m` below `limit`, in increasing order.
pub fn bessel_zeros_below(m: u32, limit: f64) -> Vec<f64> {
    zeros_in(|x| bessel_j(m, x), m as f64 * 0.9, limit, usize::MAX)
}

/// Positive zeros of `J_m'` below `limit`.
pub fn bessel_prime_zeros_below(m: u32, limit: f64) -> Vec<f64> {
    if m == 0 {
        return bessel_zeros_below(1, limit);
    }
    zeros_in(|x| bessel_j_prime(m, x), m as f64 * 0.9, limit, usize::MAX)
}

/// The `s`-th positive zero `j_{m,s}` of `J_m` (`s >= 1`).
pub fn bessel_zero(m: u32, s: usize) -> f64 {
    assert!(s >= 1, "zero index starts at 1");
    let limit = m as f64 + PI * (s as f64 + 2.0) + 10.0;
    zeros_in(|x| bessel_j(m, x), m as f64 * 0.9, limit, s)[s - 1]
}

/// The `s`-th positive zero `j'_{m,s}` of `J_m'` (`s >= 1`).
pub fn bessel_prime_zero(m: u32, s: usize) -> f64 {
    assert!(s >= 1, "zero index starts at 1");
    if m == 0 {
        return bessel_zero(1, s);
    }
    let limit = m as f64 + PI * (s as f64 + 2.0) + 10.0;
    zeros_in(|x| bessel_j_prime(m, x), m as f64 * 0.9, limit, s)[s - 1]
}
