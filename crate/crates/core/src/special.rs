//! Bessel functions of the first kind and the complex log-gamma, implemented
//! in-repo so the numeric core stays dependency-free.
//!
//! Bessel values come from the ascending power series for |x| <= 12 and the
//! Hankel asymptotic expansion beyond; integer orders above 1 use upward
//! recurrence when it is stable (x > m) and Miller's normalized downward
//! recurrence otherwise.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

const SERIES_CUTOFF: f64 = 12.0;

/// J_0(x) for any finite real x.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_CUTOFF {
        ascending_series(0, ax)
    } else {
        hankel(0, ax)
    }
}

/// J_1(x) for any finite real x. Odd: J_1(-x) = -J_1(x).
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_CUTOFF {
        ascending_series(1, ax)
    } else {
        hankel(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// J_m(x) for any integer order and finite real x.
///
/// Symmetries J_{-m}(x) = (-1)^m J_m(x) and J_m(-x) = (-1)^m J_m(x) reduce
/// the computation to m >= 0, x >= 0.
pub fn bessel_jm(m: i32, x: f64) -> f64 {
    let (m_abs, mut sign) = if m < 0 {
        (-(m as i64) as u32, if m % 2 != 0 { -1.0 } else { 1.0 })
    } else {
        (m as u32, 1.0)
    };
    let ax = x.abs();
    if x < 0.0 && m_abs % 2 == 1 {
        sign = -sign;
    }
    sign * bessel_jm_nonneg(m_abs, ax)
}

fn bessel_jm_nonneg(m: u32, x: f64) -> f64 {
    match m {
        0 => bessel_j0(x),
        1 => bessel_j1(x),
        _ => {
            if x == 0.0 {
                0.0
            } else if x > m as f64 {
                upward_recurrence(m, x)
            } else {
                miller_downward(m, x)
            }
        }
    }
}

/// Power series J_n(x) = sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!), n in {0,1}.
fn ascending_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = match n {
        0 => 1.0,
        1 => half,
        _ => unreachable!(),
    };
    let mut sum = term;
    let q = half * half;
    for k in 1..200 {
        let k = k as f64;
        term *= -q / (k * (k + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// Hankel expansion: J_n(x) ~ sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)),
/// chi = x - n pi/2 - pi/4. Asymptotic series summed to its smallest term.
fn hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let w = 8.0 * x;
    let mut p = 1.0;
    let mut q = (mu - 1.0) / w;
    let mut term_p = 1.0;
    let mut term_q = q;
    let mut prev_p = f64::INFINITY;
    let mut prev_q = f64::INFINITY;
    for k in 0..30u32 {
        let a = 4.0 * k as f64;
        let f1 = (mu - (a + 1.0) * (a + 1.0)) * (mu - (a + 3.0) * (a + 3.0));
        term_p *= -f1 / ((2.0 * k as f64 + 1.0) * (2.0 * k as f64 + 2.0) * w * w);
        if term_p.abs() >= prev_p {
            break;
        }
        prev_p = term_p.abs();
        p += term_p;

        let f2 = (mu - (a + 3.0) * (a + 3.0)) * (mu - (a + 5.0) * (a + 5.0));
        term_q *= -f2 / ((2.0 * k as f64 + 2.0) * (2.0 * k as f64 + 3.0) * w * w);
        if term_q.abs() >= prev_q {
            break;
        }
        prev_q = term_q.abs();
        q += term_q;
    }
    let chi = x - (n as f64) * 0.5 * PI - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Upward recurrence J_{k+1} = (2k/x) J_k - J_{k-1}, stable for x > m.
fn upward_recurrence(m: u32, x: f64) -> f64 {
    let mut jm1 = bessel_j0(x);
    let mut j = bessel_j1(x);
    for k in 1..m {
        let next = (2.0 * k as f64 / x) * j - jm1;
        jm1 = j;
        j = next;
    }
    j
}

/// Miller's algorithm: run the recurrence downward from a padded start order
/// and normalize with J_0 + 2 sum_k J_{2k} = 1.
fn miller_downward(m: u32, x: f64) -> f64 {
    let start = {
        // enough guard orders for the downward pass to converge onto the
        // true minimal solution before reaching m
        let pad = (m as f64).sqrt().ceil() as u32 + 22;
        let s = m + pad + (x as u32);
        if s % 2 == 0 {
            s
        } else {
            s + 1
        }
    };
    let mut jp1 = 0.0f64;
    let mut j = 1e-300;
    let mut result = 0.0;
    let mut norm = 0.0;
    for k in (0..=start).rev() {
        let jm1 = (2.0 * (k as f64 + 1.0) / x) * j - jp1;
        jp1 = j;
        j = jm1;
        // renormalize on the fly to avoid overflow
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
        if k + 1 == m {
            result = jp1;
        }
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * j;
        }
    }
    // after the loop, j = candidate J_0
    norm += j;
    if m == 0 {
        j / norm
    } else {
        result / norm
    }
}

/// First positive zero of J_0, found by Newton iteration on the series.
pub fn j0_first_zero() -> f64 {
    let mut x = 2.4f64;
    for _ in 0..8 {
        let f = bessel_j0(x);
        let fp = -bessel_j1(x);
        let step = f / fp;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_C: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Principal branch of ln Gamma(z) via the Lanczos approximation, with the
/// reflection formula for Re(z) < 0.5.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // ln Gamma(z) = ln(pi / sin(pi z)) - ln Gamma(1 - z)
        let pi_z = Complex64::new(PI, 0.0) * z;
        return (Complex64::new(PI, 0.0) / pi_z.sin()).ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let zm1 = z - 1.0;
    let mut a = Complex64::new(LANCZOS_C[0], 0.0);
    for (k, &c) in LANCZOS_C.iter().enumerate().skip(1) {
        a += Complex64::new(c, 0.0) / (zm1 + k as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    let half_ln_2pi = 0.9189385332046727;
    Complex64::new(half_ln_2pi, 0.0) + (zm1 + 0.5) * t.ln() - t + a.ln()
}

/// arg Gamma(1 - i kappa) for real kappa.
pub fn arg_gamma_one_minus_ik(kappa: f64) -> f64 {
    ln_gamma(Complex64::new(1.0, -kappa)).im
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: J_m(x) = (1/pi) int_0^pi cos(m t - x sin t) dt,
    /// composite Simpson.
    fn bessel_quadrature(m: i32, x: f64) -> f64 {
        let n = 8192usize;
        let h = PI / n as f64;
        let f = |t: f64| (m as f64 * t - x * t.sin()).cos();
        let mut sum = f(0.0) + f(PI);
        for k in 1..n {
            let t = k as f64 * h;
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(t);
        }
        sum * h / 3.0 / PI
    }

    #[test]
    fn j0_j1_match_quadrature() {
        for &x in &[0.0, 0.1, 0.5, 1.0, 2.404825557695773, 5.0, 9.3, 11.9, 12.1, 18.0, 45.0] {
            let q0 = bessel_quadrature(0, x);
            let q1 = bessel_quadrature(1, x);
            assert!((bessel_j0(x) - q0).abs() < 1e-11, "J0({x}): {} vs {q0}", bessel_j0(x));
            assert!((bessel_j1(x) - q1).abs() < 1e-11, "J1({x}): {} vs {q1}", bessel_j1(x));
        }
    }

    #[test]
    fn jm_matches_quadrature() {
        for &m in &[2, 3, 5, 8, 13, 30] {
            for &x in &[0.05, 0.5, 2.0, 7.0, 12.5, 25.0] {
                let q = bessel_quadrature(m, x);
                let v = bessel_jm(m, x);
                assert!((v - q).abs() < 1e-11, "J{m}({x}): {v} vs {q}");
            }
        }
    }

    #[test]
    fn jm_symmetries() {
        for &m in &[1, 2, 3, 6] {
            for &x in &[0.7, 3.2, 14.0] {
                let v = bessel_jm(m, x);
                let neg_order = bessel_jm(-m, x);
                let neg_arg = bessel_jm(m, -x);
                let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((neg_order - parity * v).abs() < 1e-14);
                assert!((neg_arg - parity * v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jm_at_zero() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_eq!(bessel_j1(0.0), 0.0);
        assert_eq!(bessel_jm(4, 0.0), 0.0);
    }

    #[test]
    fn known_zeros() {
        // reference zeros of J0, J1, J2
        let z0 = [2.404825557695773, 5.520078110286311, 8.653727912911012];
        let z1 = [3.831705970207512, 7.015586669815613];
        let z2 = [5.135622301840683];
        for z in z0 {
            assert!(bessel_j0(z).abs() < 1e-9, "J0({z}) = {}", bessel_j0(z));
        }
        for z in z1 {
            assert!(bessel_j1(z).abs() < 1e-9, "J1({z}) = {}", bessel_j1(z));
        }
        for z in z2 {
            assert!(bessel_jm(2, z).abs() < 1e-9, "J2({z}) = {}", bessel_jm(2, z));
        }
    }

    #[test]
    fn first_zero_newton() {
        let z = j0_first_zero();
        assert!((z - 2.404825557695773).abs() < 1e-12, "{z}");
        assert!(bessel_j0(z).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_real_spots() {
        for (x, expect) in [(1.0, 0.0), (2.0, 0.0), (5.0, 24.0f64.ln()), (0.5, PI.sqrt().ln())] {
            let v = ln_gamma(Complex64::new(x, 0.0));
            assert!((v.re - expect).abs() < 1e-12, "lnGamma({x}).re = {}", v.re);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_modulus_identity() {
        // |Gamma(1 - i k)|^2 = pi k / sinh(pi k)
        for &k in &[1e-4, 0.01, 0.1, 0.5276, 1.0, 3.0, 8.0] {
            let lg = ln_gamma(Complex64::new(1.0, -k));
            let lhs = (2.0 * lg.re).exp();
            let rhs = PI * k / (PI * k).sinh();
            assert!(
                ((lhs - rhs) / rhs).abs() < 1e-12,
                "k={k}: |Gamma|^2 = {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn arg_gamma_small_kappa_series() {
        // arg Gamma(1 - i k) = gamma_e k - zeta(3) k^3/3 + zeta(5) k^5/5 - ...
        let gamma_e = 0.5772156649015329;
        let zeta3 = 1.2020569031595943;
        let zeta5 = 1.0369277551433699;
        let zeta7 = 1.0083492773819228;
        let zeta9 = 1.0020083928260822;
        for &k in &[1e-3f64, 0.05, 0.2, 0.3] {
            let series = gamma_e * k - zeta3 * k.powi(3) / 3.0 + zeta5 * k.powi(5) / 5.0
                - zeta7 * k.powi(7) / 7.0
                + zeta9 * k.powi(9) / 9.0;
            let v = arg_gamma_one_minus_ik(k);
            // truncation of the alternating series bounds the residual
            let tol = 0.2 * k.powi(11) + 1e-14;
            assert!((v - series).abs() < tol, "k={k}: {v} vs {series}");
        }
    }
}
