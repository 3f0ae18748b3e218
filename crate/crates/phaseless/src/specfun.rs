//! Cylindrical Bessel functions `J_n`, `Y_n` and the Hankel function
//! `H_n^(1) = J_n + i Y_n` of nonnegative integer order and positive real
//! argument.
//!
//! Two evaluation regimes are used: the ascending power series for
//! `x <= SERIES_SWITCH` and the Hankel asymptotic expansion beyond it.
//! Orders above one are reached by backward (Miller) recurrence for `J_n`
//! and forward recurrence for `Y_n`.

use num_complex::Complex;

use crate::{Error, Real, Result};

/// Largest supported order.
pub const MAX_ORDER: usize = 60;

/// Largest supported argument.
pub const MAX_ARG: f64 = 1.0e3;

/// Smallest argument for the singular `Y_n` family.
pub const MIN_ARG_Y: f64 = 1.0e-8;

/// Crossover between the ascending series and the asymptotic expansion.
const SERIES_SWITCH: f64 = 12.0;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_domain<F: Real>(n: usize, x: F, needs_y: bool) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if !(x > F::zero()) {
        return Err(Error::Domain(format!("argument {x} must be positive")));
    }
    if x > F::of(MAX_ARG) {
        return Err(Error::Domain(format!("argument {x} exceeds {MAX_ARG}")));
    }
    if needs_y && x < F::of(MIN_ARG_Y) {
        return Err(Error::Domain(format!(
            "argument {x} below {MIN_ARG_Y} for the singular kind"
        )));
    }
    Ok(())
}

/// Bessel function of the first kind `J_n(x)`.
pub fn bessel_j<F: Real>(n: usize, x: F) -> Result<F> {
    check_domain(n, x, false)?;
    Ok(match n {
        0 => j0(x),
        1 => j1(x),
        _ => jn_miller(n, x),
    })
}

/// Bessel function of the second kind `Y_n(x)`.
pub fn bessel_y<F: Real>(n: usize, x: F) -> Result<F> {
    check_domain(n, x, true)?;
    Ok(yn_forward(n, x))
}

/// Hankel function of the first kind `H_n^(1)(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1<F: Real>(n: usize, x: F) -> Result<Complex<F>> {
    check_domain(n, x, true)?;
    let re = match n {
        0 => j0(x),
        1 => j1(x),
        _ => jn_miller(n, x),
    };
    Ok(Complex::new(re, yn_forward(n, x)))
}

/// `J_0`, `Y_0`, `J_1` and `Y_1` at a shared argument.
///
/// The boundary-integral kernels need all four at every quadrature node
/// pair, so the shared pieces (powers, log, trig) are computed once.
#[inline]
pub fn j0y0j1y1<F: Real>(x: F) -> (F, F, F, F) {
    if x <= F::of(SERIES_SWITCH) {
        let (j0v, j1v) = j01_series(x);
        let (y0v, y1v) = y01_series(x, j0v, j1v);
        (j0v, y0v, j1v, y1v)
    } else {
        let (j0v, y0v) = asymptotic(0, x);
        let (j1v, y1v) = asymptotic(1, x);
        (j0v, y0v, j1v, y1v)
    }
}

#[inline]
pub(crate) fn j0<F: Real>(x: F) -> F {
    if x <= F::of(SERIES_SWITCH) {
        j01_series(x).0
    } else {
        asymptotic(0, x).0
    }
}

#[inline]
pub(crate) fn j1<F: Real>(x: F) -> F {
    if x <= F::of(SERIES_SWITCH) {
        j01_series(x).1
    } else {
        asymptotic(1, x).0
    }
}

#[inline]
pub(crate) fn y0<F: Real>(x: F) -> F {
    if x <= F::of(SERIES_SWITCH) {
        let (j0v, j1v) = j01_series(x);
        y01_series(x, j0v, j1v).0
    } else {
        asymptotic(0, x).1
    }
}

/// Ascending series for `J_0` and `J_1` in one pass.
///
/// J_0 = sum (-q)^m / (m!)^2, J_1 = (x/2) sum (-q)^m / (m!(m+1)!), q = x^2/4.
fn j01_series<F: Real>(x: F) -> (F, F) {
    let q = x * x * F::of(0.25);
    let one = F::one();
    let mut term0 = one;
    let mut term1 = one;
    let mut sum0 = one;
    let mut sum1 = one;
    let eps = F::epsilon();
    for m in 1..=44usize {
        let mf = F::of_usize(m);
        term0 = -term0 * q / (mf * mf);
        term1 = -term1 * q / (mf * (mf + one));
        sum0 += term0;
        sum1 += term1;
        if term0.abs() < eps && term1.abs() < eps {
            break;
        }
    }
    (sum0, x * F::of(0.5) * sum1)
}

/// Ascending series for `Y_0` and `Y_1` given `J_0`, `J_1` at the same `x`.
fn y01_series<F: Real>(x: F, j0v: F, j1v: F) -> (F, F) {
    let q = x * x * F::of(0.25);
    let one = F::one();
    let two_over_pi = F::of(2.0 / std::f64::consts::PI);
    let log_term = (x * F::of(0.5)).ln() + F::of(EULER_GAMMA);

    // Y0 correction: (2/pi) * sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2.
    // Y1 correction: -(x/(2pi)) * sum_{m>=0} (-1)^m (H_m + H_{m+1}) q^m / (m!(m+1)!).
    let mut h = F::zero();
    let mut pow = one; // q^m / (m!)^2 at m, starting m=0
    let mut pow1 = one; // q^m / (m!(m+1)!) at m
    let mut sum0 = F::zero();
    let mut sum1 = one; // m = 0 term: (H_0 + H_1) = 1
    let mut sign = one;
    let eps = F::epsilon();
    for m in 1..=44usize {
        let mf = F::of_usize(m);
        h += one / mf;
        pow = pow * q / (mf * mf);
        sign = -sign;
        let t0 = sign * h * pow;
        sum0 += t0;

        pow1 = pow1 * q / (mf * (mf + one));
        let h_next = h + one / (mf + one);
        let t1 = sign * (h + h_next) * pow1;
        sum1 += t1;
        if t0.abs() < eps && t1.abs() < eps {
            break;
        }
    }
    // The m=0 term of the Y0 correction vanishes (H_0 = 0); sum0 holds
    // (-1)^{m+1} H_m ... with the sign folded in: sign at m=1 is -1, so flip.
    let y0v = two_over_pi * (log_term * j0v - sum0);
    let y1v = two_over_pi * (log_term * j1v - one / x) - x / F::of(2.0 * std::f64::consts::PI) * sum1;
    (y0v, y1v)
}

/// Hankel asymptotic expansion for order 0 or 1, `x > SERIES_SWITCH`.
///
/// J_n =  sqrt(2/(pi x)) (P cos chi - Q sin chi),
/// Y_n =  sqrt(2/(pi x)) (P sin chi + Q cos chi),
/// chi = x - (2n+1) pi/4, with P, Q summed to their smallest term.
fn asymptotic<F: Real>(n: usize, x: F) -> (F, F) {
    let mu = F::of_usize(4 * n * n); // 4 n^2
    let one = F::one();
    let eight_x = F::of(8.0) * x;

    let mut p = one;
    let mut q = F::zero();
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k); term_k = a_k / x^k.
    let mut term = one;
    let mut prev = F::infinity();
    for k in 1..=40usize {
        let kf = F::of_usize(k);
        let odd = F::of_usize(2 * k - 1);
        term = term * (mu - odd * odd) / (kf * eight_x);
        if term.abs() >= prev.abs() {
            break; // past the optimal truncation point
        }
        prev = term;
        if k % 2 == 1 {
            // contributes to Q with sign (-1)^((k-1)/2)
            let s = if (k - 1) % 4 == 0 { one } else { -one };
            q += s * term;
        } else {
            // contributes to P with sign (-1)^(k/2)
            let s = if k % 4 == 0 { one } else { -one };
            p += s * term;
        }
        if term.abs() < F::epsilon() {
            break;
        }
    }

    let chi = x - F::of_usize(2 * n + 1) * F::FRAC_PI_4();
    let (sin_chi, cos_chi) = chi.sin_cos();
    let amp = (F::of(2.0) / (F::PI() * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// Backward (Miller) recurrence for `J_n`, normalized by
/// `J_0 + 2 sum_k J_{2k} = 1`.
fn jn_miller<F: Real>(n: usize, x: F) -> F {
    let xf = x.as_f64();
    let start = {
        let guard = (40.0 * (n as f64 + 1.0)).sqrt().ceil() as usize;
        let m = (n + guard).max(xf.ceil() as usize + 20);
        m + (m & 1) // even start keeps the normalization sum aligned
    };

    let two_over_x = F::of(2.0) / x;
    let mut next = F::zero();
    let mut cur = F::of(1.0e-30);
    let mut result = if n == start { cur } else { F::zero() };
    let mut norm = F::zero(); // accumulates J_0 + 2 sum J_{2k}
    let rescale = F::max_value().sqrt();
    let mut k = start;
    while k > 0 {
        let prev = F::of_usize(k) * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if k % 2 == 0 {
            norm += if k == 0 { cur } else { cur + cur };
        }
        if k == n {
            result = cur;
        }
        if cur.abs() > rescale {
            let inv = F::one() / rescale;
            cur = cur * inv;
            next = next * inv;
            norm = norm * inv;
            result = result * inv;
        }
    }
    result / norm
}

/// Forward recurrence for `Y_n` from `Y_0`, `Y_1`.
fn yn_forward<F: Real>(n: usize, x: F) -> F {
    let (j0v, j1v) = if x <= F::of(SERIES_SWITCH) {
        j01_series(x)
    } else {
        (F::zero(), F::zero()) // unused below in this branch
    };
    let (mut ym, mut y) = if x <= F::of(SERIES_SWITCH) {
        y01_series(x, j0v, j1v)
    } else {
        (asymptotic(0, x).1, asymptotic(1, x).1)
    };
    match n {
        0 => ym,
        1 => y,
        _ => {
            let two_over_x = F::of(2.0) / x;
            for k in 1..n {
                let next = F::of_usize(k) * two_over_x * y - ym;
                ym = y;
                y = next;
            }
            y
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_at_origin_limit() {
        let v: f64 = bessel_j(0, 1.0e-12).unwrap();
        assert!((v - 1.0).abs() < 1.0e-12);
    }

    #[test]
    fn wronskian_identity() {
        // J_{n+1} Y_n - J_n Y_{n+1} = 2/(pi x)
        for &x in &[0.5f64, 2.0, 10.0] {
            for n in 0..6usize {
                let jn = bessel_j(n, x).unwrap();
                let jn1 = bessel_j(n + 1, x).unwrap();
                let yn = bessel_y(n, x).unwrap();
                let yn1 = bessel_y(n + 1, x).unwrap();
                let w = jn1 * yn - jn * yn1;
                let exact = 2.0 / (std::f64::consts::PI * x);
                assert!(
                    (w - exact).abs() < 1.0e-10,
                    "wronskian off at n={n}, x={x}: {w} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn hankel_recurrence() {
        // H_{n+1} = (2n/x) H_n - H_{n-1}
        let x = 5.0f64;
        for n in 1..=20usize {
            let hm = hankel1(n - 1, x).unwrap();
            let h = hankel1(n, x).unwrap();
            let hp = hankel1(n + 1, x).unwrap();
            let rhs = h * (2.0 * n as f64 / x) - hm;
            assert!(
                (hp - rhs).norm() < 1.0e-9 * hp.norm().max(1.0),
                "recurrence off at n={n}"
            );
        }
    }

    #[test]
    fn hankel_modulus_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let x = 1.0 + 49.0 * i as f64 / 99.0;
            let h: num_complex::Complex<f64> = hankel1(0, x).unwrap();
            let m = h.norm();
            assert!(m < prev, "|H_0| not decreasing at x={x}");
            prev = m;
        }
    }

    #[test]
    fn y1_large_argument_form() {
        let x = 200.0f64;
        let lead = (2.0 / (std::f64::consts::PI * x)).sqrt()
            * (x - 3.0 * std::f64::consts::FRAC_PI_4).sin();
        let v = bessel_y(1, x).unwrap();
        assert!((v - lead).abs() < 1.0e-6, "{v} vs {lead}");
    }

    #[test]
    fn derivative_relation() {
        // J_0'(x) = -J_1(x), via central differences.
        let x = 1.0f64;
        let h = 1.0e-6;
        let d = (bessel_j(0, x + h).unwrap() - bessel_j(0, x - h).unwrap()) / (2.0 * h);
        let j1v = bessel_j(1, x).unwrap();
        assert!((d + j1v).abs() < 1.0e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j::<f64>(0, 0.0).is_err());
        assert!(bessel_j::<f64>(0, -1.0).is_err());
        assert!(bessel_j::<f64>(61, 1.0).is_err());
        assert!(bessel_y::<f64>(0, 1.0e-9).is_err());
        assert!(bessel_j::<f64>(0, 2.0e3).is_err());
    }

    #[test]
    fn hankel_is_j_plus_iy() {
        for &x in &[0.3f64, 1.0, 7.0, 30.0] {
            let h = hankel1(0, x).unwrap();
            assert_eq!(h.re, bessel_j(0, x).unwrap());
            assert_eq!(h.im, bessel_y(0, x).unwrap());
        }
    }

    #[test]
    fn f32_instantiation() {
        let v: f32 = bessel_j(0, 1.0f32).unwrap();
        assert!((v - 0.765_197_7).abs() < 1.0e-5);
    }
}
