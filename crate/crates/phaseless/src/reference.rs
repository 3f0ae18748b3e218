//! Independent reference implementations backing the test suites.
//!
//! Everything here is deliberately written along different routes than the
//! library proper: Bessel values come from extended-precision series sums,
//! the circle far field from a separation-of-variables expansion, and the
//! Hausdorff oracle from a literal double loop. Production code must not
//! call into this module; the test suites compare against it.

use num_complex::Complex;

/// Double-double value `hi + lo` carrying roughly 31 significant digits.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        let e = lo - (s - hi);
        Dd { hi: s, lo: e }
    }

    pub fn add(self, other: Dd) -> Dd {
        let s = self.hi + other.hi;
        let v = s - self.hi;
        let e = (self.hi - (s - v)) + (other.hi - v);
        Dd::renorm(s, e + self.lo + other.lo)
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd { hi: -other.hi, lo: -other.lo })
    }

    pub fn mul(self, other: Dd) -> Dd {
        let p = self.hi * other.hi;
        let e = self.hi.mul_add(other.hi, -p); // exact FMA residual
        let e = e + self.hi * other.lo + self.lo * other.hi;
        Dd::renorm(p, e)
    }

    pub fn mul_f64(self, x: f64) -> Dd {
        self.mul(Dd::from(x))
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r2 = r.sub(other.mul_f64(q2));
        let q3 = r2.hi / other.hi;
        Dd::renorm(q1, q2 + q3)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn abs(self) -> f64 {
        self.to_f64().abs()
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Residual of the Euler–Mascheroni constant beyond its f64 rounding.
const EULER_GAMMA_LO: f64 = -4.942_915_152_430_645e-18;

fn gamma_dd() -> Dd {
    Dd { hi: EULER_GAMMA, lo: EULER_GAMMA_LO }
}

/// Ascending-series `J_0` in extended precision (x up to ~30).
pub fn j0_series(x: f64) -> Dd {
    let q = Dd::from(x).mul(Dd::from(x)).mul_f64(0.25);
    let mut term = Dd::from(1.0);
    let mut sum = term;
    for m in 1..=60usize {
        term = term.mul(q).div(Dd::from((m * m) as f64)).neg();
        sum = sum.add(term);
        if term.abs() < 1e-40 {
            break;
        }
    }
    sum
}

/// Ascending-series `J_1` in extended precision.
pub fn j1_series(x: f64) -> Dd {
    let q = Dd::from(x).mul(Dd::from(x)).mul_f64(0.25);
    let mut term = Dd::from(1.0);
    let mut sum = term;
    for m in 1..=60usize {
        term = term.mul(q).div(Dd::from((m * (m + 1)) as f64)).neg();
        sum = sum.add(term);
        if term.abs() < 1e-40 {
            break;
        }
    }
    sum.mul_f64(0.5 * x)
}

/// Ascending-series `Y_0` with the Euler–Mascheroni term.
pub fn y0_series(x: f64) -> Dd {
    let q = Dd::from(x).mul(Dd::from(x)).mul_f64(0.25);
    let log_term = Dd::from((0.5 * x).ln()).add(gamma_dd());
    // sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2
    let mut h = Dd::ZERO;
    let mut pow = Dd::from(1.0);
    let mut sum = Dd::ZERO;
    let mut sign = -1.0;
    for m in 1..=60usize {
        h = h.add(Dd::from(1.0).div(Dd::from(m as f64)));
        pow = pow.mul(q).div(Dd::from((m * m) as f64));
        sign = -sign;
        let t = pow.mul(h).mul_f64(sign);
        sum = sum.add(t);
        if t.abs() < 1e-40 {
            break;
        }
    }
    log_term.mul(j0_series(x)).add(sum).mul_f64(2.0 / std::f64::consts::PI)
}

/// Ascending-series `Y_1`.
pub fn y1_series(x: f64) -> Dd {
    let q = Dd::from(x).mul(Dd::from(x)).mul_f64(0.25);
    let log_term = Dd::from((0.5 * x).ln()).add(gamma_dd());
    // sum_{m>=0} (-1)^m (H_m + H_{m+1}) q^m / (m! (m+1)!)
    let mut h = Dd::ZERO;
    let mut pow = Dd::from(1.0);
    let mut sum = Dd::from(1.0); // m = 0: H_0 + H_1 = 1
    let mut sign = 1.0;
    for m in 1..=60usize {
        h = h.add(Dd::from(1.0).div(Dd::from(m as f64)));
        let h_next = h.add(Dd::from(1.0).div(Dd::from((m + 1) as f64)));
        pow = pow.mul(q).div(Dd::from((m * (m + 1)) as f64));
        sign = -sign;
        let t = pow.mul(h.add(h_next)).mul_f64(sign);
        sum = sum.add(t);
        if t.abs() < 1e-40 {
            break;
        }
    }
    let two_over_pi = 2.0 / std::f64::consts::PI;
    log_term
        .mul(j1_series(x))
        .sub(Dd::from(1.0).div(Dd::from(x)))
        .mul_f64(two_over_pi)
        .sub(sum.mul_f64(x / (2.0 * std::f64::consts::PI)))
}

/// Hankel asymptotic expansion in extended precision, x above ~12.
pub fn jy_asymptotic(n: usize, x: f64) -> (Dd, Dd) {
    let mu = (4 * n * n) as f64;
    let xd = Dd::from(x);
    let mut p = Dd::from(1.0);
    let mut q = Dd::ZERO;
    let mut term = Dd::from(1.0);
    let mut prev = f64::INFINITY;
    for k in 1..=60usize {
        let odd = (2 * k - 1) as f64;
        term = term
            .mul(Dd::from(mu - odd * odd))
            .div(Dd::from(k as f64).mul_f64(8.0).mul(xd));
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        if k % 2 == 1 {
            let s = if (k - 1) % 4 == 0 { 1.0 } else { -1.0 };
            q = q.add(term.mul_f64(s));
        } else {
            let s = if k % 4 == 0 { 1.0 } else { -1.0 };
            p = p.add(term.mul_f64(s));
        }
        if term.abs() < 1e-40 {
            break;
        }
    }
    let chi = x - (2 * n + 1) as f64 * std::f64::consts::FRAC_PI_4;
    let (sin_chi, cos_chi) = chi.sin_cos();
    let amp = (2.0 / (std::f64::consts::PI * x)).sqrt();
    let j = p.mul_f64(cos_chi).sub(q.mul_f64(sin_chi)).mul_f64(amp);
    let y = p.mul_f64(sin_chi).add(q.mul_f64(cos_chi)).mul_f64(amp);
    (j, y)
}

/// Reference `J_n(x)` for the order range used by the series oracle.
pub fn bessel_jn(n: usize, x: f64) -> f64 {
    match n {
        0 => {
            if x <= 14.0 {
                j0_series(x).to_f64()
            } else {
                jy_asymptotic(0, x).0.to_f64()
            }
        }
        1 => {
            if x <= 14.0 {
                j1_series(x).to_f64()
            } else {
                jy_asymptotic(1, x).0.to_f64()
            }
        }
        _ => {
            // Miller recurrence normalized against the extended-precision
            // J_0 (or J_1 near a zero of J_0)
            let start = (n + (40.0 * n as f64).sqrt() as usize).max(x.ceil() as usize + 24);
            let mut next = 0.0f64;
            let mut cur = 1.0e-30f64;
            let mut jn = 0.0;
            let mut j1v = 0.0;
            let mut j0v = 0.0;
            let mut k = start;
            while k > 0 {
                let prev = (2 * k) as f64 / x * cur - next;
                next = cur;
                cur = prev;
                k -= 1;
                if k == n {
                    jn = cur;
                }
                if k == 1 {
                    j1v = cur;
                }
                if k == 0 {
                    j0v = cur;
                }
                if cur.abs() > 1.0e250 {
                    cur *= 1.0e-250;
                    next *= 1.0e-250;
                    jn *= 1.0e-250;
                    j1v *= 1.0e-250;
                    j0v *= 1.0e-250;
                }
            }
            let ref_j0 = bessel_jn(0, x);
            if ref_j0.abs() > 0.05 {
                jn * (ref_j0 / j0v)
            } else {
                jn * (bessel_jn(1, x) / j1v)
            }
        }
    }
}

/// Reference `Y_n(x)` by forward recurrence from extended-precision seeds.
pub fn bessel_yn(n: usize, x: f64) -> f64 {
    let (y0v, y1v) = if x <= 14.0 {
        (y0_series(x).to_f64(), y1_series(x).to_f64())
    } else {
        (jy_asymptotic(0, x).1.to_f64(), jy_asymptotic(1, x).1.to_f64())
    };
    match n {
        0 => y0v,
        1 => y1v,
        _ => {
            let mut ym = y0v;
            let mut y = y1v;
            for k in 1..n {
                let next = (2 * k) as f64 / x * y - ym;
                ym = y;
                y = next;
            }
            y
        }
    }
}

fn hankel(n: usize, x: f64) -> Complex<f64> {
    Complex::new(bessel_jn(n, x), bessel_yn(n, x))
}

/// Far field of a sound-soft circle of radius `a` centered at the origin,
/// hit by a point source at `src`, via separation of variables.
///
/// `u_inf(xh) = -(e^{i pi/4}/sqrt(8 pi k)) [c_0 + 2 sum_n c_n (-i)^n cos(n dth)]`
/// with `c_n = H_n(kR) J_n(ka) / H_n(ka)` and `dth` the angle between the
/// observation direction and the source.
pub fn circle_far_field(
    k: f64,
    a: f64,
    src: [f64; 2],
    directions: &[[f64; 2]],
    n_terms: usize,
) -> Vec<Complex<f64>> {
    let big_r = src[0].hypot(src[1]);
    let th_src = src[1].atan2(src[0]);
    let coeffs: Vec<Complex<f64>> = (0..=n_terms)
        .map(|n| hankel(n, k * big_r) * bessel_jn(n, k * a) / hankel(n, k * a))
        .collect();
    let amp = 1.0 / (8.0 * std::f64::consts::PI * k).sqrt();
    let pref = -Complex::from_polar(amp, std::f64::consts::FRAC_PI_4);
    let minus_i = Complex::new(0.0, -1.0);
    directions
        .iter()
        .map(|d| {
            let dth = d[1].atan2(d[0]) - th_src;
            let mut acc = coeffs[0];
            let mut phase = Complex::new(1.0, 0.0);
            for (n, c) in coeffs.iter().enumerate().skip(1) {
                phase *= minus_i;
                acc += *c * phase * 2.0 * (n as f64 * dth).cos();
            }
            pref * acc
        })
        .collect()
}

/// Literal double-loop Hausdorff distance between point sets.
pub fn hausdorff_bruteforce(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let nearest = |p: [f64; 2], set: &[[f64; 2]]| -> f64 {
        set.iter()
            .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
            .fold(f64::INFINITY, f64::min)
    };
    let d_ab = a.iter().map(|&p| nearest(p, b)).fold(0.0, f64::max);
    let d_ba = b.iter().map(|&p| nearest(p, a)).fold(0.0, f64::max);
    d_ab.max(d_ba)
}

/// Gauss–Hermite nodes and weights for the weight `exp(-x^2)`.
///
/// Newton iteration on the orthonormal Hermite recurrence; standard initial
/// guesses march inward from the largest root.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0f64;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1.0e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}
