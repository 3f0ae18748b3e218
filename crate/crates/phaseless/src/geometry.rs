//! Parametric obstacle boundaries.
//!
//! Two closed-curve families are supported:
//!
//! * **Kite6** — six трig coefficients
//!   `x(t) = (c_x + a1 cos t + a2 cos 2t,  c_y + b1 sin t + b2 sin 2t)`
//!   with the parameter vector ordered `(c_x, a1, a2, c_y, b1, b2)`, so the
//!   vector `(0, 1, 0, 0, 1, 0)` is the unit circle at the origin;
//! * **StarFourier** — a star-shaped curve around a movable center,
//!   `x(t) = (a + r(t) cos t, b + r(t) sin t)` with a truncated Fourier
//!   radius `r(t) = a0 + sum_n a_n cos(nt) + b_n sin(nt)`, parameter vector
//!   `(a, b, a0, a1, b1, ..., a_Nr, b_Nr)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Boundary family tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Six-parameter kite-like trigonometric curve.
    Kite6,
    /// Star-shaped curve with `n_r` Fourier harmonics (3 + 2 n_r parameters).
    StarFourier { n_r: usize },
}

impl Family {
    /// Number of parameters identifying a curve of this family.
    pub fn dim(&self) -> usize {
        match self {
            Family::Kite6 => 6,
            Family::StarFourier { n_r } => 3 + 2 * n_r,
        }
    }
}

/// Parameter vector identifying one candidate boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleParams<F> {
    pub family: Family,
    pub values: Vec<F>,
}

impl<F: Real> ObstacleParams<F> {
    pub fn new(family: Family, values: Vec<F>) -> Result<Self> {
        if values.len() != family.dim() {
            return Err(Error::Params(format!(
                "{:?} needs {} parameters, got {}",
                family,
                family.dim(),
                values.len()
            )));
        }
        Ok(Self { family, values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Evaluable closed boundary curve with first and second derivatives.
#[derive(Clone, Debug)]
pub struct BoundaryCurve<F> {
    params: ObstacleParams<F>,
}

/// Point evaluation bundle at one parameter value.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint<F> {
    pub x: [F; 2],
    pub dx: [F; 2],
    pub ddx: [F; 2],
}

/// Build the evaluable curve for a well-formed parameter vector.
pub fn make_curve<F: Real>(params: ObstacleParams<F>) -> BoundaryCurve<F> {
    BoundaryCurve { params }
}

impl<F: Real> BoundaryCurve<F> {
    pub fn params(&self) -> &ObstacleParams<F> {
        &self.params
    }

    pub fn family(&self) -> Family {
        self.params.family
    }

    /// Position at parameter `t`.
    pub fn at(&self, t: F) -> [F; 2] {
        self.eval(t).x
    }

    /// Position and both derivatives at parameter `t`.
    pub fn eval(&self, t: F) -> CurvePoint<F> {
        let v = &self.params.values;
        match self.params.family {
            Family::Kite6 => {
                let (s1, c1) = t.sin_cos();
                let (s2, c2) = (t + t).sin_cos();
                let two = F::of(2.0);
                let four = F::of(4.0);
                CurvePoint {
                    x: [v[0] + v[1] * c1 + v[2] * c2, v[3] + v[4] * s1 + v[5] * s2],
                    dx: [-v[1] * s1 - two * v[2] * s2, v[4] * c1 + two * v[5] * c2],
                    ddx: [-v[1] * c1 - four * v[2] * c2, -v[4] * s1 - four * v[5] * s2],
                }
            }
            Family::StarFourier { n_r } => {
                let (s, c) = t.sin_cos();
                let mut r = v[2];
                let mut dr = F::zero();
                let mut ddr = F::zero();
                for h in 1..=n_r {
                    let hf = F::of_usize(h);
                    let (sh, ch) = (hf * t).sin_cos();
                    let (ah, bh) = (v[1 + 2 * h], v[2 + 2 * h]);
                    r += ah * ch + bh * sh;
                    dr += hf * (bh * ch - ah * sh);
                    ddr -= hf * hf * (ah * ch + bh * sh);
                }
                let two = F::of(2.0);
                CurvePoint {
                    x: [v[0] + r * c, v[1] + r * s],
                    dx: [dr * c - r * s, dr * s + r * c],
                    ddx: [(ddr - r) * c - two * dr * s, (ddr - r) * s + two * dr * c],
                }
            }
        }
    }

    /// Radius function of a star-shaped curve at `t`; kites have none.
    pub fn radius(&self, t: F) -> Option<F> {
        match self.params.family {
            Family::Kite6 => None,
            Family::StarFourier { n_r } => {
                let v = &self.params.values;
                let mut r = v[2];
                for h in 1..=n_r {
                    let hf = F::of_usize(h);
                    let (sh, ch) = (hf * t).sin_cos();
                    r += v[1 + 2 * h] * ch + v[2 + 2 * h] * sh;
                }
                Some(r)
            }
        }
    }
}

/// Equispaced boundary sample `x(2 pi j / n)`, `j = 0..n-1`.
pub fn sample_boundary<F: Real>(curve: &BoundaryCurve<F>, n_pts: usize) -> Vec<[F; 2]> {
    assert!(n_pts >= 8, "need at least 8 sample points");
    let step = F::of(2.0) * F::PI() / F::of_usize(n_pts);
    (0..n_pts).map(|j| curve.at(F::of_usize(j) * step)).collect()
}

/// Thresholds for the validity predicate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ValidityConfig {
    /// Minimum star radius over the check grid.
    pub r_min: f64,
    /// Minimum clearance between any source and the boundary.
    pub source_clearance: f64,
    /// Check grid resolution.
    pub grid: usize,
}

impl Default for ValidityConfig {
    fn default() -> Self {
        Self { r_min: 0.05, source_clearance: 0.1, grid: 512 }
    }
}

/// Validity of a candidate curve for the exterior scattering problem.
///
/// A curve passes when its parameterization is regular, the traced boundary
/// is simple (for the star family this follows from a positive radius; kites
/// get a segment-pair sweep over the sampled polyline), and every source
/// point lies strictly outside with the configured clearance.
pub fn is_valid<F: Real>(
    curve: &BoundaryCurve<F>,
    sources: &[[F; 2]],
    cfg: &ValidityConfig,
) -> bool {
    let n = cfg.grid;
    let step = F::of(2.0) * F::PI() / F::of_usize(n);
    let mut pts = Vec::with_capacity(n);
    let mut min_speed2 = F::infinity();
    for j in 0..n {
        let t = F::of_usize(j) * step;
        let p = curve.eval(t);
        min_speed2 = min_speed2.min(p.dx[0] * p.dx[0] + p.dx[1] * p.dx[1]);
        pts.push(p.x);
        if let Some(r) = curve.radius(t) {
            if r < F::of(cfg.r_min) {
                return false;
            }
        }
    }
    if min_speed2 < F::of(1.0e-12) {
        return false;
    }

    // Degenerate (flat or re-traced) curves have vanishing enclosed area.
    if signed_area(&pts).abs() < F::of(1.0e-6) {
        return false;
    }

    if curve.family() == Family::Kite6 && !polyline_is_simple(&pts) {
        return false;
    }

    // Bounding circle gives a cheap accept for faraway sources.
    let clearance = F::of(cfg.source_clearance);
    let mut max_r2 = F::zero();
    for p in &pts {
        max_r2 = max_r2.max(p[0] * p[0] + p[1] * p[1]);
    }
    let bound = max_r2.sqrt() + clearance;
    for s in sources {
        let d0 = (s[0] * s[0] + s[1] * s[1]).sqrt();
        if d0 > bound {
            continue;
        }
        if winding_number(&pts, *s) != 0 {
            return false;
        }
        if distance_to_polyline(&pts, *s) < clearance {
            return false;
        }
    }
    true
}

/// Signed area of a closed polygon (shoelace).
fn signed_area<F: Real>(pts: &[[F; 2]]) -> F {
    let mut acc = F::zero();
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    acc * F::of(0.5)
}

/// Orientation of the parameterization: `+1` counterclockwise, `-1` clockwise.
pub fn orientation<F: Real>(curve: &BoundaryCurve<F>, grid: usize) -> F {
    let pts = sample_boundary(curve, grid.max(8));
    if signed_area(&pts) >= F::zero() {
        F::one()
    } else {
        -F::one()
    }
}

/// Winding number of a closed polyline around `p` (0 means outside).
fn winding_number<F: Real>(pts: &[[F; 2]], p: [F; 2]) -> i32 {
    let mut w = 0i32;
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if a[1] <= p[1] {
            if b[1] > p[1] && cross(a, b, p) > F::zero() {
                w += 1;
            }
        } else if b[1] <= p[1] && cross(a, b, p) < F::zero() {
            w -= 1;
        }
    }
    w
}

#[inline]
fn cross<F: Real>(a: [F; 2], b: [F; 2], p: [F; 2]) -> F {
    (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])
}

fn distance_to_polyline<F: Real>(pts: &[[F; 2]], p: [F; 2]) -> F {
    let n = pts.len();
    let mut best = F::infinity();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        best = best.min(dist_point_segment(p, a, b));
    }
    best
}

fn dist_point_segment<F: Real>(p: [F; 2], a: [F; 2], b: [F; 2]) -> F {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > F::zero() {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).max(F::zero()).min(F::one())
    } else {
        F::zero()
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

/// Simplicity test for a closed polyline via a blocked segment-pair sweep.
///
/// Segments are grouped into blocks with cached bounding boxes; only blocks
/// whose boxes overlap descend to exact segment tests. Neighbouring segments
/// sharing an endpoint are skipped.
fn polyline_is_simple<F: Real>(pts: &[[F; 2]]) -> bool {
    const BLOCK: usize = 16;
    let n = pts.len();
    let nb = n.div_ceil(BLOCK);
    let mut boxes = Vec::with_capacity(nb);
    for b in 0..nb {
        let lo = b * BLOCK;
        let hi = ((b + 1) * BLOCK).min(n);
        let mut bb = [F::infinity(), F::infinity(), -F::infinity(), -F::infinity()];
        for i in lo..hi {
            // segment i spans pts[i] -> pts[i+1 mod n]
            for q in [pts[i], pts[(i + 1) % n]] {
                bb[0] = bb[0].min(q[0]);
                bb[1] = bb[1].min(q[1]);
                bb[2] = bb[2].max(q[0]);
                bb[3] = bb[3].max(q[1]);
            }
        }
        boxes.push((lo, hi, bb));
    }
    for bi in 0..nb {
        for bj in bi..nb {
            let (lo_i, hi_i, a) = boxes[bi];
            let (lo_j, hi_j, b) = boxes[bj];
            if a[0] > b[2] || b[0] > a[2] || a[1] > b[3] || b[1] > a[3] {
                continue;
            }
            for i in lo_i..hi_i {
                let j_start = if bi == bj { (i + 2).max(lo_j) } else { lo_j.max(i + 2) };
                for j in j_start..hi_j {
                    // adjacent through the wrap-around share an endpoint
                    if i == 0 && j == n - 1 {
                        continue;
                    }
                    if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn segments_intersect<F: Real>(p1: [F; 2], p2: [F; 2], q1: [F; 2], q2: [F; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > F::zero() && d2 < F::zero()) || (d1 < F::zero() && d2 > F::zero()))
        && ((d3 > F::zero() && d4 < F::zero()) || (d3 < F::zero() && d4 > F::zero()))
    {
        return true;
    }
    // Collinear touching counts as an intersection for non-adjacent segments.
    let on = |d: F, a: [F; 2], b: [F; 2], p: [F; 2]| {
        d == F::zero()
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(d1, q1, q2, p1) || on(d2, q1, q2, p2) || on(d3, p1, p2, q1) || on(d4, p1, p2, q2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kite(values: [f64; 6]) -> BoundaryCurve<f64> {
        make_curve(ObstacleParams::new(Family::Kite6, values.to_vec()).unwrap())
    }

    fn ring_sources(radius: f64, count: usize) -> Vec<[f64; 2]> {
        (0..count)
            .map(|l| {
                let th = 2.0 * std::f64::consts::PI * l as f64 / count as f64;
                [radius * th.cos(), radius * th.sin()]
            })
            .collect()
    }

    #[test]
    fn kite_point_values() {
        let c = kite([-0.65, 1.0, 0.65, -3.0, 1.5, 0.0]);
        let p0 = c.at(0.0);
        assert!((p0[0] - 1.0).abs() < 1e-14 && (p0[1] + 3.0).abs() < 1e-14);
        let p1 = c.at(std::f64::consts::FRAC_PI_2);
        assert!((p1[0] + 1.3).abs() < 1e-14 && (p1[1] + 1.5).abs() < 1e-14);
    }

    #[test]
    fn prior_mean_is_unit_circle() {
        let c = kite([0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        for j in 0..32 {
            let t = 2.0 * std::f64::consts::PI * j as f64 / 32.0;
            let p = c.at(t);
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn star_point_value() {
        let p = ObstacleParams::<f64>::new(
            Family::StarFourier { n_r: 1 },
            vec![-5.0, -4.0, 2.5, 2.0, 1.0],
        )
        .unwrap();
        let c = make_curve(p);
        let x0 = c.at(0.0);
        assert!((x0[0] + 0.5).abs() < 1e-14 && (x0[1] + 4.0).abs() < 1e-14);
    }

    #[test]
    fn param_length_checked() {
        assert!(ObstacleParams::<f64>::new(Family::Kite6, vec![0.0; 5]).is_err());
        assert!(ObstacleParams::<f64>::new(Family::StarFourier { n_r: 4 }, vec![0.0; 11]).is_ok());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let curves = vec![
            kite([-0.65, 1.0, 0.65, -3.0, 1.5, 0.0]),
            make_curve(
                ObstacleParams::new(
                    Family::StarFourier { n_r: 4 },
                    vec![-1.0, -1.0, 4.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
                )
                .unwrap(),
            ),
        ];
        let h = 1.0e-4;
        for c in &curves {
            for i in 0..32 {
                let t = 0.13 + 2.0 * std::f64::consts::PI * i as f64 / 32.0;
                let p = c.eval(t);
                let pf = c.eval(t + h);
                let pb = c.eval(t - h);
                for d in 0..2 {
                    let fd1 = (pf.x[d] - pb.x[d]) / (2.0 * h);
                    let fd2 = (pf.x[d] - 2.0 * p.x[d] + pb.x[d]) / (h * h);
                    assert!((fd1 - p.dx[d]).abs() < 1e-6, "dx mismatch");
                    assert!((fd2 - p.ddx[d]).abs() < 1e-4, "ddx mismatch");
                }
            }
        }
    }

    #[test]
    fn unit_circle_samples() {
        let c = kite([0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        let s = sample_boundary(&c, 8);
        assert!((s[0][0] - 1.0).abs() < 1e-15);
        assert!((s[2][0]).abs() < 1e-15 && (s[2][1] - 1.0).abs() < 1e-15);
        assert!((s[4][0] + 1.0).abs() < 1e-15);
        // nested grids coincide at even positions
        let fine = sample_boundary(&c, 16);
        for j in 0..8 {
            assert_eq!(s[j], fine[2 * j]);
        }
    }

    #[test]
    fn translation_moves_star_samples_exactly() {
        let base = make_curve(
            ObstacleParams::new(Family::StarFourier { n_r: 1 }, vec![0.0, 0.0, 2.0, 0.3, -0.2])
                .unwrap(),
        );
        let moved = make_curve(
            ObstacleParams::new(Family::StarFourier { n_r: 1 }, vec![1.5, -2.5, 2.0, 0.3, -0.2])
                .unwrap(),
        );
        let a = sample_boundary(&base, 64);
        let b = sample_boundary(&moved, 64);
        for j in 0..64 {
            assert_eq!(a[j][0] + 1.5, b[j][0]);
            assert_eq!(a[j][1] - 2.5, b[j][1]);
        }
    }

    #[test]
    fn validity_cases() {
        let cfg = ValidityConfig::default();
        let sources = ring_sources(6.0, 25);
        // unit circle inside the ring
        assert!(is_valid(&kite([0.0, 1.0, 0.0, 0.0, 1.0, 0.0]), &sources, &cfg));
        // paper kite inside the ring
        assert!(is_valid(&kite([-0.65, 1.0, 0.65, -3.0, 1.5, 0.0]), &sources, &cfg));
        // negative star radius rejected
        let bad = make_curve(
            ObstacleParams::new(Family::StarFourier { n_r: 1 }, vec![0.0, 0.0, 1.0, -2.0, 0.0])
                .unwrap(),
        );
        assert!(!is_valid(&bad, &sources, &cfg));
        // source sitting on the boundary rejected
        let on_boundary = vec![[1.0, 0.0]];
        assert!(!is_valid(&kite([0.0, 1.0, 0.0, 0.0, 1.0, 0.0]), &on_boundary, &cfg));
        // self-intersecting kite rejected (large second harmonic folds the curve)
        assert!(!is_valid(&kite([0.0, 0.2, 1.4, 0.0, 0.2, 0.0]), &sources, &cfg));
    }

    #[test]
    fn perimeter_converges() {
        let c = kite([-0.65, 1.0, 0.65, -3.0, 1.5, 0.0]);
        let per = |n: usize| {
            let s = sample_boundary(&c, n);
            let mut acc = 0.0;
            for i in 0..n {
                let a = s[i];
                let b = s[(i + 1) % n];
                acc += (b[0] - a[0]).hypot(b[1] - a[1]);
            }
            acc
        };
        let p1 = per(1024);
        let p2 = per(4096);
        assert!((p1 - p2).abs() / p2 < 1e-4);
    }

    #[test]
    fn clockwise_orientation_detected() {
        // negative b1 flips the traversal direction
        let c = kite([0.0, 1.0, 0.0, 0.0, -1.0, 0.0]);
        assert_eq!(orientation(&c, 64), -1.0);
        let d = kite([0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(orientation(&d, 64), 1.0);
    }
}
