//! Wulff bodies and the predicted limit curves.
//!
//! A limit curve is the boundary of the union of all translates of a dilated
//! Wulff body that fit in the unit square, i.e. the morphological opening of
//! the square by the body. For a centrally symmetric convex body `B` with
//! half-extents `(a, b)` the erosion of the square is the rectangle
//! `[a, 1 - a] x [b, 1 - b]`, and the opening is that rectangle Minkowski-summed
//! with `B`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hausdorff, minkowski_sum, signed_area, simplify_convex, Point};

/// Hausdorff sampling resolution used by `fit_radius`.
pub const FIT_RESOLUTION: f64 = 2.5e-4;

const SYMMETRY_TOL: f64 = 1e-9;

/// Surface tension as a function of the outward normal angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SurfaceTension {
    /// Isotropic; the Wulff body is a disk.
    Constant,
    /// `|cos θ| + |sin θ|`; the Wulff body is an axis-aligned square.
    L1,
    /// Samples at `2πk/K`, linearly interpolated.
    Table(Vec<f64>),
}

impl SurfaceTension {
    /// Parses `constant`, `l1` or `numeric-sos` (the last needs `beta`).
    pub fn named(name: &str, beta: Option<f64>) -> Result<Self> {
        match name {
            "constant" => Ok(SurfaceTension::Constant),
            "l1" => Ok(SurfaceTension::L1),
            "numeric-sos" => {
                let beta = beta.ok_or_else(|| {
                    Error::Config("numeric-sos tension needs beta".into())
                })?;
                numeric_sos_tension(beta, 1024)
            }
            other => Err(Error::Config(format!("unknown surface tension '{other}'"))),
        }
    }

    pub fn table(samples: Vec<f64>) -> Result<Self> {
        let t = SurfaceTension::Table(samples);
        t.validate()?;
        Ok(t)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            SurfaceTension::Constant => 1.0,
            SurfaceTension::L1 => theta.cos().abs() + theta.sin().abs(),
            SurfaceTension::Table(s) => {
                let k = s.len();
                let x = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * k as f64;
                let i = (x.floor() as usize) % k;
                let t = x - x.floor();
                s[i] * (1.0 - t) + s[(i + 1) % k] * t
            }
        }
    }

    /// Positivity and the square-lattice symmetries.
    pub fn validate(&self) -> Result<()> {
        let SurfaceTension::Table(s) = self else {
            return Ok(());
        };
        let k = s.len();
        if k < 8 || k % 4 != 0 {
            return Err(Error::Config(format!(
                "tension table needs a multiple of 4 samples (>= 8), got {k}"
            )));
        }
        if let Some(bad) = s.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Config(format!("non-positive tension sample {bad}")));
        }
        for i in 0..k {
            let quarter = s[(i + k / 4) % k];
            let mirror = s[(k - i) % k];
            let scale = s[i].abs().max(1.0);
            if (quarter - s[i]).abs() > SYMMETRY_TOL * scale
                || (mirror - s[i]).abs() > SYMMETRY_TOL * scale
            {
                return Err(Error::Config(format!(
                    "tension table is not square-symmetric at sample {i}"
                )));
            }
        }
        Ok(())
    }
}

/// Tension of a one-dimensional level-line walk with step weights `e^{-beta(1 + |k|)}`.
///
/// Per unit length in direction at angle `a` from an axis, the free energy is
/// `I(tan a) cos a`, with `I` the Legendre transform of the log step generating
/// function. Values are folded into `[0, π/4]` by the square's symmetries.
pub fn numeric_sos_tension(beta: f64, samples: usize) -> Result<SurfaceTension> {
    if !(beta > 0.0) {
        return Err(Error::Config(format!("beta must be > 0, got {beta}")));
    }
    let table: Vec<f64> = (0..samples)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / samples as f64;
            let t = theta.rem_euclid(FRAC_PI_2);
            let a = t.min(FRAC_PI_2 - t);
            walk_rate(beta, a.tan()) * a.cos()
        })
        .collect();
    SurfaceTension::table(table)
}

// log of the step generating function sum_k exp(-beta (1 + |k|) + lambda k)
fn log_step_mgf(beta: f64, lambda: f64) -> f64 {
    let q1 = (lambda - beta).exp();
    let q2 = (-lambda - beta).exp();
    -beta + (1.0 + q1 / (1.0 - q1) + q2 / (1.0 - q2)).ln()
}

fn mean_step(beta: f64, lambda: f64) -> f64 {
    let q1 = (lambda - beta).exp();
    let q2 = (-lambda - beta).exp();
    let z = 1.0 + q1 / (1.0 - q1) + q2 / (1.0 - q2);
    (q1 / (1.0 - q1).powi(2) - q2 / (1.0 - q2).powi(2)) / z
}

// Legendre transform sup_lambda [lambda s - log Z(lambda)] for s >= 0
fn walk_rate(beta: f64, slope: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, beta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_step(beta, mid) < slope {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    lambda * slope - log_step_mgf(beta, lambda)
}

/// Convex, centrally symmetric polygon centered at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffBody {
    pub vertices: Vec<Point>,
    /// Linear scale relative to the area-1 body.
    pub dilation: f64,
}

/// Intersection of the half-planes `x · n(θ_k) <= τ(θ_k)`, `θ_k = 2πk/K`,
/// rescaled to area 1.
pub fn wulff_body(tension: &SurfaceTension, directions: usize) -> Result<WulffBody> {
    if directions < 8 {
        return Err(Error::Config(format!("need at least 8 directions, got {directions}")));
    }
    tension.validate()?;
    let planes: Vec<(Point, f64)> = (0..directions)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / directions as f64;
            (Point::new(theta.cos(), theta.sin()), tension.eval(theta))
        })
        .collect();
    if let Some((_, bad)) = planes.iter().find(|(_, t)| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::Config(format!("non-positive tension sample {bad}")));
    }
    let big = 4.0 * planes.iter().map(|(_, t)| *t).fold(0.0, f64::max);
    let mut poly = vec![
        Point::new(-big, -big),
        Point::new(big, -big),
        Point::new(big, big),
        Point::new(-big, big),
    ];
    for &(n, c) in &planes {
        poly = clip(&poly, n, c);
    }
    let scale = big * 1e-13;
    let poly = simplify_convex(&poly, scale);
    let area = signed_area(&poly);
    let s = 1.0 / area.sqrt();
    let vertices: Vec<Point> = poly.iter().map(|p| p.scale(s)).collect();
    Ok(WulffBody { vertices, dilation: 1.0 })
}

// Sutherland–Hodgman against a single half-plane n · x <= c.
fn clip(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let len = poly.len();
    for k in 0..len {
        let (p, q) = (poly[k], poly[(k + 1) % len]);
        let (dp, dq) = (n.dot(p) - c, n.dot(q) - c);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p.add(q.sub(p).scale(t)));
        }
    }
    out
}

impl WulffBody {
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Scales by `r` about the center; `r` must lie in `(0, 1]`.
    pub fn dilate(&self, r: f64) -> Result<WulffBody> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Config(format!("dilation must be in (0, 1], got {r}")));
        }
        Ok(WulffBody {
            vertices: self.vertices.iter().map(|p| p.scale(r)).collect(),
            dilation: self.dilation * r,
        })
    }

    /// `(max |x|, max |y|)` over the body.
    pub fn half_extents(&self) -> (f64, f64) {
        self.vertices
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (f64::max(a, p.x.abs()), f64::max(b, p.y.abs())))
    }

    /// Support function `max_x x · n(θ)`.
    pub fn support(&self, theta: f64) -> f64 {
        let n = Point::new(theta.cos(), theta.sin());
        self.vertices.iter().map(|p| p.dot(n)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_convex(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        n >= 3
            && (0..n).all(|k| {
                let (a, b, c) = (v[k], v[(k + 1) % n], v[(k + 2) % n]);
                b.sub(a).cross(c.sub(b)) > 0.0
            })
    }

    /// Largest dilation of this body that still fits in the unit square.
    pub fn max_fitting_dilation(&self) -> f64 {
        let (a, b) = self.half_extents();
        (0.5 / a.max(b)).min(1.0 / self.dilation).min(1.0)
    }
}

/// Boundary of the union of all translates of `body` inside the unit square.
pub fn opening_boundary(body: &WulffBody) -> Result<Vec<Point>> {
    let (a, b) = body.half_extents();
    let tol = 1e-12;
    if 2.0 * a > 1.0 + tol || 2.0 * b > 1.0 + tol {
        return Err(Error::BodyTooLarge(a, b));
    }
    let (x0, x1) = (a.min(0.5), (1.0 - a).max(0.5));
    let (y0, y1) = (b.min(0.5), (1.0 - b).max(0.5));
    let rect = simplify_convex(
        &[
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ],
        tol,
    );
    Ok(minkowski_sum(&rect, &body.vertices))
}

/// Length of the curve lying on each side of the unit square: bottom, right, top, left.
pub fn side_overlaps(curve: &[Point]) -> [f64; 4] {
    let tol = 1e-9;
    let n = curve.len();
    let mut out = [0.0; 4];
    for k in 0..n {
        let (p, q) = (curve[k], curve[(k + 1) % n]);
        let len = q.sub(p).norm();
        let on = |f: fn(Point) -> f64, target: f64| {
            (f(p) - target).abs() < tol && (f(q) - target).abs() < tol
        };
        if on(|p| p.y, 0.0) {
            out[0] += len;
        }
        if on(|p| p.x, 1.0) {
            out[1] += len;
        }
        if on(|p| p.y, 1.0) {
            out[2] += len;
        }
        if on(|p| p.x, 0.0) {
            out[3] += len;
        }
    }
    out
}

/// Hausdorff defects of a unit-square curve under quarter and eighth turns about the center.
pub fn symmetry_defects(curve: &[Point]) -> Result<(f64, f64)> {
    let c = Point::new(0.5, 0.5);
    let rot = |angle: f64| -> Vec<Point> { curve.iter().map(|p| p.rotate_about(c, angle)).collect() };
    Ok((
        hausdorff(curve, &rot(FRAC_PI_2), 1e-3)?,
        hausdorff(curve, &rot(FRAC_PI_4), 1e-3)?,
    ))
}

/// Predicted limit curves `W_i`, indexed from `first_index`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitShape {
    /// 0 when `W_0` is present, 1 when it is empty.
    pub first_index: usize,
    pub radii: Vec<f64>,
    pub curves: Vec<Vec<Point>>,
}

impl LimitShape {
    pub fn curve(&self, i: usize) -> Option<&[Point]> {
        i.checked_sub(self.first_index)
            .and_then(|k| self.curves.get(k))
            .map(|c| c.as_slice())
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.first_index..self.first_index + self.curves.len()
    }

    /// Every curve with a larger radius lies inside every curve with a smaller one.
    pub fn is_nested(&self) -> bool {
        let n = self.curves.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                self.radii[a] <= self.radii[b] || inside_convex(&self.curves[b], &self.curves[a])
            })
        })
    }
}

// all of `inner` within the closed convex polygon `outer`
fn inside_convex(outer: &[Point], inner: &[Point]) -> bool {
    let n = outer.len();
    inner.iter().all(|&p| {
        (0..n).all(|k| {
            let (a, b) = (outer[k], outer[(k + 1) % n]);
            b.sub(a).cross(p.sub(a)) >= -1e-12
        })
    })
}

/// Builds `W_i = opening(dilate(body, r_i))`, starting at `W_0` only when `alpha_star > alpha_c`.
pub fn predicted_ensemble(
    alpha_star: f64,
    alpha_c: f64,
    radii: &[f64],
    tension: &SurfaceTension,
    directions: usize,
) -> Result<LimitShape> {
    if (alpha_star - alpha_c).abs() < 1e-12 {
        return Err(Error::Critical);
    }
    if radii.is_empty() {
        return Err(Error::Empty("radii"));
    }
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Config(format!("radius {r} outside (0, 1)")));
    }
    for (k, a) in radii.iter().enumerate() {
        if radii[k + 1..].iter().any(|b| (a - b).abs() < 1e-12) {
            return Err(Error::Degenerate(format!(
                "radius {a} repeated; limit loops must be distinct"
            )));
        }
    }
    let body = wulff_body(tension, directions)?;
    let curves = radii
        .iter()
        .map(|&r| opening_boundary(&body.dilate(r)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitShape {
        first_index: if alpha_star > alpha_c { 0 } else { 1 },
        radii: radii.to_vec(),
        curves,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFit {
    pub radius: f64,
    pub residual: f64,
}

/// Golden-section search for the dilation whose opening curve is closest
/// (in Hausdorff distance) to `observed`, given in unit-square coordinates.
pub fn fit_radius(
    observed: &[Point],
    tension: &SurfaceTension,
    directions: usize,
) -> Result<RadiusFit> {
    let body = wulff_body(tension, directions)?;
    fit_radius_to_body(&[observed.to_vec()], &body)
}

pub fn fit_radius_to_body(observed: &[Vec<Point>], body: &WulffBody) -> Result<RadiusFit> {
    if observed.iter().all(|c| c.is_empty()) {
        return Err(Error::Empty("observed loop"));
    }
    let cost = |r: f64| -> Result<f64> {
        let curve = opening_boundary(&body.dilate(r)?)?;
        crate::geometry::hausdorff_sets(observed, &[curve], FIT_RESOLUTION)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-3, body.max_fitting_dilation());
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (cost(x1)?, cost(x2)?);
    while hi - lo > 1e-4 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = cost(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = cost(x2)?;
        }
    }
    let radius = 0.5 * (lo + hi);
    Ok(RadiusFit { radius, residual: cost(radius)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_radius_factor() -> f64 {
        // area-1 disk has radius 1/sqrt(pi)
        PI.sqrt()
    }

    #[test]
    fn constant_tension_gives_disk() {
        let body = wulff_body(&SurfaceTension::Constant, 256).unwrap();
        assert!((body.area() - 1.0).abs() < 1e-9);
        assert!(body.is_convex());
        let r = 1.0 / PI.sqrt();
        for p in &body.vertices {
            assert!((p.norm() - r).abs() < 1e-3);
        }
    }

    #[test]
    fn l1_tension_gives_square() {
        let body = wulff_body(&SurfaceTension::L1, 64).unwrap();
        assert_eq!(body.vertices.len(), 4);
        assert!((body.area() - 1.0).abs() < 1e-9);
        let (a, b) = body.half_extents();
        assert!((a - 0.5).abs() < 1e-12 && (b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn numeric_sos_between_disk_and_square() {
        let t = SurfaceTension::named("numeric-sos", Some(1.5)).unwrap();
        let body = wulff_body(&t, 512).unwrap();
        assert!(body.is_convex());
        assert!((body.area() - 1.0).abs() < 1e-9);
        let disk = 1.0 / PI.sqrt();
        let axis = body.support(0.0);
        let diag = body.support(FRAC_PI_4);
        assert!(0.5 <= axis && axis <= disk, "axis support {axis}");
        assert!(disk <= diag && diag <= 0.5f64.sqrt(), "diagonal support {diag}");
    }

    #[test]
    fn numeric_sos_tends_to_l1() {
        // at low temperature the tension approaches beta * (|cos| + |sin|),
        // lowered by at most the entropy of a geometric step law, 2 ln 2 per column
        let beta = 40.0;
        let SurfaceTension::Table(s) = numeric_sos_tension(beta, 64).unwrap() else {
            unreachable!()
        };
        for (k, &v) in s.iter().enumerate() {
            let theta = 2.0 * PI * k as f64 / 64.0;
            let l1 = theta.cos().abs() + theta.sin().abs();
            let gap = l1 - v / beta;
            assert!((-1e-9..=2.0 * 2f64.ln() / beta).contains(&gap), "{k}: {} vs {l1}", v / beta);
        }
    }

    #[test]
    fn rejects_bad_tension() {
        assert!(wulff_body(&SurfaceTension::Constant, 4).is_err());
        let mut s = vec![1.0; 16];
        s[3] = -1.0;
        assert!(SurfaceTension::table(s).is_err());
        let mut s = vec![1.0; 16];
        s[1] = 2.0;
        assert!(SurfaceTension::table(s).is_err());
        assert!(SurfaceTension::named("numeric-sos", Some(0.2)).is_err());
        assert!(SurfaceTension::named("bogus", None).is_err());
    }

    #[test]
    fn dilation_algebra() {
        let body = wulff_body(&SurfaceTension::Constant, 64).unwrap();
        assert_eq!(body.dilate(1.0).unwrap(), body);
        let sq = wulff_body(&SurfaceTension::L1, 16).unwrap();
        assert!((sq.dilate(0.5).unwrap().area() - 0.25).abs() < 1e-12);
        let ab = body.dilate(0.6).unwrap().dilate(0.5).unwrap();
        let direct = body.dilate(0.3).unwrap();
        for (p, q) in ab.vertices.iter().zip(&direct.vertices) {
            assert!(p.sub(*q).norm() < 1e-12);
        }
        assert!((ab.dilation - 0.3).abs() < 1e-15);
        assert!(body.dilate(0.0).is_err());
        assert!(body.dilate(1.5).is_err());
    }

    #[test]
    fn opening_of_square_by_squares() {
        let unit = wulff_body(&SurfaceTension::L1, 16).unwrap();
        let curve = opening_boundary(&unit).unwrap();
        assert!((signed_area(&curve) - 1.0).abs() < 1e-12);
        let small = opening_boundary(&unit.dilate(0.3).unwrap()).unwrap();
        assert_eq!(small.len(), 4);
        assert!((signed_area(&small) - 1.0).abs() < 1e-12);
        assert!(side_overlaps(&small).iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn opening_by_disk_matches_rounded_square_area() {
        let body = wulff_body(&SurfaceTension::Constant, 512).unwrap();
        for r in [0.05, 0.1, 0.2, 0.25, 0.4] {
            let curve = opening_boundary(&body.dilate(r * disk_radius_factor()).unwrap()).unwrap();
            let expect = 1.0 - (4.0 - PI) * r * r;
            assert!((signed_area(&curve) - expect).abs() < 1e-4, "{r}");
        }
        let too_big = wulff_body(&SurfaceTension::Constant, 64).unwrap();
        assert!(matches!(opening_boundary(&too_big), Err(Error::BodyTooLarge(..))));
    }

    #[test]
    fn opening_properties() {
        let body = wulff_body(&SurfaceTension::named("numeric-sos", Some(1.5)).unwrap(), 256).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..10 {
            let r = 0.1 * k as f64;
            let Ok(curve) = opening_boundary(&body.dilate(r).unwrap()) else { break };
            let area = signed_area(&curve);
            assert!(area <= prev + 1e-12);
            prev = area;
            for p in &curve {
                assert!((-1e-12..=1.0 + 1e-12).contains(&p.x));
                assert!((-1e-12..=1.0 + 1e-12).contains(&p.y));
            }
            let (quarter, _) = symmetry_defects(&curve).unwrap();
            assert!(quarter < 1e-6);
        }
    }

    #[test]
    fn side_overlap_for_small_disk() {
        let body = wulff_body(&SurfaceTension::Constant, 512).unwrap();
        let curve = opening_boundary(&body.dilate(0.25 * PI.sqrt()).unwrap()).unwrap();
        for side in side_overlaps(&curve) {
            assert!(side >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn ensemble_branches() {
        let t = SurfaceTension::Constant;
        let sub = predicted_ensemble(0.1, 0.3, &[0.2, 0.4], &t, 128).unwrap();
        assert_eq!(sub.first_index, 1);
        assert!(sub.curve(0).is_none());
        assert!(sub.curve(1).is_some() && sub.curve(2).is_some());
        let sup = predicted_ensemble(0.5, 0.3, &[0.2, 0.4], &t, 128).unwrap();
        assert_eq!(sup.indices(), 0..2);
        assert!(sup.is_nested());
        assert!(matches!(predicted_ensemble(0.3, 0.3, &[0.2], &t, 128), Err(Error::Critical)));
        assert!(matches!(
            predicted_ensemble(0.5, 0.3, &[0.2, 0.2], &t, 128),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn nested_rounded_squares() {
        let t = SurfaceTension::Constant;
        let shape = predicted_ensemble(0.5, 0.3, &[0.2, 0.4], &t, 512).unwrap();
        // corner radius of the disk at dilation r is r / sqrt(pi)
        let areas: Vec<f64> = shape.curves.iter().map(|c| signed_area(c)).collect();
        for (r, a) in shape.radii.iter().zip(&areas) {
            let rho = r / PI.sqrt();
            assert!((a - (1.0 - (4.0 - PI) * rho * rho)).abs() < 1e-4);
        }
        // the larger radius rounds more and sits inside
        assert!(areas[1] < areas[0]);
        assert!(inside_convex(&shape.curves[0], &shape.curves[1]));
        assert!(!inside_convex(&shape.curves[1], &shape.curves[0]));
    }

    #[test]
    fn fit_recovers_radius() {
        let t = SurfaceTension::Constant;
        let body = wulff_body(&t, 512).unwrap();
        let target = opening_boundary(&body.dilate(0.3).unwrap()).unwrap();
        let fit = fit_radius(&target, &t, 512).unwrap();
        assert!((fit.radius - 0.3).abs() < 1e-3, "{fit:?}");
        assert!(fit.residual < 1e-3);

        let square = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let fit = fit_radius(&square, &t, 512).unwrap();
        assert!(fit.radius < 0.01 && fit.residual < 0.01, "{fit:?}");
        assert!(fit_radius(&[], &t, 64).is_err());
    }
}
