//! Planar polygon utilities: areas, convex hulls, Minkowski sums and
//! Hausdorff distances between closed polylines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotation about `center` by `angle` radians.
    pub fn rotate_about(self, center: Point, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        let d = self.sub(center);
        Point::new(center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y)
    }
}

/// Shoelace signed area of a closed polygon (the closing edge is implicit).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..n {
        acc += poly[k].cross(poly[(k + 1) % n]);
    }
    0.5 * acc
}

pub fn perimeter(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|k| poly[(k + 1) % n].sub(poly[k]).norm()).sum()
}

pub fn centroid(poly: &[Point]) -> Point {
    let a = signed_area(poly);
    if a.abs() < 1e-300 {
        let n = poly.len().max(1) as f64;
        let s = poly.iter().fold(Point::new(0.0, 0.0), |acc, p| acc.add(*p));
        return s.scale(1.0 / n);
    }
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        let c = p.cross(q);
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point::new(cx / (6.0 * a), cy / (6.0 * a))
}

/// Drops a trailing vertex equal to the first, if present.
pub fn open_ring(poly: &[Point]) -> &[Point] {
    match (poly.first(), poly.last()) {
        (Some(a), Some(b)) if poly.len() > 1 && a == b => &poly[..poly.len() - 1],
        _ => poly,
    }
}

/// Monotone-chain convex hull, counter-clockwise, collinear points removed.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if b.sub(a).cross(p.sub(a)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Removes repeated and collinear vertices from a closed convex polygon.
pub fn simplify_convex(poly: &[Point], tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(poly.len());
    for &p in open_ring(poly) {
        if out.last().map_or(true, |q: &Point| q.sub(p).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].sub(out[out.len() - 1]).norm() <= tol {
        out.pop();
    }
    let mut changed = true;
    while changed && out.len() >= 3 {
        changed = false;
        let n = out.len();
        for k in 0..n {
            let (a, b, c) = (out[(k + n - 1) % n], out[k], out[(k + 1) % n]);
            let area2 = b.sub(a).cross(c.sub(b));
            let scale = b.sub(a).norm() + c.sub(b).norm();
            if area2.abs() <= tol * scale {
                out.remove(k);
                changed = true;
                break;
            }
        }
    }
    out
}

fn lowest_index(poly: &[Point]) -> usize {
    (0..poly.len())
        .min_by(|&a, &b| {
            poly[a]
                .y
                .total_cmp(&poly[b].y)
                .then(poly[a].x.total_cmp(&poly[b].x))
        })
        .expect("nonempty polygon")
}

/// Minkowski sum of two convex counter-clockwise polygons by edge merging.
///
/// Either argument may be degenerate (a point or a segment).
pub fn minkowski_sum(p: &[Point], q: &[Point]) -> Vec<Point> {
    let p = open_ring(p);
    let q = open_ring(q);
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let (i0, j0) = (lowest_index(p), lowest_index(q));
    let (n, m) = (p.len(), q.len());
    let mut out = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < m {
        let a = p[(i0 + i) % n];
        let b = q[(j0 + j) % m];
        out.push(a.add(b));
        let ea = p[(i0 + i + 1) % n].sub(a);
        let eb = q[(j0 + j + 1) % m].sub(b);
        let c = ea.cross(eb);
        if j >= m || (i < n && c > 0.0) {
            i += 1;
        } else if i >= n || c < 0.0 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    simplify_convex(&out, 1e-12)
}

/// Ray-casting membership test; boundary points are unspecified.
pub fn point_in_polygon(pt: Point, poly: &[Point]) -> bool {
    let poly = open_ring(poly);
    let n = poly.len();
    let mut inside = false;
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a.y > pt.y) != (b.y > pt.y) {
            let x = a.x + (pt.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > pt.x {
                inside = !inside;
            }
        }
    }
    inside
}

#[inline]
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.sub(a).norm();
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.sub(a.add(ab.scale(t))).norm()
}

fn segments(curves: &[Vec<Point>]) -> Vec<(Point, Point)> {
    let mut segs = Vec::new();
    for c in curves {
        let c = open_ring(c);
        match c.len() {
            0 => {}
            1 => segs.push((c[0], c[0])),
            n => segs.extend((0..n).map(|k| (c[k], c[(k + 1) % n]))),
        }
    }
    segs
}

fn densify(curves: &[Vec<Point>], resolution: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for (a, b) in segments(curves) {
        let len = b.sub(a).norm();
        let steps = ((len / resolution).ceil() as usize).max(1);
        for s in 0..steps {
            out.push(a.add(b.sub(a).scale(s as f64 / steps as f64)));
        }
    }
    out
}

// Max over sampled points of A of the exact distance to B's segments.
// Scans start at the previous nearest segment and stop as soon as the running
// minimum falls below the running maximum, which keeps the search near-linear
// for curves traversed in order.
fn directed(a_pts: &[Point], b_segs: &[(Point, Point)]) -> f64 {
    let m = b_segs.len();
    let mut cmax = 0.0f64;
    let mut hint = 0usize;
    for &p in a_pts {
        let mut cmin = f64::INFINITY;
        let mut best = hint;
        for off in 0..m {
            let k = (hint + off) % m;
            let (s, t) = b_segs[k];
            let d = point_segment_distance(p, s, t);
            if d < cmin {
                cmin = d;
                best = k;
                if cmin <= cmax {
                    break;
                }
            }
        }
        hint = best;
        if cmin > cmax {
            cmax = cmin;
        }
    }
    cmax
}

/// Hausdorff distance between two closed polygons.
///
/// Edges of each side are sampled at spacing at most `resolution`; distances to
/// the other side are exact point-to-segment distances, so the result is
/// within `resolution / 2` of the true value.
pub fn hausdorff(a: &[Point], b: &[Point], resolution: f64) -> Result<f64> {
    hausdorff_sets(&[a.to_vec()], &[b.to_vec()], resolution)
}

/// Hausdorff distance between two unions of closed polygons.
pub fn hausdorff_sets(a: &[Vec<Point>], b: &[Vec<Point>], resolution: f64) -> Result<f64> {
    if !(resolution > 0.0) {
        return Err(Error::Config(format!("resolution must be > 0, got {resolution}")));
    }
    let (sa, sb) = (segments(a), segments(b));
    if sa.is_empty() {
        return Err(Error::Empty("first point set"));
    }
    if sb.is_empty() {
        return Err(Error::Empty("second point set"));
    }
    let da = densify(a, resolution);
    let db = densify(b, resolution);
    Ok(directed(&da, &sb).max(directed(&db, &sa)))
}
