//! Level lines of a height field.
//!
//! The `h`-level line is the set of dual bonds separating a site with height
//! `>= h` from a neighbor with height `< h`. Dual vertices are addressed by
//! `(u, v)` with `0 <= u, v <= L`, standing for the point `(u + ½, v + ½)`.
//! Where four bonds meet, North is paired with East and South with West:
//! the two sides of the NW–SE diagonal through that vertex.
//!
//! Every bond is stored with a direction that keeps the `>= h` side on its
//! left, so traced loops come out counter-clockwise around raised regions
//! and clockwise around holes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, Point};
use crate::lattice::HeightField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualVertex {
    pub u: u32,
    pub v: u32,
}

impl DualVertex {
    /// Position in site coordinates.
    pub fn point(self) -> Point {
        Point::new(self.u as f64 + 0.5, self.v as f64 + 0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// One dual bond: its axis and its midpoint in site coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualEdge {
    pub axis: Axis,
    pub midpoint: Point,
}

/// Crossing bonds at one level.
///
/// `vertical[r * (L + 1) + u]` joins `(u, r)` to `(u, r + 1)`; `+1` means it
/// runs upward (left cell raised), `-1` downward. `horizontal[v * L + c]`
/// joins `(c, v)` to `(c + 1, v)`; `+1` runs east (upper cell raised).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualEdgeSet {
    level: u32,
    side: usize,
    vertical: Vec<i8>,
    horizontal: Vec<i8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    fn partner(self) -> Dir {
        match self {
            Dir::N => Dir::E,
            Dir::E => Dir::N,
            Dir::S => Dir::W,
            Dir::W => Dir::S,
        }
    }
}

/// Builds the crossing-bond set for level `h >= 1`.
pub fn edge_set(field: &HeightField, h: u32) -> Result<DualEdgeSet> {
    if h < 1 {
        return Err(Error::InvalidLevel(h));
    }
    let l = field.side();
    let raised = |i: i64, j: i64| field.get(i, j) >= h;
    let mut vertical = vec![0i8; (l + 1) * l];
    let mut horizontal = vec![0i8; l * (l + 1)];
    for r in 0..l {
        let row = r as i64 + 1;
        for u in 0..=l {
            let (left, right) = (raised(u as i64, row), raised(u as i64 + 1, row));
            vertical[r * (l + 1) + u] = match (left, right) {
                (true, false) => 1,
                (false, true) => -1,
                _ => 0,
            };
        }
    }
    for v in 0..=l {
        for c in 0..l {
            let col = c as i64 + 1;
            let (below, above) = (raised(col, v as i64), raised(col, v as i64 + 1));
            horizontal[v * l + c] = match (below, above) {
                (false, true) => 1,
                (true, false) => -1,
                _ => 0,
            };
        }
    }
    Ok(DualEdgeSet { level: h, side: l, vertical, horizontal })
}

impl DualEdgeSet {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.vertical.iter().chain(&self.horizontal).filter(|&&d| d != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edges(&self) -> Vec<DualEdge> {
        let l = self.side;
        let mut out = Vec::new();
        for r in 0..l {
            for u in 0..=l {
                if self.vertical[r * (l + 1) + u] != 0 {
                    out.push(DualEdge {
                        axis: Axis::Vertical,
                        midpoint: Point::new(u as f64 + 0.5, r as f64 + 1.0),
                    });
                }
            }
        }
        for v in 0..=l {
            for c in 0..l {
                if self.horizontal[v * l + c] != 0 {
                    out.push(DualEdge {
                        axis: Axis::Horizontal,
                        midpoint: Point::new(c as f64 + 1.0, v as f64 + 0.5),
                    });
                }
            }
        }
        out
    }

    #[inline]
    fn vert(&self, u: usize, r: usize) -> i8 {
        self.vertical[r * (self.side + 1) + u]
    }

    #[inline]
    fn horiz(&self, c: usize, v: usize) -> i8 {
        self.horizontal[v * self.side + c]
    }

    /// Number of bonds incident to a dual vertex.
    pub fn degree(&self, at: DualVertex) -> usize {
        self.incident(at).iter().filter(|x| x.is_some()).count()
    }

    // For each side N, E, S, W: Some(outgoing?) if the bond is present.
    fn incident(&self, at: DualVertex) -> [Option<bool>; 4] {
        let (u, v, l) = (at.u as usize, at.v as usize, self.side);
        let n = (v < l).then(|| self.vert(u, v)).filter(|&d| d != 0).map(|d| d > 0);
        let s = (v >= 1).then(|| self.vert(u, v - 1)).filter(|&d| d != 0).map(|d| d < 0);
        let e = (u < l).then(|| self.horiz(u, v)).filter(|&d| d != 0).map(|d| d > 0);
        let w = (u >= 1).then(|| self.horiz(u - 1, v)).filter(|&d| d != 0).map(|d| d < 0);
        [n, e, s, w]
    }
}

/// One closed level-line loop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLoop {
    pub level: u32,
    /// `+1` if the cells just inside are raised (`>= level`), `-1` for a hole.
    pub sign: i8,
    /// Closed vertex cycle; the first vertex is repeated at the end.
    pub vertices: Vec<DualVertex>,
    /// Number of unit bonds.
    pub length: usize,
    /// Enclosed area in unit cells.
    pub area: u64,
}

impl LevelLoop {
    pub fn points(&self) -> Vec<Point> {
        self.vertices.iter().map(|v| v.point()).collect()
    }

    /// Points mapped into the unit square for a box of side `side`.
    pub fn rescaled(&self, side: usize) -> Vec<Point> {
        let s = side as f64;
        self.vertices
            .iter()
            .map(|v| Point::new(v.u as f64 / s, v.v as f64 / s))
            .collect()
    }

    /// Leftmost vertical bond, lowest among ties, as `(u, r)`.
    fn leftmost_lowest(&self) -> (u32, u32) {
        self.vertices
            .windows(2)
            .filter(|w| w[0].u == w[1].u)
            .map(|w| (w[0].u, w[0].v.min(w[1].v)))
            .min()
            .expect("a closed lattice loop has vertical bonds")
    }

    /// Center of the cell just inside the leftmost-lowest bond.
    pub fn interior_cell(&self) -> (i64, i64) {
        let (u, r) = self.leftmost_lowest();
        (u as i64 + 1, r as i64 + 1)
    }

    /// Twice the shoelace area, in the traversal orientation.
    pub fn signed_double_area(&self) -> i64 {
        self.vertices
            .windows(2)
            .map(|w| w[0].u as i64 * w[1].v as i64 - w[1].u as i64 * w[0].v as i64)
            .sum()
    }

    pub fn bounding_box(&self) -> (DualVertex, DualVertex) {
        let (mut lo, mut hi) = (self.vertices[0], self.vertices[0]);
        for v in &self.vertices {
            lo.u = lo.u.min(v.u);
            lo.v = lo.v.min(v.v);
            hi.u = hi.u.max(v.u);
            hi.v = hi.v.max(v.v);
        }
        (lo, hi)
    }

    pub fn contains_point(&self, p: Point) -> bool {
        let (lo, hi) = self.bounding_box();
        let (a, b) = (lo.point(), hi.point());
        p.x > a.x && p.x < b.x && p.y > a.y && p.y < b.y && point_in_polygon(p, &self.points())
    }

    /// Lowest height of the loop above column `x` (site coordinates).
    ///
    /// Includes points on vertical bonds lying exactly on `x`. `None` if the
    /// loop does not reach `x`.
    pub fn rho(&self, x: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0].point(), w[1].point());
            let y = if a.y == b.y {
                (a.x.min(b.x) <= x && x <= a.x.max(b.x)).then_some(a.y)
            } else {
                (a.x == x).then(|| a.y.min(b.y))
            };
            if let Some(y) = y {
                best = Some(best.map_or(y, |m| m.min(y)));
            }
        }
        best
    }

    /// Lowest horizontal bond above each cell column `1..=L`.
    pub fn column_floor(&self, side: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; side + 1];
        for w in self.vertices.windows(2) {
            if w[0].v == w[1].v {
                let col = w[0].u.min(w[1].u) as usize + 1;
                let y = w[0].v as f64 + 0.5;
                let slot: &mut Option<f64> = &mut out[col];
                *slot = Some(slot.map_or(y, |m| m.min(y)));
            }
        }
        out
    }
}

/// Splits the bond set into edge-disjoint closed loops.
pub fn trace_loops(edges: &DualEdgeSet) -> Result<Vec<LevelLoop>> {
    let l = edges.side;
    let mut seen_v = vec![false; edges.vertical.len()];
    let mut seen_h = vec![false; edges.horizontal.len()];
    let mut loops = Vec::new();

    // Start points: every present bond, scanned vertical then horizontal.
    let starts = (0..edges.vertical.len())
        .map(|k| (true, k))
        .chain((0..edges.horizontal.len()).map(|k| (false, k)));
    for (is_vert, k) in starts {
        let (dir, seen) = if is_vert {
            (edges.vertical[k], seen_v[k])
        } else {
            (edges.horizontal[k], seen_h[k])
        };
        if dir == 0 || seen {
            continue;
        }
        // tail vertex and first step of the starting bond
        let (tail, step) = if is_vert {
            let (u, r) = ((k % (l + 1)) as u32, (k / (l + 1)) as u32);
            if dir > 0 {
                (DualVertex { u, v: r }, Dir::N)
            } else {
                (DualVertex { u, v: r + 1 }, Dir::S)
            }
        } else {
            let (c, v) = ((k % l) as u32, (k / l) as u32);
            if dir > 0 {
                (DualVertex { u: c, v }, Dir::E)
            } else {
                (DualVertex { u: c + 1, v }, Dir::W)
            }
        };
        let mut vertices = vec![tail];
        let mut at = tail;
        let mut out = step;
        loop {
            at = walk(edges, &mut seen_v, &mut seen_h, at, out)?;
            vertices.push(at);
            // arriving side is opposite to the direction travelled
            let arrived = match out {
                Dir::N => Dir::S,
                Dir::S => Dir::N,
                Dir::E => Dir::W,
                Dir::W => Dir::E,
            };
            let exit = choose_exit(edges, at, arrived)?;
            if at == tail && exit == step {
                break;
            }
            out = exit;
        }
        loops.push(finish_loop(edges, vertices)?);
    }
    Ok(loops)
}

fn bond_slot(l: usize, at: DualVertex, d: Dir) -> (bool, usize) {
    let (u, v) = (at.u as usize, at.v as usize);
    match d {
        Dir::N => (true, v * (l + 1) + u),
        Dir::S => (true, (v - 1) * (l + 1) + u),
        Dir::E => (false, v * l + u),
        Dir::W => (false, v * l + u - 1),
    }
}

fn walk(
    edges: &DualEdgeSet,
    seen_v: &mut [bool],
    seen_h: &mut [bool],
    at: DualVertex,
    d: Dir,
) -> Result<DualVertex> {
    let (is_vert, k) = bond_slot(edges.side, at, d);
    let slot = if is_vert { &mut seen_v[k] } else { &mut seen_h[k] };
    if *slot {
        return Err(Error::Invariant(format!("bond at {at:?} {d:?} traversed twice")));
    }
    *slot = true;
    Ok(match d {
        Dir::N => DualVertex { u: at.u, v: at.v + 1 },
        Dir::S => DualVertex { u: at.u, v: at.v - 1 },
        Dir::E => DualVertex { u: at.u + 1, v: at.v },
        Dir::W => DualVertex { u: at.u - 1, v: at.v },
    })
}

const SIDES: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

fn choose_exit(edges: &DualEdgeSet, at: DualVertex, arrived: Dir) -> Result<Dir> {
    let inc = edges.incident(at);
    let outgoing: Vec<Dir> = SIDES
        .iter()
        .zip(inc)
        .filter(|(_, o)| *o == Some(true))
        .map(|(&d, _)| d)
        .collect();
    let exit = match (inc.iter().filter(|o| o.is_some()).count(), outgoing.as_slice()) {
        (2, [d]) => *d,
        (4, [_, _]) => arrived.partner(),
        (deg, _) => {
            return Err(Error::Invariant(format!(
                "dual vertex {at:?} has degree {deg} with {} outgoing bonds",
                outgoing.len()
            )))
        }
    };
    if inc[exit as usize] != Some(true) {
        return Err(Error::Invariant(format!(
            "pairing at {at:?} from {arrived:?} leads to a non-outgoing bond"
        )));
    }
    Ok(exit)
}

fn finish_loop(edges: &DualEdgeSet, vertices: Vec<DualVertex>) -> Result<LevelLoop> {
    let length = vertices.len() - 1;
    let mut lp = LevelLoop { level: edges.level, sign: 0, vertices, length, area: 0 };
    let double = lp.signed_double_area();
    let (u, r) = lp.leftmost_lowest();
    // the cell to the right of the leftmost bond is inside; a downward bond
    // keeps the raised side on its right
    lp.sign = if edges.vert(u as usize, r as usize) < 0 { 1 } else { -1 };
    if double == 0 || double % 2 != 0 || double.signum() != lp.sign as i64 {
        return Err(Error::Invariant(format!(
            "loop area {double}/2 inconsistent with sign {}",
            lp.sign
        )));
    }
    lp.area = (double.unsigned_abs()) / 2;
    Ok(lp)
}

/// All loops of a field, grouped by level, with the macroscopic cutoff `(ln L)^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopEnsemble {
    pub side: usize,
    pub cutoff: f64,
    /// `levels[h - 1]` holds the loops at level `h`.
    pub levels: Vec<Vec<LevelLoop>>,
}

impl LoopEnsemble {
    pub fn is_macroscopic(&self, lp: &LevelLoop) -> bool {
        lp.area as f64 >= self.cutoff
    }

    pub fn at_level(&self, h: u32) -> &[LevelLoop] {
        if h == 0 {
            return &[];
        }
        self.levels.get(h as usize - 1).map_or(&[], |v| v.as_slice())
    }

    pub fn macroscopic_at_level(&self, h: u32) -> Vec<&LevelLoop> {
        self.at_level(h).iter().filter(|lp| self.is_macroscopic(lp)).collect()
    }

    /// The collection `L_i`: macroscopic loops at height `plateau - i`.
    pub fn view(&self, i: u32, plateau: u32) -> Vec<&LevelLoop> {
        match plateau.checked_sub(i) {
            Some(h) if h >= 1 => self.macroscopic_at_level(h),
            _ => Vec::new(),
        }
    }

    pub fn max_level(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn iter(&self) -> impl Iterator<Item = &LevelLoop> {
        self.levels.iter().flatten()
    }
}

pub fn macroscopic_cutoff(side: usize) -> f64 {
    let ln = (side as f64).ln();
    ln * ln
}

pub fn extract_ensemble(field: &HeightField) -> Result<LoopEnsemble> {
    let levels = (1..=field.max_height())
        .map(|h| trace_loops(&edge_set(field, h)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoopEnsemble { side: field.side(), cutoff: macroscopic_cutoff(field.side()), levels })
}

/// Containment forest over all loops of an ensemble.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestingForest {
    /// `(level, index within level)` for every node.
    pub nodes: Vec<(u32, usize)>,
    pub parent: Vec<Option<usize>>,
}

impl NestingForest {
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&k| self.parent[k].is_none())
    }

    pub fn ancestors(&self, mut k: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(p) = self.parent[k] {
            out.push(p);
            k = p;
        }
        out
    }
}

/// Parent of each loop = the smallest loop strictly containing its interior cell.
///
/// Loops enclosing the same region at several levels nest by level, lower outside.
pub fn nesting_forest(ensemble: &LoopEnsemble) -> NestingForest {
    let mut nodes = Vec::new();
    let mut loops = Vec::new();
    for (li, level) in ensemble.levels.iter().enumerate() {
        for (k, lp) in level.iter().enumerate() {
            nodes.push((li as u32 + 1, k));
            loops.push(lp);
        }
    }
    let polys: Vec<Vec<Point>> = loops.iter().map(|lp| lp.points()).collect();
    let boxes: Vec<_> = loops.iter().map(|lp| lp.bounding_box()).collect();
    // outer-first order: larger area, then lower level
    let mut order: Vec<usize> = (0..loops.len()).collect();
    order.sort_by(|&a, &b| {
        loops[b].area.cmp(&loops[a].area).then(loops[a].level.cmp(&loops[b].level))
    });
    let rank: Vec<usize> = {
        let mut r = vec![0; order.len()];
        for (pos, &k) in order.iter().enumerate() {
            r[k] = pos;
        }
        r
    };
    let mut parent = vec![None; loops.len()];
    for (pos, &k) in order.iter().enumerate() {
        let (ci, cj) = loops[k].interior_cell();
        let probe = Point::new(ci as f64, cj as f64);
        // scan candidates from the innermost outward
        for &cand in order[..pos].iter().rev() {
            let (lo, hi) = boxes[cand];
            let (a, b) = (lo.point(), hi.point());
            if probe.x < a.x || probe.x > b.x || probe.y < a.y || probe.y > b.y {
                continue;
            }
            if point_in_polygon(probe, &polys[cand]) {
                parent[k] = Some(cand);
                break;
            }
        }
        debug_assert!(parent[k].map_or(true, |p| rank[p] < rank[k]));
    }
    NestingForest { nodes, parent }
}

/// Counts from a successful [`audit_field`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub levels: u32,
    pub loops: usize,
    pub bonds: usize,
}

fn invariant(msg: String) -> Error {
    Error::Invariant(msg)
}

/// Checks the level-line structure of every level of a field.
///
/// Per level: even dual degrees, loops that close and use each bond exactly
/// once in its stored direction, signed areas summing to the level-set size,
/// and winding numbers equal to the level-set indicator at every cell. Across
/// the nesting forest, parents are never smaller than their children.
pub fn audit_field(field: &HeightField) -> Result<AuditSummary> {
    let l = field.side();
    let mut summary = AuditSummary::default();
    let mut ensemble_levels = Vec::new();
    for h in 1..=field.max_height() {
        let edges = edge_set(field, h)?;
        for u in 0..=l as u32 {
            for v in 0..=l as u32 {
                let d = edges.degree(DualVertex { u, v });
                if d % 2 != 0 {
                    return Err(invariant(format!("level {h}: vertex ({u}, {v}) has degree {d}")));
                }
            }
        }
        let loops = trace_loops(&edges)?;
        let mut used = 0;
        let mut signed_area = 0i64;
        let mut winding = vec![0i32; (l + 2) * (l + 1)];
        for lp in &loops {
            if lp.vertices.first() != lp.vertices.last() || lp.length + 1 != lp.vertices.len() {
                return Err(invariant(format!("level {h}: open loop")));
            }
            for w in lp.vertices.windows(2) {
                let (a, b) = (w[0], w[1]);
                let present = match (b.u as i64 - a.u as i64, b.v as i64 - a.v as i64) {
                    (0, 1) => edges.vert(a.u as usize, a.v as usize) == 1,
                    (0, -1) => edges.vert(a.u as usize, b.v as usize) == -1,
                    (1, 0) => edges.horiz(a.u as usize, a.v as usize) == 1,
                    (-1, 0) => edges.horiz(b.u as usize, a.v as usize) == -1,
                    _ => false,
                };
                if !present {
                    return Err(invariant(format!("level {h}: step {a:?} -> {b:?} is not a bond")));
                }
                if a.u == b.u {
                    let dir = b.v as i32 - a.v as i32;
                    let row = a.v.min(b.v) as usize + 1;
                    winding[row * (l + 2) + a.u as usize + 1] -= dir;
                }
            }
            used += lp.length;
            signed_area += lp.sign as i64 * lp.area as i64;
        }
        if used != edges.len() {
            return Err(invariant(format!(
                "level {h}: loops use {used} bonds of {}",
                edges.len()
            )));
        }
        let mut cells = 0i64;
        for j in 1..=l {
            let mut acc = 0;
            for i in 1..=l {
                acc += winding[j * (l + 2) + i];
                let raised = field.get(i as i64, j as i64) >= h;
                cells += raised as i64;
                if acc != raised as i32 {
                    return Err(invariant(format!(
                        "level {h}: winding {acc} at cell ({i}, {j}) with height {}",
                        field.get(i as i64, j as i64)
                    )));
                }
            }
        }
        if signed_area != cells {
            return Err(invariant(format!(
                "level {h}: signed area {signed_area} but {cells} raised cells"
            )));
        }
        summary.levels += 1;
        summary.loops += loops.len();
        summary.bonds += used;
        ensemble_levels.push(loops);
    }
    let ensemble = LoopEnsemble { side: l, cutoff: macroscopic_cutoff(l), levels: ensemble_levels };
    let forest = nesting_forest(&ensemble);
    // parents strictly precede children in (larger area, lower level) order,
    // which also rules out cycles
    let key = |k: usize| {
        let (h, idx) = forest.nodes[k];
        (std::cmp::Reverse(ensemble.levels[h as usize - 1][idx].area), h)
    };
    for k in 0..forest.nodes.len() {
        if let Some(p) = forest.parent[k] {
            if key(p) >= key(k) {
                return Err(invariant(format!("loop {k} does not nest inside its parent {p}")));
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(side: usize, raised: &[(usize, usize, u32)]) -> HeightField {
        let mut f = HeightField::new(side, 4, 0).unwrap();
        for &(i, j, h) in raised {
            f.set(i, j, h).unwrap();
        }
        f
    }

    #[test]
    fn edge_set_examples() {
        let zero = HeightField::new(5, 3, 0).unwrap();
        assert!(edge_set(&zero, 1).unwrap().is_empty());
        assert!(edge_set(&zero, 0).is_err());

        let one = field(5, &[(3, 3, 1)]);
        let es = edge_set(&one, 1).unwrap();
        assert_eq!(es.len(), 4);
        let mut mids: Vec<(f64, f64)> =
            es.edges().iter().map(|e| (e.midpoint.x, e.midpoint.y)).collect();
        mids.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(mids, vec![(2.5, 3.0), (3.0, 2.5), (3.0, 3.5), (3.5, 3.0)]);

        let flat = HeightField::new(6, 3, 1).unwrap();
        assert_eq!(edge_set(&flat, 1).unwrap().len(), 24);
    }

    #[test]
    fn single_cell_loop() {
        let f = field(5, &[(3, 3, 1)]);
        let loops = trace_loops(&edge_set(&f, 1).unwrap()).unwrap();
        assert_eq!(loops.len(), 1);
        let lp = &loops[0];
        assert_eq!((lp.length, lp.area, lp.sign), (4, 1, 1));
        assert_eq!(lp.vertices.first(), lp.vertices.last());
    }

    #[test]
    fn ne_diagonal_neighbors_split() {
        // sites (2,2) and (3,3) share the corner (2.5, 2.5)
        let f = field(4, &[(2, 2, 1), (3, 3, 1)]);
        let es = edge_set(&f, 1).unwrap();
        assert_eq!(es.degree(DualVertex { u: 2, v: 2 }), 4);
        let loops = trace_loops(&es).unwrap();
        assert_eq!(loops.len(), 2);
        for lp in &loops {
            assert_eq!((lp.length, lp.area, lp.sign), (4, 1, 1));
        }
    }

    #[test]
    fn nw_diagonal_neighbors_merge() {
        // sites (3,2) and (2,3) share the corner (2.5, 2.5)
        let f = field(4, &[(3, 2, 1), (2, 3, 1)]);
        let loops = trace_loops(&edge_set(&f, 1).unwrap()).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!((loops[0].length, loops[0].area, loops[0].sign), (8, 2, 1));
    }

    #[test]
    fn checkerboard_holes() {
        // a hole pattern: raised everywhere except NE-diagonal pair of holes
        let mut f = HeightField::new(4, 2, 1).unwrap();
        f.set(2, 2, 0).unwrap();
        f.set(3, 3, 0).unwrap();
        let loops = trace_loops(&edge_set(&f, 1).unwrap()).unwrap();
        let signed: i64 = loops.iter().map(|lp| lp.sign as i64 * lp.area as i64).sum();
        assert_eq!(signed, 14);
        // NE-diagonal holes stay separate; the raised NW/SE cells connect
        let holes: Vec<_> = loops.iter().filter(|lp| lp.sign < 0).collect();
        assert_eq!(holes.len(), 2);
        assert!(holes.iter().all(|lp| lp.area == 1 && lp.length == 4));
    }

    #[test]
    fn ensemble_examples() {
        let zero = HeightField::new(6, 3, 0).unwrap();
        assert_eq!(extract_ensemble(&zero).unwrap().iter().count(), 0);

        let flat = HeightField::new(10, 3, 1).unwrap();
        let ens = extract_ensemble(&flat).unwrap();
        assert_eq!(ens.levels.len(), 1);
        let lp = &ens.levels[0][0];
        assert_eq!(lp.area, 100);
        assert!(ens.is_macroscopic(lp));
        assert!((ens.cutoff - 10f64.ln().powi(2)).abs() < 1e-12);
        assert_eq!(ens.view(0, 1).len(), 1);
        assert_eq!(ens.view(1, 2).len(), 1);
        assert_eq!(ens.view(0, 2).len(), 0);

        let mut block = HeightField::new(100, 3, 0).unwrap();
        for j in 49..52 {
            for i in 49..52 {
                block.set(i, j, 1).unwrap();
            }
        }
        let ens = extract_ensemble(&block).unwrap();
        assert_eq!(ens.levels[0].len(), 1);
        assert_eq!(ens.levels[0][0].area, 9);
        assert!(!ens.is_macroscopic(&ens.levels[0][0]));
    }

    #[test]
    fn nesting_examples() {
        let f = field(5, &[(3, 3, 1)]);
        let forest = nesting_forest(&extract_ensemble(&f).unwrap());
        assert_eq!(forest.roots().count(), 1);

        // plateau at 1 with an inner plateau at 2
        let mut g = HeightField::new(8, 3, 1).unwrap();
        for j in 3..6 {
            for i in 3..6 {
                g.set(i, j, 2).unwrap();
            }
        }
        let ens = extract_ensemble(&g).unwrap();
        let forest = nesting_forest(&ens);
        assert_eq!(forest.nodes.len(), 2);
        let inner = forest.nodes.iter().position(|n| n.0 == 2).unwrap();
        let outer = forest.nodes.iter().position(|n| n.0 == 1).unwrap();
        assert_eq!(forest.parent[inner], Some(outer));
        assert_eq!(forest.parent[outer], None);

        // plateau at 1 with a hole at 0
        let mut hole = HeightField::new(8, 3, 1).unwrap();
        hole.set(4, 4, 0).unwrap();
        hole.set(5, 4, 0).unwrap();
        let ens = extract_ensemble(&hole).unwrap();
        let forest = nesting_forest(&ens);
        let loops: Vec<&LevelLoop> = ens.iter().collect();
        let neg = loops.iter().position(|lp| lp.sign < 0).unwrap();
        let pos = loops.iter().position(|lp| lp.sign > 0).unwrap();
        assert_eq!(forest.parent[neg], Some(pos));
        // brute-force classification: the hole loop encloses exactly the zero cells
        for j in 1..=8 {
            for i in 1..=8 {
                let inside = loops[neg].contains_point(Point::new(i as f64, j as f64));
                assert_eq!(inside, hole.get(i, j) == 0);
            }
        }
    }

    #[test]
    fn coincident_levels_nest_by_level() {
        let mut f = HeightField::new(6, 3, 0).unwrap();
        for j in 2..5 {
            for i in 2..5 {
                f.set(i, j, 3).unwrap();
            }
        }
        let forest = nesting_forest(&extract_ensemble(&f).unwrap());
        let by_level = |h: u32| forest.nodes.iter().position(|n| n.0 == h).unwrap();
        assert_eq!(forest.parent[by_level(3)], Some(by_level(2)));
        assert_eq!(forest.parent[by_level(2)], Some(by_level(1)));
        assert_eq!(forest.parent[by_level(1)], None);
    }

    #[test]
    fn rho_examples() {
        let l = 16;
        let flat = HeightField::new(l, 3, 1).unwrap();
        let ens = extract_ensemble(&flat).unwrap();
        let lp = &ens.levels[0][0];
        for x in 2..l {
            assert_eq!(lp.rho(x as f64), Some(0.5));
        }
        assert_eq!(lp.rho(0.0), None);
        assert_eq!(lp.rho(0.5), Some(0.5));

        // raised centered square: sites 5..=12 on a 16 box
        let mut sq = HeightField::new(l, 3, 0).unwrap();
        for j in 5..=12 {
            for i in 5..=12 {
                sq.set(i, j, 1).unwrap();
            }
        }
        let lp = &extract_ensemble(&sq).unwrap().levels[0][0];
        for x in 5..=12 {
            assert_eq!(lp.rho(x as f64), Some(4.5));
        }
        assert_eq!(lp.rho(3.0), None);
    }

    #[test]
    fn rho_sawtooth_profile() {
        // column i raised from row (i % 3) + 1 upward; profile is (i % 3) + ½
        let l = 12;
        let mut f = HeightField::new(l, 3, 0).unwrap();
        for i in 1..=l {
            for j in (i % 3 + 1)..=l {
                f.set(i, j, 1).unwrap();
            }
        }
        let ens = extract_ensemble(&f).unwrap();
        let lp = ens.levels[0].iter().max_by_key(|lp| lp.area).unwrap();
        for i in 1..=l {
            assert_eq!(lp.rho(i as f64), Some((i % 3) as f64 + 0.5));
        }
        let floor = lp.column_floor(l);
        for i in 1..=l {
            assert_eq!(floor[i], Some((i % 3) as f64 + 0.5));
        }
    }

    #[test]
    fn audit_accepts_valid_fields() {
        let f = field(5, &[(2, 2, 3), (3, 3, 1), (4, 4, 2), (3, 2, 2), (2, 4, 1)]);
        let s = audit_field(&f).unwrap();
        assert_eq!(s.levels, 3);
        assert_eq!(audit_field(&HeightField::new(3, 2, 0).unwrap()).unwrap().loops, 0);
    }
}
