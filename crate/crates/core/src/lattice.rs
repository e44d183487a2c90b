//! Height fields of the SOS surface above a hard wall at zero.
//!
//! Sites are indexed `(i, j)` with `1 <= i, j <= L`, `i` the column (x) and
//! `j` the row (y). Site `(i, j)` is the unit cell with corners `(i ± ½, j ± ½)`.
//! Every site outside the box has height zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default fraction of sites defining the event `E_h`.
pub const DEFAULT_E_H_THRESHOLD: f64 = 0.9;

/// Repulsion height `H(L) = ln(L) / (4 beta)`.
pub fn repulsion_height(side: usize, beta: f64) -> f64 {
    (side as f64).ln() / (4.0 * beta)
}

/// Fractional part `alpha(L) = H - floor(H)`, always in `[0, 1)`.
pub fn repulsion_fraction(side: usize, beta: f64) -> f64 {
    let h = repulsion_height(side, beta);
    let frac = h - h.floor();
    // floor can round the other way for h a hair below an integer
    if frac >= 1.0 {
        0.0
    } else {
        frac
    }
}

/// `floor(H(L))`, the predicted plateau level when `alpha > alpha_c`.
pub fn plateau_level(side: usize, beta: f64) -> u32 {
    repulsion_height(side, beta).floor().max(0.0) as u32
}

/// Leading-order critical fraction `ln(4 beta) / (4 beta)`.
pub fn critical_fraction_approx(beta: f64) -> f64 {
    (4.0 * beta).ln() / (4.0 * beta)
}

/// Default sampler truncation `ceil(H(L)) + 5`.
pub fn default_height_cap(side: usize, beta: f64) -> u32 {
    repulsion_height(side, beta).ceil().max(0.0) as u32 + 5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub side_length: usize,
    pub beta: f64,
    pub height_cap: u32,
    pub sweeps: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub e_h_threshold: f64,
    /// Warm-start level; `None` means `floor(H(L))` clamped to the cap.
    pub start_level: Option<u32>,
    /// Overrides the leading-order critical fraction.
    pub alpha_c: Option<f64>,
}

impl SimConfig {
    pub fn new(side_length: usize, beta: f64) -> Self {
        let height_cap = if side_length >= 1 && beta > 0.0 {
            default_height_cap(side_length, beta)
        } else {
            5
        };
        SimConfig {
            side_length,
            beta,
            height_cap,
            sweeps: 1000,
            burn_in: 1000,
            seed: 0,
            e_h_threshold: DEFAULT_E_H_THRESHOLD,
            start_level: None,
            alpha_c: None,
        }
    }

    pub fn with_cap(mut self, cap: u32) -> Self {
        self.height_cap = cap;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Every violated precondition, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.side_length < 1 {
            out.push("SimConfig: side_length must be >= 1".to_string());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            out.push(format!("SimConfig: beta must be > 0, got {}", self.beta));
        }
        if self.height_cap < 1 {
            out.push("SimConfig: height_cap must be >= 1".to_string());
        }
        if self.height_cap > u16::MAX as u32 {
            out.push(format!(
                "SimConfig: height_cap must be <= {}, got {}",
                u16::MAX,
                self.height_cap
            ));
        }
        if !(self.e_h_threshold > 0.0 && self.e_h_threshold <= 1.0) {
            out.push(format!(
                "SimConfig: e_h_threshold must be in (0, 1], got {}",
                self.e_h_threshold
            ));
        }
        if let Some(level) = self.start_level {
            if level > self.height_cap {
                out.push(format!(
                    "SimConfig: start_level {level} exceeds height_cap {}",
                    self.height_cap
                ));
            }
        }
        if let Some(ac) = self.alpha_c {
            if !(ac > 0.0 && ac < 1.0) {
                out.push(format!("SimConfig: alpha_c must be in (0, 1), got {ac}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }

    pub fn repulsion_height(&self) -> f64 {
        repulsion_height(self.side_length, self.beta)
    }

    pub fn plateau_level(&self) -> u32 {
        plateau_level(self.side_length, self.beta)
    }

    pub fn alpha(&self) -> f64 {
        repulsion_fraction(self.side_length, self.beta)
    }

    pub fn alpha_c(&self) -> f64 {
        self.alpha_c
            .unwrap_or_else(|| critical_fraction_approx(self.beta))
    }

    /// Warm-start level actually used by the sampler.
    pub fn effective_start_level(&self) -> u32 {
        self.start_level
            .unwrap_or_else(|| self.plateau_level())
            .min(self.height_cap)
    }
}

/// An `L x L` grid of heights in `[0, M]` with zero boundary condition.
///
/// Stored with a one-cell zero border so neighbor reads never branch.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeightField {
    side: usize,
    cap: u32,
    padded: Vec<u16>,
}

impl HeightField {
    pub fn new(side: usize, cap: u32, level: u32) -> Result<Self> {
        if side < 1 {
            return Err(Error::Config("side_length must be >= 1".into()));
        }
        if cap > u16::MAX as u32 {
            return Err(Error::Config(format!("height_cap {cap} too large")));
        }
        if level > cap {
            return Err(Error::HeightOutOfRange { height: level, cap });
        }
        let stride = side + 2;
        let mut padded = vec![0u16; stride * stride];
        for j in 1..=side {
            for i in 1..=side {
                padded[j * stride + i] = level as u16;
            }
        }
        Ok(HeightField { side, cap, padded })
    }

    /// Builds a field from row-major heights, row `j = 1` first.
    pub fn from_rows(side: usize, cap: u32, heights: &[u32]) -> Result<Self> {
        if heights.len() != side * side {
            return Err(Error::Config(format!(
                "expected {} heights, got {}",
                side * side,
                heights.len()
            )));
        }
        let mut field = HeightField::new(side, cap, 0)?;
        for (k, &h) in heights.iter().enumerate() {
            field.set(k % side + 1, k / side + 1, h)?;
        }
        Ok(field)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    #[inline]
    pub(crate) fn stride(&self) -> usize {
        self.side + 2
    }

    #[inline]
    pub(crate) fn padded(&self) -> &[u16] {
        &self.padded
    }

    #[inline]
    pub(crate) fn padded_mut(&mut self) -> &mut [u16] {
        &mut self.padded
    }

    /// Height at `(i, j)`; zero anywhere outside `1..=L`.
    #[inline]
    pub fn get(&self, i: i64, j: i64) -> u32 {
        let l = self.side as i64;
        if i < 1 || j < 1 || i > l || j > l {
            0
        } else {
            self.padded[j as usize * self.stride() + i as usize] as u32
        }
    }

    pub fn set(&mut self, i: usize, j: usize, height: u32) -> Result<()> {
        self.check_site(i, j)?;
        if height > self.cap {
            return Err(Error::HeightOutOfRange { height, cap: self.cap });
        }
        let s = self.stride();
        self.padded[j * s + i] = height as u16;
        Ok(())
    }

    fn check_site(&self, i: usize, j: usize) -> Result<()> {
        if i < 1 || j < 1 || i > self.side || j > self.side {
            Err(Error::SiteOutOfRange { i, j, side: self.side })
        } else {
            Ok(())
        }
    }

    /// Row-major heights, row `j = 1` first.
    pub fn rows(&self) -> Vec<u32> {
        let s = self.stride();
        let mut out = Vec::with_capacity(self.side * self.side);
        for j in 1..=self.side {
            out.extend(self.padded[j * s + 1..j * s + 1 + self.side].iter().map(|&h| h as u32));
        }
        out
    }

    pub fn max_height(&self) -> u32 {
        self.padded.iter().copied().max().unwrap_or(0) as u32
    }

    /// Pointwise `self <= other`.
    pub fn is_below(&self, other: &HeightField) -> bool {
        self.side == other.side && self.padded.iter().zip(&other.padded).all(|(a, b)| a <= b)
    }

    /// Hamiltonian `sum_{x~y} |h_x - h_y|`, including bonds to the zero layer.
    pub fn energy(&self) -> u64 {
        let s = self.stride();
        let p = &self.padded;
        let mut e = 0u64;
        // every bond touching the box appears once as (site, right) or (site, up)
        // from some padded position in rows/cols 0..=L
        for j in 0..=self.side {
            for i in 0..=self.side {
                let here = p[j * s + i] as i64;
                if j >= 1 {
                    e += (here - p[j * s + i + 1] as i64).unsigned_abs();
                }
                if i >= 1 {
                    e += (here - p[(j + 1) * s + i] as i64).unsigned_abs();
                }
            }
        }
        e
    }

    /// `energy(after) - energy(before)` for setting `(i, j)` to `new_height`.
    pub fn local_energy_delta(&self, i: usize, j: usize, new_height: u32) -> Result<i64> {
        self.check_site(i, j)?;
        if new_height > self.cap {
            return Err(Error::HeightOutOfRange { height: new_height, cap: self.cap });
        }
        let s = self.stride();
        let k = j * s + i;
        let old = self.padded[k] as i64;
        let new = new_height as i64;
        let delta = [k - 1, k + 1, k - s, k + s]
            .iter()
            .map(|&n| {
                let y = self.padded[n] as i64;
                (new - y).abs() - (old - y).abs()
            })
            .sum();
        Ok(delta)
    }

    /// `#{x : h_x = h} / L^2`.
    pub fn height_fraction(&self, h: u32) -> f64 {
        let count = self.histogram().get(h as usize).copied().unwrap_or(0);
        count as f64 / (self.side * self.side) as f64
    }

    /// Site counts per height `0..=cap`.
    pub fn histogram(&self) -> Vec<u64> {
        let mut hist = vec![0u64; self.cap as usize + 1];
        let s = self.stride();
        for j in 1..=self.side {
            for &h in &self.padded[j * s + 1..j * s + 1 + self.side] {
                hist[h as usize] += 1;
            }
        }
        hist
    }

    /// The field rotated by a quarter turn counter-clockwise.
    pub fn rotated(&self) -> HeightField {
        let l = self.side;
        let mut out = HeightField::new(l, self.cap, 0).expect("same shape");
        for j in 1..=l {
            for i in 1..=l {
                // (x, y) -> (L + 1 - y, x)
                let h = self.get(i as i64, j as i64);
                out.set(l + 1 - j, i, h).expect("in range");
            }
        }
        out
    }

    /// Mirror image across the vertical axis of the box.
    pub fn reflected(&self) -> HeightField {
        let l = self.side;
        let mut out = HeightField::new(l, self.cap, 0).expect("same shape");
        for j in 1..=l {
            for i in 1..=l {
                out.set(l + 1 - i, j, self.get(i as i64, j as i64)).expect("in range");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(rng: &mut ChaCha8Rng, side: usize, cap: u32) -> HeightField {
        let hs: Vec<u32> = (0..side * side).map(|_| rng.gen_range(0..=cap)).collect();
        HeightField::from_rows(side, cap, &hs).unwrap()
    }

    #[test]
    fn new_field_levels() {
        let f = HeightField::new(4, 3, 0).unwrap();
        assert!(f.rows().iter().all(|&h| h == 0));
        let f = HeightField::new(4, 3, 2).unwrap();
        assert!(f.rows().iter().all(|&h| h == 2));
        assert!(matches!(
            HeightField::new(4, 3, 5),
            Err(Error::HeightOutOfRange { height: 5, cap: 3 })
        ));
    }

    #[test]
    fn energy_examples() {
        for l in 1..6 {
            assert_eq!(HeightField::new(l, 3, 0).unwrap().energy(), 0);
        }
        for h in 0..4 {
            assert_eq!(HeightField::new(1, 3, h).unwrap().energy(), 4 * h as u64);
        }
        let mut f = HeightField::new(5, 3, 0).unwrap();
        f.set(3, 3, 1).unwrap();
        assert_eq!(f.energy(), 4);
        // constant field: only the 4L boundary bonds
        assert_eq!(HeightField::new(6, 3, 2).unwrap().energy(), 4 * 6 * 2);
    }

    #[test]
    fn local_delta_examples() {
        let f = HeightField::new(5, 3, 0).unwrap();
        assert_eq!(f.local_energy_delta(3, 3, 1).unwrap(), 4);
        let mut g = HeightField::new(5, 3, 1).unwrap();
        g.set(3, 3, 0).unwrap();
        assert_eq!(g.local_energy_delta(3, 3, 1).unwrap(), -4);
        assert_eq!(g.local_energy_delta(3, 3, 0).unwrap(), 0);
        assert!(g.local_energy_delta(3, 3, 4).is_err());
        assert!(g.local_energy_delta(0, 3, 1).is_err());
    }

    #[test]
    fn local_delta_matches_full_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let side = rng.gen_range(1..7);
            let cap = rng.gen_range(1..5);
            let mut f = random_field(&mut rng, side, cap);
            let (i, j) = (rng.gen_range(1..=side), rng.gen_range(1..=side));
            let h = rng.gen_range(0..=cap);
            let before = f.energy() as i64;
            let delta = f.local_energy_delta(i, j, h).unwrap();
            f.set(i, j, h).unwrap();
            assert_eq!(f.energy() as i64 - before, delta);
        }
    }

    #[test]
    fn energy_symmetric_under_square_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let side = rng.gen_range(1..9);
            let f = random_field(&mut rng, side, 4);
            let e = f.energy();
            let mut g = f.clone();
            for _ in 0..4 {
                g = g.rotated();
                assert_eq!(g.energy(), e);
                assert_eq!(g.reflected().energy(), e);
            }
            assert_eq!(g, f);
        }
    }

    #[test]
    fn height_fractions() {
        let f = HeightField::new(4, 3, 0).unwrap();
        assert_eq!(f.height_fraction(0), 1.0);
        assert_eq!(f.height_fraction(1), 0.0);
        let mut hs = vec![1u32; 16];
        hs[0] = 0;
        hs[5] = 2;
        hs[10] = 3;
        hs[15] = 0;
        let g = HeightField::from_rows(4, 3, &hs).unwrap();
        assert_eq!(g.height_fraction(1), 0.75);
        let total: f64 = (0..=3).map(|h| g.height_fraction(h)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn repulsion_height_examples() {
        // round(e^{4 * 1.25}) = 148: H sits just under 1, so alpha ~ 0 mod 1
        let h = repulsion_height(148, 1.25);
        assert!((h - 1.0).abs() < 1e-3);
        let a = repulsion_fraction(148, 1.25);
        assert!(a.min(1.0 - a) < 1e-3);

        let h = repulsion_height(403, 1.0);
        assert!((h - 1.5).abs() < 1e-3);
        assert!((repulsion_fraction(403, 1.0) - 0.5).abs() < 1e-3);

        assert!((critical_fraction_approx(10.0) - 0.0922).abs() < 1e-4);
        assert!((critical_fraction_approx(10.0) - 40f64.ln() / 40.0).abs() < 1e-15);
    }

    #[test]
    fn repulsion_height_monotone() {
        for beta in [0.5, 1.0, 1.25, 3.0] {
            let mut prev = repulsion_height(1, beta);
            for l in 2..3000 {
                let h = repulsion_height(l, beta);
                assert!(h > prev);
                prev = h;
                let a = repulsion_fraction(l, beta);
                assert!((0.0..1.0).contains(&a));
            }
        }
        assert!(repulsion_height(100, 1.0) > repulsion_height(100, 1.1));
    }

    #[test]
    fn config_validation() {
        let c = SimConfig::new(10, 1.0);
        assert!(c.validate().is_ok());
        assert_eq!(c.height_cap, 1 + 5);
        let mut bad = c.clone();
        bad.beta = -1.0;
        bad.e_h_threshold = 0.0;
        let v = bad.violations();
        assert_eq!(v.len(), 2);
        assert!(v[0].starts_with("SimConfig"));
    }
}
