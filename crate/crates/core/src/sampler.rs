//! Heat-bath dynamics for the SOS Gibbs measure, the exact enumeration oracle,
//! and the monotone (grand) coupling of two chains.
//!
//! Every site update consumes exactly one uniform variate and maps it through
//! the inverse of the single-site conditional CDF. The conditional law is
//! stochastically increasing in each neighbor height, so two chains fed the
//! same variates stay pointwise ordered.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{HeightField, SimConfig};

/// Cap hits per site update above which truncation bias is flagged.
pub const CAP_AUDIT_THRESHOLD: f64 = 1e-6;

/// Largest state space `enumerate_exact` will visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

/// Single-site conditional law `p(h) ∝ exp(-beta * sum_y |h - eta_y|)` on `{0..=cap}`.
pub fn heat_bath_weights(neighbors: [u32; 4], beta: f64, cap: u32) -> Vec<f64> {
    let costs: Vec<u64> = (0..=cap).map(|h| local_cost(h, neighbors)).collect();
    let min = *costs.iter().min().expect("cap >= 0");
    let w: Vec<f64> = costs.iter().map(|&c| (-beta * (c - min) as f64).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

#[inline]
fn local_cost(h: u32, neighbors: [u32; 4]) -> u64 {
    neighbors.iter().map(|&y| (h as i64 - y as i64).unsigned_abs()).sum()
}

/// Cumulative form of `heat_bath_weights`, last entry exactly 1.
fn conditional_cdf(neighbors: [u32; 4], beta: f64, cap: u32) -> Vec<f64> {
    let p = heat_bath_weights(neighbors, beta, cap);
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = p
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect();
    *cdf.last_mut().expect("nonempty") = 1.0;
    cdf
}

// Most table entries: neighbor vectors below the table base times CDF length.
const TABLE_LIMIT: usize = 1 << 21;

// Most on-demand CDFs kept around for neighbor vectors outside the table.
const MEMO_LIMIT: usize = 1 << 14;

/// Conditional CDFs indexed by the four neighbor heights.
///
/// Vectors with every entry below `base` read a flat table; with a small cap
/// that is all of them. Others go through a bounded memo.
#[derive(Debug)]
pub struct HeatBath {
    beta: f64,
    cap: u32,
    base: u32,
    table: Vec<f64>,
    memo: Mutex<HashMap<[u32; 4], Arc<[f64]>>>,
}

impl Clone for HeatBath {
    fn clone(&self) -> Self {
        HeatBath {
            beta: self.beta,
            cap: self.cap,
            base: self.base,
            table: self.table.clone(),
            memo: Mutex::new(HashMap::new()),
        }
    }
}

fn table_base(n: usize) -> usize {
    let mut b = n;
    while b > 0 && b.pow(4).saturating_mul(n) > TABLE_LIMIT {
        b -= 1;
    }
    b
}

impl HeatBath {
    pub fn new(beta: f64, cap: u32) -> Self {
        let n = cap as usize + 1;
        let base = table_base(n);
        let mut table = Vec::with_capacity(base.pow(4) * n);
        for a in 0..base as u32 {
            for b in 0..base as u32 {
                for c in 0..base as u32 {
                    for d in 0..base as u32 {
                        table.extend(conditional_cdf([a, b, c, d], beta, cap));
                    }
                }
            }
        }
        enforce_order(&mut table, base, n);
        HeatBath { beta, cap, base: base as u32, table, memo: Mutex::new(HashMap::new()) }
    }

    fn on_demand(&self, neighbors: [u32; 4]) -> Arc<[f64]> {
        let mut memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(cdf) = memo.get(&neighbors) {
            return Arc::clone(cdf);
        }
        let cdf: Arc<[f64]> = conditional_cdf(neighbors, self.beta, self.cap).into();
        if memo.len() < MEMO_LIMIT {
            memo.insert(neighbors, Arc::clone(&cdf));
        }
        cdf
    }

    #[inline]
    fn tabled(&self, nb: [u32; 4]) -> Option<&[f64]> {
        if nb.iter().all(|&h| h < self.base) {
            let (b, n) = (self.base as usize, self.cap as usize + 1);
            let idx = ((nb[0] as usize * b + nb[1] as usize) * b + nb[2] as usize) * b + nb[3] as usize;
            Some(&self.table[idx * n..idx * n + n])
        } else {
            None
        }
    }

    /// Conditional CDF for a neighbor vector, as used by `draw`.
    pub fn cdf(&self, neighbors: [u32; 4]) -> Vec<f64> {
        match self.tabled(neighbors) {
            Some(cdf) => cdf.to_vec(),
            None => self.on_demand(neighbors).to_vec(),
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Inverse-CDF draw: smallest `h` with `u < F(h)`.
    #[inline]
    pub fn draw(&self, neighbors: [u32; 4], u: f64) -> u32 {
        match self.tabled(neighbors) {
            Some(cdf) => inverse_cdf(cdf, u),
            None => inverse_cdf(&self.on_demand(neighbors), u),
        }
    }
}

// The exact CDFs decrease when any neighbor rises, but near 1 rounding can
// break that by an ulp. Replacing each entry by the minimum over all
// pointwise-lower neighbor vectors restores the order exactly.
fn enforce_order(table: &mut [f64], base: usize, n: usize) {
    let strides = [base * base * base, base * base, base, 1];
    for idx in 0..base.pow(4) {
        for &st in &strides {
            if (idx / st) % base == 0 {
                continue;
            }
            let lower = idx - st;
            for h in 0..n {
                let below = table[lower * n + h];
                let here = &mut table[idx * n + h];
                if below < *here {
                    *here = below;
                }
            }
        }
    }
}

#[inline]
fn inverse_cdf(cdf: &[f64], u: f64) -> u32 {
    cdf.iter().position(|&f| u < f).unwrap_or(cdf.len() - 1) as u32
}

/// One chain: its field, its private generator and its audit counters.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub field: HeightField,
    rng: ChaCha8Rng,
    pub sweep_count: u64,
    pub cap_hits: u64,
    pub updates: u64,
}

impl ChainState {
    pub fn new(field: HeightField, seed: u64) -> Self {
        ChainState {
            field,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sweep_count: 0,
            cap_hits: 0,
            updates: 0,
        }
    }

    /// One row-major systematic scan, resampling every site once.
    pub fn sweep(&mut self, kernel: &HeatBath) {
        let ChainState { field, rng, .. } = self;
        let hits = scan(field, kernel, || rng.gen::<f64>());
        let n = (field.side() * field.side()) as u64;
        self.cap_hits += hits;
        self.updates += n;
        self.sweep_count += 1;
    }

    pub fn cap_hit_rate(&self) -> f64 {
        if self.updates == 0 {
            0.0
        } else {
            self.cap_hits as f64 / self.updates as f64
        }
    }
}

fn scan(field: &mut HeightField, kernel: &HeatBath, mut uniform: impl FnMut() -> f64) -> u64 {
    debug_assert_eq!(field.cap(), kernel.cap());
    let side = field.side();
    let s = field.stride();
    let cap = kernel.cap() as u16;
    let p = field.padded_mut();
    let mut hits = 0;
    for j in 1..=side {
        let row = j * s;
        for i in 1..=side {
            let k = row + i;
            let nb = [p[k - 1] as u32, p[k + 1] as u32, p[k - s] as u32, p[k + s] as u32];
            let h = kernel.draw(nb, uniform()) as u16;
            if h == cap {
                hits += 1;
            }
            p[k] = h;
        }
    }
    hits
}

/// A collected run: fields plus the truncation audit.
#[derive(Clone, Debug)]
pub struct SampleRun {
    pub fields: Vec<HeightField>,
    pub cap_hits: u64,
    pub updates: u64,
    pub cap_warning: bool,
}

impl SampleRun {
    pub fn cap_hit_rate(&self) -> f64 {
        if self.updates == 0 {
            0.0
        } else {
            self.cap_hits as f64 / self.updates as f64
        }
    }
}

/// Burn in from the warm start, then collect `n_samples` fields `thinning` sweeps apart.
pub fn sample(config: &SimConfig, n_samples: usize, thinning: u64) -> Result<SampleRun> {
    config.validate()?;
    if n_samples < 1 {
        return Err(Error::Config("n_samples must be >= 1".into()));
    }
    let kernel = HeatBath::new(config.beta, config.height_cap);
    let start = HeightField::new(
        config.side_length,
        config.height_cap,
        config.effective_start_level(),
    )?;
    let mut chain = ChainState::new(start, config.seed);
    for _ in 0..config.burn_in {
        chain.sweep(&kernel);
    }
    let mut fields = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        for _ in 0..thinning {
            chain.sweep(&kernel);
        }
        fields.push(chain.field.clone());
    }
    let cap_warning = chain.cap_hit_rate() > CAP_AUDIT_THRESHOLD;
    if cap_warning {
        warn!(
            "cap audit: {} hits in {} updates (rate {:.3e}) at cap {}",
            chain.cap_hits,
            chain.updates,
            chain.cap_hit_rate(),
            config.height_cap
        );
    }
    Ok(SampleRun {
        fields,
        cap_hits: chain.cap_hits,
        updates: chain.updates,
        cap_warning,
    })
}

/// Sweep two chains with shared variates. Requires `low <= high` pointwise.
pub fn monotone_coupled_sweep(
    low: &mut ChainState,
    high: &mut ChainState,
    kernel: &HeatBath,
    shared: &mut ChaCha8Rng,
) -> Result<()> {
    if !low.field.is_below(&high.field) {
        return Err(Error::NotOrdered);
    }
    let side = low.field.side();
    let s = low.field.stride();
    let cap = kernel.cap() as u16;
    let lo = low.field.padded_mut();
    let hi = high.field.padded_mut();
    let (mut lo_hits, mut hi_hits) = (0, 0);
    for j in 1..=side {
        for i in 1..=side {
            let k = j * s + i;
            let u = shared.gen::<f64>();
            let a = kernel.draw(
                [lo[k - 1] as u32, lo[k + 1] as u32, lo[k - s] as u32, lo[k + s] as u32],
                u,
            ) as u16;
            let b = kernel.draw(
                [hi[k - 1] as u32, hi[k + 1] as u32, hi[k - s] as u32, hi[k + s] as u32],
                u,
            ) as u16;
            lo_hits += (a == cap) as u64;
            hi_hits += (b == cap) as u64;
            lo[k] = a;
            hi[k] = b;
        }
    }
    let n = (side * side) as u64;
    for (chain, hits) in [(low, lo_hits), (high, hi_hits)] {
        chain.cap_hits += hits;
        chain.updates += n;
        chain.sweep_count += 1;
    }
    Ok(())
}

/// Exact Gibbs distribution over the truncated configuration space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub side: usize,
    pub cap: u32,
    pub beta: f64,
    pub partition_function: f64,
    /// Indexed by `config_index`.
    pub probabilities: Vec<f64>,
    /// `marginals[site][h]`, sites row-major.
    pub marginals: Vec<Vec<f64>>,
}

impl ExactDistribution {
    /// Base-`(cap + 1)` encoding, row-major site `s` as digit `s`.
    pub fn config_index(&self, field: &HeightField) -> usize {
        config_index(field)
    }

    pub fn decode(&self, mut index: usize) -> HeightField {
        let base = self.cap as usize + 1;
        let hs: Vec<u32> = (0..self.side * self.side)
            .map(|_| {
                let d = index % base;
                index /= base;
                d as u32
            })
            .collect();
        HeightField::from_rows(self.side, self.cap, &hs).expect("valid digits")
    }
}

pub fn config_index(field: &HeightField) -> usize {
    let base = field.cap() as usize + 1;
    field
        .rows()
        .iter()
        .rev()
        .fold(0usize, |acc, &h| acc * base + h as usize)
}

pub fn state_space_size(side: usize, cap: u32) -> Option<u128> {
    (cap as u128 + 1).checked_pow(u32::try_from(side * side).ok()?)
}

/// Brute force over all `(cap + 1)^(L^2)` configurations.
pub fn enumerate_exact(side: usize, cap: u32, beta: f64) -> Result<ExactDistribution> {
    if side < 1 || cap < 1 || !(beta > 0.0) {
        return Err(Error::Config(format!(
            "enumeration needs side >= 1, cap >= 1, beta > 0 (got {side}, {cap}, {beta})"
        )));
    }
    let states = state_space_size(side, cap).unwrap_or(u128::MAX);
    if states > ENUMERATION_LIMIT {
        return Err(Error::StateSpaceTooLarge { states, limit: ENUMERATION_LIMIT });
    }
    let base = cap as usize + 1;
    let n = side * side;
    let mut digits = vec![0u32; n];
    let mut weights = Vec::with_capacity(states as usize);
    loop {
        let field = HeightField::from_rows(side, cap, &digits)?;
        weights.push((-beta * field.energy() as f64).exp());
        // odometer increment, digit 0 fastest, matching config_index
        let mut k = 0;
        while k < n && digits[k] as usize == base - 1 {
            digits[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
        digits[k] += 1;
    }
    let z: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let mut marginals = vec![vec![0.0; base]; n];
    for (idx, &p) in probabilities.iter().enumerate() {
        let mut rest = idx;
        for site in marginals.iter_mut() {
            site[rest % base] += p;
            rest /= base;
        }
    }
    Ok(ExactDistribution {
        side,
        cap,
        beta,
        partition_function: z,
        probabilities,
        marginals,
    })
}

/// Total-variation distance between two distributions on the same index set.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_examples() {
        let beta = 0.8;
        let p = heat_bath_weights([0, 0, 0, 0], beta, 1);
        assert!((p[1] / p[0] - (-4.0 * beta).exp()).abs() < 1e-14);

        let p = heat_bath_weights([1, 1, 1, 1], beta, 2);
        assert!((p[0] - p[2]).abs() < 1e-15);
        assert!((p[0] - p[1] * (-4.0 * beta).exp()).abs() < 1e-15);

        for cap in 1..6 {
            let p = heat_bath_weights([0, 0, 1, 1], beta, cap);
            assert!((p[0] - p[1]).abs() < 1e-15);
            assert!(p.iter().all(|&x| x > 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_stochastically_increasing() {
        for cap in 1..6u32 {
            for beta in [0.3, 1.0, 2.5, 8.0] {
                let kernel = HeatBath::new(beta, cap);
                for code in 0..(cap + 1).pow(4) {
                    let mut nb = [0u32; 4];
                    let mut c = code;
                    for slot in nb.iter_mut() {
                        *slot = c % (cap + 1);
                        c /= cap + 1;
                    }
                    for slot in 0..4 {
                        if nb[slot] == cap {
                            continue;
                        }
                        let mut up = nb;
                        up[slot] += 1;
                        let f = kernel.cdf(nb);
                        let g = kernel.cdf(up);
                        assert!(f.iter().zip(&g).all(|(a, b)| b <= a), "{nb:?} {beta}");
                    }
                }
            }
        }
    }

    #[test]
    fn frozen_at_very_low_temperature() {
        let kernel = HeatBath::new(50.0, 4);
        let mut chain = ChainState::new(HeightField::new(6, 4, 0).unwrap(), 3);
        for _ in 0..200 {
            chain.sweep(&kernel);
        }
        assert_eq!(chain.field.max_height(), 0);
        assert_eq!(chain.sweep_count, 200);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let kernel = HeatBath::new(0.7, 3);
        let run = |seed| {
            let mut c = ChainState::new(HeightField::new(7, 3, 1).unwrap(), seed);
            for _ in 0..50 {
                c.sweep(&kernel);
            }
            c
        };
        let (a, b, c) = (run(9), run(9), run(10));
        assert_eq!(a.field, b.field);
        assert_eq!(a.cap_hits, b.cap_hits);
        assert_ne!(a.field, c.field);
    }

    #[test]
    fn untabulated_kernel_matches_table() {
        for (beta, cap) in [(0.9, 4), (0.7, 40)] {
            let tabled = HeatBath::new(beta, cap);
            let direct = HeatBath { base: 0, table: Vec::new(), ..tabled.clone() };
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..2000 {
                let nb = [0; 4].map(|_: u32| rng.gen_range(0..=cap.min(6)));
                let u = rng.gen::<f64>();
                assert_eq!(tabled.draw(nb, u), direct.draw(nb, u));
            }
        }
        // cap 40 keeps a partial table with neighbor heights below 15
        assert_eq!(HeatBath::new(0.7, 40).base, 15);
    }

    #[test]
    fn exact_single_site() {
        let beta = 0.6;
        let d = enumerate_exact(1, 2, beta).unwrap();
        let z = 1.0 + (-4.0 * beta).exp() + (-8.0 * beta).exp();
        assert!((d.partition_function - z).abs() < 1e-14);
        assert!((d.probabilities[0] - 1.0 / z).abs() < 1e-14);

        let d = enumerate_exact(1, 1, 1.0).unwrap();
        assert!((d.probabilities[1] - 0.01799).abs() < 1e-5);
        let e4 = (-4.0f64).exp();
        assert!((d.probabilities[1] - e4 / (1.0 + e4)).abs() < 1e-15);
    }

    #[test]
    fn exact_two_by_two_orbits() {
        // 16 configurations of {0,1}^4; energy = 2 * (#ones) + 2 * (#unequal adjacent pairs in box)
        let d = enumerate_exact(2, 1, 1.0).unwrap();
        assert_eq!(d.probabilities.len(), 16);
        assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut by_energy = std::collections::BTreeMap::<u64, Vec<f64>>::new();
        for (idx, &p) in d.probabilities.iter().enumerate() {
            let f = d.decode(idx);
            assert_eq!(config_index(&f), idx);
            by_energy.entry(f.energy()).or_default().push(p);
            assert!((p - (-(f.energy() as f64)).exp() / d.partition_function).abs() < 1e-15);
        }
        // energies: 0 (empty), 4 (one site), 6 (adjacent pair), 8 (diagonal pair, three sites, full)
        let sizes: Vec<(u64, usize)> = by_energy.iter().map(|(e, v)| (*e, v.len())).collect();
        assert_eq!(sizes, vec![(0, 1), (4, 4), (6, 4), (8, 7)]);
        for probs in by_energy.values() {
            assert!(probs.iter().all(|p| (p - probs[0]).abs() < 1e-15));
        }
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            enumerate_exact(5, 3, 1.0),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn coupled_sweep_rejects_unordered() {
        let kernel = HeatBath::new(1.0, 2);
        let mut a = ChainState::new(HeightField::new(3, 2, 1).unwrap(), 0);
        let mut b = ChainState::new(HeightField::new(3, 2, 0).unwrap(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            monotone_coupled_sweep(&mut a, &mut b, &kernel, &mut rng),
            Err(Error::NotOrdered)
        ));
    }

    #[test]
    fn coupled_diagonal_stays_equal() {
        let kernel = HeatBath::new(1.0, 3);
        let mut a = ChainState::new(HeightField::new(5, 3, 2).unwrap(), 0);
        let mut b = a.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            monotone_coupled_sweep(&mut a, &mut b, &kernel, &mut rng).unwrap();
            assert_eq!(a.field, b.field);
        }
    }

    #[test]
    fn coupled_extremes_stay_ordered() {
        for seed in 0..5 {
            let kernel = HeatBath::new(0.8, 4);
            let mut lo = ChainState::new(HeightField::new(6, 4, 0).unwrap(), 0);
            let mut hi = ChainState::new(HeightField::new(6, 4, 4).unwrap(), 0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..100 {
                monotone_coupled_sweep(&mut lo, &mut hi, &kernel, &mut rng).unwrap();
                assert!(lo.field.is_below(&hi.field));
            }
        }
    }

    #[test]
    fn sample_collects_requested_fields() {
        let mut cfg = SimConfig::new(12, 1.0).with_seed(4);
        cfg.burn_in = 20;
        let run = sample(&cfg, 3, 5).unwrap();
        assert_eq!(run.fields.len(), 3);
        assert_eq!(run.updates, (20 + 15) * 144);
        for f in &run.fields {
            assert_eq!(f.side(), 12);
            assert!(f.max_height() <= cfg.height_cap);
        }
        let again = sample(&cfg, 3, 5).unwrap();
        assert_eq!(run.fields, again.fields);
        assert!(sample(&cfg, 0, 5).is_err());
    }
}
