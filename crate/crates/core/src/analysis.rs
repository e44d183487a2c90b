//! Statistics turning sampled fields and loop ensembles into reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hausdorff_sets, Point};
use crate::lattice::{repulsion_height, HeightField, SimConfig};
use crate::levellines::{LevelLoop, LoopEnsemble};
use crate::wulff::{fit_radius_to_body, LimitShape, WulffBody, FIT_RESOLUTION};

/// Default half-width of the band around `alpha_c` reported as near-critical.
pub const DEFAULT_CRITICAL_BAND: f64 = 0.01;

/// Default slack exponent in the fluctuation thresholds.
pub const DEFAULT_EPSILON: f64 = 0.05;

pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Most sites at `floor(H)`.
    Plateau,
    /// Most sites at `floor(H) - 1`.
    BelowPlateau,
    NearCritical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub side: usize,
    pub beta: f64,
    pub repulsion_height: f64,
    pub alpha: f64,
    pub alpha_c: f64,
    pub plateau: u32,
    pub threshold: f64,
    pub histograms: Vec<Vec<u64>>,
    /// Per-height sample mean of the site fraction.
    pub mean_fraction: Vec<f64>,
    pub plateau_fraction: f64,
    pub below_fraction: f64,
    pub union_fraction: f64,
    pub predicted: Verdict,
}

impl ConcentrationReport {
    pub fn mean_fraction_at(&self, h: u32) -> f64 {
        self.mean_fraction.get(h as usize).copied().unwrap_or(0.0)
    }

    /// Which of `floor(H)` and `floor(H) - 1` holds the larger mean fraction.
    pub fn observed(&self) -> Verdict {
        if self.plateau == 0 {
            return Verdict::Plateau;
        }
        let top = self.mean_fraction_at(self.plateau);
        let below = self.mean_fraction_at(self.plateau - 1);
        if top > below {
            Verdict::Plateau
        } else if below > top {
            Verdict::BelowPlateau
        } else {
            Verdict::NearCritical
        }
    }
}

fn holds_event(hist: &[u64], h: u32, need: f64) -> bool {
    hist.get(h as usize).map_or(false, |&c| c as f64 >= need)
}

pub fn concentration_report(
    samples: &[HeightField],
    config: &SimConfig,
    critical_band: f64,
) -> Result<ConcentrationReport> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let side = config.side_length;
    let plateau = config.plateau_level();
    let threshold = config.e_h_threshold;
    let need = threshold * (side * side) as f64;
    let histograms: Vec<Vec<u64>> = samples.iter().map(|f| f.histogram()).collect();
    let n = samples.len() as f64;
    let width = histograms.iter().map(|h| h.len()).max().unwrap_or(0);
    let mut mean_fraction = vec![0.0; width];
    for hist in &histograms {
        for (h, &c) in hist.iter().enumerate() {
            mean_fraction[h] += c as f64 / (side * side) as f64 / n;
        }
    }
    let (mut top, mut below, mut either) = (0usize, 0usize, 0usize);
    for hist in &histograms {
        let a = holds_event(hist, plateau, need);
        let b = plateau > 0 && holds_event(hist, plateau - 1, need);
        top += a as usize;
        below += b as usize;
        either += (a || b) as usize;
    }
    let (alpha, alpha_c) = (config.alpha(), config.alpha_c());
    let predicted = if (alpha - alpha_c).abs() < critical_band {
        Verdict::NearCritical
    } else if alpha > alpha_c {
        Verdict::Plateau
    } else {
        Verdict::BelowPlateau
    };
    Ok(ConcentrationReport {
        side,
        beta: config.beta,
        repulsion_height: config.repulsion_height(),
        alpha,
        alpha_c,
        plateau,
        threshold,
        histograms,
        mean_fraction,
        plateau_fraction: top as f64 / n,
        below_fraction: below as f64 / n,
        union_fraction: either as f64 / n,
        predicted,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusSample {
    /// `counts[i]` = number of macroscopic loops in view `i`, for `i < plateau`.
    pub counts: Vec<usize>,
    /// `(level, largest loop area)` for every populated level above the plateau.
    pub max_area_above: Vec<(u32, u64)>,
    pub above_microscopic: bool,
    pub top_at_most_one: bool,
    pub lower_exactly_one: bool,
}

impl CensusSample {
    pub fn passes(&self) -> bool {
        self.above_microscopic && self.top_at_most_one && self.lower_exactly_one
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub plateau: u32,
    pub cutoff: f64,
    pub samples: Vec<CensusSample>,
    pub above_rate: f64,
    pub top_rate: f64,
    pub lower_rate: f64,
    pub pass_rate: f64,
}

pub fn loop_census(ensembles: &[LoopEnsemble], plateau: u32) -> Result<CensusReport> {
    let first = ensembles.first().ok_or(Error::Empty("ensembles"))?;
    if ensembles.iter().any(|e| e.side != first.side) {
        return Err(Error::Config("ensembles mix box sizes".into()));
    }
    let samples: Vec<CensusSample> = ensembles
        .iter()
        .map(|e| {
            let counts: Vec<usize> = (0..plateau).map(|i| e.view(i, plateau).len()).collect();
            let max_area_above: Vec<(u32, u64)> = (plateau + 1..=e.max_level())
                .filter_map(|h| e.at_level(h).iter().map(|lp| lp.area).max().map(|a| (h, a)))
                .collect();
            CensusSample {
                above_microscopic: max_area_above.iter().all(|&(_, a)| (a as f64) < e.cutoff),
                top_at_most_one: counts.first().map_or(true, |&c| c <= 1),
                lower_exactly_one: counts.iter().skip(1).all(|&c| c == 1),
                counts,
                max_area_above,
            }
        })
        .collect();
    let n = samples.len() as f64;
    let rate = |f: fn(&CensusSample) -> bool| samples.iter().filter(|s| f(s)).count() as f64 / n;
    Ok(CensusReport {
        plateau,
        cutoff: first.cutoff,
        above_rate: rate(|s| s.above_microscopic),
        top_rate: rate(|s| s.top_at_most_one),
        lower_rate: rate(|s| s.lower_exactly_one),
        pass_rate: rate(CensusSample::passes),
        samples,
    })
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexDistance {
    pub index: usize,
    /// Infinite (written as null) when only one side of the comparison exists.
    #[serde(with = "finite_or_null")]
    pub distance: f64,
    pub mismatch: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub side: usize,
    pub samples: Vec<Vec<IndexDistance>>,
    #[serde(with = "finite_or_null")]
    pub median_sup: f64,
    /// `(index, median distance)` over samples where the index is present.
    pub median_by_index: Vec<(usize, f64)>,
}

impl ShapeReport {
    pub fn sup(&self, sample: usize) -> f64 {
        self.samples[sample].iter().map(|d| d.distance).fold(0.0, f64::max)
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Rescaled macroscopic loops of view `i`.
pub fn view_curves(ensemble: &LoopEnsemble, i: u32, plateau: u32) -> Vec<Vec<Point>> {
    ensemble.view(i, plateau).iter().map(|lp| lp.rescaled(ensemble.side)).collect()
}

/// Hausdorff distance between each rescaled view and its predicted curve.
pub fn shape_convergence(
    ensembles: &[LoopEnsemble],
    limit: &LimitShape,
    plateau: u32,
) -> Result<ShapeReport> {
    let first = ensembles.first().ok_or(Error::Empty("ensembles"))?;
    if limit.curves.is_empty() {
        return Err(Error::Empty("limit shape"));
    }
    let last = limit.indices().end.max(plateau as usize);
    let mut samples = Vec::with_capacity(ensembles.len());
    for e in ensembles {
        let mut row = Vec::new();
        for i in 0..last {
            let observed = view_curves(e, i as u32, plateau);
            let predicted = limit.curve(i);
            let entry = match (observed.is_empty(), predicted) {
                (true, None) => continue,
                (false, Some(c)) => IndexDistance {
                    index: i,
                    distance: hausdorff_sets(&observed, &[c.to_vec()], FIT_RESOLUTION)?,
                    mismatch: false,
                },
                _ => IndexDistance { index: i, distance: f64::INFINITY, mismatch: true },
            };
            row.push(entry);
        }
        samples.push(row);
    }
    let mut sups: Vec<f64> = samples
        .iter()
        .map(|row| row.iter().map(|d| d.distance).fold(0.0, f64::max))
        .collect();
    let mut median_by_index = Vec::new();
    for i in 0..last {
        let mut ds: Vec<f64> = samples
            .iter()
            .flat_map(|row| row.iter().filter(|d| d.index == i && !d.mismatch))
            .map(|d| d.distance)
            .collect();
        if !ds.is_empty() {
            median_by_index.push((i, median(&mut ds)));
        }
    }
    Ok(ShapeReport { side: first.side, median_sup: median(&mut sups), samples, median_by_index })
}

/// Dilation radius per view index, fitted to the pooled rescaled loops.
pub fn fit_view_radii(
    ensembles: &[LoopEnsemble],
    body: &WulffBody,
    plateau: u32,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for i in 0..plateau {
        let pooled: Vec<Vec<Point>> =
            ensembles.iter().flat_map(|e| view_curves(e, i, plateau)).collect();
        if !pooled.is_empty() {
            out.push((i as usize, fit_radius_to_body(&pooled, body)?.radius));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationOptions {
    /// Use view 1 when view 0 is predicted empty.
    pub allow_next_view: bool,
}

impl Default for FluctuationOptions {
    fn default() -> Self {
        FluctuationOptions { allow_next_view: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub side: usize,
    pub beta: f64,
    pub view: u32,
    /// `None` when the sample has no usable top loop.
    pub sup_rho: Vec<Option<f64>>,
    pub excluded: usize,
    /// Middle columns the chosen loop does not cross, summed over samples.
    pub uncovered_columns: usize,
    pub mean: f64,
    pub median: f64,
}

impl FluctuationReport {
    pub fn values(&self) -> Vec<f64> {
        self.sup_rho.iter().flatten().copied().collect()
    }
}

/// The largest positive macroscopic loop in a view.
pub fn designated_loop<'a>(ensemble: &'a LoopEnsemble, i: u32, plateau: u32) -> Option<&'a LevelLoop> {
    ensemble
        .view(i, plateau)
        .into_iter()
        .filter(|lp| lp.sign > 0)
        .max_by_key(|lp| lp.area)
}

/// Middle columns `L/4 <= x <= 3L/4`.
pub fn middle_columns(side: usize) -> std::ops::RangeInclusive<usize> {
    let lo = ((side as f64) / 4.0).ceil().max(1.0) as usize;
    let hi = ((3 * side) as f64 / 4.0).floor() as usize;
    lo..=hi
}

/// `sup rho` over the middle columns, and the number of middle columns not crossed.
pub fn sup_rho(lp: &LevelLoop, side: usize) -> (Option<f64>, usize) {
    let floor = lp.column_floor(side);
    let mut best: Option<f64> = None;
    let mut missing = 0;
    for x in middle_columns(side) {
        match floor[x] {
            Some(y) => best = Some(best.map_or(y, |b: f64| b.max(y))),
            None => missing += 1,
        }
    }
    (best, missing)
}

fn view_sup_report(ensembles: &[LoopEnsemble], config: &SimConfig, view: u32) -> FluctuationReport {
    let plateau = config.plateau_level();
    let side = config.side_length;
    let mut uncovered = 0;
    let sup: Vec<Option<f64>> = ensembles
        .iter()
        .map(|e| {
            let lp = designated_loop(e, view, plateau)?;
            let (s, missing) = sup_rho(lp, side);
            uncovered += missing;
            s
        })
        .collect();
    let mut values: Vec<f64> = sup.iter().flatten().copied().collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    FluctuationReport {
        side,
        beta: config.beta,
        view,
        excluded: sup.iter().filter(|s| s.is_none()).count(),
        uncovered_columns: uncovered,
        mean,
        median: median(&mut values),
        sup_rho: sup,
    }
}

pub fn fluctuation_stats(
    ensembles: &[LoopEnsemble],
    config: &SimConfig,
    options: FluctuationOptions,
) -> Result<FluctuationReport> {
    if ensembles.is_empty() {
        return Err(Error::Empty("ensembles"));
    }
    let view = if config.alpha() > config.alpha_c() {
        0
    } else if options.allow_next_view {
        1
    } else {
        return Err(Error::Config(format!(
            "fluctuation statistics need alpha > alpha_c (alpha = {:.4}, alpha_c = {:.4})",
            config.alpha(),
            config.alpha_c()
        )));
    };
    Ok(view_sup_report(ensembles, config, view))
}

/// Box sizes `round(exp(4 beta (m + target)))` for integers `m >= 0`, within
/// `[min_side, max_side]`. They share the fractional height `target`.
pub fn matched_sides(beta: f64, target: f64, min_side: usize, max_side: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for m in 0.. {
        let side = (4.0 * beta * (m as f64 + target)).exp().round();
        if !side.is_finite() || side > max_side as f64 {
            break;
        }
        let side = side as usize;
        if side >= min_side.max(1) && out.last() != Some(&side) {
            out.push(side);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: usize,
    /// `(L, number of samples, mean sup rho)` per box size.
    pub per_side: Vec<(usize, usize, f64)>,
}

fn ols(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Least-squares slope of `ln sup rho` on `ln L`, with a 95% percentile
/// bootstrap interval resampling within each box size.
pub fn fit_exponent(
    sweep: &[(usize, Vec<f64>)],
    replicates: usize,
    seed: u64,
) -> Result<ExponentFit> {
    let groups: Vec<(usize, Vec<f64>)> = {
        let mut g: Vec<(usize, Vec<f64>)> = Vec::new();
        for (side, values) in sweep {
            match g.iter_mut().find(|(s, _)| s == side) {
                Some((_, v)) => v.extend_from_slice(values),
                None => g.push((*side, values.clone())),
            }
        }
        g.retain(|(_, v)| !v.is_empty());
        g.sort_by_key(|(s, _)| *s);
        g
    };
    if groups.len() < 3 {
        return Err(Error::Config(format!(
            "exponent fit needs at least 3 distinct box sizes with data, got {}",
            groups.len()
        )));
    }
    if let Some(v) = groups.iter().flat_map(|(_, v)| v).find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Config(format!("sup rho must be positive, got {v}")));
    }
    let logs: Vec<(f64, Vec<f64>)> = groups
        .iter()
        .map(|(s, v)| ((*s as f64).ln(), v.iter().map(|x| x.ln()).collect()))
        .collect();
    let pooled = |pick: &dyn Fn(usize, usize) -> usize| -> Vec<(f64, f64)> {
        logs.iter()
            .enumerate()
            .flat_map(|(g, (x, ys))| (0..ys.len()).map(move |k| (g, k, *x)))
            .map(|(g, k, x)| (x, logs[g].1[pick(g, k)]))
            .collect()
    };
    let (exponent, intercept) =
        ols(&pooled(&|_, k| k)).ok_or_else(|| Error::Degenerate("all box sizes equal".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let draws: Vec<Vec<usize>> =
            logs.iter().map(|(_, ys)| (0..ys.len()).map(|_| rng.gen_range(0..ys.len())).collect()).collect();
        if let Some((s, _)) = ols(&pooled(&|g, k| draws[g][k])) {
            slopes.push(s);
        }
    }
    slopes.sort_by(|a, b| a.total_cmp(b));
    let (ci_low, ci_high) = if slopes.is_empty() {
        (exponent, exponent)
    } else {
        (percentile(&slopes, 0.025), percentile(&slopes, 0.975))
    };
    Ok(ExponentFit {
        exponent,
        intercept,
        ci_low,
        ci_high,
        replicates: slopes.len(),
        per_side: groups
            .iter()
            .map(|(s, v)| (*s, v.len(), v.iter().sum::<f64>() / v.len() as f64))
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub xi: f64,
    pub epsilon: f64,
    pub view: u32,
    pub threshold: f64,
    pub fluctuation: FluctuationReport,
    pub exceedance_rate: f64,
}

/// Sup of `rho` for view `floor(xi H)` against `L^((1 - xi)/3 + epsilon)`.
pub fn cascade_stats(
    ensembles: &[LoopEnsemble],
    config: &SimConfig,
    xi: f64,
    epsilon: f64,
) -> Result<CascadeReport> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Config(format!("xi must lie in (0, 1), got {xi}")));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Config(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if ensembles.is_empty() {
        return Err(Error::Empty("ensembles"));
    }
    let view = (xi * repulsion_height(config.side_length, config.beta)).floor() as u32;
    let fluctuation = if view == 0 {
        fluctuation_stats(ensembles, config, FluctuationOptions::default())?
    } else {
        view_sup_report(ensembles, config, view)
    };
    let threshold = (config.side_length as f64).powf((1.0 - xi) / 3.0 + epsilon);
    let values = fluctuation.values();
    let exceed = values.iter().filter(|&&v| v > threshold).count();
    Ok(CascadeReport {
        xi,
        epsilon,
        view,
        threshold,
        exceedance_rate: if values.is_empty() { 0.0 } else { exceed as f64 / values.len() as f64 },
        fluctuation,
    })
}
