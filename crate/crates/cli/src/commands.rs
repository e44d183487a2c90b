//! Execution of a validated `ExperimentSpec`.

use std::fs::File;
use std::io::BufReader;

use log::info;
use serde::{Deserialize, Serialize};
use sos_core::analysis::{
    cascade_stats, concentration_report, fit_exponent, fit_view_radii, fluctuation_stats,
    loop_census, shape_convergence, view_curves, CascadeReport, CensusReport,
    ConcentrationReport, ExponentFit, FluctuationOptions, FluctuationReport, ShapeReport,
};
use sos_core::geometry::signed_area;
use sos_core::io::{read_field, write_field, write_loops};
use sos_core::lattice::{HeightField, SimConfig};
use sos_core::levellines::{extract_ensemble, LoopEnsemble};
use sos_core::sampler::{enumerate_exact, sample};
use sos_core::wulff::{
    opening_boundary, predicted_ensemble, side_overlaps, symmetry_defects, wulff_body,
    LimitShape, SurfaceTension,
};
use sos_core::Point;

use crate::artifacts::{ArtifactWriter, Manifest};
use crate::error::CliError;
use crate::spec::{
    validate, AnalysisOptions, AnalyzeTask, ExperimentSpec, OracleTask, SampleTask, SweepTask,
    Task, WulffTask,
};
use crate::svg::{render, Layer};

/// Validates, then runs the spec and writes its artifacts.
pub fn run(spec: &ExperimentSpec) -> Result<Manifest, CliError> {
    let violations = validate(spec);
    if !violations.is_empty() {
        return Err(CliError::Validation(violations));
    }
    let mut w = ArtifactWriter::create(spec)?;
    match &spec.task {
        Task::Sample(t) => run_sample(t, &mut w)?,
        Task::Analyze(t) => run_analyze(t, spec.svg, &mut w)?,
        Task::Wulff(t) => run_wulff(t, spec.svg, &mut w)?,
        Task::Sweep(t) => run_sweep(t, spec.svg, &mut w)?,
        Task::Oracle(t) => run_oracle(t, &mut w)?,
    }
    w.finish()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: SimConfig,
    pub samples: usize,
    pub repulsion_height: f64,
    pub alpha: f64,
    pub alpha_c: f64,
    pub plateau: u32,
    pub cap_hits: u64,
    pub updates: u64,
    pub cap_hit_rate: f64,
    pub cap_warning: bool,
}

/// One row per sampled field, keyed by `(L, beta, seed, sample_index)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    #[serde(rename = "L")]
    pub side: usize,
    pub beta: f64,
    pub seed: u64,
    pub sample_index: usize,
    pub energy: u64,
    pub max_height: u32,
    pub plateau_fraction: f64,
    pub below_fraction: f64,
    pub loops: usize,
    pub macroscopic_loops: usize,
}

fn fraction_below_plateau(f: &HeightField, plateau: u32) -> f64 {
    plateau.checked_sub(1).map_or(0.0, |h| f.height_fraction(h))
}

fn run_sample(t: &SampleTask, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let c = &t.config;
    info!("sampling L = {} beta = {} seed = {}", c.side_length, c.beta, c.seed);
    let run = sample(c, t.samples, c.sweeps)?;
    let plateau = c.plateau_level();
    let mut loops = Vec::new();
    let mut rows = Vec::new();
    for (k, f) in run.fields.iter().enumerate() {
        let mut buf = Vec::new();
        write_field(&mut buf, f, c.beta, c.seed)?;
        w.write(&format!("fields/sample_{k:04}.sosf"), "field", &buf)?;
        let e = extract_ensemble(f)?;
        write_loops(&mut loops, k, &e)?;
        rows.push(SampleRow {
            side: c.side_length,
            beta: c.beta,
            seed: c.seed,
            sample_index: k,
            energy: f.energy(),
            max_height: f.max_height(),
            plateau_fraction: f.height_fraction(plateau),
            below_fraction: fraction_below_plateau(f, plateau),
            loops: e.iter().count(),
            macroscopic_loops: e.iter().filter(|lp| e.is_macroscopic(lp)).count(),
        });
    }
    w.write("loops.jsonl", "loops", &loops)?;
    w.write_csv("samples.csv", "table", &rows)?;
    w.write_json(
        "run.json",
        "run",
        &RunSummary {
            config: c.clone(),
            samples: t.samples,
            repulsion_height: c.repulsion_height(),
            alpha: c.alpha(),
            alpha_c: c.alpha_c(),
            plateau,
            cap_hits: run.cap_hits,
            updates: run.updates,
            cap_hit_rate: run.cap_hit_rate(),
            cap_warning: run.cap_warning,
        },
    )
}

/// A report that could not be produced, with the reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome<T> {
    Done(T),
    Skipped(String),
}

impl<T> Outcome<T> {
    pub fn done(&self) -> Option<&T> {
        match self {
            Outcome::Done(t) => Some(t),
            Outcome::Skipped(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub tension: String,
    /// `(view index, fitted dilation)` for every view with loops.
    pub fitted: Vec<(usize, f64)>,
    pub limit: LimitShape,
    pub distances: ShapeReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAnalysis {
    pub concentration: ConcentrationReport,
    pub census: CensusReport,
    pub fluctuation: Outcome<FluctuationReport>,
    pub cascade: Outcome<CascadeReport>,
    pub shape: Outcome<ShapeSummary>,
}

/// One row per sample of an analysis, keyed by `(L, beta, seed, sample_index)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    #[serde(rename = "L")]
    pub side: usize,
    pub beta: f64,
    pub seed: u64,
    pub sample_index: usize,
    pub alpha: f64,
    pub plateau: u32,
    pub plateau_fraction: f64,
    pub below_fraction: f64,
    pub census_pass: bool,
    pub top_view_loops: usize,
    pub sup_rho: Option<f64>,
    pub cascade_sup_rho: Option<f64>,
    pub shape_sup: Option<f64>,
}

fn skipped<T>(r: Result<T, sos_core::Error>) -> Outcome<T> {
    match r {
        Ok(t) => Outcome::Done(t),
        Err(e) => Outcome::Skipped(e.to_string()),
    }
}

fn shape_summary(
    ensembles: &[LoopEnsemble],
    config: &SimConfig,
    options: &AnalysisOptions,
) -> Result<ShapeSummary, sos_core::Error> {
    let tension = SurfaceTension::named(&options.tension, Some(config.beta))?;
    let body = wulff_body(&tension, options.directions)?;
    let plateau = config.plateau_level();
    let fitted = fit_view_radii(ensembles, &body, plateau)?;
    let first = if config.alpha() > config.alpha_c() { 0 } else { 1 };
    let mut radii = Vec::new();
    for (i, r) in &fitted {
        if *i == first + radii.len() {
            radii.push(*r);
        }
    }
    let limit = predicted_ensemble(config.alpha(), config.alpha_c(), &radii, &tension, options.directions)?;
    let distances = shape_convergence(ensembles, &limit, plateau)?;
    Ok(ShapeSummary { tension: options.tension.clone(), fitted, limit, distances })
}

pub fn analyze_cell(
    fields: &[HeightField],
    ensembles: &[LoopEnsemble],
    config: &SimConfig,
    options: &AnalysisOptions,
) -> Result<(CellAnalysis, Vec<AnalysisRow>), CliError> {
    let plateau = config.plateau_level();
    let concentration = concentration_report(fields, config, options.critical_band)?;
    let census = loop_census(ensembles, plateau)?;
    let fl_opts = FluctuationOptions { allow_next_view: options.allow_next_view };
    let fluctuation = skipped(fluctuation_stats(ensembles, config, fl_opts));
    let cascade = skipped(cascade_stats(ensembles, config, options.xi, options.epsilon));
    let shape = skipped(shape_summary(ensembles, config, options));
    let rows = fields
        .iter()
        .enumerate()
        .map(|(k, f)| AnalysisRow {
            side: config.side_length,
            beta: config.beta,
            seed: config.seed,
            sample_index: k,
            alpha: config.alpha(),
            plateau,
            plateau_fraction: f.height_fraction(plateau),
            below_fraction: fraction_below_plateau(f, plateau),
            census_pass: census.samples[k].passes(),
            top_view_loops: census.samples[k].counts.first().copied().unwrap_or(0),
            sup_rho: fluctuation.done().and_then(|r| r.sup_rho[k]),
            cascade_sup_rho: cascade.done().and_then(|r| r.fluctuation.sup_rho[k]),
            shape_sup: shape.done().map(|s| s.distances.sup(k)),
        })
        .collect();
    Ok((CellAnalysis { concentration, census, fluctuation, cascade, shape }, rows))
}

fn write_cell(
    w: &mut ArtifactWriter,
    prefix: &str,
    cell: &CellAnalysis,
) -> Result<(), CliError> {
    w.write_json(&format!("{prefix}concentration.json"), "report", &cell.concentration)?;
    w.write_json(&format!("{prefix}census.json"), "report", &cell.census)?;
    w.write_json(&format!("{prefix}fluctuation.json"), "report", &cell.fluctuation)?;
    w.write_json(&format!("{prefix}cascade.json"), "report", &cell.cascade)?;
    w.write_json(&format!("{prefix}shape.json"), "report", &cell.shape)
}

fn overlay(ensemble: &LoopEnsemble, plateau: u32, limit: Option<&LimitShape>, title: &str) -> String {
    let observed: Vec<Vec<Point>> =
        (0..plateau).flat_map(|i| view_curves(ensemble, i, plateau)).collect();
    let mut layers = vec![Layer::new("observed", "#1f77b4", observed)];
    if let Some(limit) = limit {
        layers.push(Layer::new("predicted", "#d62728", limit.curves.clone()));
    }
    let scale = format!("unit square = {0} x {0} box; 1 unit = {0} lattice spacings", ensemble.side);
    render(title, &scale, &layers)
}

fn run_analyze(t: &AnalyzeTask, svg: bool, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let m = Manifest::read(&t.input)?;
    let Task::Sample(st) = &m.spec.task else {
        return Err(CliError::Validation(vec![format!(
            "cli: input {} is a {} run, not a sample run",
            t.input.display(),
            m.spec.task.name()
        )]));
    };
    if !m.complete {
        return Err(CliError::Validation(vec![format!(
            "cli: input {} is incomplete",
            t.input.display()
        )]));
    }
    let config = st.config.clone();
    let mut fields = Vec::new();
    for entry in m.of_kind("field") {
        let rec = read_field(BufReader::new(File::open(t.input.join(&entry.path))?))?;
        if rec.field.side() != config.side_length || rec.beta.to_bits() != config.beta.to_bits() {
            return Err(CliError::Core(sos_core::Error::Format(format!(
                "{} does not match the run configuration",
                entry.path
            ))));
        }
        fields.push(rec.field);
    }
    if fields.is_empty() {
        return Err(CliError::Core(sos_core::Error::Empty("input fields")));
    }
    let ensembles =
        fields.iter().map(extract_ensemble).collect::<Result<Vec<_>, _>>()?;
    let (cell, rows) = analyze_cell(&fields, &ensembles, &config, &t.options)?;
    write_cell(w, "", &cell)?;
    w.write_csv("analysis.csv", "table", &rows)?;
    if svg {
        let limit = cell.shape.done().map(|s| &s.limit);
        let text = overlay(&ensembles[0], config.plateau_level(), limit, "sample 0: level lines and limit curves");
        w.write("overlay.svg", "svg", text.as_bytes())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub radius: f64,
    pub area: f64,
    /// Bottom, right, top, left.
    pub side_overlaps: [f64; 4],
    pub quarter_turn_defect: f64,
    pub diagonal_defect: f64,
    pub vertices: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffReport {
    pub tension: String,
    pub beta: Option<f64>,
    pub directions: usize,
    pub body_area: f64,
    pub half_extents: (f64, f64),
    pub max_fitting_dilation: f64,
    pub body: Vec<Point>,
    pub curves: Vec<CurveRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRow {
    pub curve: String,
    pub radius: Option<f64>,
    pub vertex_index: usize,
    pub x: f64,
    pub y: f64,
}

pub fn wulff_report(t: &WulffTask) -> Result<WulffReport, CliError> {
    let tension = SurfaceTension::named(&t.tension, t.beta)?;
    let body = wulff_body(&tension, t.directions)?;
    let mut curves = Vec::new();
    for &r in &t.radii {
        let c = opening_boundary(&body.dilate(r)?)?;
        let (quarter, eighth) = symmetry_defects(&c)?;
        curves.push(CurveRecord {
            radius: r,
            area: signed_area(&c),
            side_overlaps: side_overlaps(&c),
            quarter_turn_defect: quarter,
            diagonal_defect: eighth,
            vertices: c,
        });
    }
    Ok(WulffReport {
        tension: t.tension.clone(),
        beta: t.beta,
        directions: t.directions,
        body_area: body.area(),
        half_extents: body.half_extents(),
        max_fitting_dilation: body.max_fitting_dilation(),
        body: body.vertices.clone(),
        curves,
    })
}

fn run_wulff(t: &WulffTask, svg: bool, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let report = wulff_report(t)?;
    w.write_json("wulff.json", "polygon", &report)?;
    let mut rows: Vec<VertexRow> = report
        .body
        .iter()
        .enumerate()
        .map(|(k, p)| VertexRow { curve: "body".into(), radius: None, vertex_index: k, x: p.x, y: p.y })
        .collect();
    for c in &report.curves {
        rows.extend(c.vertices.iter().enumerate().map(|(k, p)| VertexRow {
            curve: "opening".into(),
            radius: Some(c.radius),
            vertex_index: k,
            x: p.x,
            y: p.y,
        }));
    }
    w.write_csv("polygons.csv", "table", &rows)?;
    if svg {
        let centered: Vec<Point> =
            report.body.iter().map(|p| Point::new(p.x + 0.5, p.y + 0.5)).collect();
        let layers = [
            Layer::new("body", "#7f7f7f", vec![centered]),
            Layer::new("predicted", "#d62728", report.curves.iter().map(|c| c.vertices.clone()).collect()),
        ];
        let title = format!("{} tension: openings of the unit square", t.tension);
        let text = render(&title, "unit square = box; body drawn centred at (1/2, 1/2)", &layers);
        w.write("wulff.svg", "svg", text.as_bytes())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideSummary {
    #[serde(rename = "L")]
    pub side: usize,
    pub alpha: f64,
    pub plateau: u32,
    pub samples: usize,
    pub mean_plateau_fraction: f64,
    pub mean_below_fraction: f64,
    pub census_pass_rate: f64,
    pub sup_rho_samples: usize,
    pub mean_sup_rho: Option<f64>,
    pub median_shape_sup: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub beta: f64,
    pub sides: Vec<SideSummary>,
    pub exponent: Outcome<ExponentFit>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median_of(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

pub fn summarize_sweep(beta: f64, rows: &[AnalysisRow], bootstrap: usize, seed: u64) -> SweepReport {
    let mut sides: Vec<usize> = rows.iter().map(|r| r.side).collect();
    sides.sort_unstable();
    sides.dedup();
    let mut points = Vec::new();
    let summaries = sides
        .iter()
        .map(|&side| {
            let rs: Vec<&AnalysisRow> = rows.iter().filter(|r| r.side == side).collect();
            let sup: Vec<f64> = rs.iter().filter_map(|r| r.sup_rho).collect();
            let n = rs.len() as f64;
            points.push((side, sup.clone()));
            SideSummary {
                side,
                alpha: rs[0].alpha,
                plateau: rs[0].plateau,
                samples: rs.len(),
                mean_plateau_fraction: rs.iter().map(|r| r.plateau_fraction).sum::<f64>() / n,
                mean_below_fraction: rs.iter().map(|r| r.below_fraction).sum::<f64>() / n,
                census_pass_rate: rs.iter().filter(|r| r.census_pass).count() as f64 / n,
                sup_rho_samples: sup.len(),
                mean_sup_rho: mean(&sup),
                median_shape_sup: median_of(rs.iter().filter_map(|r| r.shape_sup).collect()),
            }
        })
        .collect();
    SweepReport { beta, sides: summaries, exponent: skipped(fit_exponent(&points, bootstrap, seed)) }
}

fn run_sweep(t: &SweepTask, svg: bool, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &side in &t.sides {
        for &seed in &t.seeds {
            let config = t.cell_config(side, seed);
            info!("sweep cell L = {side} seed = {seed}");
            let run = sample(&config, t.samples, config.sweeps)?;
            let ensembles =
                run.fields.iter().map(extract_ensemble).collect::<Result<Vec<_>, _>>()?;
            let prefix = format!("cells/L{side}_seed{seed}/");
            if t.save_fields {
                for (k, f) in run.fields.iter().enumerate() {
                    let mut buf = Vec::new();
                    write_field(&mut buf, f, config.beta, seed)?;
                    w.write(&format!("{prefix}fields/sample_{k:04}.sosf"), "field", &buf)?;
                }
            }
            let (cell, cell_rows) = analyze_cell(&run.fields, &ensembles, &config, &t.options)?;
            write_cell(w, &prefix, &cell)?;
            if svg {
                let limit = cell.shape.done().map(|s| &s.limit);
                let title = format!("L = {side}, seed {seed}, sample 0");
                let text = overlay(&ensembles[0], config.plateau_level(), limit, &title);
                w.write(&format!("{prefix}overlay.svg"), "svg", text.as_bytes())?;
            }
            rows.extend(cell_rows);
        }
    }
    w.write_csv("sweep.csv", "table", &rows)?;
    let report = summarize_sweep(t.base.beta, &rows, t.options.bootstrap, t.seeds[0]);
    w.write_json("sweep.json", "report", &report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub index: usize,
    /// Row-major heights, space separated.
    pub heights: String,
    pub energy: u64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    #[serde(rename = "L")]
    pub side: usize,
    pub cap: u32,
    pub beta: f64,
    pub states: usize,
    pub partition_function: f64,
    /// `marginals[site][h]`, sites row-major.
    pub marginals: Vec<Vec<f64>>,
}

fn run_oracle(t: &OracleTask, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let d = enumerate_exact(t.side, t.cap, t.beta)?;
    let rows: Vec<OracleRow> = d
        .probabilities
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let f = d.decode(k);
            let heights = f.rows().iter().map(|h| h.to_string()).collect::<Vec<_>>().join(" ");
            OracleRow { index: k, heights, energy: f.energy(), probability: p }
        })
        .collect();
    w.write_csv("oracle.csv", "table", &rows)?;
    w.write_json(
        "oracle.json",
        "report",
        &OracleSummary {
            side: d.side,
            cap: d.cap,
            beta: d.beta,
            states: d.probabilities.len(),
            partition_function: d.partition_function,
            marginals: d.marginals.clone(),
        },
    )
}
