//! End-to-end commands: validate, solve, build, render and study.
//!
//! Every artifact is written deterministically; wall-clock times go to a
//! separate `timings.json` so the remaining files are byte-reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ShapedPolynomial, DEFAULT_MAX_ITER};
use crate::equilibrium::{solve_equilibrium_with, Discretization, EquilibriumSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::geometry::ShapeSet;
use crate::io::{self, ShapeDocument};
use crate::metrics::{
    classify_grid, compare, convergence_study, extract_boundary, rasterize_target, ConvergenceStudy, Grid,
    HausdorffReport, StudyOptions, Timings,
};
use crate::sampler::{sample_roots, RootSample};

/// Run parameters; a JSON config file may set any subset, flags override it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub delta: f64,
    /// Quadrature nodes per curve.
    pub nodes: usize,
    /// Pixels `[width, height]`.
    pub grid: [usize; 2],
    /// `[x0, y0, x1, y1]`; defaults to the padded bounding box of the shape.
    pub viewport: Option<[f64; 4]>,
    pub max_iter: u32,
    pub deltas: Vec<f64>,
    pub ns: Vec<usize>,
    /// Study stops reporting success unless some `(δ, n)` gets all distances below this.
    pub epsilon: Option<f64>,
    /// Also write an iteration-shaded `julia.ppm`.
    pub ppm: bool,
    pub residual_tolerance: f64,
    pub boundary_band: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            n: 200,
            delta: 0.05,
            nodes: 256,
            grid: [512, 512],
            viewport: None,
            max_iter: DEFAULT_MAX_ITER,
            deltas: vec![0.02, 0.05],
            ns: vec![100, 200, 400, 800],
            epsilon: None,
            ppm: false,
            residual_tolerance: solver.residual_tolerance,
            boundary_band: solver.boundary_band,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            residual_tolerance: self.residual_tolerance,
            boundary_band: self.boundary_band,
            ..SolverOptions::default()
        }
    }

    /// Grid for `shape`, rejecting viewports that do not contain it.
    pub fn grid_for(&self, shape: &ShapeSet) -> Result<Grid> {
        let [w, h] = self.grid;
        let grid = match self.viewport {
            Some(v) => Grid::new(v, w, h)?,
            None => Grid::around_shape(shape, w, h)?,
        };
        grid.check_contains_shape(shape)?;
        Ok(grid)
    }

    fn check(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Config("study deltas must be positive".into()));
        }
        Ok(())
    }
}

/// A validated shape, its normalized copy and the equilibrium solution of the latter.
#[derive(Clone, Debug)]
pub struct Model {
    pub document: ShapeDocument,
    /// In the user's coordinates.
    pub shape: ShapeSet,
    /// Translated so that `0 ∈ E`.
    pub normalized: ShapeSet,
    pub solution: EquilibriumSolution,
}

impl Model {
    pub fn new(document: ShapeDocument, nodes: usize, solver: &SolverOptions) -> Result<Self> {
        let shape = document.to_shape()?.validated()?;
        let normalized = shape.normalize_origin();
        let solution = solve_equilibrium_with(Discretization::new(&normalized, nodes)?, solver)?;
        Ok(Self {
            document,
            shape,
            normalized,
            solution,
        })
    }

    pub fn load(path: &Path, config: &RunConfig) -> Result<Self> {
        Self::new(ShapeDocument::load(path)?, config.nodes, &config.solver_options())
    }

    pub fn polynomial(&self, n: usize, delta: f64) -> Result<(RootSample, ShapedPolynomial)> {
        let sample = sample_roots(&self.solution, n)?;
        let poly = ShapedPolynomial::new(
            sample.points(),
            delta,
            self.solution.robin_gamma(),
            self.normalized.translation_applied(),
        )?;
        Ok((sample, poly))
    }
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Parses and validates a shape document.
pub fn cmd_validate(shape_path: &Path) -> Result<ShapeSet> {
    ShapeDocument::load(shape_path)?.to_shape()?.validated()
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub gamma: f64,
    pub capacity: f64,
    pub masses: Vec<f64>,
    pub condition_estimate: f64,
    pub boundary_residual: f64,
    pub translation_applied: [f64; 2],
}

impl SolveSummary {
    fn new(model: &Model) -> Self {
        let sol = &model.solution;
        let t = model.normalized.translation_applied();
        Self {
            gamma: sol.robin_gamma(),
            capacity: sol.capacity(),
            masses: sol.masses().to_vec(),
            condition_estimate: sol.condition_estimate(),
            boundary_residual: sol.boundary_residual(),
            translation_applied: [t.re, t.im],
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "gamma {}", self.gamma);
        let _ = writeln!(s, "capacity {}", self.capacity);
        for (j, m) in self.masses.iter().enumerate() {
            let _ = writeln!(s, "mass[{j}] {m}");
        }
        let _ = writeln!(s, "condition_estimate {:e}", self.condition_estimate);
        let _ = writeln!(s, "boundary_residual {:e}", self.boundary_residual);
        s
    }
}

/// Solves for `μ∞` and `γ`; with `out`, writes `shape.json`, `gamma.txt` and `density.csv`.
pub fn cmd_solve(shape_path: &Path, config: &RunConfig, out: Option<&Path>) -> Result<SolveSummary> {
    let model = Model::load(shape_path, config)?;
    let summary = SolveSummary::new(&model);
    if let Some(out) = out {
        prepare_out(out)?;
        write_solution(&model, &summary, out)?;
        io::write_file(&out.join("density.csv"), io::density_csv(&model.solution))?;
    }
    Ok(summary)
}

fn write_solution(model: &Model, summary: &SolveSummary, out: &Path) -> Result<()> {
    io::write_file(&out.join("shape.json"), model.document.to_json())?;
    io::write_file(&out.join("gamma.txt"), summary.to_text())
}

/// Builds `P_{n,δ}` and writes `shape.json`, `gamma.txt`, `roots.csv`, `poly.csv` and `conjugated.txt`.
pub fn cmd_build(shape_path: &Path, config: &RunConfig, out: &Path) -> Result<ShapedPolynomial> {
    config.check()?;
    let model = Model::load(shape_path, config)?;
    let (sample, poly) = model.polynomial(config.n, config.delta)?;
    prepare_out(out)?;
    write_solution(&model, &SolveSummary::new(&model), out)?;
    write_polynomial(&sample, &poly, out)?;
    Ok(poly)
}

fn write_polynomial(sample: &RootSample, poly: &ShapedPolynomial, out: &Path) -> Result<()> {
    io::write_file(&out.join("roots.csv"), io::roots_csv(sample, poly.translation_offset()))?;
    io::write_file(&out.join("poly.csv"), io::poly_csv(poly))?;
    io::write_file(&out.join("conjugated.txt"), poly.conjugated_output().to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct RenderReport {
    pub shape: String,
    pub nodes_per_curve: usize,
    #[serde(flatten)]
    pub distances: HausdorffReport,
}

/// Renders `E` and `K(P)`, writes the images plus `report.json` and `timings.json`.
pub fn cmd_render(shape_path: &Path, config: &RunConfig, out: &Path) -> Result<RenderReport> {
    config.check()?;
    let t0 = Instant::now();
    let model = Model::load(shape_path, config)?;
    let grid = config.grid_for(&model.shape)?;
    let (sample, poly) = model.polynomial(config.n, config.delta)?;
    let t1 = Instant::now();
    let target = rasterize_target(&model.shape, &grid);
    let computed = classify_grid(&poly, &grid, config.max_iter);
    let t2 = Instant::now();
    let distances = compare(&target, &computed, &poly, &grid, config.max_iter)?;
    let timings = Timings {
        build_seconds: (t1 - t0).as_secs_f64(),
        classify_seconds: (t2 - t1).as_secs_f64(),
        metrics_seconds: t2.elapsed().as_secs_f64(),
    };
    let report = RenderReport {
        shape: model.document.name.clone(),
        nodes_per_curve: config.nodes,
        distances,
    };

    prepare_out(out)?;
    write_solution(&model, &SolveSummary::new(&model), out)?;
    write_polynomial(&sample, &poly, out)?;
    io::write_file(&out.join("target.pgm"), io::pgm(&target.inside))?;
    io::write_file(&out.join("filled.pgm"), io::pgm(&computed.inside))?;
    io::write_file(&out.join("julia.pgm"), io::pgm(&extract_boundary(&computed)))?;
    if config.ppm {
        io::write_file(&out.join("julia.ppm"), io::ppm(&computed))?;
    }
    io::write_file(&out.join("report.json"), io::to_json(&report))?;
    io::write_file(&out.join("timings.json"), io::to_json(&timings))?;
    Ok(report)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn study_csv(study: &ConvergenceStudy) -> String {
    let mut s = String::from(
        "delta,n,d_filled,d_boundary,d_complement_chordal,inside_pixels_target,inside_pixels_computed,max_iter\n",
    );
    for r in &study.reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.delta,
            r.n,
            cell(r.d_filled),
            cell(r.d_boundary),
            r.d_complement_chordal,
            r.inside_pixels_target,
            r.inside_pixels_computed,
            r.max_iter
        );
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyOutcome {
    pub study: ConvergenceStudy,
    /// Index into `study.reports` of the first pair below `epsilon`, if one was requested.
    pub first_below_epsilon: Option<usize>,
}

/// Scans `δ ∈ config.deltas` (outer) and `n ∈ config.ns` (inner); writes `study.csv` and `study.json`.
///
/// With `config.epsilon`, fails with `ExhaustedScan` when no pair qualifies
/// (the tables are still written).
pub fn cmd_study(shape_path: &Path, config: &RunConfig, out: &Path) -> Result<StudyOutcome> {
    config.check()?;
    let document = ShapeDocument::load(shape_path)?;
    let shape = document.to_shape()?.validated()?;
    let grid = config.grid_for(&shape)?;
    let options = StudyOptions {
        deltas: config.deltas.clone(),
        ns: config.ns.clone(),
        grid,
        max_iter: config.max_iter,
        nodes_per_curve: config.nodes,
        solver: config.solver_options(),
    };
    let study = convergence_study(&shape, &options)?;
    prepare_out(out)?;
    io::write_file(&out.join("shape.json"), document.to_json())?;
    io::write_file(&out.join("study.csv"), study_csv(&study))?;
    io::write_file(&out.join("study.json"), io::to_json(&study))?;
    io::write_file(&out.join("timings.json"), io::to_json(&study.timings))?;
    let first_below_epsilon = match config.epsilon {
        None => None,
        Some(eps) => {
            let hit = study.first_below(eps)?;
            study.reports.iter().position(|r| std::ptr::eq(r, hit))
        }
    };
    Ok(StudyOutcome {
        study,
        first_below_epsilon,
    })
}

/// Files written by [`cmd_render`] that must be identical across runs.
pub fn render_artifacts(out: &Path) -> Vec<PathBuf> {
    [
        "shape.json",
        "gamma.txt",
        "roots.csv",
        "poly.csv",
        "conjugated.txt",
        "target.pgm",
        "filled.pgm",
        "julia.pgm",
        "report.json",
    ]
    .iter()
    .map(|f| out.join(f))
    .collect()
}
