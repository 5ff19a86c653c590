//! Raster approximations of `E` and `K(P)` and the Hausdorff distances between them.
//!
//! Distances are measured between pixel centers, so every value is an estimate
//! at grid resolution (± one cell diagonal).

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Orbit, ShapedPolynomial};
use crate::equilibrium::{solve_equilibrium_with, Discretization, SolverOptions};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryIndex, ShapeSet, DEFAULT_BOUNDARY_TOLERANCE, WINDING_SAMPLES};
use crate::sampler::sample_roots;

/// Fraction of the larger bounding-box side added on every side by [`Grid::around_shape`].
pub const DEFAULT_VIEWPORT_PADDING: f64 = 0.25;

/// A viewport `[x0, x1] × [y0, y1]` sampled at pixel centers. Row 0 is the top row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    viewport: [f64; 4],
    width: usize,
    height: usize,
    cell: f64,
}

impl Grid {
    /// `viewport = [x0, y0, x1, y1]`; pixels must be square.
    pub fn new(viewport: [f64; 4], width: usize, height: usize) -> Result<Self> {
        let [x0, y0, x1, y1] = viewport;
        if viewport.iter().any(|v| !v.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidGrid(format!("degenerate viewport {viewport:?}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid(format!("empty grid {width}x{height}")));
        }
        let cx = (x1 - x0) / width as f64;
        let cy = (y1 - y0) / height as f64;
        if (cx - cy).abs() > 1e-9 * cx.max(cy) {
            return Err(Error::InvalidGrid(format!(
                "pixels are not square: {cx} by {cy}; match the viewport aspect ratio to {width}x{height}"
            )));
        }
        Ok(Self {
            viewport,
            width,
            height,
            cell: cx,
        })
    }

    /// Bounding box of `shape` padded by [`DEFAULT_VIEWPORT_PADDING`] of its larger
    /// side, then widened to the pixel aspect ratio.
    pub fn around_shape(shape: &ShapeSet, width: usize, height: usize) -> Result<Self> {
        let (lo, hi) = shape.bounding_box();
        let pad = DEFAULT_VIEWPORT_PADDING * (hi.re - lo.re).max(hi.im - lo.im);
        let (mut w, mut h) = (hi.re - lo.re + 2.0 * pad, hi.im - lo.im + 2.0 * pad);
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid(format!("empty grid {width}x{height}")));
        }
        let aspect = width as f64 / height as f64;
        if w / h < aspect {
            w = h * aspect;
        } else {
            h = w / aspect;
        }
        let c = 0.5 * (lo + hi);
        Self::new([c.re - 0.5 * w, c.im - 0.5 * h, c.re + 0.5 * w, c.im + 0.5 * h], width, height)
    }

    pub fn viewport(&self) -> [f64; 4] {
        self.viewport
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn cell(&self) -> f64 {
        self.cell
    }
    pub fn len(&self) -> usize {
        self.width * self.height
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Center of pixel `(x, y)`; indices outside the grid extend the lattice.
    pub fn pixel_center(&self, x: i64, y: i64) -> Complex64 {
        Complex64::new(
            self.viewport[0] + (x as f64 + 0.5) * self.cell,
            self.viewport[3] - (y as f64 + 0.5) * self.cell,
        )
    }

    /// `true` when the closed rectangle `[lo, hi]` lies strictly inside the viewport.
    pub fn strictly_contains(&self, lo: Complex64, hi: Complex64) -> bool {
        let [x0, y0, x1, y1] = self.viewport;
        lo.re > x0 && lo.im > y0 && hi.re < x1 && hi.im < y1
    }

    /// Requires `E` strictly inside the viewport.
    pub fn check_contains_shape(&self, shape: &ShapeSet) -> Result<()> {
        let (lo, hi) = shape.bounding_box();
        if self.strictly_contains(lo, hi) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "viewport {:?} does not contain the shape bounding box [{}, {}] x [{}, {}]",
                self.viewport, lo.re, hi.re, lo.im, hi.im
            )))
        }
    }

    pub fn contains_disk(&self, center: Complex64, radius: f64) -> bool {
        let r = Complex64::new(radius, radius);
        self.strictly_contains(center - r, center + r)
    }
}

/// Binary image stored row-major, row 0 on top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "{} pixel labels for a {width}x{height} grid",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Coordinates of set pixels in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
    }

    fn same_shape(&self, other: &Mask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::GridMismatch {
                expected: (self.width, self.height),
                found: (other.width, other.height),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    TargetShape,
    PolynomialDynamics,
}

/// Per-pixel Inside/Outside labels with escape counts (0 for Inside).
#[derive(Clone, Debug)]
pub struct Classification {
    pub inside: Mask,
    pub iterations: Vec<u32>,
    pub source: Source,
    /// Pixels whose label could not be decided reliably; they are labelled Outside.
    pub flagged: Vec<usize>,
}

impl Classification {
    pub fn width(&self) -> usize {
        self.inside.width
    }
    pub fn height(&self) -> usize {
        self.inside.height
    }

    pub fn outside(&self) -> Mask {
        Mask {
            width: self.inside.width,
            height: self.inside.height,
            bits: self.inside.bits.iter().map(|b| !b).collect(),
        }
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.width() != grid.width || self.height() != grid.height {
            return Err(Error::GridMismatch {
                expected: (grid.width, grid.height),
                found: (self.width(), self.height()),
            });
        }
        Ok(())
    }
}

/// Ground-truth raster of `E` by winding numbers at pixel centers.
pub fn rasterize_target(shape: &ShapeSet, grid: &Grid) -> Classification {
    let index = BoundaryIndex::new(shape, WINDING_SAMPLES, DEFAULT_BOUNDARY_TOLERANCE);
    let labels: Vec<Option<bool>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z = grid.pixel_center((i % grid.width) as i64, (i / grid.width) as i64);
            index.contains(z).ok()
        })
        .collect();
    let flagged = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_none())
        .map(|(i, _)| i)
        .collect();
    Classification {
        inside: Mask {
            width: grid.width,
            height: grid.height,
            bits: labels.into_iter().map(|l| l.unwrap_or(false)).collect(),
        },
        iterations: vec![0; grid.len()],
        source: Source::TargetShape,
        flagged,
    }
}

/// Escape-time raster of `K(P)`; `grid` is in the user's original coordinates.
pub fn classify_grid(poly: &ShapedPolynomial, grid: &Grid, max_iter: u32) -> Classification {
    let radius = poly.escape_radius();
    let orbits: Vec<Orbit> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z = grid.pixel_center((i % grid.width) as i64, (i / grid.width) as i64);
            poly.classify_original(z, max_iter, radius)
        })
        .collect();
    Classification {
        inside: Mask {
            width: grid.width,
            height: grid.height,
            bits: orbits.iter().map(|o| matches!(o, Orbit::Bounded)).collect(),
        },
        iterations: orbits
            .iter()
            .map(|o| match o {
                Orbit::Escaped { iterations } => *iterations,
                Orbit::Bounded => 0,
            })
            .collect(),
        source: Source::PolynomialDynamics,
        flagged: Vec::new(),
    }
}

/// Pixels with at least one 4-neighbour of the opposite label, on either side.
pub fn extract_boundary(c: &Classification) -> Mask {
    let m = &c.inside;
    let (w, h) = (m.width, m.height);
    let mut out = Mask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let v = m.get(x, y);
            let differs = (x > 0 && m.get(x - 1, y) != v)
                || (x + 1 < w && m.get(x + 1, y) != v)
                || (y > 0 && m.get(x, y - 1) != v)
                || (y + 1 < h && m.get(x, y + 1) != v);
            if differs {
                out.set(x, y, true);
            }
        }
    }
    out
}

// Felzenszwalb–Huttenlocher lower envelope of parabolas; `f` holds squared distances.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    let Some(start) = f.iter().position(|x| x.is_finite()) else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = start;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in start + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            let p = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * (qf - p));
            if s <= z[k] {
                // k > 0 here: z[0] is -∞
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate().take(n) {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let d = qf - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared distance, in pixel units, from every pixel to the nearest set pixel.
///
/// Values are exact integers (stored as `f64`); infinite when the mask is empty.
pub fn squared_distance_transform(mask: &Mask) -> Vec<f64> {
    let (w, h) = (mask.width, mask.height);
    let n = w.max(h);
    let mut field: Vec<f64> = mask
        .bits
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for x in 0..w {
        for y in 0..h {
            f[y] = field[y * w + x];
        }
        edt_1d(&f[..h], &mut out[..h], &mut v, &mut z);
        for y in 0..h {
            field[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        let row = &mut field[y * w..(y + 1) * w];
        f[..w].copy_from_slice(row);
        edt_1d(&f[..w], &mut out[..w], &mut v, &mut z);
        row.copy_from_slice(&out[..w]);
    }
    field
}

/// Euclidean distance in plane units from each pixel center to the nearest mask pixel center.
pub fn distance_transform(mask: &Mask, grid: &Grid) -> Result<Vec<f64>> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(squared_distance_transform(mask)
        .into_iter()
        .map(|d| d.sqrt() * grid.cell)
        .collect())
}

fn directed_squared(a: &Mask, b_field: &[f64]) -> f64 {
    a.bits
        .iter()
        .zip(b_field)
        .filter(|(&x, _)| x)
        .map(|(_, &d)| d)
        .fold(0.0, f64::max)
}

/// Planar Hausdorff distance between the pixel-center sets of two masks.
pub fn hausdorff_planar(a: &Mask, b: &Mask, grid: &Grid) -> Result<f64> {
    a.same_shape(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyMask);
    }
    let da = squared_distance_transform(a);
    let db = squared_distance_transform(b);
    let sq = directed_squared(a, &db).max(directed_squared(b, &da));
    Ok(sq.sqrt() * grid.cell)
}

/// `2|z - w| / √((1 + |z|²)(1 + |w|²))`.
pub fn chordal_distance(z: Complex64, w: Complex64) -> f64 {
    2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
}

/// `2 / √(1 + |z|²)`.
pub fn chordal_to_infinity(z: Complex64) -> f64 {
    2.0 / (1.0 + z.norm_sqr()).sqrt()
}

/// Chordal Hausdorff distance between `Ĉ∖E` and `Ĉ∖K(P)`.
///
/// Each complement is its Outside pixels, the point `∞`, and the lattice of
/// pixel centers beyond the viewport (where both complements agree).
pub fn hausdorff_chordal_complement(target: &Classification, computed: &Classification, grid: &Grid) -> Result<f64> {
    target.check_grid(grid)?;
    computed.check_grid(grid)?;
    let a = target.outside();
    let b = computed.outside();
    Ok(directed_chordal(&a, &b, grid).max(directed_chordal(&b, &a, grid)))
}

fn directed_chordal(a: &Mask, b: &Mask, grid: &Grid) -> f64 {
    let (w, h) = (a.width, a.height);
    // B plus a one-pixel frame of out-of-grid members, for the starting ring
    let mut padded = Mask::new(w + 2, h + 2);
    for y in 0..h + 2 {
        for x in 0..w + 2 {
            if x == 0 || y == 0 || x == w + 1 || y == h + 1 {
                padded.set(x, y, true);
            } else {
                padded.set(x, y, b.get(x - 1, y - 1));
            }
        }
    }
    let field = squared_distance_transform(&padded);
    let points: Vec<(usize, usize)> = a.points().collect();
    points
        .par_iter()
        .map(|&(x, y)| {
            let euclid = field[(y + 1) * (w + 2) + x + 1].sqrt();
            let start = (euclid / std::f64::consts::SQRT_2).floor() as i64;
            nearest_chordal(x as i64, y as i64, start, b, grid)
        })
        .reduce(|| 0.0, f64::max)
}

fn nearest_chordal(x: i64, y: i64, start: i64, b: &Mask, grid: &Grid) -> f64 {
    let (w, h) = (b.width as i64, b.height as i64);
    let za = grid.pixel_center(x, y);
    let s = 1.0 + za.norm_sqr();
    let ra = za.norm();
    // chordal distance to any w with |w - a| ≥ d is at least this
    let lower = |d: f64| 2.0 * d / (s * (1.0 + (ra + d) * (ra + d))).sqrt();
    let member = |px: i64, py: i64| px < 0 || py < 0 || px >= w || py >= h || b.get(px as usize, py as usize);
    let mut best = chordal_to_infinity(za);
    let limit = 4 * (w + h) + 8;
    let mut r = start.max(0);
    while r <= limit && lower(r as f64 * grid.cell) < best {
        let mut visit = |dx: i64, dy: i64| {
            let (px, py) = (x + dx, y + dy);
            if member(px, py) {
                best = best.min(chordal_distance(za, grid.pixel_center(px, py)));
            }
        };
        if r == 0 {
            visit(0, 0);
        } else {
            for d in -r..=r {
                visit(d, -r);
                visit(d, r);
            }
            for d in -r + 1..r {
                visit(-r, d);
                visit(r, d);
            }
        }
        r += 1;
    }
    best
}

/// Distances between `E` and `K(P)` for one `(n, δ)`.
#[derive(Clone, Debug, Serialize)]
pub struct HausdorffReport {
    pub n: usize,
    pub delta: f64,
    pub max_iter: u32,
    pub grid: Grid,
    pub gamma: f64,
    pub escape_radius: f64,
    pub viewport_contains_escape_disk: bool,
    /// `d(E, K(P))`; `None` when either raster has no Inside pixel.
    pub d_filled: Option<f64>,
    /// `d(∂E, J(P))`; `None` when either boundary raster is empty.
    pub d_boundary: Option<f64>,
    pub d_complement_chordal: f64,
    pub inside_pixels_target: usize,
    pub inside_pixels_computed: usize,
    pub boundary_pixels_target: usize,
    pub boundary_pixels_computed: usize,
    pub flagged_target_pixels: usize,
}

impl HausdorffReport {
    /// Largest of the three distances, or `None` if one is undefined.
    pub fn max_distance(&self) -> Option<f64> {
        Some(self.d_filled?.max(self.d_boundary?).max(self.d_complement_chordal))
    }
}

/// Wall-clock seconds, kept apart from reports so those stay reproducible.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Timings {
    pub build_seconds: f64,
    pub classify_seconds: f64,
    pub metrics_seconds: f64,
}

fn optional(d: Result<f64>) -> Result<Option<f64>> {
    match d {
        Ok(v) => Ok(Some(v)),
        Err(Error::EmptyMask) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Computes the three distances between a target raster and a polynomial raster.
pub fn compare(
    target: &Classification,
    computed: &Classification,
    poly: &ShapedPolynomial,
    grid: &Grid,
    max_iter: u32,
) -> Result<HausdorffReport> {
    target.check_grid(grid)?;
    computed.check_grid(grid)?;
    let bt = extract_boundary(target);
    let bc = extract_boundary(computed);
    let escape_radius = poly.escape_radius();
    Ok(HausdorffReport {
        n: poly.n(),
        delta: poly.delta(),
        max_iter,
        grid: *grid,
        gamma: poly.gamma(),
        escape_radius,
        viewport_contains_escape_disk: grid.contains_disk(-poly.translation_offset(), escape_radius),
        d_filled: optional(hausdorff_planar(&target.inside, &computed.inside, grid))?,
        d_boundary: optional(hausdorff_planar(&bt, &bc, grid))?,
        d_complement_chordal: hausdorff_chordal_complement(target, computed, grid)?,
        inside_pixels_target: target.inside.count(),
        inside_pixels_computed: computed.inside.count(),
        boundary_pixels_target: bt.count(),
        boundary_pixels_computed: bc.count(),
        flagged_target_pixels: target.flagged.len(),
    })
}

/// Parameters of an `(n, δ)` scan.
#[derive(Clone, Debug)]
pub struct StudyOptions {
    pub deltas: Vec<f64>,
    pub ns: Vec<usize>,
    pub grid: Grid,
    pub max_iter: u32,
    pub nodes_per_curve: usize,
    pub solver: SolverOptions,
}

/// `d_boundary` along increasing `n` for one `δ`.
#[derive(Clone, Debug, Serialize)]
pub struct Trend {
    pub delta: f64,
    pub d_boundary: Vec<Option<f64>>,
    /// Each step grows by at most one cell diagonal.
    pub non_increasing_within_grid: bool,
    /// Value at the largest `n` does not exceed the value at the smallest.
    pub last_not_above_first: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    /// Scan order: `δ` outer, `n` inner.
    pub reports: Vec<HausdorffReport>,
    pub trends: Vec<Trend>,
    #[serde(skip)]
    pub timings: Vec<Timings>,
}

impl ConvergenceStudy {
    /// First report in scan order with all three distances below `epsilon`.
    pub fn first_below(&self, epsilon: f64) -> Result<&HausdorffReport> {
        self.reports
            .iter()
            .find(|r| r.max_distance().is_some_and(|d| d < epsilon))
            .ok_or(Error::ExhaustedScan { epsilon })
    }
}

/// Builds and measures `P_{n,δ}` for every `(δ, n)` pair; `shape` is in the user's coordinates.
pub fn convergence_study(shape: &ShapeSet, options: &StudyOptions) -> Result<ConvergenceStudy> {
    if options.deltas.is_empty() || options.ns.is_empty() {
        return Err(Error::Config("study needs at least one delta and one n".into()));
    }
    let grid = &options.grid;
    grid.check_contains_shape(shape)?;
    let normalized = shape.normalize_origin();
    let disc = Discretization::new(&normalized, options.nodes_per_curve)?;
    let sol = solve_equilibrium_with(disc, &options.solver)?;
    let target = rasterize_target(shape, grid);
    let samples = options
        .ns
        .iter()
        .map(|&n| sample_roots(&sol, n))
        .collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::new();
    let mut timings = Vec::new();
    let mut trends = Vec::new();
    for &delta in &options.deltas {
        let mut series = Vec::new();
        for sample in &samples {
            let t0 = Instant::now();
            let poly = ShapedPolynomial::new(
                sample.points(),
                delta,
                sol.robin_gamma(),
                normalized.translation_applied(),
            )?;
            let t1 = Instant::now();
            let computed = classify_grid(&poly, grid, options.max_iter);
            let t2 = Instant::now();
            let report = compare(&target, &computed, &poly, grid, options.max_iter)?;
            timings.push(Timings {
                build_seconds: (t1 - t0).as_secs_f64(),
                classify_seconds: (t2 - t1).as_secs_f64(),
                metrics_seconds: t2.elapsed().as_secs_f64(),
            });
            series.push(report.d_boundary);
            reports.push(report);
        }
        trends.push(trend(delta, series, grid));
    }
    Ok(ConvergenceStudy {
        reports,
        trends,
        timings,
    })
}

fn trend(delta: f64, d_boundary: Vec<Option<f64>>, grid: &Grid) -> Trend {
    let slack = grid.cell * std::f64::consts::SQRT_2;
    let defined: Option<Vec<f64>> = d_boundary.iter().copied().collect();
    let (non_increasing, last_not_above_first) = match defined {
        Some(v) => (
            v.windows(2).all(|p| p[1] <= p[0] + slack),
            v.last().unwrap() <= v.first().unwrap(),
        ),
        None => (false, false),
    };
    Trend {
        delta,
        d_boundary,
        non_increasing_within_grid: non_increasing,
        last_not_above_first,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CurveSpec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mask_from(width: usize, height: usize, pts: &[(usize, usize)]) -> Mask {
        let mut m = Mask::new(width, height);
        for &(x, y) in pts {
            m.set(x, y, true);
        }
        m
    }

    fn unit_grid(w: usize, h: usize) -> Grid {
        Grid::new([0.0, 0.0, w as f64, h as f64], w, h).unwrap()
    }

    fn unit_disk_poly(n: usize, delta: f64) -> ShapedPolynomial {
        let roots = (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect();
        ShapedPolynomial::new(roots, delta, 0.0, c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn grid_requires_square_pixels() {
        assert!(Grid::new([-2.0, -2.0, 2.0, 2.0], 64, 32).is_err());
        assert!(Grid::new([-2.0, -2.0, 2.0, -3.0], 64, 64).is_err());
        let g = Grid::new([-2.0, -1.0, 2.0, 1.0], 64, 32).unwrap();
        assert_eq!(g.cell(), 1.0 / 16.0);
        assert_eq!(g.pixel_center(0, 0), c(-2.0 + 1.0 / 32.0, 1.0 - 1.0 / 32.0));
    }

    #[test]
    fn default_viewport_pads_and_contains_shape() {
        let shape = ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), 0.8), CurveSpec::circle(c(3.0, 0.0), 0.8)]).unwrap();
        let g = Grid::around_shape(&shape, 512, 512).unwrap();
        g.check_contains_shape(&shape).unwrap();
        let [x0, _, x1, _] = g.viewport();
        assert!((x1 - x0 - 4.6 * 1.5).abs() < 1e-3);
        let tight = Grid::new([-0.5, -0.5, 0.5, 0.5], 8, 8).unwrap();
        assert!(matches!(tight.check_contains_shape(&shape), Err(Error::Config(_))));
    }

    #[test]
    fn rasterized_unit_disk_area() {
        let shape = ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), 1.0)]).unwrap();
        let grid = Grid::new([-2.0, -2.0, 2.0, 2.0], 64, 64).unwrap();
        let r = rasterize_target(&shape, &grid);
        let ratio = r.inside.count() as f64 / grid.len() as f64;
        assert!((ratio - PI / 16.0).abs() < 0.02 * PI / 16.0, "{ratio}");
        assert!(!r.inside.get(0, 0));
        assert!(r.inside.get(32, 32));
        assert_eq!(r.source, Source::TargetShape);
    }

    #[test]
    fn classify_grid_examples() {
        let poly = unit_disk_poly(8, 0.1);
        // odd size puts a pixel center on 0
        let grid = Grid::new([-3.5, -3.5, 3.5, 3.5], 7, 7).unwrap();
        let k = classify_grid(&poly, &grid, 60);
        assert!(k.inside.get(3, 3));
        assert_eq!(k.iterations[3 * 7 + 3], 0);
        assert!(!k.inside.get(0, 0));
        assert_eq!(k.iterations[0], 1);
        assert_eq!(k.source, Source::PolynomialDynamics);
    }

    #[test]
    fn filled_set_of_high_degree_disk_polynomial() {
        let poly = unit_disk_poly(200, 0.05);
        let grid = Grid::new([-2.0, -2.0, 2.0, 2.0], 256, 256).unwrap();
        let k = classify_grid(&poly, &grid, 60);
        let area = k.inside.count() as f64 * grid.cell() * grid.cell();
        // K approximates {g ≤ δ}, the disk of radius e^δ
        let oracle = PI * (0.1f64).exp();
        assert!((area - oracle).abs() < 0.1 * oracle, "{area} vs {oracle}");
    }

    #[test]
    fn boundary_examples() {
        let all = Classification {
            inside: Mask::from_bits(8, 8, vec![true; 64]).unwrap(),
            iterations: vec![0; 64],
            source: Source::TargetShape,
            flagged: vec![],
        };
        assert!(extract_boundary(&all).is_empty());

        let mut half = all.clone();
        for y in 0..8 {
            for x in 4..8 {
                half.inside.set(x, y, false);
            }
        }
        let b = extract_boundary(&half);
        assert_eq!(b.count(), 16);
        assert!((0..8).all(|y| b.get(3, y) && b.get(4, y)));

        let shape = ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), 1.0)]).unwrap();
        let grid = Grid::new([-2.0, -2.0, 2.0, 2.0], 256, 256).unwrap();
        let ring = extract_boundary(&rasterize_target(&shape, &grid));
        for (x, y) in ring.points() {
            let r = grid.pixel_center(x as i64, y as i64).norm();
            assert!((r - 1.0).abs() <= grid.cell() * std::f64::consts::SQRT_2, "{r}");
        }
    }

    #[test]
    fn distance_transform_examples() {
        let grid = unit_grid(8, 8);
        let m = mask_from(8, 8, &[(0, 0)]);
        let d = distance_transform(&m, &grid).unwrap();
        assert_eq!(d[4 * 8 + 3], 5.0);
        assert_eq!(d[0], 0.0);
        assert!(matches!(distance_transform(&Mask::new(8, 8), &grid), Err(Error::EmptyMask)));
    }

    #[test]
    fn hausdorff_examples() {
        let grid = unit_grid(4, 4);
        let a = mask_from(4, 4, &[(0, 0), (1, 0)]);
        let b = mask_from(4, 4, &[(0, 0)]);
        assert_eq!(hausdorff_planar(&a, &b, &grid).unwrap(), 1.0);
        assert_eq!(hausdorff_planar(&b, &a, &grid).unwrap(), 1.0);
        assert_eq!(hausdorff_planar(&a, &a, &grid).unwrap(), 0.0);
        assert!(matches!(hausdorff_planar(&a, &Mask::new(4, 4), &grid), Err(Error::EmptyMask)));
    }

    #[test]
    fn chordal_spot_values() {
        assert!((chordal_to_infinity(c(0.0, 0.0)) - 2.0).abs() < 1e-12);
        assert!((chordal_to_infinity(c(1.0, 0.0)) - 2f64.sqrt()).abs() < 1e-12);
        assert!((chordal_distance(c(0.0, 0.0), c(1.0, 0.0)) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(chordal_distance(c(3.0, -1.0), c(3.0, -1.0)), 0.0);
    }

    fn classification(mask: Mask) -> Classification {
        let len = mask.bits.len();
        Classification {
            inside: mask,
            iterations: vec![0; len],
            source: Source::TargetShape,
            flagged: vec![],
        }
    }

    #[test]
    fn chordal_complement_of_identical_rasters_is_zero() {
        let shape = ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), 1.0)]).unwrap();
        let grid = Grid::new([-2.0, -2.0, 2.0, 2.0], 32, 32).unwrap();
        let r = rasterize_target(&shape, &grid);
        assert_eq!(hausdorff_chordal_complement(&r, &r, &grid).unwrap(), 0.0);
    }

    /// Direct minimum over B's Outside pixels, a wide frame of exterior lattice points, and ∞.
    fn brute_chordal(a: &Mask, b: &Mask, grid: &Grid, frame: i64) -> f64 {
        let (w, h) = (a.width as i64, a.height as i64);
        let mut worst: f64 = 0.0;
        for (x, y) in a.points() {
            let za = grid.pixel_center(x as i64, y as i64);
            let mut best = chordal_to_infinity(za);
            for py in -frame..h + frame {
                for px in -frame..w + frame {
                    let inside = px >= 0 && py >= 0 && px < w && py < h;
                    if !inside || b.get(px as usize, py as usize) {
                        best = best.min(chordal_distance(za, grid.pixel_center(px, py)));
                    }
                }
            }
            worst = worst.max(best);
        }
        worst
    }

    #[test]
    fn chordal_complement_matches_brute_force() {
        let grid = Grid::new([-1.5, -1.0, 2.5, 3.0], 16, 16).unwrap();
        let mut rng = StdRng::seed_from_u64(12345);
        for _ in 0..5 {
            let mut bits = |p: f64| (0..256).map(|_| rng.random_bool(p)).collect::<Vec<bool>>();
            let inside_a = Mask::from_bits(16, 16, bits(0.7)).unwrap();
            let inside_b = Mask::from_bits(16, 16, bits(0.7)).unwrap();
            let (ca, cb) = (classification(inside_a), classification(inside_b));
            let fast = hausdorff_chordal_complement(&ca, &cb, &grid).unwrap();
            let brute = brute_chordal(&ca.outside(), &cb.outside(), &grid, 40)
                .max(brute_chordal(&cb.outside(), &ca.outside(), &grid, 40));
            assert!((fast - brute).abs() < 1e-15, "{fast} vs {brute}");
            assert!((0.0..=2.0).contains(&fast));
        }
    }

    #[test]
    fn study_shapes_and_epsilon_scan() {
        let shape = ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), 1.0)]).unwrap();
        let grid = Grid::new([-2.0, -2.0, 2.0, 2.0], 64, 64).unwrap();
        let options = StudyOptions {
            deltas: vec![0.05],
            ns: vec![100],
            grid,
            max_iter: 60,
            nodes_per_curve: 64,
            solver: SolverOptions::default(),
        };
        let study = convergence_study(&shape, &options).unwrap();
        assert_eq!(study.reports.len(), 1);
        assert_eq!(study.trends.len(), 1);
        assert!(study.first_below(1.0).is_ok());
        assert!(matches!(study.first_below(1e-9), Err(Error::ExhaustedScan { .. })));
    }
}
