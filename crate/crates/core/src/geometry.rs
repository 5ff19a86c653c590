//! Target shapes: finite unions of disjoint, mutually exterior smooth Jordan curves.
//!
//! Every curve is reduced to a truncated Fourier series
//! `ζ(t) = center + Σ c_k e^{ikt}`, so derivatives are exact and the boundary is analytic.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter samples per curve used by [`ShapeSet::validate`].
pub const VALIDATION_SAMPLES: usize = 1024;
/// Polyline samples per curve used for winding numbers.
pub const WINDING_SAMPLES: usize = 512;
/// Maximum distance of a winding sum from an integer before the point is ambiguous.
pub const WINDING_SNAP: f64 = 0.25;
/// Base distance from the boundary polyline below which membership is ambiguous.
pub const DEFAULT_BOUNDARY_TOLERANCE: f64 = 1e-9;
/// Highest Fourier mode kept when smoothing a rounded polygon.
pub const ROUNDED_POLYGON_MODES: usize = 64;

const ROUNDED_POLYGON_SAMPLES: usize = 2048;

/// User-facing description of one boundary curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        center: Complex64,
        radius: f64,
    },
    Ellipse {
        center: Complex64,
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    /// Coefficients of `e^{ikt}` for `k = -K..=K`, listed from `-K` upward.
    Fourier {
        center: Complex64,
        coefficients: Vec<Complex64>,
    },
    RoundedPolygon {
        vertices: Vec<Complex64>,
        rounding: f64,
    },
}

impl CurveSpec {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        CurveSpec::Circle { center, radius }
    }

    pub fn ellipse(center: Complex64, a: f64, b: f64, rotation: f64) -> Self {
        CurveSpec::Ellipse {
            center,
            semi_axes: [a, b],
            rotation,
        }
    }

    /// Converts the curve to its canonical Fourier form.
    pub fn to_fourier(&self) -> std::result::Result<FourierCurve, String> {
        match self {
            CurveSpec::Circle { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(format!("circle radius must be positive, got {radius}"));
                }
                check_finite(*center)?;
                FourierCurve::new(*center, vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(*radius, 0.0)])
            }
            CurveSpec::Ellipse {
                center,
                semi_axes: [a, b],
                rotation,
            } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(format!("ellipse semi-axes must be positive, got ({a}, {b})"));
                }
                if !rotation.is_finite() {
                    return Err("ellipse rotation must be finite".into());
                }
                check_finite(*center)?;
                // a cos t + i b sin t = (a+b)/2 e^{it} + (a-b)/2 e^{-it}
                let rot = Complex64::from_polar(1.0, *rotation);
                FourierCurve::new(
                    *center,
                    vec![rot * (0.5 * (a - b)), Complex64::new(0.0, 0.0), rot * (0.5 * (a + b))],
                )
            }
            CurveSpec::Fourier {
                center,
                coefficients,
            } => {
                check_finite(*center)?;
                for c in coefficients {
                    check_finite(*c)?;
                }
                FourierCurve::new(*center, coefficients.clone())
            }
            CurveSpec::RoundedPolygon { vertices, rounding } => {
                fit_rounded_polygon(vertices, *rounding)
            }
        }
    }

    pub fn translated(&self, offset: Complex64) -> Self {
        match self {
            CurveSpec::Circle { center, radius } => CurveSpec::Circle {
                center: center + offset,
                radius: *radius,
            },
            CurveSpec::Ellipse {
                center,
                semi_axes,
                rotation,
            } => CurveSpec::Ellipse {
                center: center + offset,
                semi_axes: *semi_axes,
                rotation: *rotation,
            },
            CurveSpec::Fourier {
                center,
                coefficients,
            } => CurveSpec::Fourier {
                center: center + offset,
                coefficients: coefficients.clone(),
            },
            CurveSpec::RoundedPolygon { vertices, rounding } => CurveSpec::RoundedPolygon {
                vertices: vertices.iter().map(|v| v + offset).collect(),
                rounding: *rounding,
            },
        }
    }
}

fn check_finite(z: Complex64) -> std::result::Result<(), String> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(format!("non-finite complex value {z}"))
    }
}

/// `ζ(t) = center + Σ_{k=-K}^{K} c_k e^{ikt}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCurve {
    center: Complex64,
    max_mode: usize,
    // index k + max_mode
    coefficients: Vec<Complex64>,
}

impl FourierCurve {
    pub fn new(center: Complex64, coefficients: Vec<Complex64>) -> std::result::Result<Self, String> {
        if coefficients.len().is_multiple_of(2) {
            return Err(format!(
                "fourier coefficient list must have odd length 2K+1, got {}",
                coefficients.len()
            ));
        }
        let max_mode = coefficients.len() / 2;
        let mut center = center;
        let mut coefficients = coefficients;
        // fold c_0 into the center
        center += coefficients[max_mode];
        coefficients[max_mode] = Complex64::new(0.0, 0.0);
        if coefficients.iter().all(|c| c.norm() == 0.0) {
            return Err("fourier curve has no non-constant modes".into());
        }
        Ok(Self {
            center,
            max_mode,
            coefficients,
        })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    /// Coefficient of `e^{ikt}` (zero outside the stored range; `c_0` is folded into the center).
    pub fn coefficient(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.max_mode {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(k + self.max_mode as i64) as usize]
        }
    }

    /// Position, first and second derivative at `t`.
    pub fn evaluate(&self, t: f64) -> [Complex64; 3] {
        let unit = Complex64::new(t.cos(), t.sin());
        let kk = self.max_mode;
        let mut pos = self.center;
        let mut d1 = Complex64::new(0.0, 0.0);
        let mut d2 = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        for k in 1..=kk {
            power *= unit;
            let inv = power.conj();
            let kf = k as f64;
            let plus = self.coefficients[kk + k] * power;
            let minus = self.coefficients[kk - k] * inv;
            pos += plus + minus;
            // d/dt e^{ikt} = ik e^{ikt}
            d1 += Complex64::i() * kf * (plus - minus);
            d2 -= kf * kf * (plus + minus);
        }
        [pos, d1, d2]
    }

    pub fn point_at(&self, t: f64) -> Complex64 {
        self.evaluate(t)[0]
    }

    pub fn tangent_at(&self, t: f64) -> Complex64 {
        self.evaluate(t)[1]
    }

    /// Signed enclosed area `π Σ k |c_k|²`; positive for counterclockwise curves.
    pub fn signed_area(&self) -> f64 {
        let kk = self.max_mode as i64;
        PI * (-kk..=kk)
            .map(|k| k as f64 * self.coefficient(k).norm_sqr())
            .sum::<f64>()
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.signed_area() > 0.0
    }

    pub fn translated(&self, offset: Complex64) -> Self {
        Self {
            center: self.center + offset,
            ..self.clone()
        }
    }

    /// `samples` points at uniform parameter spacing starting at `t = 0`.
    pub fn sample(&self, samples: usize) -> Vec<Complex64> {
        (0..samples)
            .map(|k| self.point_at(TAU * k as f64 / samples as f64))
            .collect()
    }

    /// Closest boundary parameter to `z` and its distance.
    ///
    /// Dense sampling followed by Newton iterations on `Re(conj(ζ-z) ζ') = 0`.
    pub fn closest_point(&self, z: Complex64, samples: usize) -> (f64, f64) {
        let samples = samples.max(64);
        let h = TAU / samples as f64;
        let (mut best_t, mut best_d) = (0.0, f64::INFINITY);
        for k in 0..samples {
            let t = h * k as f64;
            let d = (self.point_at(t) - z).norm();
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        let mut t = best_t;
        for _ in 0..40 {
            let [p, d1, d2] = self.evaluate(t);
            let diff = p - z;
            let f = (diff.conj() * d1).re;
            let fp = d1.norm_sqr() + (diff.conj() * d2).re;
            if fp <= 0.0 {
                break;
            }
            let step = (f / fp).clamp(-h, h);
            t -= step;
            let d = (self.point_at(t) - z).norm();
            if d < best_d {
                best_d = d;
                best_t = t;
            }
            if step.abs() < 1e-15 {
                break;
            }
        }
        (best_t.rem_euclid(TAU), best_d)
    }
}

fn fit_rounded_polygon(vertices: &[Complex64], rounding: f64) -> std::result::Result<FourierCurve, String> {
    if vertices.len() < 3 {
        return Err(format!("rounded polygon needs at least 3 vertices, got {}", vertices.len()));
    }
    if !(rounding.is_finite() && rounding > 0.0) {
        return Err(format!("rounding must be positive, got {rounding}"));
    }
    for v in vertices {
        check_finite(*v)?;
    }
    let mut verts = vertices.to_vec();
    let area2: f64 = (0..verts.len())
        .map(|i| {
            let a = verts[i];
            let b = verts[(i + 1) % verts.len()];
            a.re * b.im - a.im * b.re
        })
        .sum();
    if area2.abs() < 1e-14 {
        return Err("rounded polygon has zero area".into());
    }
    if area2 < 0.0 {
        verts.reverse();
    }
    let n = verts.len();

    struct Fillet {
        start: Complex64,
        end: Complex64,
        center: Complex64,
        sweep: f64,
        setback: f64,
    }
    let mut fillets = Vec::with_capacity(n);
    for i in 0..n {
        let p = verts[(i + n - 1) % n];
        let v = verts[i];
        let q = verts[(i + 1) % n];
        if (p - v).norm() == 0.0 || (q - v).norm() == 0.0 {
            return Err(format!("rounded polygon has a repeated vertex at index {i}"));
        }
        let u1 = (p - v) / (p - v).norm();
        let u2 = (q - v) / (q - v).norm();
        let opening = (u1.re * u2.re + u1.im * u2.im).clamp(-1.0, 1.0).acos();
        if opening < 1e-9 {
            return Err(format!("rounded polygon has a degenerate spike at vertex {i}"));
        }
        let half = 0.5 * opening;
        let turn = {
            let a = v - p;
            let b = q - v;
            (a.re * b.im - a.im * b.re).signum()
        };
        if PI - opening < 1e-12 {
            fillets.push(Fillet {
                start: v,
                end: v,
                center: v,
                sweep: 0.0,
                setback: 0.0,
            });
            continue;
        }
        let setback = rounding / half.tan();
        let bis = u1 + u2;
        let bis = bis / bis.norm();
        fillets.push(Fillet {
            start: v + u1 * setback,
            end: v + u2 * setback,
            center: v + bis * (rounding / half.sin()),
            sweep: turn * (PI - opening),
            setback,
        });
    }
    for i in 0..n {
        let j = (i + 1) % n;
        let edge = (verts[j] - verts[i]).norm();
        if fillets[i].setback + fillets[j].setback > edge * (1.0 - 1e-9) {
            return Err(format!(
                "rounding {rounding} is too large for the edge between vertices {i} and {j}"
            ));
        }
    }

    // Path: arc i, then line to the start of arc i+1.
    enum Piece {
        Arc { center: Complex64, from: f64, sweep: f64, radius: f64 },
        Line { from: Complex64, to: Complex64 },
    }
    let mut pieces = Vec::with_capacity(2 * n);
    for i in 0..n {
        let f = &fillets[i];
        if f.sweep != 0.0 {
            pieces.push(Piece::Arc {
                center: f.center,
                from: (f.start - f.center).arg(),
                sweep: f.sweep,
                radius: rounding,
            });
        }
        pieces.push(Piece::Line {
            from: f.end,
            to: fillets[(i + 1) % n].start,
        });
    }
    let lengths: Vec<f64> = pieces
        .iter()
        .map(|p| match p {
            Piece::Arc { sweep, radius, .. } => sweep.abs() * radius,
            Piece::Line { from, to } => (to - from).norm(),
        })
        .collect();
    let total: f64 = lengths.iter().sum();

    let samples = ROUNDED_POLYGON_SAMPLES;
    let mut points = Vec::with_capacity(samples);
    let mut piece = 0;
    let mut offset = 0.0;
    for j in 0..samples {
        let s = total * j as f64 / samples as f64;
        while piece + 1 < pieces.len() && s > offset + lengths[piece] {
            offset += lengths[piece];
            piece += 1;
        }
        let frac = if lengths[piece] > 0.0 {
            ((s - offset) / lengths[piece]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        points.push(match &pieces[piece] {
            Piece::Arc {
                center,
                from,
                sweep,
                radius,
            } => center + Complex64::from_polar(*radius, from + frac * sweep),
            Piece::Line { from, to } => from + (to - from) * frac,
        });
    }

    let kk = ROUNDED_POLYGON_MODES as i64;
    let coefficients: Vec<Complex64> = (-kk..=kk)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, z) in points.iter().enumerate() {
                let angle = -TAU * ((k * j as i64).rem_euclid(samples as i64)) as f64 / samples as f64;
                acc += z * Complex64::from_polar(1.0, angle);
            }
            acc / samples as f64
        })
        .collect();
    FourierCurve::new(Complex64::new(0.0, 0.0), coefficients)
}

/// A geometric defect found by [`ShapeSet::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    InvalidParameter { curve: usize, reason: String },
    Irregular { curve: usize, t: f64 },
    SelfIntersection { curve: usize, t_first: f64, t_second: f64 },
    Overlap { first: usize, second: usize },
    Nesting { outer: usize, inner: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "shape has no curves"),
            Violation::InvalidParameter { curve, reason } => write!(f, "curve {curve}: {reason}"),
            Violation::Irregular { curve, t } => {
                write!(f, "curve {curve}: vanishing derivative near t = {t:.6}")
            }
            Violation::SelfIntersection {
                curve,
                t_first,
                t_second,
            } => write!(
                f,
                "curve {curve}: self-intersection between t = {t_first:.6} and t = {t_second:.6}"
            ),
            Violation::Overlap { first, second } => {
                write!(f, "curves {first} and {second} overlap")
            }
            Violation::Nesting { outer, inner } => {
                write!(f, "curve {inner} lies inside curve {outer}")
            }
        }
    }
}

/// The target region `E`: curves plus the translation applied to bring `0` inside `E`.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeSet {
    curves: Vec<CurveSpec>,
    #[serde(skip)]
    fourier: Vec<FourierCurve>,
    translation_applied: Complex64,
}

impl ShapeSet {
    pub fn new(curves: Vec<CurveSpec>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InvalidShape(vec![Violation::Empty]));
        }
        let fourier = curves
            .iter()
            .enumerate()
            .map(|(index, c)| c.to_fourier().map_err(|reason| Error::InvalidCurve { index, reason }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            curves,
            fourier,
            translation_applied: Complex64::new(0.0, 0.0),
        })
    }

    pub fn curves(&self) -> &[CurveSpec] {
        &self.curves
    }

    pub fn fourier_curves(&self) -> &[FourierCurve] {
        &self.fourier
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Offset `c` added to the user's coordinates: normalized = original + c.
    pub fn translation_applied(&self) -> Complex64 {
        self.translation_applied
    }

    pub fn translated(&self, offset: Complex64) -> Self {
        Self {
            curves: self.curves.iter().map(|c| c.translated(offset)).collect(),
            fourier: self.fourier.iter().map(|c| c.translated(offset)).collect(),
            translation_applied: self.translation_applied + offset,
        }
    }

    /// Axis-aligned bounding box `(min, max)` of densely sampled boundary points.
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.fourier {
            for p in c.sample(VALIDATION_SAMPLES) {
                lo.re = lo.re.min(p.re);
                lo.im = lo.im.min(p.im);
                hi.re = hi.re.max(p.re);
                hi.im = hi.im.max(p.im);
            }
        }
        (lo, hi)
    }

    /// `true` iff `z ∈ E`, by winding numbers of sampled boundary polylines.
    pub fn contains(&self, z: Complex64) -> Result<bool> {
        BoundaryIndex::new(self, WINDING_SAMPLES, DEFAULT_BOUNDARY_TOLERANCE).contains(z)
    }

    /// Checks regularity, simplicity, disjointness and mutual exteriority at sampling resolution.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let polys: Vec<Vec<Complex64>> = self
            .fourier
            .iter()
            .map(|c| c.sample(VALIDATION_SAMPLES))
            .collect();
        let dt = TAU / VALIDATION_SAMPLES as f64;

        for (ci, curve) in self.fourier.iter().enumerate() {
            let speeds: Vec<f64> = (0..VALIDATION_SAMPLES)
                .map(|k| curve.tangent_at(dt * k as f64).norm())
                .collect();
            let max_speed = speeds.iter().cloned().fold(0.0, f64::max);
            if let Some(k) = speeds.iter().position(|&s| s.is_nan() || s <= 1e-9 * max_speed) {
                out.push(Violation::Irregular {
                    curve: ci,
                    t: dt * k as f64,
                });
            }
            if let Some((i, j)) = first_self_intersection(&polys[ci]) {
                out.push(Violation::SelfIntersection {
                    curve: ci,
                    t_first: dt * i as f64,
                    t_second: dt * j as f64,
                });
            }
        }

        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                if polylines_intersect(&polys[i], &polys[j]) || min_sample_distance(&polys[i], &polys[j]) == 0.0 {
                    out.push(Violation::Overlap { first: i, second: j });
                } else if polyline_winding(&polys[i], polys[j][0]).abs() > WINDING_SNAP {
                    out.push(Violation::Nesting { outer: i, inner: j });
                } else if polyline_winding(&polys[j], polys[i][0]).abs() > WINDING_SNAP {
                    out.push(Violation::Nesting { outer: j, inner: i });
                }
            }
        }
        out
    }

    /// Returns an error carrying every violation when the shape is invalid.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidShape(v))
        }
    }

    /// Translates `E` so that the origin lies strictly inside a component.
    ///
    /// Unchanged when `0 ∈ E` already; otherwise the component whose centroid is
    /// nearest the origin (ties to the lowest index) is moved onto it.
    pub fn normalize_origin(&self) -> Self {
        if let Ok(true) = self.contains(Complex64::new(0.0, 0.0)) {
            return self.clone();
        }
        let centroids: Vec<Complex64> = self.fourier.iter().map(area_centroid).collect();
        let mut best = 0;
        for (k, c) in centroids.iter().enumerate() {
            if c.norm() < centroids[best].norm() {
                best = k;
            }
        }
        let target = interior_point(&self.fourier[best], centroids[best]);
        self.translated(-target)
    }
}

/// Precomputed boundary polylines for repeated membership queries.
#[derive(Clone, Debug)]
pub struct BoundaryIndex {
    curves: Vec<IndexedCurve>,
}

#[derive(Clone, Debug)]
struct IndexedCurve {
    points: Vec<Complex64>,
    lo: Complex64,
    hi: Complex64,
    tolerance: f64,
}

impl BoundaryIndex {
    /// `tolerance` is widened per curve by twice the largest chord sag of its polyline.
    pub fn new(shape: &ShapeSet, samples: usize, tolerance: f64) -> Self {
        let curves = shape
            .fourier_curves()
            .iter()
            .map(|c| {
                let points = c.sample(samples);
                let mut sag: f64 = 0.0;
                let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for k in 0..samples {
                    let a = points[k];
                    let b = points[(k + 1) % samples];
                    let mid = c.point_at(TAU * (k as f64 + 0.5) / samples as f64);
                    sag = sag.max((mid - 0.5 * (a + b)).norm());
                    lo.re = lo.re.min(a.re);
                    lo.im = lo.im.min(a.im);
                    hi.re = hi.re.max(a.re);
                    hi.im = hi.im.max(a.im);
                }
                IndexedCurve {
                    points,
                    lo,
                    hi,
                    tolerance: tolerance + 2.0 * sag,
                }
            })
            .collect();
        Self { curves }
    }

    /// Integer winding number of each curve about `z`.
    pub fn winding_numbers(&self, z: Complex64) -> Result<Vec<i32>> {
        self.curves
            .iter()
            .map(|c| {
                let tol = c.tolerance;
                if z.re < c.lo.re - tol || z.re > c.hi.re + tol || z.im < c.lo.im - tol || z.im > c.hi.im + tol {
                    return Ok(0);
                }
                let n = c.points.len();
                let mut angle = 0.0;
                let mut dist = f64::INFINITY;
                for k in 0..n {
                    let a = c.points[k] - z;
                    let b = c.points[(k + 1) % n] - z;
                    angle += (a.re * b.im - a.im * b.re).atan2(a.re * b.re + a.im * b.im);
                    dist = dist.min(segment_distance(a, b));
                }
                let w = angle / TAU;
                let snapped = w.round();
                if dist < tol || (w - snapped).abs() > WINDING_SNAP {
                    return Err(Error::AmbiguousBoundary {
                        re: z.re,
                        im: z.im,
                        tolerance: tol,
                    });
                }
                Ok(snapped as i32)
            })
            .collect()
    }

    pub fn contains(&self, z: Complex64) -> Result<bool> {
        Ok(self.winding_numbers(z)?.iter().any(|&w| w != 0))
    }
}

/// Distance from the origin to the segment `[a, b]`.
fn segment_distance(a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return a.norm();
    }
    let s = (-(a.re * d.re + a.im * d.im) / len2).clamp(0.0, 1.0);
    (a + d * s).norm()
}

fn polyline_winding(points: &[Complex64], z: Complex64) -> f64 {
    let n = points.len();
    let mut angle = 0.0;
    for k in 0..n {
        let a = points[k] - z;
        let b = points[(k + 1) % n] - z;
        angle += (a.re * b.im - a.im * b.re).atan2(a.re * b.re + a.im * b.im);
    }
    angle / TAU
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn first_self_intersection(points: &[Complex64]) -> Option<(usize, usize)> {
    let n = points.len();
    for i in 0..n {
        let (a1, a2) = (points[i], points[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a1, a2, points[j], points[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    None
}

fn polylines_intersect(p: &[Complex64], q: &[Complex64]) -> bool {
    let bbox = |pts: &[Complex64]| {
        pts.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), z| (a.min(z.re), b.min(z.im), c.max(z.re), d.max(z.im)),
        )
    };
    let (a0, a1, a2, a3) = bbox(p);
    let (b0, b1, b2, b3) = bbox(q);
    if a2 < b0 || b2 < a0 || a3 < b1 || b3 < a1 {
        return false;
    }
    let (n, m) = (p.len(), q.len());
    (0..n).any(|i| (0..m).any(|j| segments_intersect(p[i], p[(i + 1) % n], q[j], q[(j + 1) % m])))
}

fn min_sample_distance(p: &[Complex64], q: &[Complex64]) -> f64 {
    p.iter()
        .flat_map(|a| q.iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min)
}

fn area_centroid(curve: &FourierCurve) -> Complex64 {
    let pts = curve.sample(VALIDATION_SAMPLES);
    let n = pts.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let p = pts[k];
        let q = pts[(k + 1) % n];
        let w = cross(p, q);
        a += w;
        cx += (p.re + q.re) * w;
        cy += (p.im + q.im) * w;
    }
    Complex64::new(cx / (3.0 * a), cy / (3.0 * a))
}

/// A point strictly inside `curve`; the centroid when it is interior, else
/// the midpoint of the widest horizontal chord through it.
fn interior_point(curve: &FourierCurve, centroid: Complex64) -> Complex64 {
    let pts = curve.sample(VALIDATION_SAMPLES);
    if polyline_winding(&pts, centroid).abs() > 1.0 - WINDING_SNAP {
        return centroid;
    }
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), z| (l.min(z.im), h.max(z.im)));
    let n = pts.len();
    let mut best = (0.0, centroid);
    for s in 1..64 {
        let y = lo + (hi - lo) * s as f64 / 64.0;
        let mut xs: Vec<f64> = (0..n)
            .filter_map(|k| {
                let (p, q) = (pts[k], pts[(k + 1) % n]);
                if (p.im - y) * (q.im - y) < 0.0 {
                    Some(p.re + (y - p.im) * (q.re - p.re) / (q.im - p.im))
                } else {
                    None
                }
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let width = pair[1] - pair[0];
            if width > best.0 {
                best = (width, Complex64::new(0.5 * (pair[0] + pair[1]), y));
            }
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn circle_points_and_tangents() {
        let curve = CurveSpec::circle(c(0.0, 0.0), 2.0).to_fourier().unwrap();
        assert!(close(curve.point_at(0.0), c(2.0, 0.0)));
        assert!(close(curve.point_at(PI / 2.0), c(0.0, 2.0)));
        assert!(close(curve.tangent_at(0.0), c(0.0, 2.0)));
        assert!(close(curve.tangent_at(PI), c(0.0, -2.0)));
    }

    #[test]
    fn ellipse_points_and_tangents() {
        let curve = CurveSpec::ellipse(c(0.0, 0.0), 2.0, 1.0, 0.0).to_fourier().unwrap();
        assert!(close(curve.point_at(PI), c(-2.0, 0.0)));
        assert!(close(curve.tangent_at(0.0), c(0.0, 1.0)));
        assert!((curve.signed_area() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn contains_simple_cases() {
        let disk = ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), 2.0)]).unwrap();
        assert!(disk.contains(c(0.0, 0.0)).unwrap());
        assert!(!disk.contains(c(5.0, 0.0)).unwrap());
        let two = ShapeSet::new(vec![
            CurveSpec::circle(c(-1.5, 0.0), 0.8),
            CurveSpec::circle(c(1.5, 0.0), 0.8),
        ])
        .unwrap();
        assert!(!two.contains(c(0.0, 0.0)).unwrap());
        assert!(two.contains(c(1.5, 0.3)).unwrap());
    }

    #[test]
    fn contains_rejects_boundary_points() {
        let disk = ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), 1.0)]).unwrap();
        assert!(matches!(
            disk.contains(c(1.0, 0.0)),
            Err(Error::AmbiguousBoundary { .. })
        ));
    }

    #[test]
    fn validate_examples() {
        let ok = ShapeSet::new(vec![
            CurveSpec::circle(c(-1.5, 0.0), 0.8),
            CurveSpec::circle(c(1.5, 0.0), 0.8),
        ])
        .unwrap();
        assert!(ok.validate().is_empty());

        let overlap = ShapeSet::new(vec![
            CurveSpec::circle(c(-0.5, 0.0), 0.8),
            CurveSpec::circle(c(0.5, 0.0), 0.8),
        ])
        .unwrap();
        assert_eq!(overlap.validate(), vec![Violation::Overlap { first: 0, second: 1 }]);

        let nested = ShapeSet::new(vec![
            CurveSpec::circle(c(0.0, 0.0), 1.0),
            CurveSpec::circle(c(0.0, 0.0), 3.0),
        ])
        .unwrap();
        assert_eq!(nested.validate(), vec![Violation::Nesting { outer: 1, inner: 0 }]);
    }

    #[test]
    fn validate_flags_self_intersection() {
        // 0.5 e^{it} + e^{2it} has an inner loop
        let spec = CurveSpec::Fourier {
            center: c(0.0, 0.0),
            coefficients: vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)],
        };
        let shape = ShapeSet::new(vec![spec]).unwrap();
        assert!(shape
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::SelfIntersection { curve: 0, .. })));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), -1.0)]),
            Err(Error::InvalidCurve { index: 0, .. })
        ));
        assert!(ShapeSet::new(vec![]).is_err());
        let even = CurveSpec::Fourier {
            center: c(0.0, 0.0),
            coefficients: vec![c(1.0, 0.0), c(0.0, 0.0)],
        };
        assert!(even.to_fourier().is_err());
    }

    #[test]
    fn normalize_origin_examples() {
        let disk = ShapeSet::new(vec![CurveSpec::circle(c(0.0, 0.0), 2.0)]).unwrap();
        let n = disk.normalize_origin();
        assert_eq!(n.translation_applied(), c(0.0, 0.0));
        assert_eq!(n.curves(), disk.curves());

        let shifted = ShapeSet::new(vec![CurveSpec::circle(c(5.0, 0.0), 1.0)]).unwrap();
        let n = shifted.normalize_origin();
        assert!(close(n.translation_applied(), c(-5.0, 0.0)));
        match &n.curves()[0] {
            CurveSpec::Circle { center, radius } => {
                assert!(close(*center, c(0.0, 0.0)));
                assert_eq!(*radius, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }

        let pair = ShapeSet::new(vec![
            CurveSpec::circle(c(3.0, 0.0), 1.0),
            CurveSpec::circle(c(6.0, 0.0), 1.0),
        ])
        .unwrap();
        let n = pair.normalize_origin();
        assert!(close(n.translation_applied(), c(-3.0, 0.0)));
        assert!(close(n.fourier_curves()[1].center(), c(3.0, 0.0)));
        assert!(n.contains(c(0.0, 0.0)).unwrap());
    }

    #[test]
    fn normalize_origin_handles_nonconvex_component() {
        // crescent-like curve whose centroid falls outside it
        let spec = CurveSpec::RoundedPolygon {
            vertices: vec![c(4.0, 0.0), c(8.0, 0.0), c(8.0, 4.0), c(7.0, 4.0), c(7.0, 1.0), c(5.0, 1.0), c(5.0, 4.0), c(4.0, 4.0)],
            rounding: 0.1,
        };
        let shape = ShapeSet::new(vec![spec]).unwrap();
        assert!(shape.validate().is_empty());
        let n = shape.normalize_origin();
        assert!(n.contains(c(0.0, 0.0)).unwrap());
    }

    #[test]
    fn rounded_square_is_close_to_its_polygon() {
        let spec = CurveSpec::RoundedPolygon {
            vertices: vec![c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)],
            rounding: 0.2,
        };
        let curve = spec.to_fourier().unwrap();
        assert!(curve.is_counterclockwise());
        // rounded square area = 4 - (4 - π) r²
        let expected = 4.0 - (4.0 - PI) * 0.04;
        assert!((curve.signed_area() - expected).abs() < 5e-3, "{}", curve.signed_area());
        let shape = ShapeSet::new(vec![spec]).unwrap();
        assert!(shape.validate().is_empty());
        assert!(shape.contains(c(0.9, 0.0)).unwrap());
        assert!(!shape.contains(c(0.98, 0.98)).unwrap());
    }

    #[test]
    fn rounded_polygon_rejects_oversized_rounding() {
        let spec = CurveSpec::RoundedPolygon {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            rounding: 2.0,
        };
        assert!(spec.to_fourier().is_err());
    }

    #[test]
    fn closest_point_on_circle() {
        let curve = CurveSpec::circle(c(0.0, 0.0), 2.0).to_fourier().unwrap();
        let (t, d) = curve.closest_point(Complex64::from_polar(3.0, 1.0), 256);
        assert!((t - 1.0).abs() < 1e-12);
        assert!((d - 1.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sample_curves() -> Vec<FourierCurve> {
            vec![
                CurveSpec::circle(c(0.3, -0.2), 1.7).to_fourier().unwrap(),
                CurveSpec::ellipse(c(1.0, 1.0), 2.0, 0.7, 0.4).to_fourier().unwrap(),
                CurveSpec::Fourier {
                    center: c(0.0, 0.0),
                    coefficients: vec![c(0.1, 0.05), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.15, -0.1)],
                }
                .to_fourier()
                .unwrap(),
            ]
        }

        proptest! {
            #[test]
            fn point_at_is_periodic(t in -10.0f64..10.0) {
                for curve in sample_curves() {
                    let a = curve.point_at(t);
                    let b = curve.point_at(t + TAU);
                    prop_assert!((a - b).norm() <= 1e-13 * (1.0 + a.norm()));
                }
            }

            #[test]
            fn tangent_matches_central_difference(t in 0.0f64..TAU) {
                let h = 1e-4;
                for curve in sample_curves() {
                    let fd = (curve.point_at(t + h) - curve.point_at(t - h)) / (2.0 * h);
                    let exact = curve.tangent_at(t);
                    prop_assert!((fd - exact).norm() <= 1e-6 * exact.norm());
                }
            }

            #[test]
            fn contains_is_translation_invariant(
                x in -4.0f64..4.0, y in -4.0f64..4.0,
                dx in -10.0f64..10.0, dy in -10.0f64..10.0,
            ) {
                let shape = ShapeSet::new(vec![
                    CurveSpec::circle(c(-1.5, 0.0), 0.8),
                    CurveSpec::ellipse(c(1.5, 0.5), 1.0, 0.5, 0.3),
                ]).unwrap();
                let z = c(x, y);
                let offset = c(dx, dy);
                let moved = shape.translated(offset);
                if let (Ok(a), Ok(b)) = (shape.contains(z), moved.contains(z + offset)) {
                    prop_assert_eq!(a, b);
                }
            }
        }

        #[test]
        fn valid_shapes_have_positive_sampled_gap() {
            let shape = ShapeSet::new(vec![
                CurveSpec::circle(c(-1.5, 0.0), 0.8),
                CurveSpec::circle(c(1.5, 0.0), 0.8),
            ])
            .unwrap();
            assert!(shape.validate().is_empty());
            let p = shape.fourier_curves()[0].sample(VALIDATION_SAMPLES);
            let q = shape.fourier_curves()[1].sample(VALIDATION_SAMPLES);
            assert!(min_sample_distance(&p, &q) > 1.3);
        }
    }
}
