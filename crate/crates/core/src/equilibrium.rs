//! Equilibrium (harmonic) measure of `E` seen from infinity.
//!
//! The density solves the first-kind equation
//! `∫ log|ζ - z| dμ(ζ) = -γ` for `z ∈ Γ`, `∫ dμ = 1`,
//! discretized by a Nyström method: Kress log-singular weights on each
//! curve's own block and the periodic trapezoidal rule across curves.
//! Unknowns are the node values of `φ = σ |ζ'|` (density per unit parameter)
//! plus Robin's constant `γ`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{FourierCurve, ShapeSet};
use crate::quadrature::{gauss_legendre_16, log_sine_weight, TrigInterpolant};

/// Distance (in multiples of the widest node spacing) below which the
/// trapezoidal rule is replaced by graded Gauss–Legendre panels.
const NEAR_FACTOR: f64 = 6.0;
/// Sub-intervals per node interval in the stored cumulative measure.
const CDF_REFINEMENT: usize = 8;
/// Densities in `(-NEGATIVE_DENSITY_TOLERANCE, 0)` are clamped to zero.
pub const NEGATIVE_DENSITY_TOLERANCE: f64 = 1e-8;
const RESIDUAL_PROBES_PER_CURVE: usize = 8;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Maximum boundary residual `|∫log|ζ-z|dμ + γ|` at off-node probes.
    pub residual_tolerance: f64,
    /// Potentials are refused within this distance of `Γ`.
    pub boundary_band: f64,
    /// Systems whose 1-norm condition estimate exceeds this are rejected.
    pub max_condition: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_tolerance: 1e-5,
            boundary_band: 1e-9,
            max_condition: 1e13,
        }
    }
}

/// Uniform parameter nodes on one curve.
#[derive(Clone, Debug)]
pub struct CurveNodes {
    curve: FourierCurve,
    params: Vec<f64>,
    points: Vec<Complex64>,
    speeds: Vec<f64>,
}

impl CurveNodes {
    pub fn curve(&self) -> &FourierCurve {
        &self.curve
    }
    pub fn params(&self) -> &[f64] {
        &self.params
    }
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }
    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }
    pub fn len(&self) -> usize {
        self.params.len()
    }
    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }
    fn step(&self) -> f64 {
        TAU / self.params.len() as f64
    }
    fn max_arc_spacing(&self) -> f64 {
        self.speeds.iter().cloned().fold(0.0, f64::max) * self.step()
    }
}

#[derive(Clone, Debug)]
pub struct Discretization {
    curves: Vec<CurveNodes>,
    m_per_curve: usize,
    // Kress weights by node offset d = (l - k) mod m
    self_weights: Vec<f64>,
}

impl Discretization {
    /// Places `m_per_curve` uniform nodes on every curve of `shape`.
    pub fn new(shape: &ShapeSet, m_per_curve: usize) -> Result<Self> {
        if m_per_curve < 16 || !m_per_curve.is_multiple_of(2) {
            return Err(Error::InvalidResolution(m_per_curve));
        }
        let h = TAU / m_per_curve as f64;
        let curves = shape
            .fourier_curves()
            .iter()
            .map(|c| {
                let params: Vec<f64> = (0..m_per_curve).map(|k| h * k as f64).collect();
                let evals: Vec<[Complex64; 3]> = params.iter().map(|&t| c.evaluate(t)).collect();
                CurveNodes {
                    curve: c.clone(),
                    points: evals.iter().map(|e| e[0]).collect(),
                    speeds: evals.iter().map(|e| e[1].norm()).collect(),
                    params,
                }
            })
            .collect();
        let self_weights = (0..m_per_curve)
            .map(|d| log_sine_weight(m_per_curve, h * d as f64))
            .collect();
        Ok(Self {
            curves,
            m_per_curve,
            self_weights,
        })
    }

    pub fn curves(&self) -> &[CurveNodes] {
        &self.curves
    }

    pub fn m_per_curve(&self) -> usize {
        self.m_per_curve
    }

    pub fn total_nodes(&self) -> usize {
        self.curves.len() * self.m_per_curve
    }

    /// Nyström matrix of the single-layer log operator acting on `φ`.
    fn log_operator(&self) -> DMatrix<f64> {
        let m = self.m_per_curve;
        let n = self.total_nodes();
        let h = TAU / m as f64;
        let mut a = DMatrix::zeros(n, n);
        for (j, target) in self.curves.iter().enumerate() {
            for l in 0..m {
                let row = j * m + l;
                let z = target.points[l];
                for (i, source) in self.curves.iter().enumerate() {
                    for k in 0..m {
                        let col = i * m + k;
                        a[(row, col)] = if i == j {
                            let smooth = if k == l {
                                target.speeds[l].ln()
                            } else {
                                let x = 0.5 * (target.params[l] - target.params[k]);
                                (z - target.points[k]).norm().ln() - (2.0 * x.sin()).abs().ln()
                            };
                            self.self_weights[(l + m - k) % m] + h * smooth
                        } else {
                            h * (z - source.points[k]).norm().ln()
                        };
                    }
                }
            }
        }
        a
    }
}

/// Piecewise-linear, nondecreasing cumulative measure of one curve as a function of `t`.
#[derive(Clone, Debug)]
pub struct MeasureCdf {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl MeasureCdf {
    fn from_density(density: &TrigInterpolant, m: usize, mass: f64) -> Self {
        let count = m * CDF_REFINEMENT;
        let step = TAU / count as f64;
        let samples: Vec<f64> = (0..count).map(|q| density.eval(step * q as f64).max(0.0)).collect();
        let mut values = Vec::with_capacity(count + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for q in 0..count {
            acc += 0.5 * step * (samples[q] + samples[(q + 1) % count]);
            values.push(acc);
        }
        if acc > 0.0 {
            let scale = mass / acc;
            for v in &mut values {
                *v *= scale;
            }
        }
        values[count] = mass;
        let knots = (0..=count).map(|q| step * q as f64).collect();
        Self { knots, values }
    }

    pub fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Measure of the arc `[0, t mod 2π]`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.rem_euclid(TAU);
        let step = self.knots[1];
        let q = ((t / step) as usize).min(self.knots.len() - 2);
        let frac = (t - self.knots[q]) / step;
        self.values[q] + frac * (self.values[q + 1] - self.values[q])
    }

    /// Smallest `t ∈ [0, 2π)` with `eval(t) = value`, by bisection over the knots.
    pub fn inverse(&self, value: f64) -> f64 {
        let value = value.clamp(0.0, self.total());
        let (mut lo, mut hi) = (0, self.values.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.values[mid] < value {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (v0, v1) = (self.values[lo], self.values[hi]);
        let t = if v1 > v0 {
            self.knots[lo] + (value - v0) / (v1 - v0) * (self.knots[hi] - self.knots[lo])
        } else {
            self.knots[lo]
        };
        if t >= TAU {
            0.0
        } else {
            t
        }
    }
}

/// Discrete equilibrium measure `μ∞` and Robin's constant `γ`.
#[derive(Clone, Debug)]
pub struct EquilibriumSolution {
    disc: Discretization,
    phi: Vec<Vec<f64>>,
    sigma: Vec<Vec<f64>>,
    interpolants: Vec<TrigInterpolant>,
    robin_gamma: f64,
    masses: Vec<f64>,
    cdfs: Vec<MeasureCdf>,
    condition_estimate: f64,
    boundary_residual: f64,
    boundary_band: f64,
    counterclockwise: Vec<bool>,
}

pub fn solve_equilibrium(disc: Discretization) -> Result<EquilibriumSolution> {
    solve_equilibrium_with(disc, &SolverOptions::default())
}

pub fn solve_equilibrium_with(disc: Discretization, options: &SolverOptions) -> Result<EquilibriumSolution> {
    let m = disc.m_per_curve;
    let n = disc.total_nodes();
    let h = TAU / m as f64;

    let log_op = disc.log_operator();
    let mut system = DMatrix::zeros(n + 1, n + 1);
    system.view_mut((0, 0), (n, n)).copy_from(&log_op);
    for r in 0..n {
        system[(r, n)] = 1.0;
        system[(n, r)] = h;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;

    let norm1 = column_norm1(&system);
    let lu = system.lu();
    let inverse = lu.try_inverse().ok_or(Error::SingularSystem {
        condition: f64::INFINITY,
    })?;
    let condition = norm1 * column_norm1(&inverse);
    if !condition.is_finite() || condition > options.max_condition {
        return Err(Error::SingularSystem { condition });
    }
    let x = lu.solve(&rhs).ok_or(Error::SingularSystem { condition })?;

    let mut phi = Vec::with_capacity(disc.curves.len());
    let mut sigma = Vec::with_capacity(disc.curves.len());
    for (j, curve) in disc.curves.iter().enumerate() {
        let mut p: Vec<f64> = x.as_slice()[j * m..(j + 1) * m].to_vec();
        let mut s: Vec<f64> = p.iter().zip(&curve.speeds).map(|(p, v)| p / v).collect();
        for k in 0..m {
            if s[k] < 0.0 {
                if s[k] <= -NEGATIVE_DENSITY_TOLERANCE {
                    return Err(Error::NegativeDensity { curve: j, value: s[k] });
                }
                s[k] = 0.0;
                p[k] = 0.0;
            }
        }
        phi.push(p);
        sigma.push(s);
    }
    let robin_gamma = x[n];
    let masses: Vec<f64> = phi.iter().map(|p| h * p.iter().sum::<f64>()).collect();
    let interpolants: Vec<TrigInterpolant> = phi.iter().map(|p| TrigInterpolant::new(p)).collect();
    let cdfs = interpolants
        .iter()
        .zip(&masses)
        .map(|(d, &mass)| MeasureCdf::from_density(d, m, mass))
        .collect();
    let counterclockwise = disc.curves.iter().map(|c| c.curve.is_counterclockwise()).collect();

    let mut solution = EquilibriumSolution {
        disc,
        phi,
        sigma,
        interpolants,
        robin_gamma,
        masses,
        cdfs,
        condition_estimate: condition,
        boundary_residual: 0.0,
        boundary_band: options.boundary_band,
        counterclockwise,
    };
    let mut residual: f64 = 0.0;
    for j in 0..solution.disc.curves.len() {
        for p in 0..RESIDUAL_PROBES_PER_CURVE {
            let t = h * ((p * m / RESIDUAL_PROBES_PER_CURVE) as f64 + 0.5);
            residual = residual.max((solution.boundary_log_integral(j, t) + robin_gamma).abs());
        }
    }
    solution.boundary_residual = residual;
    if residual > options.residual_tolerance {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: options.residual_tolerance,
        });
    }
    Ok(solution)
}

fn column_norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Where a query point sits relative to the boundary.
#[derive(Clone, Copy, Debug)]
struct Location {
    inside: bool,
}

impl EquilibriumSolution {
    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn robin_gamma(&self) -> f64 {
        self.robin_gamma
    }

    /// Logarithmic capacity `e^{-γ}`.
    pub fn capacity(&self) -> f64 {
        (-self.robin_gamma).exp()
    }

    /// `μ∞` mass carried by each curve.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn cdfs(&self) -> &[MeasureCdf] {
        &self.cdfs
    }

    /// Arclength density `σ` at the nodes of curve `j`.
    pub fn sigma(&self, curve: usize) -> &[f64] {
        &self.sigma[curve]
    }

    /// Density per unit parameter `φ = σ|ζ'|` at the nodes of curve `j`.
    pub fn parameter_density(&self, curve: usize) -> &[f64] {
        &self.phi[curve]
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn boundary_residual(&self) -> f64 {
        self.boundary_residual
    }

    pub fn boundary_band(&self) -> f64 {
        self.boundary_band
    }

    pub fn with_boundary_band(mut self, band: f64) -> Self {
        self.boundary_band = band;
        self
    }

    pub fn curve_count(&self) -> usize {
        self.disc.curves.len()
    }

    /// Arclength density `σ(ζ(t))` on curve `j` by trigonometric interpolation.
    pub fn density_at(&self, curve: usize, t: f64) -> f64 {
        self.interpolants[curve].eval(t) / self.disc.curves[curve].curve.tangent_at(t).norm()
    }

    /// Total discrete mass `Σ σ_k |ζ'_k| Δt`.
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `∫ log|ζ_j(t) - ζ| dμ(ζ)` for a boundary point, with the same singular rule as the solver.
    pub fn boundary_log_integral(&self, curve: usize, t: f64) -> f64 {
        let m = self.disc.m_per_curve;
        let h = TAU / m as f64;
        let target = &self.disc.curves[curve];
        let [z, dz, _] = target.curve.evaluate(t);
        let mut acc = 0.0;
        for (i, source) in self.disc.curves.iter().enumerate() {
            for k in 0..m {
                let w = if i == curve {
                    let x = t - source.params[k];
                    let half = (0.5 * x).sin();
                    let smooth = if (2.0 * half).abs() < 1e-14 {
                        dz.norm().ln()
                    } else {
                        (z - source.points[k]).norm().ln() - (2.0 * half).abs().ln()
                    };
                    log_sine_weight(m, x) + h * smooth
                } else {
                    h * (z - source.points[k]).norm().ln()
                };
                acc += w * self.phi[i][k];
            }
        }
        acc
    }

    /// `U(z) = ∫ log(1/|ζ - z|) dμ∞(ζ)`.
    pub fn log_potential(&self, z: Complex64) -> Result<f64> {
        self.potential_and_location(z).map(|(u, _)| u)
    }

    /// `g(∞, z) = γ - U(z)`, clamped to zero on `E ∪ Γ`.
    pub fn green(&self, z: Complex64) -> Result<f64> {
        let (u, loc) = self.potential_and_location(z)?;
        if loc.inside {
            Ok(0.0)
        } else {
            Ok((self.robin_gamma - u).max(0.0))
        }
    }

    fn potential_and_location(&self, z: Complex64) -> Result<(f64, Location)> {
        let mut integral = 0.0;
        // nearest near-field curve: (distance, curve, t)
        let mut nearest: Option<(f64, usize, f64)> = None;
        for (j, nodes) in self.disc.curves.iter().enumerate() {
            let spacing = nodes.max_arc_spacing();
            let coarse = nodes.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
            let near = if coarse > (NEAR_FACTOR + 1.0) * spacing {
                None
            } else {
                let (t, d) = nodes.curve.closest_point(z, 4 * nodes.len());
                if d < self.boundary_band {
                    return Err(Error::TooCloseToBoundary {
                        distance: d,
                        band: self.boundary_band,
                    });
                }
                if nearest.is_none_or(|(best, _, _)| d < best) {
                    nearest = Some((d, j, t));
                }
                (d < NEAR_FACTOR * spacing).then_some((t, d))
            };
            integral += match near {
                None => self.trapezoid_log_integral(j, z),
                Some((t, d)) => self.panel_log_integral(j, z, t, d),
            };
        }
        let inside = match nearest {
            Some((_, j, t)) => {
                let [p, dp, _] = self.disc.curves[j].curve.evaluate(t);
                let left = (dp.conj() * (z - p)).im > 0.0;
                left == self.counterclockwise[j]
            }
            None => self.disc.curves.iter().any(|c| polyline_winding(&c.points, z).abs() > 0.5),
        };
        Ok((-integral, Location { inside }))
    }

    fn trapezoid_log_integral(&self, j: usize, z: Complex64) -> f64 {
        let nodes = &self.disc.curves[j];
        let h = nodes.step();
        nodes
            .points
            .iter()
            .zip(&self.phi[j])
            .map(|(p, w)| w * (p - z).norm().ln())
            .sum::<f64>()
            * h
    }

    /// Composite Gauss–Legendre over `[t* - π, t* + π]` with panels graded
    /// geometrically toward the nearest parameter `t*`.
    fn panel_log_integral(&self, j: usize, z: Complex64, t_star: f64, distance: f64) -> f64 {
        let nodes = &self.disc.curves[j];
        let speed = nodes.curve.tangent_at(t_star).norm();
        let coarse_panel = 4.0 * nodes.step();
        let mut edges = vec![0.0];
        let mut e = (distance / speed).min(coarse_panel);
        while e < coarse_panel {
            edges.push(e);
            e *= 2.0;
        }
        let mut e = *edges.last().unwrap();
        while e + coarse_panel < std::f64::consts::PI {
            e += coarse_panel;
            edges.push(e);
        }
        edges.push(std::f64::consts::PI);

        let (gx, gw) = gauss_legendre_16();
        let density = &self.interpolants[j];
        let mut acc = 0.0;
        for side in [1.0, -1.0] {
            for pair in edges.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                for (x, w) in gx.iter().zip(gw) {
                    let s = t_star + side * (mid + half * x);
                    let p = nodes.curve.point_at(s);
                    acc += w * half * density.eval(s) * (p - z).norm().ln();
                }
            }
        }
        acc
    }
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
