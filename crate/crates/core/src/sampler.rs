//! Roots on `Γ` approximately equidistributed with respect to `μ∞`.

use num_complex::Complex64;
use serde::Serialize;

use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};

/// Fraction of an arc's mass placed before the first root of each curve.
///
/// Roots on curve `j` sit at cumulative measure `(k + phase) μ_j / n_j`.
pub const DEFAULT_PHASE: f64 = 0.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub curve: usize,
    pub t: f64,
    pub z: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootSample {
    pub n: usize,
    pub per_curve_counts: Vec<usize>,
    pub roots: Vec<Root>,
    /// Largest `|arc mass - 1/n|` over the arcs obtained by cutting `Γ` at the roots.
    pub max_arc_mass_deviation: f64,
}

impl RootSample {
    pub fn points(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.z).collect()
    }
}

/// Largest-remainder apportionment of `n` roots to curves with masses `μ_j`.
///
/// Ties in the fractional part go to the lower curve index. A curve that would
/// receive no root takes one from the curve holding the most.
pub fn allocate_counts(masses: &[f64], n: usize) -> Result<Vec<usize>> {
    if n < masses.len() || masses.is_empty() {
        return Err(Error::TooFewRoots {
            n,
            curves: masses.len(),
        });
    }
    let total: f64 = masses.iter().sum();
    let quotas: Vec<f64> = masses.iter().map(|m| n as f64 * m / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &j in order.iter().take(n.saturating_sub(assigned)) {
        counts[j] += 1;
    }
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let donor = (0..counts.len()).max_by_key(|&j| (counts[j], std::cmp::Reverse(j))).unwrap();
        counts[donor] -= 1;
        counts[empty] = 1;
    }
    Ok(counts)
}

/// Places `n` roots by inverting each curve's cumulative measure.
pub fn sample_roots(sol: &EquilibriumSolution, n: usize) -> Result<RootSample> {
    sample_roots_with_phase(sol, n, DEFAULT_PHASE)
}

/// As [`sample_roots`] with roots at cumulative measure `(k + phase) μ_j / n_j`;
/// `phase = 0.5` gives midpoint placement.
pub fn sample_roots_with_phase(sol: &EquilibriumSolution, n: usize, phase: f64) -> Result<RootSample> {
    let phase = phase.rem_euclid(1.0);
    let counts = allocate_counts(sol.masses(), n)?;
    let curves = sol.discretization().curves();
    let mut roots = Vec::with_capacity(n);
    let mut deviation: f64 = 0.0;
    let target = 1.0 / n as f64;
    for (j, (&count, cdf)) in counts.iter().zip(sol.cdfs()).enumerate() {
        let mass = cdf.total();
        let mut levels = Vec::with_capacity(count);
        for k in 0..count {
            let t = cdf.inverse((k as f64 + phase) * mass / count as f64);
            roots.push(Root {
                curve: j,
                t,
                z: curves[j].curve().point_at(t),
            });
            levels.push(cdf.eval(t));
        }
        for k in 0..count {
            let arc = if k + 1 < count {
                levels[k + 1] - levels[k]
            } else {
                mass - levels[k] + levels[0]
            };
            deviation = deviation.max((arc - target).abs());
        }
    }
    Ok(RootSample {
        n,
        per_curve_counts: counts,
        roots,
        max_arc_mass_deviation: deviation,
    })
}
