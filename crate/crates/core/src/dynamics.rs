//! `S(z) = e^{n(γ-δ)} ∏(ζ_i - z)` and `P(z) = z S(z)` in root-plus-log-scale form.
//!
//! Coefficients are never formed for large `n`: `e^{n(γ-δ)}` under- or
//! overflows quickly and expanded high-degree coefficients are useless anyway.
//! Values are accumulated factor by factor in mantissa/exponent form.

use std::f64::consts::LN_2;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default iteration budget for escape-time classification.
pub const DEFAULT_MAX_ITER: u32 = 60;
/// Largest `n` for which [`ShapedPolynomial::coefficients`] expands the product.
pub const MAX_EXPANDED_DEGREE: usize = 20;

const MAX_PLAIN_FACTOR: f64 = 1e100;
const RENORMALIZE_BELOW: f64 = 3.872_591_914_849_318e-121; // 2^-400
const RENORMALIZE_ABOVE: f64 = 2.582_249_878_086_908_6e120; // 2^400

fn exp2i(k: i64) -> f64 {
    if (-1022..=1023).contains(&k) {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        2f64.powi(k as i32)
    }
}

fn floor_log2(x: f64) -> i64 {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        x.log2().floor() as i64
    } else {
        biased - 1023
    }
}

/// `mantissa · 2^exponent` with `|mantissa| ∈ [1, 2)`, or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    mantissa: Complex64,
    exponent: i64,
}

impl ScaledComplex {
    pub const ZERO: Self = Self {
        mantissa: Complex64::new(0.0, 0.0),
        exponent: 0,
    };

    pub fn new(z: Complex64) -> Self {
        Self::normalized(z, 0)
    }

    fn normalized(mantissa: Complex64, exponent: i64) -> Self {
        let r = mantissa.norm();
        if r == 0.0 {
            return Self::ZERO;
        }
        let shift = floor_log2(r);
        let mut m = mantissa * exp2i(-shift);
        let mut e = exponent + shift;
        // hypot rounding can land exactly on 2
        if m.norm() >= 2.0 {
            m *= 0.5;
            e += 1;
        }
        Self { mantissa: m, exponent: e }
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm_sqr() == 0.0
    }

    /// Multiplies by `2^power` for real `power`.
    pub fn mul_exp2(self, power: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        let whole = power.floor();
        Self::normalized(self.mantissa * (power - whole).exp2(), self.exponent + whole as i64)
    }

    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.exponent as f64 + self.mantissa.norm().log2()
        }
    }

    pub fn ln_abs(&self) -> f64 {
        self.log2_abs() * LN_2
    }

    /// Plain value; overflows to infinity when the exponent is out of range.
    pub fn to_complex(&self) -> Complex64 {
        if self.exponent > 1023 {
            let huge = self.mantissa * exp2i(1023);
            huge * exp2i(self.exponent - 1023)
        } else if self.exponent < -1022 {
            (self.mantissa * exp2i(-1022)) * exp2i(self.exponent + 1022)
        } else {
            self.mantissa * exp2i(self.exponent)
        }
    }
}

impl Mul for ScaledComplex {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mantissa * other.mantissa, self.exponent + other.exponent)
    }
}

impl Mul<Complex64> for ScaledComplex {
    type Output = Self;

    fn mul(self, z: Complex64) -> Self {
        self * Self::new(z)
    }
}

/// Outcome of iterating `P` from one starting point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orbit {
    /// The `iterations`-th image left the escape disk.
    Escaped { iterations: u32 },
    /// Did not escape within the budget (or entered a certified trapping disk).
    Bounded,
}

/// `P_{n,δ}(z) = e^{n(γ-δ)} z ∏_{i=1}^n (ζ_i - z)` in normalized coordinates.
#[derive(Clone, Debug)]
pub struct ShapedPolynomial {
    roots: Vec<Complex64>,
    delta: f64,
    gamma: f64,
    log_scale: f64,
    translation_offset: Complex64,
    root_radius: f64,
    trap_radius: f64,
}

impl ShapedPolynomial {
    /// `translation_offset` is the shift that took the user's shape to these
    /// coordinates (normalized = original + offset).
    pub fn new(roots: Vec<Complex64>, delta: f64, gamma: f64, translation_offset: Complex64) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::Config("polynomial needs at least one root".into()));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::Config(format!("delta must be a nonnegative number, got {delta}")));
        }
        if !gamma.is_finite() || roots.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Config("polynomial data must be finite".into()));
        }
        let n = roots.len();
        let root_radius = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if root_radius <= 0.0 {
            return Err(Error::Config("root radius must be positive".into()));
        }
        let mut poly = Self {
            roots,
            delta,
            gamma,
            log_scale: n as f64 * (gamma - delta),
            translation_offset,
            root_radius,
            trap_radius: 0.0,
        };
        poly.trap_radius = poly.compute_trap_radius();
        Ok(poly)
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }
    pub fn n(&self) -> usize {
        self.roots.len()
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// `n(γ - δ)`.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }
    pub fn translation_offset(&self) -> Complex64 {
        self.translation_offset
    }
    /// `ρ = max |ζ_i|`.
    pub fn root_radius(&self) -> f64 {
        self.root_radius
    }
    /// Radius of a disk about `0` mapped into itself by `P`, or zero if none was found.
    pub fn trap_radius(&self) -> f64 {
        self.trap_radius
    }

    /// `log|S(z)| = n(γ-δ) + Σ log|ζ_i - z|`; `-∞` at a root.
    pub fn log_abs_s(&self, z: Complex64) -> f64 {
        let mut acc = self.log_scale;
        for r in &self.roots {
            let d = (r - z).norm();
            if d == 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += d.ln();
        }
        acc
    }

    /// `S(z)` in mantissa/exponent form.
    pub fn eval_s(&self, z: Complex64) -> ScaledComplex {
        if z.norm() > MAX_PLAIN_FACTOR || self.root_radius > MAX_PLAIN_FACTOR {
            return self.eval_s_renormalizing(z);
        }
        // factors are below 2^333, so renormalizing outside [2^-400, 2^400] cannot overflow
        let mut acc = Complex64::new(1.0, 0.0);
        let mut exponent = 0i64;
        for r in &self.roots {
            acc *= r - z;
            let a = acc.re.abs().max(acc.im.abs());
            if !(a > RENORMALIZE_BELOW && a < RENORMALIZE_ABOVE) {
                if a == 0.0 {
                    if *r == z {
                        return ScaledComplex::ZERO;
                    }
                    return self.eval_s_renormalizing(z);
                }
                let s = ScaledComplex::normalized(acc, exponent);
                acc = s.mantissa;
                exponent = s.exponent;
            }
        }
        ScaledComplex::normalized(acc, exponent).mul_exp2(self.log_scale / LN_2)
    }

    fn eval_s_renormalizing(&self, z: Complex64) -> ScaledComplex {
        let mut acc = ScaledComplex::new(Complex64::new(1.0, 0.0));
        for r in &self.roots {
            acc = acc * (r - z);
            if acc.is_zero() {
                return acc;
            }
        }
        acc.mul_exp2(self.log_scale / LN_2)
    }

    /// `P(z) = z S(z)`.
    pub fn eval_p(&self, z: Complex64) -> ScaledComplex {
        if z.norm_sqr() == 0.0 {
            return ScaledComplex::ZERO;
        }
        self.eval_s(z) * z
    }

    /// `R = max(2ρ, ρ + 2^{1/n} e^{δ-γ})`; `|z| ≥ R` implies `|P(z)| ≥ 2|z|`.
    pub fn escape_radius(&self) -> f64 {
        let rho = self.root_radius;
        let n = self.n() as f64;
        (2.0 * rho).max(rho + (1.0 / n).exp2() * (self.delta - self.gamma).exp())
    }

    fn compute_trap_radius(&self) -> f64 {
        // |z| ≤ r  ⇒  |S(z)| ≤ e^{n(γ-δ)} ∏(|ζ_i| + r), so the bound below 1 keeps the disk invariant
        let bound = |r: f64| self.log_scale + self.roots.iter().map(|z| (z.norm() + r).ln()).sum::<f64>();
        let margin = -1e-9 * (1.0 + self.log_scale.abs());
        let at_zero = bound(0.0);
        if at_zero.is_nan() || at_zero > margin {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, self.escape_radius());
        if bound(hi) <= margin {
            return hi;
        }
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if bound(mid) <= margin {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Escape-time classification of `z` with escape radius `escape_radius`.
    ///
    /// `Escaped` is rigorous once `escape_radius` is at least [`Self::escape_radius`].
    /// `Bounded` means the orbit did not leave within `max_iter` steps, or it
    /// entered the certified trapping disk around the fixed point `0`.
    pub fn classify_point(&self, z: Complex64, max_iter: u32, escape_radius: f64) -> Orbit {
        let log_r = escape_radius.ln();
        let mut z = z;
        for k in 1..=max_iter {
            if z.norm() <= self.trap_radius {
                return Orbit::Bounded;
            }
            let w = self.eval_p(z);
            if w.ln_abs() > log_r {
                return Orbit::Escaped { iterations: k };
            }
            z = w.to_complex();
        }
        Orbit::Bounded
    }

    /// Classification of a point given in the user's original coordinates.
    pub fn classify_original(&self, w: Complex64, max_iter: u32, escape_radius: f64) -> Orbit {
        self.classify_point(w + self.translation_offset, max_iter, escape_radius)
    }

    /// `Q = T ∘ P ∘ T⁻¹` for `T(z) = z - offset`, the polynomial acting on original coordinates.
    pub fn conjugated_output(&self) -> ConjugatedPolynomial {
        let fixed_point = -self.translation_offset;
        ConjugatedPolynomial {
            n: self.n(),
            delta: self.delta,
            gamma: self.gamma,
            log_scale: self.log_scale,
            fixed_point,
            roots: self.roots.iter().map(|z| z + fixed_point).collect(),
        }
    }

    /// Coefficients of `P`, lowest degree first (`n + 2` entries).
    pub fn coefficients(&self) -> Result<Vec<Complex64>> {
        let n = self.n();
        if n > MAX_EXPANDED_DEGREE {
            return Err(Error::DegreeTooLarge(n));
        }
        // ∏(ζ_i - z), low to high
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for r in &self.roots {
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (k, a) in poly.iter().enumerate() {
                next[k] += r * a;
                next[k + 1] -= a;
            }
            poly = next;
        }
        let scale = self.log_scale.exp();
        let mut out = vec![Complex64::new(0.0, 0.0)];
        out.extend(poly.into_iter().map(|a| a * scale));
        Ok(out)
    }
}

/// `Q(w) = c + e^{n(γ-δ)} (w - c) ∏(ζ'_i - w)` with `ζ'_i = ζ_i + c`, `c` the fixed point.
#[derive(Clone, Debug, Serialize)]
pub struct ConjugatedPolynomial {
    pub n: usize,
    pub delta: f64,
    pub gamma: f64,
    pub log_scale: f64,
    pub fixed_point: Complex64,
    pub roots: Vec<Complex64>,
}

impl ConjugatedPolynomial {
    pub fn eval(&self, w: Complex64) -> ScaledComplex {
        let mut acc = ScaledComplex::new(w - self.fixed_point);
        for r in &self.roots {
            acc = acc * (r - w);
        }
        acc.mul_exp2(self.log_scale / LN_2)
    }
}

impl fmt::Display for ConjugatedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Q(w) = c + exp({}) (w - c) prod_i (r_i - w), degree {}",
            self.log_scale,
            self.n + 1
        )?;
        writeln!(f, "c = {} (fixed point)", self.fixed_point)?;
        writeln!(f, "iterating Q on w equals c + (P-iteration on w - c)")?;
        for (i, r) in self.roots.iter().enumerate() {
            writeln!(f, "r_{i} = {r}")?;
        }
        Ok(())
    }
}
