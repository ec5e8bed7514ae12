//! High-dimensional sphere, ball, cap and strip measures, sphere sampling,
//! covering-size evaluators and tail bounds.
//!
//! Measures are carried as base-2 logarithms so that `Γ(n/2)` factors never
//! overflow.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::special::ln_beta_reg;

/// A nonnegative quantity stored as its base-2 logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMeasure {
    pub log2_value: f64,
    pub is_zero: bool,
}

impl LogMeasure {
    pub const ZERO: LogMeasure = LogMeasure { log2_value: f64::NEG_INFINITY, is_zero: true };
    pub const ONE: LogMeasure = LogMeasure { log2_value: 0.0, is_zero: false };

    pub fn from_log2(log2_value: f64) -> Self {
        if log2_value == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogMeasure { log2_value, is_zero: false }
        }
    }

    pub fn from_ln(ln_value: f64) -> Self {
        Self::from_log2(ln_value / LN_2)
    }

    pub fn from_value(v: f64) -> Self {
        if v <= 0.0 {
            Self::ZERO
        } else {
            Self::from_log2(v.log2())
        }
    }

    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log2_value.exp2()
        }
    }

    pub fn ln(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log2_value * LN_2
        }
    }

    pub fn log2(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log2_value
        }
    }

    pub fn mul(self, other: LogMeasure) -> LogMeasure {
        if self.is_zero || other.is_zero {
            Self::ZERO
        } else {
            Self::from_log2(self.log2_value + other.log2_value)
        }
    }

    /// `self - other`, clamped at zero.
    pub fn sub(self, other: LogMeasure) -> LogMeasure {
        if other.is_zero {
            return self;
        }
        if self.is_zero || other.log2_value >= self.log2_value {
            return Self::ZERO;
        }
        let d = (other.ln() - self.ln()).exp_m1();
        Self::from_ln(self.ln() + (-d).ln())
    }
}

/// Cap on the sphere of radius `sphere_radius`: all points within Euclidean
/// distance `chord_radius` of a point of the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSpec {
    pub ambient_dim: usize,
    pub sphere_radius: f64,
    pub chord_radius: f64,
}

impl CapSpec {
    pub fn new(ambient_dim: usize, sphere_radius: f64, chord_radius: f64) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(invalid("ambient_dim", "must be positive"));
        }
        if !(sphere_radius > 0.0) || !sphere_radius.is_finite() {
            return Err(invalid("sphere_radius", format!("{sphere_radius} is not positive")));
        }
        if !(chord_radius >= 0.0) || chord_radius > 2.0 * sphere_radius * (1.0 + 1e-12) {
            return Err(invalid(
                "chord_radius",
                format!("{chord_radius} outside [0, {}]", 2.0 * sphere_radius),
            ));
        }
        Ok(CapSpec { ambient_dim, sphere_radius, chord_radius: chord_radius.min(2.0 * sphere_radius) })
    }

    /// `r²/(2r′²)`, i.e. `1 - cos θ`.
    fn versine(&self) -> f64 {
        let q = self.chord_radius / self.sphere_radius;
        0.5 * q * q
    }

    pub fn cos_half_angle(&self) -> f64 {
        1.0 - self.versine()
    }

    /// Radius of the flat (n−1)-ball spanned by the cap's rim.
    pub fn base_radius(&self) -> f64 {
        let h = self.versine().min(2.0);
        self.sphere_radius * (h * (2.0 - h)).sqrt()
    }
}

/// Region of a sphere between two concentric caps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripSpec {
    pub ambient_dim: usize,
    pub sphere_radius: f64,
    pub inner_chord: f64,
    pub outer_chord: f64,
}

impl StripSpec {
    pub fn new(ambient_dim: usize, sphere_radius: f64, inner_chord: f64, outer_chord: f64) -> Result<Self> {
        let outer = CapSpec::new(ambient_dim, sphere_radius, outer_chord)?;
        let inner = CapSpec::new(ambient_dim, sphere_radius, inner_chord)?;
        if inner.chord_radius > outer.chord_radius {
            return Err(invalid("inner_chord", "exceeds outer_chord"));
        }
        Ok(StripSpec {
            ambient_dim,
            sphere_radius,
            inner_chord: inner.chord_radius,
            outer_chord: outer.chord_radius,
        })
    }

    fn caps(&self) -> (CapSpec, CapSpec) {
        let mk = |r| CapSpec { ambient_dim: self.ambient_dim, sphere_radius: self.sphere_radius, chord_radius: r };
        (mk(self.inner_chord), mk(self.outer_chord))
    }
}

/// `log₂` of the surface area of the sphere of radius `r` in `Rⁿ`.
pub fn sphere_log_area(n: usize, r: f64) -> LogMeasure {
    let n = n as f64;
    LogMeasure::from_log2(1.0 + 0.5 * n * PI.log2() - ln_gamma(0.5 * n) / LN_2 + (n - 1.0) * r.log2())
}

/// `log₂` of the volume of the ball of radius `r` in `Rⁿ`.
pub fn ball_log_volume(n: usize, r: f64) -> LogMeasure {
    let n = n as f64;
    LogMeasure::from_log2(0.5 * n * PI.log2() - ln_gamma(0.5 * n + 1.0) / LN_2 + n * r.log2())
}

/// Normalized area of `{u ∈ S^{n-1} : ⟨u, e⟩ ≥ cos θ}` given `cos θ` and
/// `sin²θ` (passed separately to keep precision near the poles).
fn cap_log_fraction_parts(n: usize, cos_theta: f64, sin2_theta: f64) -> LogMeasure {
    if n == 1 {
        // S⁰ is two points; the cap holds one of them unless it wraps around.
        return if cos_theta > -1.0 { LogMeasure::from_log2(-1.0) } else { LogMeasure::ONE };
    }
    if cos_theta >= 1.0 {
        return LogMeasure::ZERO;
    }
    if cos_theta <= -1.0 {
        return LogMeasure::ONE;
    }
    let a = 0.5 * (n as f64 - 1.0);
    let ln_half_i = ln_beta_reg(a, 0.5, sin2_theta.clamp(0.0, 1.0)) - LN_2;
    if cos_theta >= 0.0 {
        LogMeasure::from_ln(ln_half_i)
    } else {
        LogMeasure::from_ln((-ln_half_i.exp()).ln_1p())
    }
}

/// Normalized area of the cap `{u : ⟨u, e⟩ ≥ cos θ}` on the unit sphere in `Rⁿ`.
pub fn cap_log_fraction_cos(n: usize, cos_theta: f64) -> LogMeasure {
    let c = cos_theta.clamp(-1.0, 1.0);
    cap_log_fraction_parts(n, c, (1.0 - c) * (1.0 + c))
}

pub fn cap_log_fraction(cap: &CapSpec) -> LogMeasure {
    let h = cap.versine().min(2.0);
    cap_log_fraction_parts(cap.ambient_dim, 1.0 - h, h * (2.0 - h))
}

/// Fraction of the sphere's surface covered by the cap.
pub fn cap_fraction(cap: &CapSpec) -> f64 {
    cap_log_fraction(cap).value().min(1.0)
}

pub fn strip_log_fraction(strip: &StripSpec) -> LogMeasure {
    let (inner, outer) = strip.caps();
    cap_log_fraction(&outer).sub(cap_log_fraction(&inner))
}

pub fn strip_fraction(strip: &StripSpec) -> f64 {
    let (inner, outer) = strip.caps();
    (cap_fraction(&outer) - cap_fraction(&inner)).max(0.0)
}

/// Fraction of the sphere `S(0, sphere_radius)` lying within distance
/// `ball_radius` of a point at distance `center_norm` from the origin.
pub fn ball_sphere_log_fraction(n: usize, sphere_radius: f64, center_norm: f64, ball_radius: f64) -> LogMeasure {
    if center_norm <= 0.0 {
        return if ball_radius >= sphere_radius { LogMeasure::ONE } else { LogMeasure::ZERO };
    }
    let c = (sphere_radius * sphere_radius + center_norm * center_norm - ball_radius * ball_radius)
        / (2.0 * sphere_radius * center_norm);
    if c > 1.0 {
        return LogMeasure::ZERO;
    }
    cap_log_fraction_cos(n, c)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Fills `out` with a point drawn uniformly from the sphere of radius `r`.
pub fn fill_uniform_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64], r: f64) {
    loop {
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let len = norm(out);
        if len > 0.0 && len.is_finite() {
            let scale = r / len;
            out.iter_mut().for_each(|v| *v *= scale);
            return;
        }
    }
}

pub fn uniform_sphere_sample<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    fill_uniform_sphere(rng, &mut out, r);
    out
}

/// Uniform point of the ball of radius `r` in `Rⁿ`.
pub fn uniform_ball_sample<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> Vec<f64> {
    let u: f64 = rng.random();
    uniform_sphere_sample(rng, n, r * u.powf(1.0 / n as f64))
}

/// Log-size estimate for a covering, with the `(1+o(1))` exponent factor
/// dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringBound {
    pub measure: LogMeasure,
    /// Always true: the value is the leading-order exponent only.
    pub asymptotic: bool,
}

/// `n·log₂((a + √δ)/√δ)` for covering the ball of radius `√n·a` by balls of
/// radius `√(nδ)`.
pub fn covering_size_log_bound(ambient_radius: f64, delta: f64, n: usize) -> CoveringBound {
    let sd = delta.sqrt();
    let log2 = if sd.is_infinite() { 0.0 } else { n as f64 * ((ambient_radius + sd) / sd).log2() };
    CoveringBound { measure: LogMeasure::from_log2(log2), asymptotic: true }
}

pub const COVERING_CENTER_BUDGET: usize = 1_000_000;
const COVERING_PROBES: usize = 10_000;
const COVERING_SHRINK: f64 = 0.85;

/// Greedy covering of the ball of radius `√n·ambient_radius` by balls of
/// radius `√(nδ)`, certified against fresh random probes.
pub fn build_toy_covering<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    ambient_radius: f64,
    delta: f64,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 || n > 12 {
        return Err(invalid("n", format!("toy coverings support 1 ≤ n ≤ 12, got {n}")));
    }
    if !(ambient_radius > 0.0) || !(delta > 0.0) {
        return Err(invalid("delta", "radius and δ must be positive"));
    }
    let nf = n as f64;
    let big = nf.sqrt() * ambient_radius;
    let rho = (nf * delta).sqrt();
    let mut centers: Vec<Vec<f64>> = Vec::new();

    // Farthest-point insertion over a random candidate cloud.
    let n_cand = 20_000;
    let cands: Vec<Vec<f64>> = (0..n_cand).map(|_| uniform_ball_sample(rng, n, big)).collect();
    let mut nearest = vec![f64::INFINITY; n_cand];
    let target = (COVERING_SHRINK * rho).powi(2);
    let mut next = cands
        .iter()
        .enumerate()
        .min_by(|a, b| norm_sq(a.1).total_cmp(&norm_sq(b.1)))
        .map(|(i, _)| i)
        .unwrap();
    loop {
        let c = cands[next].clone();
        let mut far = (0, 0.0f64);
        for (i, p) in cands.iter().enumerate() {
            nearest[i] = nearest[i].min(dist_sq(p, &c));
            if nearest[i] > far.1 {
                far = (i, nearest[i]);
            }
        }
        centers.push(c);
        if centers.len() > COVERING_CENTER_BUDGET {
            return Err(Error::CoveringBudget(COVERING_CENTER_BUDGET));
        }
        if far.1 <= target {
            break;
        }
        next = far.0;
    }

    // Probe certificate; uncovered probes become centers until a clean round.
    let r2 = rho * rho;
    for _round in 0..1000 {
        let mut violators = Vec::new();
        for _ in 0..COVERING_PROBES {
            let p = uniform_ball_sample(rng, n, big);
            if !centers.iter().any(|c| dist_sq(&p, c) <= r2) {
                violators.push(p);
            }
        }
        if violators.is_empty() {
            return Ok(centers);
        }
        for v in violators {
            if !centers.iter().any(|c| dist_sq(&v, c) <= r2) {
                centers.push(v);
            }
        }
        if centers.len() > COVERING_CENTER_BUDGET {
            return Err(Error::CoveringBudget(COVERING_CENTER_BUDGET));
        }
    }
    Err(Error::Degenerate("covering certificate did not converge".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    Above,
    Below,
    TwoSided,
}

/// Tail bound for `‖g‖² ∉ nσ²(1 ± ε)` with `g ~ N(0, σ²Iₙ)`.
pub fn gaussian_norm_tail_bound(n: usize, _sigma2: f64, epsilon: f64, side: TailSide) -> f64 {
    let n = n as f64;
    let e2 = epsilon * epsilon;
    let b = match side {
        TailSide::Above => (-e2 * n / 4.0).exp(),
        TailSide::Below => (-e2 * n / 2.0).exp(),
        TailSide::TwoSided => 2.0 * (-e2 * n / 4.0).exp(),
    };
    b.min(1.0)
}

/// Bound on `P(|⟨a, b⟩| > nζ)` for `a` isotropic on the sphere of radius
/// `norm_a`.
pub fn inner_product_tail_bound(n: usize, norm_a: f64, norm_b: f64, zeta: f64) -> f64 {
    let n = n as f64;
    let expo = (n - 1.0) * n * n * zeta * zeta / (2.0 * norm_a * norm_a * norm_b * norm_b);
    (-expo).exp2().min(1.0)
}
