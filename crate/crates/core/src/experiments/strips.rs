use crate::capacity::ChannelParams;
use crate::codec::SphericalCodebook;
use crate::error::{invalid, Error, Result};
use crate::geometry::{ball_sphere_log_fraction, dist_sq, norm, LogMeasure};

#[derive(Debug, Clone, PartialEq)]
pub struct StripCount {
    /// Strip index `i` in `{−ε/δ+1, …, ε/δ}`.
    pub index: i64,
    /// Squared distance from `ẑ`: `[nσ²(1+(i−1)δ), nσ²(1+iδ))`.
    pub dist2_lo: f64,
    pub dist2_hi: f64,
    /// Codeword row indices, ascending.
    pub members: Vec<usize>,
    /// `log₂` of the expected count for a uniformly random code.
    pub expected_log2_count: LogMeasure,
    /// Likelihood ratio across the strip, evaluated through the strip's cap
    /// radii instead of its distances. `None` if a boundary misses the sphere.
    pub ln_delta_via_radii: Option<f64>,
}

impl StripCount {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StripCensus {
    pub n: usize,
    pub z_hat: Vec<f64>,
    pub sigma2: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub strips: Vec<StripCount>,
    /// `max/min` of the posterior density of `x` given `ẑ` over one strip,
    /// which for a uniform code is `exp(nδ/2)`.
    pub delta_factor: f64,
}

impl StripCensus {
    /// Codewords in the thick strip `nσ²(1 ± ε)`.
    pub fn thick_count(&self) -> usize {
        self.strips.iter().map(StripCount::count).sum()
    }

    pub fn strip(&self, index: i64) -> Option<&StripCount> {
        self.strips.iter().find(|s| s.index == index)
    }

    /// Strip containing a codeword row.
    pub fn strip_of(&self, row: usize) -> Option<i64> {
        self.strips.iter().find(|s| s.members.binary_search(&row).is_ok()).map(|s| s.index)
    }

    /// Strips holding fewer than `2^{3εn}` codewords.
    pub fn sparse_strips(&self, ogs_epsilon: f64) -> Vec<i64> {
        let floor = (3.0 * ogs_epsilon * self.n as f64).exp2();
        self.strips.iter().filter(|s| (s.count() as f64) < floor).map(|s| s.index).collect()
    }
}

/// Distance² from the axis through `ẑ` of the points of the sphere of radius
/// `sphere_radius` lying at distance `d` from `ẑ` (Heron's formula).
pub fn strip_boundary_radius_sq(z_norm: f64, d: f64, sphere_radius: f64) -> Option<f64> {
    let (a, b, c) = (z_norm, d, sphere_radius);
    let s = 0.5 * (a + b + c);
    let area2 = s * (s - a) * (s - b) * (s - c);
    if area2 < 0.0 || z_norm <= 0.0 {
        return None;
    }
    Some(4.0 * area2 / (z_norm * z_norm))
}

/// Counts the codewords in each strip around `ẑ`.
pub fn strip_census(
    cb: &SphericalCodebook,
    z_hat: &[f64],
    sigma2: f64,
    epsilon: f64,
    delta: f64,
) -> Result<StripCensus> {
    let n = cb.n();
    if z_hat.len() != n {
        return Err(invalid("z", format!("length {} but n = {n}", z_hat.len())));
    }
    if !(sigma2 > 0.0) {
        return Err(invalid("sigma2", "strips need sigma2 > 0"));
    }
    if !(delta > 0.0 && epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", "need 0 < δ and 0 < ε < 1"));
    }
    let steps_f = (epsilon / delta).round();
    if steps_f < 1.0 || (steps_f * delta - epsilon).abs() > 1e-9 * epsilon {
        return Err(invalid("delta", format!("ε/δ = {} is not a positive integer", epsilon / delta)));
    }
    let steps = steps_f as i64;
    let nf = n as f64;
    let unit = nf * sigma2;
    let sphere = (nf * cb.power()).sqrt();
    let z_norm = norm(z_hat);
    let log2_size = (cb.len() as f64).log2();
    let bounds = |i: i64| (unit * (1.0 + (i - 1) as f64 * delta), unit * (1.0 + i as f64 * delta));

    let mut strips: Vec<StripCount> = (-steps + 1..=steps)
        .map(|i| {
            let (lo, hi) = bounds(i);
            let inner = ball_sphere_log_fraction(n, sphere, z_norm, lo.sqrt());
            let outer = ball_sphere_log_fraction(n, sphere, z_norm, hi.sqrt());
            let frac = outer.sub(inner);
            let expected = if frac.is_zero { LogMeasure::ZERO } else { LogMeasure::from_log2(frac.log2_value + log2_size) };
            let ln_delta = match (
                strip_boundary_radius_sq(z_norm, lo.sqrt(), sphere),
                strip_boundary_radius_sq(z_norm, hi.sqrt(), sphere),
            ) {
                (Some(rho_lo), Some(rho_hi)) => {
                    let proj = |rho2: f64| (sphere * sphere - rho2).max(0.0).sqrt();
                    Some(z_norm * (proj(rho_lo) - proj(rho_hi)) / sigma2)
                }
                _ => None,
            };
            StripCount {
                index: i,
                dist2_lo: lo,
                dist2_hi: hi,
                members: Vec::new(),
                expected_log2_count: expected,
                ln_delta_via_radii: ln_delta,
            }
        })
        .collect();

    for (row, x) in cb.rows().enumerate() {
        let d2 = dist_sq(x, z_hat);
        let mut i = ((d2 / unit - 1.0) / delta).floor() as i64 + 1;
        // guard against rounding at the edges
        if i >= -steps + 1 && i <= steps && d2 < bounds(i).0 {
            i -= 1;
        } else if i >= -steps + 1 && i <= steps && d2 >= bounds(i).1 {
            i += 1;
        }
        if i >= -steps + 1 && i <= steps {
            strips[(i + steps - 1) as usize].members.push(row);
        }
    }

    Ok(StripCensus {
        n,
        z_hat: z_hat.to_vec(),
        sigma2,
        epsilon,
        delta,
        strips,
        delta_factor: (0.5 * nf * delta).exp(),
    })
}

/// Exhaustive count of codewords with `‖x − ẑ‖² ∈ [nσ²(1−ε), nσ²(1+ε))`.
pub fn thick_strip_count(cb: &SphericalCodebook, z_hat: &[f64], sigma2: f64, epsilon: f64) -> usize {
    let unit = cb.n() as f64 * sigma2;
    let (lo, hi) = (unit * (1.0 - epsilon), unit * (1.0 + epsilon));
    cb.rows()
        .filter(|x| {
            let d2 = dist_sq(x, z_hat);
            lo <= d2 && d2 < hi
        })
        .count()
}

/// Oracle-given sets: one strip's codewords cut into consecutive blocks of
/// `⌈2^{nε}⌉` in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct OgsPartition {
    pub strip: i64,
    pub block_size: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl OgsPartition {
    pub fn from_members(strip: i64, members: &[usize], block_size: usize) -> Self {
        let blocks = members.chunks(block_size.max(1)).map(<[usize]>::to_vec).collect();
        OgsPartition { strip, block_size, blocks }
    }

    /// The strip held no codewords.
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, row: usize) -> Option<usize> {
        let pos = self.blocks.iter().position(|b| b.binary_search(&row).is_ok())?;
        Some(pos)
    }

    /// Block revealed by the oracle for the transmitted row, and whether it is
    /// the (possibly short) last block.
    pub fn oracle(&self, transmitted: usize) -> Option<(usize, bool)> {
        let b = self.block_of(transmitted)?;
        Some((b, b + 1 == self.blocks.len()))
    }
}

/// Partitions strip `index` of the census into blocks of `⌈2^{nε}⌉`.
pub fn build_ogs(census: &StripCensus, index: i64, epsilon: f64) -> Result<OgsPartition> {
    let strip = census
        .strip(index)
        .ok_or_else(|| invalid("strip", format!("no strip with index {index}")))?;
    let size = (epsilon * census.n as f64).exp2().ceil();
    if !(size >= 1.0 && size < usize::MAX as f64) {
        return Err(invalid("epsilon", format!("block size 2^(nε) = {size} unusable")));
    }
    Ok(OgsPartition::from_members(index, &strip.members, size as usize))
}

/// `ln Δ` for a strip of cap radii `r_str(1 ± τ)` (per dimension) seen from an
/// observation of norm `z_norm` quantised to within `√(nδ_Z)`.
pub fn quasi_uniformity_ln(
    params: &ChannelParams,
    n: usize,
    z_norm: f64,
    r_str: f64,
    tau: f64,
    delta_z: f64,
) -> Result<f64> {
    let pw = params.power;
    if !(params.sigma2 > 0.0) {
        return Err(invalid("sigma2", "quasi-uniformity needs sigma2 > 0"));
    }
    if !(tau >= 0.0 && r_str > 0.0 && delta_z >= 0.0) {
        return Err(invalid("tau", "need τ ≥ 0, r_str > 0, δ_Z ≥ 0"));
    }
    let nf = n as f64;
    let (r_minus, r_plus) = (r_str * (1.0 - tau), r_str * (1.0 + tau));
    if r_plus >= pw {
        return Err(Error::Degenerate(format!("r₊ = {r_plus} ≥ P = {pw}")));
    }
    let den = (nf * (pw - r_minus)).sqrt() + (nf * (pw - r_plus)).sqrt();
    Ok((z_norm + (nf * delta_z).sqrt()) / params.sigma2 * 2.0 * nf * r_str * tau / den)
}

pub fn quasi_uniformity(
    params: &ChannelParams,
    n: usize,
    z_norm: f64,
    r_str: f64,
    tau: f64,
    delta_z: f64,
) -> Result<f64> {
    quasi_uniformity_ln(params, n, z_norm, r_str, tau, delta_z).map(f64::exp)
}
