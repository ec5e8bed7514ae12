use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;

use crate::capacity::ChannelParams;
use crate::codec::SphericalCodebook;
use crate::error::{invalid, Result};
use crate::geometry::{dist_sq, uniform_sphere_sample};
use crate::jammers::{awgn_observe, JamContext, JammerStrategy};
use crate::rng::{domain, stream};

/// Where list-decoding centers come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterMode {
    /// Uniform on the sphere of the given radius.
    Sphere { radius: f64 },
    /// Uniform in the shell `inner ≤ ‖y‖ ≤ outer`.
    Shell { inner: f64, outer: f64 },
    /// `y = x + s` for a uniformly chosen codeword and the attack's `s`.
    Attack { strategy: JammerStrategy, params: ChannelParams },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ListSurvey {
    pub histogram: BTreeMap<usize, u64>,
    pub max: usize,
    pub mean: f64,
    pub centers: u64,
}

fn shell_sample<R: Rng + ?Sized>(rng: &mut R, n: usize, inner: f64, outer: f64) -> Vec<f64> {
    // radius density ∝ r^{n−1} on [inner, outer]
    let nf = n as f64;
    let u: f64 = rng.random();
    let (a, b) = (inner.powf(nf), outer.powf(nf));
    uniform_sphere_sample(rng, n, (a + u * (b - a)).powf(1.0 / nf))
}

/// List sizes at `count` random centers, each decoded against a random key.
pub fn list_size_survey(
    cb: &SphericalCodebook,
    centers: CenterMode,
    radius: f64,
    count: u64,
    seed: u64,
) -> Result<ListSurvey> {
    if let CenterMode::Attack { strategy, params } = centers {
        strategy.validate(&params)?;
    }
    if let CenterMode::Shell { inner, outer } = centers {
        if !(0.0 <= inner && inner <= outer) {
            return Err(invalid("shell", "need 0 ≤ inner ≤ outer"));
        }
    }
    let n = cb.n();
    let sizes: Vec<usize> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let mut rng = stream(seed, domain::CENTERS, i);
            let k = rng.random_range(0..cb.keys());
            let y = match centers {
                CenterMode::Sphere { radius } => uniform_sphere_sample(&mut rng, n, radius),
                CenterMode::Shell { inner, outer } => shell_sample(&mut rng, n, inner, outer),
                CenterMode::Attack { strategy, params } => {
                    let m = rng.random_range(0..cb.messages());
                    let x = cb.row(cb.index(m, k));
                    let z = awgn_observe(&mut rng, x, params.sigma2);
                    let ctx = JamContext { z: &z, codebook: Some(cb), params, transmitted: Some(x) };
                    let s = strategy.jam(&ctx, &mut rng)?.s;
                    x.iter().zip(&s).map(|(a, b)| a + b).collect()
                }
            };
            Ok(cb.list_size(&y, k, radius))
        })
        .collect::<Result<_>>()?;
    let mut survey = ListSurvey { centers: count, ..Default::default() };
    for &s in &sizes {
        *survey.histogram.entry(s).or_insert(0) += 1;
        survey.max = survey.max.max(s);
    }
    survey.mean = if count == 0 { 0.0 } else { sizes.iter().sum::<usize>() as f64 / count as f64 };
    Ok(survey)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobStats {
    /// Codewords outside the OGS inside the union of balls
    /// `B(x(m) + s, radius)` over OGS members `m`.
    pub blob_count: usize,
    /// Largest number of OGS members a single outside codeword can confuse.
    pub reverse_size_max: usize,
    /// Every codeword in the union, OGS members included, ascending.
    pub blob_members: Vec<usize>,
}

/// Blob and reverse list sizes of one OGS (rows of `cb`) under attack `s`.
pub fn blob_and_reverse_sizes(cb: &SphericalCodebook, ogs: &[usize], s: &[f64], radius: f64) -> BlobStats {
    let r2 = radius * radius;
    let inside: BTreeSet<usize> = ogs.iter().copied().collect();
    let centers: Vec<Vec<f64>> =
        ogs.iter().map(|&m| cb.row(m).iter().zip(s).map(|(a, b)| a + b).collect()).collect();
    let hits: Vec<(usize, usize)> = (0..cb.len())
        .into_par_iter()
        .filter_map(|j| {
            let xj = cb.row(j);
            let c = centers.iter().filter(|c| dist_sq(c, xj) <= r2).count();
            (c > 0).then_some((j, c))
        })
        .collect();
    let blob_count = hits.iter().filter(|(j, _)| !inside.contains(j)).count();
    let reverse_size_max = hits.iter().filter(|(j, _)| !inside.contains(j)).map(|&(_, c)| c).max().unwrap_or(0);
    BlobStats { blob_count, reverse_size_max, blob_members: hits.into_iter().map(|(j, _)| j).collect() }
}
