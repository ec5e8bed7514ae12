//! Jamming strategies. Each maps the jammer's observation `z` (plus the
//! public codebook and private randomness) to an attack vector `s` with
//! `‖s‖ ≤ √(nN)`.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::capacity::{minimize_scale_babble, scale_babble_alpha_max, ChannelParams};
use crate::codec::SphericalCodebook;
use crate::error::{invalid, Error, Result};
use crate::geometry::norm;

pub const OBLIVIOUS_BACKOFF: f64 = 0.01;
pub const DEFAULT_BABBLE_EPSILON: f64 = 0.05;

/// What the jammer knows when it picks `s`.
#[derive(Debug, Clone, Copy)]
pub struct JamContext<'a> {
    pub z: &'a [f64],
    pub codebook: Option<&'a SphericalCodebook>,
    pub params: ChannelParams,
    /// The true codeword; only the omniscient push attack reads it.
    pub transmitted: Option<&'a [f64]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JamResult {
    pub s: Vec<f64>,
    /// The raw attack exceeded the budget and was scaled back.
    pub clipped: bool,
    /// Decoy codeword `(m′, k′)` for the symmetrisation attacks.
    pub decoy: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JammerStrategy {
    Silent,
    Oblivious,
    ScaleAndBabble { alpha: f64, epsilon: f64 },
    SymmetrizeZAware,
    SymmetrizeZAgnostic,
    /// Push along the negative of the transmitted codeword (omniscient) or of
    /// `z` (myopic).
    PushToOrigin { omniscient: bool },
}

impl JammerStrategy {
    /// Scale-and-babble at the optimiser of the induced channel's rate.
    pub fn optimal_scale_and_babble(params: &ChannelParams, epsilon: f64) -> Self {
        let alpha = minimize_scale_babble(params).argument;
        JammerStrategy::ScaleAndBabble { alpha, epsilon }
    }

    pub fn name(&self) -> &'static str {
        match self {
            JammerStrategy::Silent => "none",
            JammerStrategy::Oblivious => "oblivious",
            JammerStrategy::ScaleAndBabble { .. } => "scale-babble",
            JammerStrategy::SymmetrizeZAware => "symmetrize-z-aware",
            JammerStrategy::SymmetrizeZAgnostic => "symmetrize-z-agnostic",
            JammerStrategy::PushToOrigin { omniscient: true } => "push-omniscient",
            JammerStrategy::PushToOrigin { omniscient: false } => "push-myopic",
        }
    }

    /// Whether the attack reads codewords other than through `z`.
    pub fn needs_codebook(&self) -> bool {
        matches!(self, JammerStrategy::SymmetrizeZAware | JammerStrategy::SymmetrizeZAgnostic)
    }

    /// Checks parameter feasibility once, before any trial runs.
    pub fn validate(&self, params: &ChannelParams) -> Result<()> {
        match *self {
            JammerStrategy::ScaleAndBabble { alpha, epsilon } => {
                let hi = scale_babble_alpha_max(params);
                if !(alpha > 0.0 && alpha <= hi * (1.0 + 1e-12)) {
                    return Err(invalid("alpha", format!("{alpha} outside (0, {hi}]")));
                }
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    return Err(invalid("epsilon", format!("{epsilon} outside (0, 1)")));
                }
                Ok(())
            }
            JammerStrategy::SymmetrizeZAgnostic if params.jam_power < params.power => Err(Error::Infeasible(
                format!("z-agnostic symmetrisation needs N ≥ P (N = {}, P = {})", params.jam_power, params.power),
            )),
            _ => Ok(()),
        }
    }

    pub fn jam<R: Rng + ?Sized>(&self, ctx: &JamContext<'_>, rng: &mut R) -> Result<JamResult> {
        match *self {
            JammerStrategy::Silent => Ok(JamResult { s: vec![0.0; ctx.z.len()], clipped: false, decoy: None }),
            JammerStrategy::Oblivious => Ok(jam_oblivious(ctx, rng)),
            JammerStrategy::ScaleAndBabble { alpha, epsilon } => jam_scale_and_babble(ctx, alpha, epsilon, rng),
            JammerStrategy::SymmetrizeZAware => jam_symmetrize_z_aware(ctx, rng),
            JammerStrategy::SymmetrizeZAgnostic => jam_symmetrize_z_agnostic(ctx, rng),
            JammerStrategy::PushToOrigin { omniscient } => {
                let est = if omniscient {
                    ctx.transmitted
                        .ok_or_else(|| Error::Infeasible("omniscient push needs the transmitted codeword".into()))?
                } else {
                    ctx.z
                };
                jam_push_to_origin(ctx, est)
            }
        }
    }
}

fn budget(ctx: &JamContext<'_>) -> f64 {
    (ctx.z.len() as f64 * ctx.params.jam_power).sqrt()
}

/// Scales `v` back onto the budget sphere if it is outside.
fn clip(mut v: Vec<f64>, limit: f64) -> (Vec<f64>, bool) {
    let len = norm(&v);
    if len > limit {
        let beta = limit / len;
        v.iter_mut().for_each(|x| *x *= beta);
        (v, true)
    } else {
        (v, false)
    }
}

/// `z = x + s_z` with `s_z ~ N(0, σ² I)`.
pub fn awgn_observe<R: Rng + ?Sized>(rng: &mut R, x: &[f64], sigma2: f64) -> Vec<f64> {
    if sigma2 == 0.0 {
        return x.to_vec();
    }
    let sd = sigma2.sqrt();
    x.iter().map(|v| v + sd * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Gaussian noise at 99% of the jammer's power, independent of `z`.
pub fn jam_oblivious<R: Rng + ?Sized>(ctx: &JamContext<'_>, rng: &mut R) -> JamResult {
    let sd = (ctx.params.jam_power * (1.0 - OBLIVIOUS_BACKOFF)).sqrt();
    let g = Normal::new(0.0, sd).expect("finite standard deviation");
    let v: Vec<f64> = (0..ctx.z.len()).map(|_| g.sample(rng)).collect();
    let (s, clipped) = clip(v, budget(ctx));
    JamResult { s, clipped, decoy: None }
}

/// `s = β(−αz + g)` with `g ~ N(0, γ²I)`, `γ² = (N − α²(P+σ²))(1−ε)`.
pub fn jam_scale_and_babble<R: Rng + ?Sized>(
    ctx: &JamContext<'_>,
    alpha: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<JamResult> {
    JammerStrategy::ScaleAndBabble { alpha, epsilon }.validate(&ctx.params)?;
    let p = &ctx.params;
    let gamma2 = ((p.jam_power - alpha * alpha * (p.power + p.sigma2)) * (1.0 - epsilon)).max(0.0);
    let gamma = gamma2.sqrt();
    let v: Vec<f64> =
        ctx.z.iter().map(|zi| -alpha * zi + gamma * rng.sample::<f64, _>(StandardNormal)).collect();
    let (s, clipped) = clip(v, budget(ctx));
    Ok(JamResult { s, clipped, decoy: None })
}

fn draw_decoy<'a, R: Rng + ?Sized>(ctx: &JamContext<'a>, rng: &mut R) -> Result<(&'a [f64], (usize, usize))> {
    let cb = ctx
        .codebook
        .ok_or_else(|| Error::Infeasible("symmetrisation needs the codebook".into()))?;
    let idx = rng.random_range(0..cb.len());
    Ok((cb.row(idx), cb.split(idx)))
}

/// `s = ½β(x′ − z)` for a codeword `x′` drawn uniformly from the whole
/// codebook (the jammer does not know the key).
pub fn jam_symmetrize_z_aware<R: Rng + ?Sized>(ctx: &JamContext<'_>, rng: &mut R) -> Result<JamResult> {
    let (xp, decoy) = draw_decoy(ctx, rng)?;
    let v: Vec<f64> = xp.iter().zip(ctx.z).map(|(a, b)| 0.5 * (a - b)).collect();
    let (s, clipped) = clip(v, budget(ctx));
    Ok(JamResult { s, clipped, decoy: Some(decoy) })
}

/// `s = x′`, a uniformly drawn codeword. Needs `N ≥ P`.
pub fn jam_symmetrize_z_agnostic<R: Rng + ?Sized>(ctx: &JamContext<'_>, rng: &mut R) -> Result<JamResult> {
    JammerStrategy::SymmetrizeZAgnostic.validate(&ctx.params)?;
    let (xp, decoy) = draw_decoy(ctx, rng)?;
    Ok(JamResult { s: xp.to_vec(), clipped: false, decoy: Some(decoy) })
}

/// `s = −√(nN)·x̂/‖x̂‖`.
pub fn jam_push_to_origin(ctx: &JamContext<'_>, x_estimate: &[f64]) -> Result<JamResult> {
    let len = norm(x_estimate);
    if !(len > 0.0) {
        return Err(Error::Degenerate("cannot push along a zero vector".into()));
    }
    let scale = -budget(ctx) / len;
    Ok(JamResult { s: x_estimate.iter().map(|v| v * scale).collect(), clipped: false, decoy: None })
}
