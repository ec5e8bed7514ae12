use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::capacity::ChannelParams;
use crate::codec::{SphericalCodebook, DEFAULT_BUDGET};
use crate::error::{invalid, Result};
use crate::geometry::{ball_sphere_log_fraction, dist_sq, norm, uniform_sphere_sample};
use crate::jammers::{awgn_observe, JamContext, JammerStrategy};
use crate::rng::{domain, stream};

use super::stats::{wilson_interval, Z95};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decoder {
    MinDistance,
    /// Success iff the true message is in the list and the list has at most
    /// `max_list` entries.
    List { radius: f64, max_list: usize },
}

/// How the code is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeMode {
    /// One codebook from the seed, fixed for all trials.
    Fixed,
    /// A fresh random code per trial. Only the transmitted codeword is drawn;
    /// the chance that one of the other `M − 1` codewords beats it is
    /// evaluated exactly from the cap measure. Works for attacks that do not
    /// read the codebook, and at rates far beyond any materialisable code.
    Ensemble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub params: ChannelParams,
    pub n: usize,
    pub rate: f64,
    pub key_rate: f64,
    pub attack: JammerStrategy,
    pub trials: u64,
    pub seed: u64,
    pub decoder: Decoder,
    pub code: CodeMode,
    pub budget: u64,
}

impl TrialConfig {
    pub fn new(params: ChannelParams, n: usize, rate: f64, attack: JammerStrategy, trials: u64, seed: u64) -> Self {
        TrialConfig {
            params,
            n,
            rate,
            key_rate: 0.0,
            attack,
            trials,
            seed,
            decoder: Decoder::MinDistance,
            code: CodeMode::Fixed,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrialTally {
    pub errors: u64,
    pub trials: u64,
    pub clip_count: u64,
    pub tie_count: u64,
    pub list_size_histogram: BTreeMap<usize, u64>,
}

impl TrialTally {
    pub fn pe_hat(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors as f64 / self.trials as f64
        }
    }

    pub fn ci95(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.trials, Z95)
    }

    pub fn merge(mut self, other: TrialTally) -> TrialTally {
        self.errors += other.errors;
        self.trials += other.trials;
        self.clip_count += other.clip_count;
        self.tie_count += other.tie_count;
        for (k, v) in other.list_size_histogram {
            *self.list_size_histogram.entry(k).or_insert(0) += v;
        }
        self
    }

    fn single(error: bool, clipped: bool, tie: bool, list_size: Option<usize>) -> TrialTally {
        let mut t = TrialTally {
            errors: error as u64,
            trials: 1,
            clip_count: clipped as u64,
            tie_count: tie as u64,
            list_size_histogram: BTreeMap::new(),
        };
        if let Some(l) = list_size {
            t.list_size_histogram.insert(l, 1);
        }
        t
    }
}

/// Estimates the error probability of a random spherical code under an
/// attack.
pub fn run_pe(config: &TrialConfig) -> Result<TrialTally> {
    if config.trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    config.attack.validate(&config.params)?;
    match config.code {
        CodeMode::Fixed => run_fixed(config),
        CodeMode::Ensemble => run_ensemble(config),
    }
}

fn run_fixed(config: &TrialConfig) -> Result<TrialTally> {
    let cb = SphericalCodebook::generate_with_budget(
        config.seed,
        config.n,
        config.rate,
        config.key_rate,
        config.params.power,
        config.budget,
    )?;
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(config.seed, domain::TRIAL, t);
            let m = rng.random_range(0..cb.messages());
            let k = rng.random_range(0..cb.keys());
            let x = cb.row(cb.index(m, k));
            let z = awgn_observe(&mut rng, x, config.params.sigma2);
            let ctx = JamContext { z: &z, codebook: Some(&cb), params: config.params, transmitted: Some(x) };
            let jam = config.attack.jam(&ctx, &mut rng)?;
            let y: Vec<f64> = x.iter().zip(&jam.s).map(|(a, b)| a + b).collect();
            Ok(match config.decoder {
                Decoder::MinDistance => {
                    let out = cb.min_distance_decode(&y, k);
                    TrialTally::single(out.m_hat != m, jam.clipped, out.tie, None)
                }
                Decoder::List { radius, max_list } => {
                    let list = cb.list_decode(&y, k, radius);
                    let ok = list.len() <= max_list && list.binary_search(&m).is_ok();
                    TrialTally::single(!ok, jam.clipped, false, Some(list.len()))
                }
            })
        })
        .try_reduce(TrialTally::default, |a, b| Ok(a.merge(b)))
}

fn run_ensemble(config: &TrialConfig) -> Result<TrialTally> {
    if config.attack.needs_codebook() {
        return Err(invalid("codebook", format!("attack `{}` reads the codebook; use a fixed code", config.attack.name())));
    }
    if config.decoder != Decoder::MinDistance {
        return Err(invalid("decoder", "ensemble mode supports the minimum-distance decoder only"));
    }
    let n = config.n;
    let bits = (n as f64 * config.rate + 1e-9).floor();
    // other codewords in the key-k subcode
    let others = bits.exp2() - 1.0;
    let radius = (n as f64 * config.params.power).sqrt();
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(config.seed, domain::TRIAL, t);
            let x = uniform_sphere_sample(&mut rng, n, radius);
            let z = awgn_observe(&mut rng, &x, config.params.sigma2);
            let ctx = JamContext { z: &z, codebook: None, params: config.params, transmitted: Some(&x) };
            let jam = config.attack.jam(&ctx, &mut rng)?;
            let y: Vec<f64> = x.iter().zip(&jam.s).map(|(a, b)| a + b).collect();
            let d = dist_sq(&x, &y).sqrt();
            let q = ball_sphere_log_fraction(n, radius, norm(&y), d).value();
            let p_err = -(others * (-q).ln_1p()).exp_m1();
            let error = rng.random::<f64>() < p_err;
            Ok(TrialTally::single(error, jam.clipped, false, None))
        })
        .try_reduce(TrialTally::default, |a, b| Ok(a.merge(b)))
}
