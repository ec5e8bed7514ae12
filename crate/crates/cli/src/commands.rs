use myopic_core::capacity::{rate_gv, rate_ld, rate_myop};
use myopic_core::experiments::{
    blob_and_reverse_sizes, build_ogs, list_size_survey, region_sweep, run_pe, strip_census, CenterMode, CodeMode,
    Decoder, StripCensus, TrialConfig,
};
use myopic_core::geometry::uniform_sphere_sample;
use myopic_core::jammers::awgn_observe;
use myopic_core::rng::{domain, stream};
use myopic_core::{Error, JammerStrategy, KeyRegime, SphericalCodebook};
use rand::Rng;

use crate::config::{BlobSpec, CenterSpec, CommandSpec, ListdecSpec, RegionSpec, SimulateSpec, StripSpec};
use crate::output::{Cell, Table};
use crate::selftest;
use crate::CliError;

/// A command's table and whether a self-test found violations.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub selftest_failed: bool,
}

pub fn dispatch(command: &CommandSpec, seed: u64) -> Result<Outcome, CliError> {
    let table = match command {
        CommandSpec::Region(r) => region(r)?,
        CommandSpec::Simulate(s) => simulate(s, seed)?,
        CommandSpec::Listdec(l) => listdec(l, seed)?,
        CommandSpec::StripCensus(s) => strip(s, seed)?,
        CommandSpec::Blob(b) => blob(b, seed)?,
        CommandSpec::CapsSelftest(s) => {
            let (table, ok) = selftest::run(s);
            return Ok(Outcome { table, selftest_failed: !ok });
        }
    };
    Ok(Outcome { table, selftest_failed: false })
}

fn region(spec: &RegionSpec) -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "regime", "key_rate", "nsr", "jam_ratio", "power", "jam_power", "sigma2", "verdict", "label", "lower",
        "upper", "boundary", "r_ld", "r_myop", "r_gv",
    ]);
    let key_rate = match spec.regime {
        KeyRegime::Linear(r) => r,
        _ => 0.0,
    };
    for row in region_sweep(spec.power, &spec.nsr, &spec.jam_ratio, spec.regime)? {
        let p = &row.params;
        t.push(vec![
            spec.regime.name().into(),
            key_rate.into(),
            row.nsr.into(),
            row.jam_ratio.into(),
            p.power.into(),
            p.jam_power.into(),
            p.sigma2.into(),
            row.verdict.kind_name().into(),
            row.verdict.regime_label.into(),
            row.verdict.lower().into(),
            row.verdict.upper().into(),
            row.verdict.boundary.into(),
            rate_ld(p).into(),
            rate_myop(p)?.into(),
            rate_gv(p).into(),
        ]);
    }
    Ok(t)
}

fn actual_rate(n: usize, rate: f64) -> f64 {
    (n as f64 * rate + 1e-9).floor() / n as f64
}

fn simulate(spec: &SimulateSpec, seed: u64) -> Result<Table, CliError> {
    let mut cfg = TrialConfig::new(spec.params, spec.n, spec.rate, spec.attack, spec.trials, seed);
    cfg.key_rate = spec.key_rate;
    cfg.decoder = spec.decoder;
    cfg.code = spec.code;
    cfg.budget = spec.budget;
    let tally = run_pe(&cfg)?;
    let (ci_lo, ci_hi) = tally.ci95();
    let listed: u64 = tally.list_size_histogram.values().sum();
    let mean_list = if listed == 0 {
        0.0
    } else {
        tally.list_size_histogram.iter().map(|(s, c)| *s as f64 * *c as f64).sum::<f64>() / listed as f64
    };
    let max_list = tally.list_size_histogram.keys().next_back().copied().unwrap_or(0);
    let alpha = match spec.attack {
        JammerStrategy::ScaleAndBabble { alpha, .. } => alpha,
        _ => 0.0,
    };
    let mut t = Table::new(vec![
        "attack", "alpha", "n", "rate", "key_rate", "power", "jam_power", "sigma2", "decoder", "code", "trials",
        "errors", "pe_hat", "ci_lo", "ci_hi", "clip_count", "tie_count", "mean_list_size", "max_list_size",
    ]);
    t.push(vec![
        spec.attack.name().into(),
        alpha.into(),
        spec.n.into(),
        actual_rate(spec.n, spec.rate).into(),
        actual_rate(spec.n, spec.key_rate).into(),
        spec.params.power.into(),
        spec.params.jam_power.into(),
        spec.params.sigma2.into(),
        match spec.decoder {
            Decoder::MinDistance => "min_distance",
            Decoder::List { .. } => "list",
        }
        .into(),
        match spec.code {
            CodeMode::Fixed => "fixed",
            CodeMode::Ensemble => "ensemble",
        }
        .into(),
        tally.trials.into(),
        tally.errors.into(),
        tally.pe_hat().into(),
        ci_lo.into(),
        ci_hi.into(),
        tally.clip_count.into(),
        tally.tie_count.into(),
        mean_list.into(),
        max_list.into(),
    ]);
    Ok(t)
}

fn listdec(spec: &ListdecSpec, seed: u64) -> Result<Table, CliError> {
    let cb = SphericalCodebook::generate_with_budget(
        seed,
        spec.n,
        spec.rate,
        spec.key_rate,
        spec.params.power,
        spec.budget,
    )?;
    let mode = match spec.centers {
        CenterSpec::Sphere { radius } => CenterMode::Sphere { radius },
        CenterSpec::Shell { inner, outer } => CenterMode::Shell { inner, outer },
        CenterSpec::Attack { attack } => CenterMode::Attack { strategy: attack, params: spec.params },
    };
    let survey = list_size_survey(&cb, mode, spec.radius, spec.count, seed)?;
    let mut t = Table::new(vec!["list_size", "frequency", "centers", "mean", "max", "radius", "n", "rate"]);
    for (&size, &freq) in &survey.histogram {
        t.push(vec![
            size.into(),
            freq.into(),
            survey.centers.into(),
            survey.mean.into(),
            survey.max.into(),
            spec.radius.into(),
            spec.n.into(),
            cb.rate().into(),
        ]);
    }
    Ok(t)
}

/// A transmitted row and an observation of it that lands in the thick strip.
/// Draws are retried on fresh trial streams until one does.
fn typical_observation(
    cb: &SphericalCodebook,
    spec: &StripSpec,
    seed: u64,
) -> Result<(usize, Vec<f64>, StripCensus), CliError> {
    const ATTEMPTS: u64 = 10_000;
    for t in 0..ATTEMPTS {
        let mut rng = stream(seed, domain::TRIAL, t);
        let row = rng.random_range(0..cb.len());
        let z = awgn_observe(&mut rng, cb.row(row), spec.params.sigma2);
        let census = strip_census(cb, &z, spec.params.sigma2, spec.epsilon, spec.delta)?;
        if census.strip_of(row).is_some() {
            return Ok((row, z, census));
        }
    }
    Err(Error::Degenerate(format!("no typical observation in {ATTEMPTS} draws; widen epsilon")).into())
}

fn strip(spec: &StripSpec, seed: u64) -> Result<Table, CliError> {
    let cb = SphericalCodebook::generate_with_budget(
        seed,
        spec.n,
        spec.rate,
        spec.key_rate,
        spec.params.power,
        spec.budget,
    )?;
    let (row, _z, census) = typical_observation(&cb, spec, seed)?;
    let sparse = census.sparse_strips(spec.ogs_epsilon);
    let home = census.strip_of(row);
    let ln_closed = 0.5 * spec.n as f64 * spec.delta;
    let mut t = Table::new(vec![
        "index",
        "dist2_lo",
        "dist2_hi",
        "count",
        "expected_count",
        "ln_delta",
        "ln_delta_via_radii",
        "ogs_block_size",
        "ogs_blocks",
        "sparse",
        "holds_transmitted",
    ]);
    for s in &census.strips {
        let ogs = build_ogs(&census, s.index, spec.ogs_epsilon)?;
        t.push(vec![
            s.index.into(),
            s.dist2_lo.into(),
            s.dist2_hi.into(),
            s.count().into(),
            s.expected_log2_count.value().into(),
            ln_closed.into(),
            match s.ln_delta_via_radii {
                Some(v) => Cell::Float(v),
                None => Cell::Text(String::new()),
            },
            ogs.block_size.into(),
            ogs.blocks.len().into(),
            sparse.contains(&s.index).into(),
            (home == Some(s.index)).into(),
        ]);
    }
    Ok(t)
}

fn blob(spec: &BlobSpec, seed: u64) -> Result<Table, CliError> {
    let st = &spec.strip;
    let cb = SphericalCodebook::generate_with_budget(seed, st.n, st.rate, st.key_rate, st.params.power, st.budget)?;
    let (row, _z, census) = typical_observation(&cb, st, seed)?;
    let index = census.strip_of(row).expect("typical observation");
    let part = build_ogs(&census, index, st.ogs_epsilon)?;
    let block = part.block_of(row).expect("row lies in its strip");
    let ogs = &part.blocks[block];
    let nf = st.n as f64;
    let bound = nf.powi(4);
    let mut t = Table::new(vec![
        "attack",
        "strip",
        "ogs_size",
        "blob_count",
        "reverse_size_max",
        "n4_bound",
        "within_bound",
    ]);
    let budget = (nf * st.params.jam_power).sqrt();
    for a in 0..spec.attacks {
        let mut rng = stream(seed, domain::ATTACK, a);
        let s = uniform_sphere_sample(&mut rng, st.n, budget);
        let stats = blob_and_reverse_sizes(&cb, ogs, &s, spec.radius);
        t.push(vec![
            a.into(),
            index.into(),
            ogs.len().into(),
            stats.blob_count.into(),
            stats.reverse_size_max.into(),
            bound.into(),
            (stats.reverse_size_max as f64 <= bound).into(),
        ]);
    }
    Ok(t)
}
