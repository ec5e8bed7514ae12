//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines reach the terminal under a
//! plain `cargo test`. Exits non-zero on any failure that is not listed in
//! `KNOWN_UNATTAINABLE`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use myopic_cli::{run_document, to_csv_string, Cell, Overrides, Table};
use myopic_core::capacity::{maximize_myop_ld_radius, minimize_scale_babble, rate_myop, scale_babble_rate};
use myopic_core::experiments::{quasi_uniformity_ln, thick_strip_count};
use myopic_core::geometry::{
    cap_fraction, fill_uniform_sphere, gaussian_norm_tail_bound, inner_product_tail_bound, CapSpec, TailSide,
};
use myopic_core::jammers::awgn_observe;
use myopic_core::rng::{domain, stream};
use myopic_core::{ChannelParams, SphericalCodebook};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

/// Criteria whose failure is expected and explained; they still print FAIL.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    10,
    "the χ² upper-tail bound exp(-ε²n/4) is below the exact tail at ε = 1 (n = 32: 6.6e-4 > 3.4e-4)",
)];

struct Verdict {
    pass: bool,
    detail: String,
    /// CSV artefacts, re-generated for the reproducibility check.
    csv: Vec<(String, String)>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into(), csv: Vec::new() }
    }

    fn with_csv(mut self, csv: Vec<(String, String)>) -> Self {
        self.csv = csv;
        self
    }
}

fn doc(text: &str) -> String {
    run_document(text, &Overrides::default()).unwrap_or_else(|e| panic!("{e}\n{text}")).0
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

fn column_f64(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|v| v.parse().unwrap()).collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn cp(pw: f64, n: f64, s2: f64) -> ChannelParams {
    ChannelParams::new(pw, n, s2).unwrap()
}

// 1
fn optimiser_agreement() -> Verdict {
    let start = Instant::now();
    let axis: Vec<f64> = (0..20).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 19.0)).collect();
    let mut worst_cf: f64 = 0.0;
    let mut worst_sb: f64 = 0.0;
    for &pw in &axis {
        for &n in &axis {
            for &s2 in &axis {
                let p = cp(pw, n, s2);
                let (nu, s) = (n / pw, s2 / pw);
                // case values, written out independently
                let expect = if s <= nu - 1.0 {
                    0.0
                } else if s <= 1.0 / nu - 1.0 {
                    0.5 * (pw / n).log2()
                } else {
                    let arg = ((pw + s2) * (pw + n) - 2.0 * pw * (n * (pw + s2)).sqrt()) / (n * s2);
                    0.5 * arg.log2()
                };
                let opt = maximize_myop_ld_radius(&p);
                worst_cf = worst_cf.max((opt.achieved_rate - expect).abs());
                let alpha = (opt.argument / (pw + s2)).sqrt();
                let via_alpha = scale_babble_rate(&p, alpha);
                let sb = minimize_scale_babble(&p).achieved_rate;
                worst_sb = worst_sb.max((via_alpha - opt.achieved_rate).abs()).max((sb - opt.achieved_rate).abs());
            }
        }
    }
    let t = start.elapsed();
    Verdict::new(
        worst_cf <= 1e-8 && worst_sb <= 1e-8 && t < Duration::from_secs(10),
        format!("max |opt - case| = {worst_cf:.2e}, max |opt - scale-babble| = {worst_sb:.2e}, {t:.2?}"),
    )
}

// 2
fn oblivious_limit() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [0.25, 0.5, 1.0] {
        let r = rate_myop(&cp(1.0, n, 1e12)).unwrap();
        worst = worst.max((r - 0.5 * (1.0 + 1.0 / n).log2()).abs());
    }
    Verdict::new(worst <= 1e-4, format!("max deviation {worst:.2e}"))
}

// 3
fn golden_region() -> Verdict {
    let golden = include_str!("data/golden_region.csv");
    let mut rdr = csv::Reader::from_reader(golden.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let mut mismatches = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let g = |k: &str| rec[header.iter().position(|h| h == k).unwrap()].to_string();
        let regime = g("regime");
        let key_line = if regime == "linear" { format!("key_rate = {}\n", g("key_rate")) } else { String::new() };
        let text = format!(
            "command = \"region\"\nnsr = [{}]\njam_ratio = [{}]\nkey = \"{regime}\"\n{key_line}",
            g("nsr"),
            g("jam_ratio")
        );
        let out = doc(&text);
        rows += 1;
        for k in ["verdict", "label", "boundary"] {
            if column(&out, k)[0] != g(k) {
                mismatches.push(format!("{regime} ν={} s={}: {k}", g("jam_ratio"), g("nsr")));
            }
        }
        for k in ["key_rate", "nsr", "jam_ratio", "lower", "upper"] {
            let want: f64 = g(k).parse().unwrap();
            if column_f64(&out, k)[0].to_bits() != want.to_bits() {
                mismatches.push(format!("{regime} ν={} s={}: {k}", g("jam_ratio"), g("nsr")));
            }
        }
    }
    let labels: std::collections::BTreeSet<String> = {
        let mut r = csv::Reader::from_reader(golden.as_bytes());
        let i = r.headers().unwrap().iter().position(|h| h == "label").unwrap();
        r.records().map(|x| x.unwrap()[i].to_string()).collect()
    };
    Verdict::new(
        mismatches.is_empty() && labels.len() == 16,
        format!("{rows} rows, {} distinct rows covered, mismatches {mismatches:?}", labels.len()),
    )
}

// 4
fn symmetrisation_floor() -> Verdict {
    let start = Instant::now();
    let floor = 0.5 * (1.0 - (2.0 * 1.0 + 0.5) / (4.0 * 1.0));
    let mut csv = Vec::new();
    let mut pes = Vec::new();
    for seed in 1..=3u64 {
        let out = doc(&format!(
            "command = \"simulate\"\nseed = {seed}\npower = 1\njam_power = 1\nsigma2 = 0.5\nn = 64\nrate = 0.125\n\
             attack = \"symmetrize-z-aware\"\ntrials = 2000\n"
        ));
        pes.push(column_f64(&out, "pe_hat")[0]);
        csv.push((format!("sym-{seed}"), out));
    }
    let ok = pes.iter().filter(|&&p| p >= floor - 0.05).count();
    let t = start.elapsed();
    Verdict::new(
        ok >= 2 && t < Duration::from_secs(60),
        format!("pe_hat {pes:.4?} vs floor {floor} - 0.05, {ok}/3 seeds, {t:.2?}"),
    )
    .with_csv(csv)
}

fn babble_doc(n: usize, rate: f64, trials: u64, seed: u64) -> String {
    format!(
        "command = \"simulate\"\nseed = {seed}\npower = 1\njam_power = 0.25\nsigma2 = 1\nn = {n}\nrate = {rate:?}\n\
         attack = \"scale-babble\"\ncode = \"ensemble\"\ntrials = {trials}\n"
    )
}

// 5
fn babble_transition() -> Verdict {
    let start = Instant::now();
    let converse = minimize_scale_babble(&cp(1.0, 0.25, 1.0)).achieved_rate;
    let low = doc(&babble_doc(128, 0.5 * converse, 500, 5));
    let high = doc(&babble_doc(128, 1.25 * converse, 500, 5));
    let (pl, ph) = (column_f64(&low, "pe_hat")[0], column_f64(&high, "pe_hat")[0]);
    let t = start.elapsed();
    Verdict::new(
        pl <= 0.1 && ph >= 0.3 && t < Duration::from_secs(300),
        format!("converse rate {converse:.4}; pe_hat {pl:.4} at 0.5x, {ph:.4} at 1.25x, {t:.2?}"),
    )
    .with_csv(vec![("babble-low".into(), low), ("babble-high".into(), high)])
}

// 6
fn clipping_decay() -> Verdict {
    let mut csv = Vec::new();
    let mut logs = Vec::new();
    for n in [64usize, 128, 256] {
        let out = doc(&babble_doc(n, 0.5, 10_000, 6));
        let clips = column_f64(&out, "clip_count")[0];
        logs.push((clips / 10_000.0).log2());
        csv.push((format!("clip-{n}"), out));
    }
    let ok = logs.windows(2).all(|w| w[1] < w[0]);
    Verdict::new(ok, format!("log2 P(clip) = {logs:.4?}")).with_csv(csv)
}

// 7
fn omniscient_lists() -> Verdict {
    let start = Instant::now();
    let below = doc(
        "command = \"listdec\"\nseed = 7\npower = 1\njam_power = 0.125\nn = 16\nrate = 1.0\ncenters = \"sphere\"\ncount = 10000\n",
    );
    let max_below = column_f64(&below, "max")[0];
    let ns: Vec<usize> = (10..=18).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut csv = vec![("list-below".to_string(), below)];
    for &n in &ns {
        let out = doc(&format!(
            "command = \"listdec\"\nseed = 7\npower = 1\njam_power = 0.5\nn = {n}\nrate = 1.0\ncenters = \"sphere\"\ncount = 2000\n"
        ));
        xs.push(n as f64);
        ys.push(column_f64(&out, "mean")[0].log2());
        csv.push((format!("list-above-{n}"), out));
    }
    let s = slope(&xs, &ys);
    let t = start.elapsed();
    Verdict::new(
        max_below <= 3.0 * 16.0 * 16.0 && (s - 0.5).abs() <= 0.3 && t < Duration::from_secs(300),
        format!("below: max list {max_below} (limit 768); above: slope {s:.4} (target 0.5 ± 0.3), {t:.2?}"),
    )
    .with_csv(csv)
}

/// Expected thick-strip count given `z`, from the exact law of the cosine
/// between `z` and a uniform point on the coding sphere.
fn thick_count_oracle(cb: &SphericalCodebook, row: usize, z: &[f64], s2: f64, eps: f64) -> f64 {
    let n = cb.n();
    let nf = n as f64;
    let (lo, hi) = (nf * s2 * (1.0 - eps), nf * s2 * (1.0 + eps));
    let r2 = nf * cb.power();
    let zn2: f64 = z.iter().map(|v| v * v).sum();
    let c = 2.0 * r2.sqrt() * zn2.sqrt();
    let half = 0.5 * (nf - 1.0);
    let beta = Beta::new(half, half).unwrap();
    let cdf = |u: f64| beta.cdf(((u.clamp(-1.0, 1.0)) + 1.0) / 2.0);
    let frac = cdf((r2 + zn2 - lo) / c) - cdf((r2 + zn2 - hi) / c);
    let d2: f64 = cb.row(row).iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    let own = if (lo..=hi).contains(&d2) { 1.0 } else { 0.0 };
    own + (cb.len() as f64 - 1.0) * frac
}

fn strip_occupancy_table() -> Table {
    let (pw, s2, eps): (f64, f64, f64) = (1.0, 1.0, 0.05);
    let rate = 0.5 * (1.0 + pw / s2).log2() + 0.5;
    // observations are kept only when ‖z‖² lies in the typical cell n(P+σ²)(1 ± DZ)
    const DZ: f64 = 0.02;
    let draws = 200u64;
    let mut t = Table::new(vec!["n", "rate", "epsilon", "draws", "mean_thick_count", "oracle_mean"]);
    for n in 12..=20usize {
        let cb = SphericalCodebook::generate(800 + n as u64, n, rate, 0.0, pw).unwrap();
        let typical = n as f64 * (pw + s2);
        let (count, oracle) = (0..draws)
            .into_par_iter()
            .map(|d| {
                let mut rng = stream(800 + n as u64, domain::TRIAL, d);
                loop {
                    let row = rng.random_range(0..cb.len());
                    let z = awgn_observe(&mut rng, cb.row(row), s2);
                    let zn2: f64 = z.iter().map(|v| v * v).sum();
                    if (zn2 / typical - 1.0).abs() <= DZ {
                        return (thick_strip_count(&cb, &z, s2, eps), thick_count_oracle(&cb, row, &z, s2, eps));
                    }
                }
            })
            .reduce(|| (0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        t.push(vec![
            n.into(),
            cb.rate().into(),
            eps.into(),
            draws.into(),
            (count as f64 / draws as f64).into(),
            (oracle / draws as f64).into(),
        ]);
    }
    t
}

// 8
fn strip_occupancy() -> Verdict {
    let csv = to_csv_string(&strip_occupancy_table()).unwrap();
    let xs = column_f64(&csv, "n");
    let log2 = |k: &str| column_f64(&csv, k).iter().map(|m| m.log2()).collect::<Vec<_>>();
    let s = slope(&xs, &log2("mean_thick_count"));
    let so = slope(&xs, &log2("oracle_mean"));
    Verdict::new((s - 0.5).abs() <= 0.1, format!("slope {s:.4} (target 0.5 ± 0.1; exact-law slope {so:.4})"))
        .with_csv(vec![("strips".into(), csv)])
}

// 9
fn quasi_uniformity() -> Verdict {
    let p = cp(1.0, 0.25, 1.0);
    // typical strip radius Pσ²/(P+σ²)
    let r_str = p.power * p.sigma2 / (p.power + p.sigma2);
    let mut ratios = Vec::new();
    let mut lns = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let nf = n as f64;
        let tau = nf.log2() / nf;
        let z_norm = (nf * (p.power + p.sigma2)).sqrt();
        let ln_delta = quasi_uniformity_ln(&p, n, z_norm, r_str, tau, tau).unwrap();
        lns.push(ln_delta);
        ratios.push(ln_delta / nf.ln());
    }
    let ok = ratios.iter().all(|&r| r <= 5.0) && lns.windows(2).all(|w| w[1] > w[0]);
    Verdict::new(ok, format!("ln Δ / ln n = {ratios:.4?}, ln Δ = {lns:.3?}"))
}

fn cap_monte_carlo() -> Table {
    let samples = 1_000_000u64;
    let chunk = 10_000u64;
    let mut t = Table::new(vec!["n", "chord", "exact", "hits", "samples", "se", "z"]);
    for n in [4usize, 8, 16] {
        let chords = [0.3, 0.8, 1.2, 1.6];
        let hits: Vec<u64> = (0..samples / chunk)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream(1000 + n as u64, domain::CENTERS, c);
                let mut u = vec![0.0; n];
                let mut h = vec![0u64; chords.len()];
                for _ in 0..chunk {
                    fill_uniform_sphere(&mut rng, &mut u, 1.0);
                    // distance² to the pole e₁ is 2 − 2u₁
                    let d2 = 2.0 - 2.0 * u[0];
                    for (k, r) in chords.iter().enumerate() {
                        h[k] += (d2 <= r * r) as u64;
                    }
                }
                h
            })
            .reduce(|| vec![0; chords.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
        for (k, &r) in chords.iter().enumerate() {
            let exact = cap_fraction(&CapSpec::new(n, 1.0, r).unwrap());
            let se = (exact * (1.0 - exact) / samples as f64).sqrt();
            let z = (hits[k] as f64 / samples as f64 - exact) / se;
            t.push(vec![n.into(), r.into(), exact.into(), hits[k].into(), samples.into(), se.into(), z.into()]);
        }
    }
    t
}

fn tail_table() -> Table {
    let draws = 100_000u64;
    let mut t = Table::new(vec!["kind", "n", "param", "side", "bound", "empirical", "allowance"]);
    for n in [16usize, 32, 64, 100] {
        let norms: Vec<f64> = (0..draws)
            .into_par_iter()
            .map(|d| {
                let mut rng = stream(1100 + n as u64, domain::TYPICALITY, d);
                (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum()
            })
            .collect();
        let nf = n as f64;
        for eps in [0.2, 0.5, 1.0] {
            let up = norms.iter().filter(|&&q| q >= nf * (1.0 + eps)).count();
            let lo = norms.iter().filter(|&&q| q <= nf * (1.0 - eps)).count();
            for (side, name, count) in [
                (TailSide::Above, "above", up),
                (TailSide::Below, "below", lo),
                (TailSide::TwoSided, "two_sided", up + lo),
            ] {
                let b = gaussian_norm_tail_bound(n, 1.0, eps, side);
                let emp = count as f64 / draws as f64;
                t.push(vec![
                    "chi2".into(),
                    n.into(),
                    eps.into(),
                    name.into(),
                    b.into(),
                    emp.into(),
                    (3.0 * (b * (1.0 - b) / draws as f64).sqrt()).into(),
                ]);
            }
        }
    }
    for n in [16usize, 64] {
        let nf = n as f64;
        let cos: Vec<f64> = (0..draws)
            .into_par_iter()
            .map(|d| {
                let mut rng = stream(1200 + n as u64, domain::CENTERS, d);
                let mut a = vec![0.0; n];
                fill_uniform_sphere(&mut rng, &mut a, nf.sqrt());
                a[0] / nf.sqrt()
            })
            .collect();
        for c in [0.1, 0.3, 0.5] {
            // |⟨a, b⟩| > nζ with ‖a‖ = ‖b‖ = √n and b = √n·e₁
            let zeta = c;
            let emp = cos.iter().filter(|&&x| x.abs() > c).count() as f64 / draws as f64;
            let b = inner_product_tail_bound(n, nf.sqrt(), nf.sqrt(), zeta);
            t.push(vec![
                "inner".into(),
                n.into(),
                zeta.into(),
                "two_sided".into(),
                b.into(),
                emp.into(),
                (3.0 * (b * (1.0 - b) / draws as f64).sqrt()).into(),
            ]);
        }
    }
    t
}

// 10
fn geometry_oracles() -> Verdict {
    let start = Instant::now();
    let caps = cap_monte_carlo();
    let worst_z = caps
        .rows
        .iter()
        .map(|r| match r[6] {
            Cell::Float(z) => z.abs(),
            _ => unreachable!(),
        })
        .fold(0.0, f64::max);
    let hemi = (1..=64).all(|n| cap_fraction(&CapSpec::new(n, 1.0, 2f64.sqrt()).unwrap()) == 0.5);
    let tails = tail_table();
    let f = |c: &Cell| match c {
        Cell::Float(x) => *x,
        _ => unreachable!(),
    };
    let violations: Vec<String> = tails
        .rows
        .iter()
        .filter(|r| f(&r[5]) > f(&r[4]) + f(&r[6]))
        .map(|r| {
            let txt = |c: &Cell| match c {
                Cell::Text(s) => s.clone(),
                Cell::Int(i) => i.to_string(),
                Cell::Float(x) => x.to_string(),
                Cell::Bool(b) => b.to_string(),
            };
            format!("{} n={} param={} {}: {:.2e} > {:.2e}", txt(&r[0]), txt(&r[1]), txt(&r[2]), txt(&r[3]), f(&r[5]), f(&r[4]))
        })
        .collect();
    let t = start.elapsed();
    let csv = vec![("caps".into(), to_csv_string(&caps).unwrap()), ("tails".into(), to_csv_string(&tails).unwrap())];
    Verdict::new(
        worst_z <= 3.0 && hemi && violations.is_empty() && t < Duration::from_secs(120),
        format!("cap max |z| {worst_z:.2}, hemisphere exact {hemi}, tail violations {violations:?}, {t:.2?}"),
    )
    .with_csv(csv)
}

// 11
fn reverse_lists() -> Verdict {
    let mut csv = Vec::new();
    let mut worst = 0.0f64;
    let mut all = true;
    for seed in 1..=3u64 {
        let out = doc(&format!(
            "command = \"blob\"\nseed = {seed}\npower = 1\njam_power = 0.125\nsigma2 = 0.5\nn = 14\nrate = 1.0\n\
             epsilon = 0.5\ndelta = 0.05\nogs_epsilon = 0.25\nattacks = 100\n"
        ));
        let sizes = column_f64(&out, "reverse_size_max");
        worst = sizes.iter().copied().fold(worst, f64::max);
        all &= sizes.len() == 100 && sizes.iter().all(|&s| s <= 14f64.powi(4));
        csv.push((format!("blob-{seed}"), out));
    }
    Verdict::new(all, format!("max reverse list {worst} over 300 attacks (limit {})", 14f64.powi(4))).with_csv(csv)
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "closed form / optimiser agreement", optimiser_agreement),
        (2, "oblivious limit", oblivious_limit),
        (3, "classifier golden file", golden_region),
        (4, "symmetrisation floor", symmetrisation_floor),
        (5, "scale-and-babble phase transition", babble_transition),
        (6, "clipping decay", clipping_decay),
        (7, "omniscient list decoding", omniscient_lists),
        (8, "strip occupancy exponent", strip_occupancy),
        (9, "quasi-uniformity", quasi_uniformity),
        (10, "geometry oracles", geometry_oracles),
        (11, "reverse list size", reverse_lists),
    ];
    let mut results = BTreeMap::new();
    let mut artefacts = Vec::new();
    let mut err = std::io::stderr();
    for (id, name, f) in criteria {
        let v = f();
        let _ = writeln!(err, "criterion {id:>2} {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.insert(id, v.pass);
        if !v.csv.is_empty() {
            artefacts.push((id, f, v.csv));
        }
    }

    // 12: rerun everything that produced CSV and compare bytes
    let mut diffs = Vec::new();
    let mut compared = 0;
    for (id, f, first) in &artefacts {
        let again = f().csv;
        for ((label, a), (_, b)) in first.iter().zip(&again) {
            compared += 1;
            if a != b {
                diffs.push(format!("{id}:{label}"));
            }
        }
    }
    let pass12 = diffs.is_empty() && compared > 0;
    let _ = writeln!(
        err,
        "criterion 12 {}: reproducibility: {compared} CSV files re-generated, differing {diffs:?}",
        if pass12 { "PASS" } else { "FAIL" }
    );
    results.insert(12, pass12);

    let unexpected: Vec<u32> = results
        .iter()
        .filter(|(id, pass)| !**pass && !KNOWN_UNATTAINABLE.iter().any(|(k, _)| k == *id))
        .map(|(id, _)| *id)
        .collect();
    for (id, why) in KNOWN_UNATTAINABLE {
        if results.get(id) == Some(&false) {
            let _ = writeln!(err, "note: criterion {id} fails as expected: {why}");
        }
    }
    let passed = results.values().filter(|p| **p).count();
    let _ = writeln!(err, "acceptance: {passed}/12 PASS");
    if !unexpected.is_empty() {
        let _ = writeln!(err, "unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
