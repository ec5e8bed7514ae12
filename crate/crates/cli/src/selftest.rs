//! Invariant sweep over a log-spaced `(P, N, σ²)` grid.

use myopic_core::capacity::{
    classify, maximize_myop_ld_radius, minimize_scale_babble, myop_ld_closed_form, myop_ld_radius, rate_awgn,
    rate_myop, scale_babble_snr,
};
use myopic_core::{ChannelParams, KeyRegime};

use crate::config::SelftestSpec;
use crate::output::Table;

const TOL: f64 = 1e-8;
const KEY_RATES: [f64; 3] = [0.01, 0.1, 1.0];

struct Check {
    name: &'static str,
    points: u64,
    failures: u64,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check { name, points: 0, failures: 0 }
    }

    fn record(&mut self, ok: bool) {
        self.points += 1;
        self.failures += (!ok) as u64;
    }
}

fn log_grid(spec: &SelftestSpec) -> Vec<f64> {
    let g = spec.grid;
    (0..g)
        .map(|i| 10f64.powf(spec.lo_exp + (spec.hi_exp - spec.lo_exp) * i as f64 / (g - 1) as f64))
        .collect()
}

/// Runs every check; returns the summary table and whether all passed.
pub fn run(spec: &SelftestSpec) -> (Table, bool) {
    let mut agree = Check::new("optimisers_match_closed_form");
    let mut identity = Check::new("radius_snr_identity");
    let mut order = Check::new("verdict_bounds_ordered");
    let mut monotone = Check::new("more_key_never_hurts");
    let mut oblivious = Check::new("oblivious_limit");

    let axis = log_grid(spec);
    for &pw in &axis {
        for &n in &axis {
            for &s2 in &axis {
                let p = ChannelParams::new(pw, n, s2).expect("grid values are positive");
                let ld = maximize_myop_ld_radius(&p).achieved_rate;
                let sb = minimize_scale_babble(&p).achieved_rate;
                agree.record((ld - sb).abs() <= TOL && (ld - myop_ld_closed_form(&p)).abs() <= TOL);

                let alpha_s = 0.5 * n;
                if let Ok(r) = myop_ld_radius(&p, alpha_s) {
                    let f = scale_babble_snr(&p, (alpha_s / (pw + s2)).sqrt());
                    identity.record((pw / r - (1.0 + f)).abs() <= 1e-9 * (1.0 + f));
                }

                for &key in &KEY_RATES {
                    let chain = [
                        classify(&p, KeyRegime::None),
                        classify(&p, KeyRegime::LogN),
                        classify(&p, KeyRegime::Linear(key)),
                        classify(&p, KeyRegime::Infinite),
                    ];
                    for v in &chain {
                        order.record(v.lower() >= 0.0 && v.lower() <= v.upper() + 1e-12);
                    }
                    for w in chain.windows(2) {
                        monotone.record(w[1].lower() >= w[0].lower() - 1e-12 && w[1].upper() >= w[0].upper() - 1e-12);
                    }
                }
            }
        }
    }
    for n in [0.25, 0.5, 1.0] {
        let p = ChannelParams::new(1.0, n, 1e12).expect("positive");
        oblivious.record(rate_myop(&p).map(|r| (r - rate_awgn(&p)).abs() <= 1e-4).unwrap_or(false));
    }

    let checks = [agree, identity, order, monotone, oblivious];
    let mut t = Table::new(vec!["check", "points", "failures", "passed"]);
    let mut all = true;
    for c in &checks {
        all &= c.failures == 0;
        t.push(vec![c.name.into(), c.points.into(), c.failures.into(), (c.failures == 0).into()]);
    }
    (t, all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_passes() {
        let (t, ok) = run(&SelftestSpec { grid: 12, lo_exp: -2.0, hi_exp: 2.0 });
        assert!(ok, "{t:?}");
        assert_eq!(t.rows.len(), 5);
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(&SelftestSpec { grid: 5, lo_exp: -2.0, hi_exp: 2.0 });
        assert_eq!(g.len(), 5);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[4] - 100.0).abs() < 1e-12 && (g[2] - 1.0).abs() < 1e-15);
    }
}
