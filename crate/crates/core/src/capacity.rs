//! Closed-form rates, the two scalar optimisation problems behind the myopic
//! converse and achievability, and the capacity regime classifier.
//!
//! All logarithms are base 2. Regime boundaries are phrased in terms of
//! `ν = N/P` and `s = σ²/P`.

use crate::error::{invalid, Error, Result};
use crate::optimize::minimize_unimodal;

/// Transmit power `P`, jammer power `N` and the jammer's observation noise
/// variance `σ²` (zero for an omniscient jammer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub power: f64,
    pub jam_power: f64,
    pub sigma2: f64,
}

impl ChannelParams {
    pub fn new(power: f64, jam_power: f64, sigma2: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(invalid("P", format!("{power} must be positive and finite")));
        }
        if !(jam_power > 0.0 && jam_power.is_finite()) {
            return Err(invalid("N", format!("{jam_power} must be positive and finite")));
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(invalid("sigma2", format!("{sigma2} must be nonnegative and finite")));
        }
        Ok(ChannelParams { power, jam_power, sigma2 })
    }

    /// `σ²/P`.
    pub fn nsr(&self) -> f64 {
        self.sigma2 / self.power
    }

    /// `N/P`.
    pub fn jam_ratio(&self) -> f64 {
        self.jam_power / self.power
    }
}

/// Amount of secret key shared by encoder and decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KeyRegime {
    None,
    LogN,
    /// `n·R_key` key bits.
    Linear(f64),
    Infinite,
}

impl KeyRegime {
    pub fn linear(key_rate: f64) -> Result<Self> {
        if !(key_rate > 0.0 && key_rate.is_finite()) {
            return Err(invalid("key_rate", format!("{key_rate} must be positive for a linear key")));
        }
        Ok(KeyRegime::Linear(key_rate))
    }

    pub fn name(&self) -> &'static str {
        match self {
            KeyRegime::None => "none",
            KeyRegime::LogN => "log_n",
            KeyRegime::Linear(_) => "linear",
            KeyRegime::Infinite => "infinite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerdictKind {
    Exact(f64),
    Bounds { lower: f64, upper: f64 },
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityVerdict {
    pub kind: VerdictKind,
    pub regime_label: &'static str,
    pub rates_used: Vec<(&'static str, f64)>,
    /// The point satisfies the closed conditions of more than one row.
    pub boundary: bool,
}

impl CapacityVerdict {
    pub fn lower(&self) -> f64 {
        match self.kind {
            VerdictKind::Exact(r) => r,
            VerdictKind::Bounds { lower, .. } => lower,
            VerdictKind::Zero => 0.0,
        }
    }

    pub fn upper(&self) -> f64 {
        match self.kind {
            VerdictKind::Exact(r) => r,
            VerdictKind::Bounds { upper, .. } => upper,
            VerdictKind::Zero => 0.0,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            VerdictKind::Exact(_) => "exact",
            VerdictKind::Bounds { .. } => "bounds",
            VerdictKind::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub argument: f64,
    pub objective_value: f64,
    pub achieved_rate: f64,
    pub boundary_hit: bool,
}

/// List-decoding rate against an omniscient jammer, `½log(P/N)`.
pub fn rate_ld(p: &ChannelParams) -> f64 {
    0.5 * (p.power / p.jam_power).log2()
}

/// Myopic rate. Needs `σ² > 0`.
pub fn rate_myop(p: &ChannelParams) -> Result<f64> {
    let (pw, n, s2) = (p.power, p.jam_power, p.sigma2);
    if !(s2 > 0.0) {
        return Err(Error::Undefined("rate_myop needs sigma2 > 0".into()));
    }
    let num = (pw + s2) * (pw + n) - 2.0 * pw * (n * (pw + s2)).sqrt();
    let arg = num / (n * s2);
    if !(arg > 0.0) {
        return Err(Error::Undefined(format!("log argument {arg} is not positive")));
    }
    Ok(0.5 * arg.log2())
}

/// `½log(1 + P/N)`.
pub fn rate_awgn(p: &ChannelParams) -> f64 {
    0.5 * (p.power / p.jam_power).ln_1p() / std::f64::consts::LN_2
}

pub fn rate_gv(p: &ChannelParams) -> f64 {
    let (pw, n) = (p.power, p.jam_power);
    if pw < 2.0 * n {
        return 0.0;
    }
    0.5 * (pw * pw / (4.0 * n * (pw - n))).log2()
}

pub fn rate_rankin(p: &ChannelParams) -> f64 {
    let (pw, n) = (p.power, p.jam_power);
    if pw < 2.0 * n {
        return 0.0;
    }
    0.5 * (pw / (2.0 * n)).log2()
}

pub fn rate_lp(p: &ChannelParams) -> f64 {
    let (pw, n) = (p.power, p.jam_power);
    if pw < 2.0 * n {
        return 0.0;
    }
    let q = (n * (pw - n)).sqrt();
    let a = (pw + 2.0 * q) / (4.0 * q);
    let b = ((pw - 2.0 * q) / (4.0 * q)).max(0.0);
    let xlogx = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    xlogx(a) - xlogx(b)
}

/// `f(α) = (1-α)²P/(N - α²P)`.
pub fn scale_babble_snr(p: &ChannelParams, alpha: f64) -> f64 {
    let (pw, n) = (p.power, p.jam_power);
    (1.0 - alpha).powi(2) * pw / (n - alpha * alpha * pw)
}

/// Rate of the AWGN channel induced by scale-and-babble with scale `α`.
pub fn scale_babble_rate(p: &ChannelParams, alpha: f64) -> f64 {
    0.5 * scale_babble_snr(p, alpha).ln_1p() / std::f64::consts::LN_2
}

fn scale_babble_slope(p: &ChannelParams, alpha: f64) -> f64 {
    let (pw, n) = (p.power, p.jam_power);
    let den = n - alpha * alpha * pw;
    2.0 * pw * (1.0 - alpha) * (pw * alpha - n) / (den * den)
}

/// Largest feasible scale, `√(N/(P+σ²))`.
pub fn scale_babble_alpha_max(p: &ChannelParams) -> f64 {
    (p.jam_power / (p.power + p.sigma2)).sqrt()
}

const BRACKET: f64 = 1e-10;

fn nan_to_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimises `½log(1 + f(α))` over `(0, √(N/(P+σ²))]`.
pub fn minimize_scale_babble(p: &ChannelParams) -> OptResult {
    let hi = scale_babble_alpha_max(p);
    let alpha = minimize_unimodal(
        |a| nan_to_inf(scale_babble_snr(p, a)),
        |a| scale_babble_slope(p, a),
        0.0,
        hi,
        BRACKET * hi.max(1e-300),
    );
    let f = scale_babble_snr(p, alpha).max(0.0);
    OptResult {
        argument: alpha,
        objective_value: f,
        achieved_rate: 0.5 * f.ln_1p() / std::f64::consts::LN_2,
        boundary_hit: alpha >= hi * (1.0 - 1e-9),
    }
}

/// List-decoding radius (per dimension) when the jammer spends `α_s` of its
/// power along the direction of its observation.
pub fn myop_ld_radius(p: &ChannelParams, alpha_s: f64) -> Result<f64> {
    let (pw, n, s2) = (p.power, p.jam_power, p.sigma2);
    if !(0.0..=n).contains(&alpha_s) {
        return Err(invalid("alpha_s", format!("{alpha_s} outside [0, {n}]")));
    }
    let a = alpha_s / (pw + s2);
    let den = pw + n - 2.0 * pw * a.sqrt();
    if !(den > 0.0) {
        return Err(Error::Degenerate(format!("radius denominator {den} is not positive")));
    }
    Ok(pw * (n - pw * a) / den)
}

/// Maximises [`myop_ld_radius`] over `α_s ∈ [0, N]`; the achieved rate is
/// `½log(P/r_opt)`.
pub fn maximize_myop_ld_radius(p: &ChannelParams) -> OptResult {
    let (pw, n, s2) = (p.power, p.jam_power, p.sigma2);
    let neg_r = |x: f64| match myop_ld_radius(p, x.clamp(0.0, n)) {
        Ok(r) => -r,
        Err(_) => f64::INFINITY,
    };
    // d r/d α_s has the sign of -f'(√(α_s/(P+σ²))).
    let slope = |x: f64| scale_babble_slope(p, (x.max(0.0) / (pw + s2)).sqrt());
    let arg = minimize_unimodal(neg_r, slope, 0.0, n, BRACKET * n);
    let r = -neg_r(arg);
    OptResult {
        argument: arg,
        objective_value: r,
        achieved_rate: (0.5 * (pw / r).log2()).max(0.0),
        boundary_hit: arg >= n * (1.0 - 1e-9) || arg <= 0.0,
    }
}

/// Closed-form optimum of both problems: `0` when `σ²/P ≤ N/P - 1`,
/// `R_LD` when `σ²/P ≤ P/N - 1`, `R_myop` otherwise.
pub fn myop_ld_closed_form(p: &ChannelParams) -> f64 {
    let (nu, s) = (p.jam_ratio(), p.nsr());
    if s <= nu - 1.0 {
        0.0
    } else if s <= 1.0 / nu - 1.0 {
        rate_ld(p).max(0.0)
    } else {
        rate_myop(p).expect("s > 1/ν - 1 ≥ -1 forces σ² > 0 or ν > 1 handled above")
    }
}

/// Lower bound on the error probability under z-aware symmetrisation.
pub fn symmetrization_pe_floor(p: &ChannelParams) -> f64 {
    (0.5 * (1.0 - (2.0 * p.power + p.sigma2) / (4.0 * p.jam_power))).max(0.0)
}

/// Cost of disambiguating a list of size `L` with `n_key` shared key bits:
/// rate loss `N_key/(2n)` and extra error `2nLR/(N_key·2^{N_key/2})`
/// (clamped to 1).
pub fn list_disambiguation_penalty(n: usize, list_size: f64, rate: f64, n_key: f64) -> (f64, f64) {
    let nf = n as f64;
    if n_key.is_infinite() {
        return (f64::INFINITY, 0.0);
    }
    let loss = n_key / (2.0 * nf);
    if list_size <= 0.0 || rate <= 0.0 {
        return (loss, 0.0);
    }
    if n_key <= 0.0 {
        return (loss, 1.0);
    }
    let ln_eps = (2.0 * nf * list_size * rate).ln() - n_key.ln() - 0.5 * n_key * std::f64::consts::LN_2;
    (loss, ln_eps.exp().min(1.0))
}

const REL_TOL: f64 = 1e-12;

fn le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * b.abs().max(1.0)
}

fn ge(a: f64, b: f64) -> bool {
    le(b, a)
}

struct Row {
    member: bool,
    label: &'static str,
    kind: VerdictKind,
    priority: u8,
}

fn pick(rows: Vec<Row>, rates_used: Vec<(&'static str, f64)>) -> CapacityVerdict {
    let hits = rows.iter().filter(|r| r.member).count();
    let best = rows
        .into_iter()
        .filter(|r| r.member)
        .max_by_key(|r| r.priority)
        .expect("classifier rows cover the parameter plane");
    CapacityVerdict { kind: best.kind, regime_label: best.label, rates_used, boundary: hits > 1 }
}

const ZERO: u8 = 3;
const EXACT: u8 = 2;
const BOUNDS: u8 = 1;

/// Capacity verdict for a key regime. Ties between rows go to the zero row,
/// then to an exact row, and set `boundary`.
///
/// In the keyed bound rows the lower end is `max(0, R_LD, R_GV)`: `R_GV` is
/// achievable without any key, so it stays a valid lower bound.
pub fn classify(p: &ChannelParams, regime: KeyRegime) -> CapacityVerdict {
    let (nu, s) = (p.jam_ratio(), p.nsr());
    let inv = 1.0 / nu - 1.0;
    let r_ld = rate_ld(p);
    let r_gv = rate_gv(p);
    let r_myop = if p.sigma2 > 0.0 { rate_myop(p).ok() } else { None };
    let myop = r_myop.unwrap_or(f64::INFINITY);

    let mut used = vec![("R_LD", r_ld)];
    if let Some(m) = r_myop {
        used.push(("R_myop", m));
    }

    match regime {
        KeyRegime::None => {
            used.push(("R_GV", r_gv));
            let sm = if nu < 1.0 { nu / (1.0 - nu) } else { f64::INFINITY };
            let below_one = nu < 1.0;
            pick(
                vec![
                    Row {
                        member: le(s, 4.0 * nu - 2.0) || ge(nu, 1.0),
                        label: "none: zero",
                        kind: VerdictKind::Zero,
                        priority: ZERO,
                    },
                    Row {
                        member: below_one && ge(s, sm) && le(s, inv),
                        label: "none: exact R_LD",
                        kind: VerdictKind::Exact(r_ld),
                        priority: EXACT,
                    },
                    Row {
                        member: below_one && ge(s, inv.max(sm)),
                        label: "none: exact R_myop",
                        kind: VerdictKind::Exact(myop),
                        priority: EXACT,
                    },
                    Row {
                        member: below_one && ge(s, 4.0 * nu - 2.0) && le(s, inv.min(sm)),
                        label: "none: R_GV <= C <= R_LD",
                        kind: VerdictKind::Bounds { lower: r_gv, upper: r_ld },
                        priority: BOUNDS,
                    },
                    Row {
                        member: le(nu, 1.0) && ge(s, inv.max(4.0 * nu - 2.0)) && le(s, sm),
                        label: "none: R_GV <= C <= R_myop",
                        kind: VerdictKind::Bounds { lower: r_gv, upper: myop },
                        priority: BOUNDS,
                    },
                ],
                used,
            )
        }
        KeyRegime::LogN => {
            let lower = r_ld.max(r_gv).max(0.0);
            pick(
                vec![
                    Row { member: le(s, nu - 1.0), label: "log_n: zero", kind: VerdictKind::Zero, priority: ZERO },
                    Row {
                        member: le(s, inv),
                        label: "log_n: exact R_LD",
                        kind: VerdictKind::Exact(r_ld.max(0.0)),
                        priority: EXACT,
                    },
                    Row {
                        member: ge(s, inv.max(4.0 * nu - 1.0)),
                        label: "log_n: exact R_myop",
                        kind: VerdictKind::Exact(myop),
                        priority: EXACT,
                    },
                    Row {
                        member: ge(s, inv.max(nu - 1.0)) && le(s, 4.0 * nu - 1.0),
                        label: "log_n: R_LD <= C <= R_myop",
                        kind: VerdictKind::Bounds { lower, upper: myop },
                        priority: BOUNDS,
                    },
                ],
                used,
            )
        }
        KeyRegime::Linear(key_rate) => {
            let awgn_obs = if p.sigma2 > 0.0 {
                0.5 * (1.0 / s).ln_1p() / std::f64::consts::LN_2
            } else {
                f64::INFINITY
            };
            let threshold = awgn_obs - myop;
            used.push(("R_key", key_rate));
            used.push(("R_key_threshold", threshold));
            let lower = r_ld.max(r_gv).max(0.0);
            let myop_side = ge(s, inv.max(nu - 1.0));
            pick(
                vec![
                    Row { member: le(s, nu - 1.0), label: "linear: zero", kind: VerdictKind::Zero, priority: ZERO },
                    Row {
                        member: le(s, inv),
                        label: "linear: exact R_LD",
                        kind: VerdictKind::Exact(r_ld.max(0.0)),
                        priority: EXACT,
                    },
                    Row {
                        member: myop_side && ge(key_rate, threshold),
                        label: "linear: exact R_myop",
                        kind: VerdictKind::Exact(myop),
                        priority: EXACT,
                    },
                    Row {
                        member: myop_side && le(key_rate, threshold),
                        label: "linear: R_LD <= C <= R_myop",
                        kind: VerdictKind::Bounds { lower, upper: myop },
                        priority: BOUNDS,
                    },
                ],
                used,
            )
        }
        KeyRegime::Infinite => pick(
            vec![
                Row { member: le(s, nu - 1.0), label: "infinite: zero", kind: VerdictKind::Zero, priority: ZERO },
                Row {
                    member: le(s, inv),
                    label: "infinite: exact R_LD",
                    kind: VerdictKind::Exact(r_ld.max(0.0)),
                    priority: EXACT,
                },
                Row {
                    member: ge(s, inv.max(nu - 1.0)),
                    label: "infinite: exact R_myop",
                    kind: VerdictKind::Exact(myop),
                    priority: EXACT,
                },
            ],
            used,
        ),
    }
}
