//! Experiment documents: a flat TOML table with a `command` key.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use myopic_core::{ChannelParams, JammerStrategy, KeyRegime};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use myopic_core::experiments::{CodeMode, Decoder};

/// One problem with a config document, tied to the key it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Region,
    Simulate,
    Listdec,
    StripCensus,
    Blob,
    CapsSelftest,
}

impl CommandKind {
    pub const ALL: [CommandKind; 6] = [
        CommandKind::Region,
        CommandKind::Simulate,
        CommandKind::Listdec,
        CommandKind::StripCensus,
        CommandKind::Blob,
        CommandKind::CapsSelftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Region => "region",
            CommandKind::Simulate => "simulate",
            CommandKind::Listdec => "listdec",
            CommandKind::StripCensus => "strip-census",
            CommandKind::Blob => "blob",
            CommandKind::CapsSelftest => "caps-selftest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn stochastic(self) -> bool {
        !matches!(self, CommandKind::Region | CommandKind::CapsSelftest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub power: f64,
    pub nsr: Vec<f64>,
    pub jam_ratio: Vec<f64>,
    pub regime: KeyRegime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSpec {
    pub params: ChannelParams,
    pub n: usize,
    pub rate: f64,
    pub key_rate: f64,
    pub attack: JammerStrategy,
    pub trials: u64,
    pub decoder: Decoder,
    pub code: CodeMode,
    pub budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterSpec {
    Sphere { radius: f64 },
    Shell { inner: f64, outer: f64 },
    Attack { attack: JammerStrategy },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ListdecSpec {
    pub params: ChannelParams,
    pub n: usize,
    pub rate: f64,
    pub key_rate: f64,
    pub centers: CenterSpec,
    pub radius: f64,
    pub count: u64,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StripSpec {
    pub params: ChannelParams,
    pub n: usize,
    pub rate: f64,
    pub key_rate: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub ogs_epsilon: f64,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub strip: StripSpec,
    pub attacks: u64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestSpec {
    pub grid: usize,
    pub lo_exp: f64,
    pub hi_exp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandSpec {
    Region(RegionSpec),
    Simulate(SimulateSpec),
    Listdec(ListdecSpec),
    StripCensus(StripSpec),
    Blob(BlobSpec),
    CapsSelftest(SelftestSpec),
}

impl CommandSpec {
    pub fn kind(&self) -> CommandKind {
        match self {
            CommandSpec::Region(_) => CommandKind::Region,
            CommandSpec::Simulate(_) => CommandKind::Simulate,
            CommandSpec::Listdec(_) => CommandKind::Listdec,
            CommandSpec::StripCensus(_) => CommandKind::StripCensus,
            CommandSpec::Blob(_) => CommandKind::Blob,
            CommandSpec::CapsSelftest(_) => CommandKind::CapsSelftest,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: CommandSpec,
    /// Zero for deterministic commands that were given no seed.
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Hex SHA-256 of the canonical document (output path excluded).
    pub config_hash: String,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

/// Parses and validates a document. Every problem found is reported.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, Vec<ConfigError>> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<ExperimentSpec, Vec<ConfigError>> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| {
        vec![ConfigError { key: "<document>".into(), message: e.message().trim().to_string() }]
    })?;
    if let Some(seed) = overrides.seed {
        let v = i64::try_from(seed).map(Value::Integer).unwrap_or_else(|_| Value::String(seed.to_string()));
        table.insert("seed".into(), v);
    }
    if let Some(out) = &overrides.output {
        table.insert("output".into(), Value::String(out.display().to_string()));
    }
    from_table(table)
}

fn canonical_hash(table: &Table) -> String {
    let mut t = table.clone();
    t.remove("output");
    let text = toml::to_string(&t).expect("a parsed table serialises");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn from_table(table: Table) -> Result<ExperimentSpec, Vec<ConfigError>> {
    let hash = canonical_hash(&table);
    let mut r = Reader::new(&table);
    let kind = match r.string("command", None) {
        Some(c) => match CommandKind::parse(&c) {
            Some(k) => Some(k),
            None => {
                let names: Vec<_> = CommandKind::ALL.iter().map(|c| c.name()).collect();
                r.error("command", format!("unknown command `{c}` (expected one of {})", names.join(", ")));
                None
            }
        },
        None => None,
    };
    let seed = r.seed();
    let output = r.string_opt("output").map(PathBuf::from);

    let command = kind.and_then(|k| {
        if k.stochastic() && seed.is_none() && !r.has_error("seed") {
            r.error("seed", format!("required for `{}`", k.name()));
        }
        match k {
            CommandKind::Region => region(&mut r).map(CommandSpec::Region),
            CommandKind::Simulate => simulate(&mut r).map(CommandSpec::Simulate),
            CommandKind::Listdec => listdec(&mut r).map(CommandSpec::Listdec),
            CommandKind::StripCensus => strip(&mut r).map(CommandSpec::StripCensus),
            CommandKind::Blob => blob(&mut r).map(CommandSpec::Blob),
            CommandKind::CapsSelftest => selftest(&mut r).map(CommandSpec::CapsSelftest),
        }
    });
    r.reject_unknown();
    match (command, r.errors.is_empty()) {
        (Some(command), true) => Ok(ExperimentSpec { command, seed: seed.unwrap_or(0), output, config_hash: hash }),
        _ => Err(r.errors),
    }
}

struct Reader<'a> {
    table: &'a Table,
    used: BTreeSet<&'static str>,
    errors: Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn new(table: &'a Table) -> Self {
        Reader { table, used: BTreeSet::new(), errors: Vec::new() }
    }

    fn error(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError { key: key.into(), message: message.into() });
    }

    fn has_error(&self, key: &str) -> bool {
        self.errors.iter().any(|e| e.key == key)
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.get(key)
    }

    fn missing(&mut self, key: &str) {
        self.error(key, "missing required key");
    }

    fn float(&mut self, key: &'static str, default: Option<f64>, ok: impl Fn(f64) -> bool, range: &str) -> Option<f64> {
        let v = match self.raw(key) {
            None => {
                if default.is_none() {
                    self.missing(key);
                }
                return default;
            }
            Some(Value::Float(f)) => *f,
            Some(Value::Integer(i)) => *i as f64,
            Some(other) => {
                self.error(key, format!("expected a number, found {}", other.type_str()));
                return None;
            }
        };
        if !v.is_finite() || !ok(v) {
            self.error(key, format!("{v} out of range: {range}"));
            return None;
        }
        Some(v)
    }

    fn integer(&mut self, key: &'static str, default: Option<u64>, lo: u64, hi: u64) -> Option<u64> {
        let v = match self.raw(key) {
            None => {
                if default.is_none() {
                    self.missing(key);
                }
                return default;
            }
            Some(Value::Integer(i)) => *i,
            Some(other) => {
                self.error(key, format!("expected an integer, found {}", other.type_str()));
                return None;
            }
        };
        match u64::try_from(v) {
            Ok(u) if (lo..=hi).contains(&u) => Some(u),
            _ => {
                self.error(key, format!("{v} out of range: {lo}..={hi}"));
                None
            }
        }
    }

    fn seed(&mut self) -> Option<u64> {
        match self.raw("seed")? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            // seeds above i64::MAX travel as strings
            Value::String(s) => match s.parse::<u64>() {
                Ok(u) => Some(u),
                Err(_) => {
                    self.error("seed", format!("`{s}` is not a 64-bit unsigned integer"));
                    None
                }
            },
            other => {
                self.error("seed", format!("expected a non-negative integer, found {other}"));
                None
            }
        }
    }

    fn string_opt(&mut self, key: &'static str) -> Option<String> {
        match self.raw(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.error(key, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, key: &'static str, default: Option<&str>) -> Option<String> {
        let present = self.table.contains_key(key);
        match self.string_opt(key) {
            Some(s) => Some(s),
            None if !present => {
                if default.is_none() {
                    self.missing(key);
                }
                default.map(str::to_string)
            }
            None => None,
        }
    }

    fn float_list(&mut self, key: &'static str, ok: impl Fn(f64) -> bool, range: &str) -> Option<Vec<f64>> {
        let arr = match self.raw(key) {
            None => {
                self.missing(key);
                return None;
            }
            Some(Value::Array(a)) => a,
            Some(other) => {
                self.error(key, format!("expected an array of numbers, found {}", other.type_str()));
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        let mut bad = Vec::new();
        for (i, v) in arr.iter().enumerate() {
            match v {
                Value::Float(f) if f.is_finite() && ok(*f) => out.push(*f),
                Value::Integer(n) if ok(*n as f64) => out.push(*n as f64),
                _ => bad.push(i),
            }
        }
        if !bad.is_empty() {
            self.error(key, format!("entries {bad:?} are not numbers in range: {range}"));
            return None;
        }
        Some(out)
    }

    fn reject_unknown(&mut self) {
        let unknown: Vec<String> =
            self.table.keys().filter(|k| !self.used.contains(k.as_str())).cloned().collect();
        for k in unknown {
            self.error(&k, "unknown key");
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0
}

fn nonneg(x: f64) -> bool {
    x >= 0.0
}

const MAX_N: u64 = 1 << 20;

fn channel(r: &mut Reader<'_>, need_sigma: bool) -> Option<ChannelParams> {
    let power = r.float("power", Some(1.0), positive, "> 0");
    let jam = r.float("jam_power", None, positive, "> 0");
    let sigma2 = if need_sigma {
        r.float("sigma2", None, nonneg, ">= 0")
    } else {
        r.float("sigma2", Some(0.0), nonneg, ">= 0")
    };
    ChannelParams::new(power?, jam?, sigma2?).ok()
}

fn key_regime(r: &mut Reader<'_>) -> Option<KeyRegime> {
    let key = r.string("key", Some("none"))?;
    match key.as_str() {
        "none" => Some(KeyRegime::None),
        "log_n" => Some(KeyRegime::LogN),
        "infinite" => Some(KeyRegime::Infinite),
        "linear" => r.float("key_rate", None, positive, "> 0").map(KeyRegime::Linear),
        other => {
            r.error("key", format!("unknown key regime `{other}` (none, log_n, linear, infinite)"));
            None
        }
    }
}

fn region(r: &mut Reader<'_>) -> Option<RegionSpec> {
    let power = r.float("power", Some(1.0), positive, "> 0");
    let nsr = r.float_list("nsr", positive, "> 0");
    let jam_ratio = r.float_list("jam_ratio", positive, "> 0");
    let regime = key_regime(r);
    Some(RegionSpec { power: power?, nsr: nsr?, jam_ratio: jam_ratio?, regime: regime? })
}

/// `attack`, plus `alpha`/`babble_epsilon` for scale-and-babble.
fn attack(r: &mut Reader<'_>, params: Option<&ChannelParams>) -> Option<JammerStrategy> {
    let name = r.string("attack", None)?;
    let s = match name.as_str() {
        "none" => JammerStrategy::Silent,
        "oblivious" => JammerStrategy::Oblivious,
        "scale-babble" => {
            let alpha = r.float("alpha", Some(f64::NAN), |a| a > 0.0, "> 0");
            let eps = r.float(
                "babble_epsilon",
                Some(myopic_core::jammers::DEFAULT_BABBLE_EPSILON),
                |e| e > 0.0 && e < 1.0,
                "in (0, 1)",
            );
            let (alpha, eps, p) = (alpha?, eps?, params?);
            if alpha.is_nan() {
                JammerStrategy::optimal_scale_and_babble(p, eps)
            } else {
                JammerStrategy::ScaleAndBabble { alpha, epsilon: eps }
            }
        }
        "symmetrize-z-aware" => JammerStrategy::SymmetrizeZAware,
        "symmetrize-z-agnostic" => JammerStrategy::SymmetrizeZAgnostic,
        "push-omniscient" => JammerStrategy::PushToOrigin { omniscient: true },
        "push-myopic" => JammerStrategy::PushToOrigin { omniscient: false },
        other => {
            r.error("attack", format!("unknown attack `{other}`"));
            return None;
        }
    };
    if let Some(p) = params {
        if let Err(e) = s.validate(p) {
            r.error("attack", e.to_string());
            return None;
        }
    }
    Some(s)
}

fn code_size(r: &mut Reader<'_>) -> (Option<usize>, Option<f64>, Option<f64>, Option<u64>) {
    let n = r.integer("n", None, 1, MAX_N).map(|v| v as usize);
    let rate = r.float("rate", None, nonneg, ">= 0");
    let key_rate = r.float("key_rate", Some(0.0), nonneg, ">= 0");
    let budget = r.integer("budget", Some(myopic_core::codec::DEFAULT_BUDGET), 1, u64::MAX);
    (n, rate, key_rate, budget)
}

fn simulate(r: &mut Reader<'_>) -> Option<SimulateSpec> {
    let params = channel(r, true);
    let (n, rate, key_rate, budget) = code_size(r);
    let attack = attack(r, params.as_ref());
    let trials = r.integer("trials", None, 1, u64::MAX);
    let decoder = match r.string("decoder", Some("min_distance")).as_deref() {
        Some("min_distance") => Some(Decoder::MinDistance),
        Some("list") => {
            let nf = n.unwrap_or(1) as f64;
            let default_radius = params.map(|p| (nf * p.jam_power).sqrt()).unwrap_or(0.0);
            let radius = r.float("list_radius", Some(default_radius), nonneg, ">= 0");
            let max_list = r.integer("max_list", Some((3.0 * nf * nf) as u64), 1, u64::MAX);
            Some(Decoder::List { radius: radius?, max_list: max_list? as usize })
        }
        Some(other) => {
            r.error("decoder", format!("unknown decoder `{other}` (min_distance, list)"));
            None
        }
        None => None,
    };
    let code = match r.string("code", Some("fixed")).as_deref() {
        Some("fixed") => Some(CodeMode::Fixed),
        Some("ensemble") => Some(CodeMode::Ensemble),
        Some(other) => {
            r.error("code", format!("unknown code mode `{other}` (fixed, ensemble)"));
            None
        }
        None => None,
    };
    Some(SimulateSpec {
        params: params?,
        n: n?,
        rate: rate?,
        key_rate: key_rate?,
        attack: attack?,
        trials: trials?,
        decoder: decoder?,
        code: code?,
        budget: budget?,
    })
}

fn listdec(r: &mut Reader<'_>) -> Option<ListdecSpec> {
    let params = channel(r, false);
    let (n, rate, key_rate, budget) = code_size(r);
    let nf = n.unwrap_or(1) as f64;
    let centers = match r.string("centers", Some("sphere")).as_deref() {
        Some("sphere") => {
            // worst-case shell for list decoding at radius √(nN)
            let default = params.map(|p| (nf * (p.power - p.jam_power).max(0.0)).sqrt()).unwrap_or(0.0);
            r.float("center_radius", Some(default), nonneg, ">= 0").map(|radius| CenterSpec::Sphere { radius })
        }
        Some("shell") => {
            let inner = r.float("shell_inner", None, nonneg, ">= 0");
            let outer = r.float("shell_outer", None, nonneg, ">= 0");
            match (inner, outer) {
                (Some(i), Some(o)) if i <= o => Some(CenterSpec::Shell { inner: i, outer: o }),
                (Some(_), Some(_)) => {
                    r.error("shell_outer", "must be at least shell_inner");
                    None
                }
                _ => None,
            }
        }
        Some("attack") => attack(r, params.as_ref()).map(|attack| CenterSpec::Attack { attack }),
        Some(other) => {
            r.error("centers", format!("unknown center mode `{other}` (sphere, shell, attack)"));
            None
        }
        None => None,
    };
    let default_radius = params.map(|p| (nf * p.jam_power).sqrt()).unwrap_or(0.0);
    let radius = r.float("radius", Some(default_radius), nonneg, ">= 0");
    let count = r.integer("count", None, 1, u64::MAX);
    Some(ListdecSpec {
        params: params?,
        n: n?,
        rate: rate?,
        key_rate: key_rate?,
        centers: centers?,
        radius: radius?,
        count: count?,
        budget: budget?,
    })
}

fn strip_fields(r: &mut Reader<'_>, params: Option<ChannelParams>) -> Option<StripSpec> {
    let (n, rate, key_rate, budget) = code_size(r);
    let epsilon = r.float("epsilon", None, |e| e > 0.0 && e < 1.0, "in (0, 1)");
    let delta = r.float("delta", None, positive, "> 0");
    if let (Some(e), Some(d)) = (epsilon, delta) {
        let k = (e / d).round();
        if k < 1.0 || (k * d - e).abs() > 1e-9 * e {
            r.error("delta", format!("epsilon/delta = {} must be a positive integer", e / d));
        }
    }
    let ogs_epsilon = r.float("ogs_epsilon", Some(0.25), positive, "> 0");
    if let Some(p) = params {
        if p.sigma2 <= 0.0 {
            r.error("sigma2", "strips need sigma2 > 0");
        }
    }
    Some(StripSpec {
        params: params?,
        n: n?,
        rate: rate?,
        key_rate: key_rate?,
        epsilon: epsilon?,
        delta: delta?,
        ogs_epsilon: ogs_epsilon?,
        budget: budget?,
    })
}

fn strip(r: &mut Reader<'_>) -> Option<StripSpec> {
    let power = r.float("power", Some(1.0), positive, "> 0");
    let sigma2 = r.float("sigma2", None, positive, "> 0");
    // the census does not involve Bob's jammer; its power is a placeholder
    let params = match (power, sigma2) {
        (Some(p), Some(s)) => ChannelParams::new(p, p, s).ok(),
        _ => None,
    };
    strip_fields(r, params)
}

fn blob(r: &mut Reader<'_>) -> Option<BlobSpec> {
    let params = channel(r, true);
    let strip = strip_fields(r, params);
    let attacks = r.integer("attacks", None, 1, u64::MAX);
    let nf = strip.as_ref().map(|s| s.n as f64).unwrap_or(1.0);
    let default_radius = params.map(|p| (nf * p.jam_power).sqrt()).unwrap_or(0.0);
    let radius = r.float("radius", Some(default_radius), nonneg, ">= 0");
    Some(BlobSpec { strip: strip?, attacks: attacks?, radius: radius? })
}

fn selftest(r: &mut Reader<'_>) -> Option<SelftestSpec> {
    let grid = r.integer("grid", Some(12), 2, 200).map(|g| g as usize);
    let lo = r.float("lo_exp", Some(-2.0), |x| x.abs() <= 6.0, "within ±6");
    let hi = r.float("hi_exp", Some(2.0), |x| x.abs() <= 6.0, "within ±6");
    if let (Some(a), Some(b)) = (lo, hi) {
        if a >= b {
            r.error("hi_exp", "must exceed lo_exp");
        }
    }
    Some(SelftestSpec { grid: grid?, lo_exp: lo?, hi_exp: hi? })
}
