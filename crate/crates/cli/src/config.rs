//! `key=value` experiment configuration, read from flags and an optional file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig1Curves,
    Fig2RmPruning,
    Fig4IsotropicPe,
    Fig5CbsPe,
    Fig6Beampattern,
    BoundsReport,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Fig1Curves,
        Experiment::Fig2RmPruning,
        Experiment::Fig4IsotropicPe,
        Experiment::Fig5CbsPe,
        Experiment::Fig6Beampattern,
        Experiment::BoundsReport,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Fig1Curves => "fig1-curves",
            Experiment::Fig2RmPruning => "fig2-rm-pruning",
            Experiment::Fig4IsotropicPe => "fig4-isotropic-pe",
            Experiment::Fig5CbsPe => "fig5-cbs-pe",
            Experiment::Fig6Beampattern => "fig6-beampattern",
            Experiment::BoundsReport => "bounds-report",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment '{s}'")))
    }
}

/// Code examined by `analyze-code` when no experiment is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeChoice {
    /// Bose-Chowla ruler with appended marks, antenna selection.
    BoseChowla,
    /// Deterministically pruned Reed-Muller code, BPSK beamformer.
    ReedMuller,
    /// Contiguous shifts `{0..T-1}`, unit filter.
    Ula,
    /// Bose-Chowla shifts with the first entry of `filter_lens` as filter length.
    Cbs,
}

impl FromStr for CodeChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "bc" => Ok(CodeChoice::BoseChowla),
            "rm" => Ok(CodeChoice::ReedMuller),
            "ula" => Ok(CodeChoice::Ula),
            "cbs" => Ok(CodeChoice::Cbs),
            _ => Err(CliError::Config(format!("unknown code '{s}' (expected bc, rm, ula or cbs)"))),
        }
    }
}

impl CodeChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            CodeChoice::BoseChowla => "bc",
            CodeChoice::ReedMuller => "rm",
            CodeChoice::Ula => "ula",
            CodeChoice::Cbs => "cbs",
        }
    }
}

const KEYS: &[&str] = &[
    "experiment",
    "code",
    "t",
    "n_grid",
    "n_antennas",
    "m",
    "r",
    "p",
    "extra",
    "filter_lens",
    "snr",
    "snr_min",
    "snr_max",
    "snr_step",
    "trials",
    "seed",
    "region",
    "out",
    "workers",
    "prune_trials",
    "prune_sizes",
    "rhos",
    "sweep_points",
    "count",
];

/// All experiment parameters. `None` fields take experiment-specific defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub code: Option<CodeChoice>,
    pub t: Option<usize>,
    pub n_grid: Option<usize>,
    pub n_antennas: Option<usize>,
    pub m: Option<u32>,
    pub r: Option<u32>,
    pub p: u64,
    pub extra: usize,
    pub filter_lens: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub region: Option<(f64, f64)>,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub prune_trials: usize,
    pub prune_sizes: Option<Vec<usize>>,
    pub rhos: Vec<f64>,
    pub sweep_points: usize,
    pub count: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            code: None,
            t: None,
            n_grid: None,
            n_antennas: None,
            m: None,
            r: None,
            p: 31,
            extra: 1,
            filter_lens: vec![1, 2, 3],
            snr_db: snr_sweep(-10.0, 10.0, 1.0).expect("default sweep is valid"),
            trials: 10_000,
            seed: DEFAULT_SEED,
            region: None,
            out: PathBuf::from("out"),
            workers: None,
            prune_trials: 1000,
            prune_sizes: None,
            rhos: vec![1.0, 0.5, 0.1],
            sweep_points: 1001,
            count: None,
        }
    }
}

/// `lo, lo + step, ...` up to `hi` inclusive (with a small tolerance).
pub fn snr_sweep(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if step.is_nan() || step <= 0.0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(CliError::Config(format!("invalid SNR sweep {lo}..{hi} step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_kv_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse { line: i + 1, msg: format!("expected key=value, got '{line}'") })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_flag(arg: &str) -> Result<(String, String), CliError> {
    arg.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| CliError::Config(format!("expected key=value, got '{arg}'")))
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse '{v}'")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    let items = v.split(',').map(|s| num(key, s.trim())).collect::<Result<Vec<T>, _>>()?;
    if items.is_empty() {
        return Err(CliError::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

fn snr_value(v: &str) -> Result<f64, CliError> {
    match v {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => num("snr", v),
    }
}

impl ExperimentConfig {
    /// Merges `config=FILE` (if present) with the remaining flags; flags win.
    pub fn from_args<S: AsRef<str>>(args: &[S]) -> Result<Self, CliError> {
        let mut flags = Vec::new();
        let mut file = None;
        for a in args {
            let (k, v) = parse_flag(a.as_ref())?;
            if k == "config" {
                file = Some(PathBuf::from(v));
            } else {
                flags.push((k, v));
            }
        }
        let mut pairs = match file {
            Some(path) => Self::read_file(&path)?,
            None => Vec::new(),
        };
        pairs.extend(flags);
        Self::from_pairs(pairs)
    }

    fn read_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
        parse_kv_text(&text)
    }

    pub fn from_pairs(pairs: Vec<(String, String)>) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Config(format!("unknown key '{k}'")));
            }
            map.insert(k, v);
        }
        let mut cfg = ExperimentConfig::default();
        let get = |k: &str| map.get(k).map(String::as_str);
        if let Some(v) = get("experiment") {
            cfg.experiment = Some(v.parse()?);
        }
        if let Some(v) = get("code") {
            cfg.code = Some(v.parse()?);
        }
        if let Some(v) = get("t") {
            cfg.t = Some(num("t", v)?);
        }
        if let Some(v) = get("n_grid") {
            cfg.n_grid = Some(num("n_grid", v)?);
        }
        if let Some(v) = get("n_antennas") {
            cfg.n_antennas = Some(num("n_antennas", v)?);
        }
        if let Some(v) = get("m") {
            cfg.m = Some(num("m", v)?);
        }
        if let Some(v) = get("r") {
            cfg.r = Some(num("r", v)?);
        }
        if let Some(v) = get("p") {
            cfg.p = num("p", v)?;
        }
        if let Some(v) = get("extra") {
            cfg.extra = num("extra", v)?;
        }
        if let Some(v) = get("filter_lens") {
            cfg.filter_lens = list("filter_lens", v)?;
        }
        if let Some(v) = get("snr") {
            cfg.snr_db = v.split(',').map(|s| snr_value(s.trim())).collect::<Result<_, _>>()?;
        } else if get("snr_min").is_some() || get("snr_max").is_some() || get("snr_step").is_some() {
            let lo = get("snr_min").map_or(Ok(-10.0), |v| num("snr_min", v))?;
            let hi = get("snr_max").map_or(Ok(10.0), |v| num("snr_max", v))?;
            let step = get("snr_step").map_or(Ok(1.0), |v| num("snr_step", v))?;
            cfg.snr_db = snr_sweep(lo, hi, step)?;
        }
        if let Some(v) = get("trials") {
            cfg.trials = num("trials", v)?;
        }
        if let Some(v) = get("seed") {
            cfg.seed = num("seed", v)?;
        }
        if let Some(v) = get("region") {
            let r: Vec<f64> = list("region", v)?;
            if r.len() != 2 || r.iter().any(|x| x.is_nan()) || r[0] > r[1] {
                return Err(CliError::Config(format!("region must be lo,hi with lo <= hi, got '{v}'")));
            }
            cfg.region = Some((r[0], r[1]));
        }
        if let Some(v) = get("out") {
            cfg.out = PathBuf::from(v);
        }
        if let Some(v) = get("workers") {
            let w: usize = num("workers", v)?;
            if w == 0 {
                return Err(CliError::Config("workers must be at least 1".into()));
            }
            cfg.workers = Some(w);
        }
        if let Some(v) = get("prune_trials") {
            cfg.prune_trials = num("prune_trials", v)?;
        }
        if let Some(v) = get("prune_sizes") {
            cfg.prune_sizes = Some(list("prune_sizes", v)?);
        }
        if let Some(v) = get("rhos") {
            cfg.rhos = list("rhos", v)?;
        }
        if let Some(v) = get("sweep_points") {
            cfg.sweep_points = num("sweep_points", v)?;
        }
        if let Some(v) = get("count") {
            cfg.count = Some(num("count", v)?);
        }
        if cfg.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if cfg.prune_trials == 0 {
            return Err(CliError::Config("prune_trials must be at least 1".into()));
        }
        if cfg.filter_lens.contains(&0) {
            return Err(CliError::Config("filter lengths must be at least 1".into()));
        }
        Ok(cfg)
    }
}
