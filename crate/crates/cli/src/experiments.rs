//! Experiment drivers. Each returns the files it would write plus summary
//! lines, so callers decide where (and whether) output lands on disk.

use std::fmt::Write as _;

use beamspace::beamform::{
    antenna_selection_beamformer, beampattern, bpsk_beamformer, check_isotropy, conv_beamformer, Filter,
};
use beamspace::chancode::{
    min_subspace_from_normalized, optimal_hamming_target, prune_deterministic, prune_random, reed_muller, to_bpsk,
};
use beamspace::golomb::{bose_chowla, extend_ruler, find_primitive_element, QuadExtField};
use beamspace::sim::{monte_carlo, PeCurve, SimConfig};
use beamspace::spatial::{SensorSet, SpatialGrid};
use beamspace::subcode::{verify_distance_bounds, welch_upper_bound, NullPolicy, SubspaceCode};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Files (name, contents) and diagnostics produced by one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub summary: Vec<String>,
    /// Failed verification checks; empty means success.
    pub failures: Vec<String>,
}

impl Output {
    pub fn verified(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

/// Ten significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.9e}")
}

const FIG_GRID: usize = 1024;
const FIG5_REGION: (f64, f64) = (-0.2, 0.2);
const FIG2_SIZES: [usize; 23] =
    [17, 24, 32, 40, 48, 56, 64, 96, 128, 192, 256, 384, 512, 640, 768, 896, 1024, 1025, 1152, 1280, 1536, 1792, 2048];

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn grid_and_aperture(cfg: &ExperimentConfig) -> Result<(SpatialGrid, usize), CliError> {
    let n_grid = cfg.n_grid.unwrap_or(FIG_GRID);
    let grid = SpatialGrid::new(n_grid)?;
    Ok((grid, cfg.n_antennas.unwrap_or(n_grid)))
}

/// Bose-Chowla ruler for `p` followed by `extra` contiguous marks.
pub fn bc_positions(cfg: &ExperimentConfig) -> Result<SensorSet, CliError> {
    let set = extend_ruler(&bose_chowla(cfg.p)?, cfg.extra);
    if let Some(t) = cfg.t {
        if t != set.count() {
            return Err(config_err(format!("t={t} but p + extra = {}", set.count())));
        }
    }
    Ok(set)
}

/// Antenna selection on the extended Bose-Chowla ruler.
pub fn bc_code(cfg: &ExperimentConfig) -> Result<(SpatialGrid, SubspaceCode), CliError> {
    let (grid, n_antennas) = grid_and_aperture(cfg)?;
    let w = antenna_selection_beamformer(&bc_positions(cfg)?, n_antennas)?;
    let code = SubspaceCode::build(&w, &grid)?;
    Ok((grid, code))
}

/// First `N_g` messages of `RM(m, r)` through the BPSK beamformer.
pub fn rm_code(cfg: &ExperimentConfig) -> Result<(SpatialGrid, SubspaceCode), CliError> {
    let (grid, n_antennas) = grid_and_aperture(cfg)?;
    if n_antennas != grid.n_points() {
        return Err(config_err(format!(
            "the BPSK beamformer needs n_antennas = n_grid, got {n_antennas} and {}",
            grid.n_points()
        )));
    }
    let (m, r) = (cfg.m.unwrap_or(5), cfg.r.unwrap_or(2));
    let full = reed_muller(m, r)?;
    if let Some(t) = cfg.t {
        if t != full.len() {
            return Err(config_err(format!("t={t} but RM({m},{r}) has length {}", full.len())));
        }
    }
    let pruned = prune_deterministic(&full, grid.n_points())?;
    let w = bpsk_beamformer(&to_bpsk(&pruned), &grid)?;
    let code = SubspaceCode::build(&w, &grid)?;
    Ok((grid, code))
}

/// Contiguous shifts `{0..T-1}` with the unit filter, `T = p + extra` by default.
pub fn ula_code(cfg: &ExperimentConfig) -> Result<(SpatialGrid, SubspaceCode), CliError> {
    let (grid, n_antennas) = grid_and_aperture(cfg)?;
    let t = cfg.t.unwrap_or(cfg.p as usize + cfg.extra);
    let w = conv_beamformer(&Filter::uniform(1)?, &SensorSet::ula(t)?, n_antennas)?;
    let code = SubspaceCode::build(&w, &grid)?;
    Ok((grid, code))
}

/// Convolutional beamspace with Bose-Chowla shifts and the averaging filter
/// of length `p_len`. Grid points in a filter null are left out of the code.
pub fn cbs_code(cfg: &ExperimentConfig, p_len: usize) -> Result<(SpatialGrid, SubspaceCode), CliError> {
    let (grid, n_antennas) = grid_and_aperture(cfg)?;
    let w = conv_beamformer(&Filter::uniform(p_len)?, &bc_positions(cfg)?, n_antennas)?;
    let code = SubspaceCode::build_with(&w, &grid, NullPolicy::Exclude)?;
    Ok((grid, code))
}

pub fn gen_ruler(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let field = QuadExtField::new(cfg.p)?;
    let g = find_primitive_element(&field);
    let ruler = bose_chowla(cfg.p)?;
    let set = extend_ruler(&ruler, cfg.extra);
    let mut text = String::from("mark\n");
    for m in set.positions() {
        writeln!(text, "{m}").unwrap();
    }
    let q = field.modulus();
    let summary = vec![
        format!("field GF({}^2) modulus x^2+{}x+{}", cfg.p, q.c1, q.c0),
        format!("primitive element {}+{}x", g.a, g.b),
        format!("ruler modulus {} marks {} (+{} appended) max {}", ruler.modulus(), ruler.len(), cfg.extra, set.max_position()),
    ];
    Ok(Output { files: vec![(format!("ruler_p{}.dat", cfg.p), text)], summary, failures: vec![] })
}

pub fn gen_rm(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let (m, r) = (cfg.m.unwrap_or(5), cfg.r.unwrap_or(2));
    let full = reed_muller(m, r)?;
    let code = match cfg.count {
        Some(n) => prune_deterministic(&full, n)?,
        None => full,
    };
    let mut text = String::from("message codeword\n");
    for n in 0..code.size() {
        let bits: String = code.column_bits(n).iter().map(|&b| if b { '1' } else { '0' }).collect();
        writeln!(text, "{n} {bits}").unwrap();
    }
    let summary = vec![format!("RM({m},{r}) length {} codewords {}", code.len(), code.size())];
    Ok(Output { files: vec![(format!("rm_m{m}_r{r}.dat"), text)], summary, failures: vec![] })
}

/// Closed-form `d_min` versus `d_min / T` for each ratio `rho = d_min / d_max`,
/// plus the balanced optimum per ratio.
pub fn fig1_curves(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    if cfg.sweep_points < 2 {
        return Err(config_err("sweep_points must be at least 2"));
    }
    let t = cfg.t.unwrap_or(32);
    let mut out = Output::default();
    let mut optimum = String::from("rho x ds\n");
    for &rho in &cfg.rhos {
        let target = optimal_hamming_target(rho, t)?;
        let mut text = String::from("x ds\n");
        for i in 0..cfg.sweep_points {
            let x = rho * i as f64 / (cfg.sweep_points - 1) as f64;
            writeln!(text, "{} {}", real(x), real(min_subspace_from_normalized(x, x / rho))).unwrap();
        }
        let x_opt = target.d_min / t as f64;
        writeln!(optimum, "{} {} {}", real(rho), real(x_opt), real(target.min_subspace)).unwrap();
        out.files.push((format!("fig1_rho{rho}.dat"), text));
        out.summary.push(format!("rho={rho}: optimum d_min/T={x_opt:.4} d_s={:.4}", target.min_subspace));
    }
    out.files.push(("fig1_optimum.dat".into(), optimum));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Row {
    pub n: usize,
    pub dmin: f64,
    pub dmin_median: f64,
    pub welch: f64,
}

pub fn fig2_rows(cfg: &ExperimentConfig) -> Result<Vec<Fig2Row>, CliError> {
    let (m, r) = (cfg.m.unwrap_or(4), cfg.r.unwrap_or(2));
    let code = reed_muller(m, r)?;
    let sizes = cfg.prune_sizes.clone().unwrap_or_else(|| FIG2_SIZES.to_vec());
    let series = code.prefix_min_subspace_series();
    sizes
        .iter()
        .map(|&n| {
            if n < 2 || n > code.size() {
                return Err(config_err(format!("prune size {n} outside 2..={}", code.size())));
            }
            let welch = welch_upper_bound(code.len(), n)?;
            let random = prune_random(&code, n, cfg.prune_trials, cfg.seed)?;
            Ok(Fig2Row { n, dmin: series[n - 2], dmin_median: random.median, welch })
        })
        .collect()
}

/// Deterministic and random pruning of a Reed-Muller code against the Welch bound.
pub fn fig2_rm_pruning(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let rows = fig2_rows(cfg)?;
    let mut out = Output::default();
    let mut text = String::from("N dmin dminmedian welch\n");
    for row in &rows {
        writeln!(text, "{} {} {} {}", row.n, real(row.dmin), real(row.dmin_median), real(row.welch)).unwrap();
        if row.dmin > row.welch + 1e-9 || row.dmin_median > row.welch + 1e-9 {
            out.failures.push(format!("N={}: distance exceeds the Welch bound", row.n));
        }
    }
    let last_positive = rows.iter().filter(|r| r.dmin > 0.0).map(|r| r.n).max();
    let first_zero_median = rows.iter().find(|r| r.dmin_median == 0.0).map(|r| r.n);
    out.summary.push(format!(
        "deterministic prune last positive at N={last_positive:?}; random median first zero at N={first_zero_median:?}"
    ));
    out.files.push(("fig2_rm_pruning.dat".into(), text));
    Ok(out)
}

fn sim_config(cfg: &ExperimentConfig, region: Option<(f64, f64)>) -> SimConfig {
    let mut sim = SimConfig::new(cfg.snr_db.clone(), cfg.trials, cfg.seed);
    sim.region = region;
    sim
}

fn check_dominance(label: &str, curve: &PeCurve, failures: &mut Vec<String>) {
    for r in curve.records.iter().filter(|r| !r.bound_dominates()) {
        failures.push(format!("{label} SNR={}: Pe={} exceeds bound {}", r.snr_db, r.empirical_pe, r.bound_pe));
    }
}

/// Pe curves of the two isotropic designs: Bose-Chowla antenna selection and
/// the pruned Reed-Muller code.
pub fn fig4_isotropic_pe(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let (grid, bc) = bc_code(cfg)?;
    let (_, rm) = rm_code(cfg)?;
    if bc.dim() != rm.dim() {
        return Err(config_err(format!("ruler length {} differs from RM length {}", bc.dim(), rm.dim())));
    }
    let sim = sim_config(cfg, cfg.region);
    let mut out = Output::default();
    for (label, code) in [("bc", &bc), ("rm", &rm)] {
        let curve = monte_carlo(&sim, code, &grid)?;
        check_dominance(label, &curve, &mut out.failures);
        out.files.push((format!("fig4_{label}.dat"), curve.to_dat()));
    }
    out.summary.push(format!(
        "T={} N_g={} d_min bc={:.4} rm={:.4}",
        bc.dim(),
        grid.n_points(),
        bc.min_distance().0,
        rm.min_distance().0
    ));
    Ok(out)
}

/// Pe curves of convolutional beamspaces with Bose-Chowla shifts, one per filter length.
pub fn fig5_cbs_pe(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let region = Some(cfg.region.unwrap_or(FIG5_REGION));
    let sim = sim_config(cfg, region);
    let mut out = Output::default();
    for &p_len in &cfg.filter_lens {
        let (grid, code) = cbs_code(cfg, p_len)?;
        let curve = monte_carlo(&sim, &code, &grid)?;
        let label = format!("P{p_len}");
        check_dominance(&label, &curve, &mut out.failures);
        let at = curve.records.iter().find(|r| r.snr_db == 0.0).unwrap_or(&curve.records[0]);
        out.summary.push(format!(
            "P={p_len}: d_min={:.4} excluded={} Pe({} dB)={}",
            code.min_distance().0,
            code.excluded().len(),
            at.snr_db,
            at.empirical_pe
        ));
        out.files.push((format!("fig5_{label}.dat"), curve.to_dat()));
    }
    Ok(out)
}

/// `|B(f; w)|^2` of the averaging filters over the grid.
pub fn fig6_beampattern(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let grid = SpatialGrid::new(cfg.n_grid.unwrap_or(FIG_GRID))?;
    let mut out = Output::default();
    for &p_len in &cfg.filter_lens {
        let pattern = beampattern(&Filter::uniform(p_len)?, &grid);
        let mut text = String::from("G B\n");
        for (f, b) in pattern.frequencies.iter().zip(&pattern.samples) {
            writeln!(text, "{} {}", real(*f), real(*b)).unwrap();
        }
        let peak = pattern.samples.iter().copied().fold(0.0, f64::max);
        out.summary.push(format!("P={p_len}: peak gain {peak:.4}"));
        out.files.push((format!("fig6_P{p_len}.dat"), text));
    }
    Ok(out)
}

/// Measured Bose-Chowla and ULA-shift distances against the analytic bounds.
pub fn bounds_report(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let t = cfg.t.unwrap_or(31);
    let n_grid = cfg.n_grid.unwrap_or(t * t - 1);
    let report = verify_distance_bounds(t, n_grid)?;
    let mut text = String::new();
    for (k, v) in report.key_values() {
        writeln!(text, "{k}={v}").unwrap();
    }
    let mut out = Output::default();
    if !report.pass() {
        out.failures.push(format!("distance bounds fail for T={t}"));
    }
    out.summary = text.lines().map(str::to_string).collect();
    out.files.push((format!("bounds_T{t}.txt"), text));
    Ok(out)
}

/// Minimum distance, Welch bound and isotropy of one code.
pub fn code_summary(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let choice = cfg.code.unwrap_or(crate::config::CodeChoice::BoseChowla);
    use crate::config::CodeChoice::*;
    let (grid, n_antennas) = grid_and_aperture(cfg)?;
    let (w, code) = match choice {
        BoseChowla => {
            let w = antenna_selection_beamformer(&bc_positions(cfg)?, n_antennas)?;
            let code = SubspaceCode::build(&w, &grid)?;
            (w, code)
        }
        ReedMuller => {
            let (m, r) = (cfg.m.unwrap_or(5), cfg.r.unwrap_or(2));
            let pruned = prune_deterministic(&reed_muller(m, r)?, grid.n_points())?;
            let w = bpsk_beamformer(&to_bpsk(&pruned), &grid)?;
            let code = SubspaceCode::build(&w, &grid)?;
            (w, code)
        }
        Ula => {
            let t = cfg.t.unwrap_or(cfg.p as usize + cfg.extra);
            let w = conv_beamformer(&Filter::uniform(1)?, &SensorSet::ula(t)?, n_antennas)?;
            let code = SubspaceCode::build(&w, &grid)?;
            (w, code)
        }
        Cbs => {
            let p_len = cfg.filter_lens[0];
            let w = conv_beamformer(&Filter::uniform(p_len)?, &bc_positions(cfg)?, n_antennas)?;
            let code = SubspaceCode::build_with(&w, &grid, NullPolicy::Exclude)?;
            (w, code)
        }
    };
    let (d, (i, j)) = code.min_distance();
    let iso = check_isotropy(&w, &grid);
    let welch = welch_upper_bound(code.dim(), code.codewords().len()).ok();
    let mut text = String::new();
    writeln!(text, "code={}", choice.as_str()).unwrap();
    writeln!(text, "T={}", code.dim()).unwrap();
    writeln!(text, "N_g={}", grid.n_points()).unwrap();
    writeln!(text, "N_a={n_antennas}").unwrap();
    writeln!(text, "dmin={}", real(d)).unwrap();
    writeln!(text, "dmin_pair={i},{j}").unwrap();
    writeln!(text, "excluded={}", code.excluded().len()).unwrap();
    match welch {
        Some(b) => writeln!(text, "welch_upper={}", real(b)).unwrap(),
        None => writeln!(text, "welch_upper=vacuous").unwrap(),
    }
    writeln!(text, "isotropy_max_deviation={}", real(iso.max_deviation)).unwrap();
    writeln!(text, "isotropic={}", iso.isotropic).unwrap();
    let mut out = Output::default();
    if let Some(b) = welch {
        if d > b + 1e-9 {
            out.failures.push("minimum distance exceeds the Welch bound".into());
        }
    }
    out.summary = text.lines().map(str::to_string).collect();
    out.files.push((format!("code_{}.txt", choice.as_str()), text));
    Ok(out)
}
