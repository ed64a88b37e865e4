//! Measurement synthesis `y = alpha W a_U(f_k) + z`, the noncoherent ML
//! decoder, the union error bound and a seeded Monte Carlo harness.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::beamform::{Beamformer, Filter};
use crate::spatial::{ChannelRealization, SpatialGrid};
use crate::subcode::SubspaceCode;
use crate::{Error, Result};

/// Noise standard deviation for an SNR in dB: `sigma = 10^(-SNR/20)`.
/// `+inf` maps to the noiseless case.
pub fn sigma_from_snr_db(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 20.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub y: Vec<Complex64>,
    pub truth: ChannelRealization,
}

/// Adds circularly-symmetric complex Gaussian noise of variance `sigma^2`.
fn add_noise<R: Rng>(rng: &mut R, sigma: f64, re: &mut [f64], im: &mut [f64]) {
    if sigma == 0.0 {
        return;
    }
    let s = sigma / 2f64.sqrt();
    for (r, i) in re.iter_mut().zip(im.iter_mut()) {
        *r += s * rng.sample::<f64, _>(StandardNormal);
        *i += s * rng.sample::<f64, _>(StandardNormal);
    }
}

/// `y = alpha W a_U(f_k) + z` with `z ~ CN(0, sigma^2 I)`.
pub fn synthesize<R: Rng>(
    w: &Beamformer,
    grid: &SpatialGrid,
    truth: ChannelRealization,
    sigma: f64,
    rng: &mut R,
) -> Measurement {
    let clean: Vec<Complex64> = w.response(grid.point(truth.f_index)).into_iter().map(|b| truth.alpha * b).collect();
    let mut re: Vec<f64> = clean.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = clean.iter().map(|z| z.im).collect();
    add_noise(rng, sigma, &mut re, &mut im);
    let y = re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect();
    Measurement { y, truth }
}

/// Grid index maximizing `|y^H b_n|^2`, smallest index on ties.
pub fn ml_decode(y: &[Complex64], code: &SubspaceCode) -> usize {
    let re: Vec<f64> = y.iter().map(|z| z.re).collect();
    let im: Vec<f64> = y.iter().map(|z| z.im).collect();
    code.decode(&re, &im)
}

/// `N_g exp(-(|alpha|^2 / 4 sigma^2) gain (1 - sqrt(1 - d_min))^2)` without clipping.
pub fn union_error_bound_raw(gain: f64, alpha_mag: f64, sigma: f64, d_min: f64, n_grid: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&d_min) {
        return Err(Error::DistanceRange(d_min));
    }
    let margin = (1.0 - (1.0 - d_min).sqrt()).powi(2);
    let signal = alpha_mag * alpha_mag * gain * margin;
    if signal == 0.0 {
        return Ok(n_grid as f64);
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    Ok(n_grid as f64 * (-signal / (4.0 * sigma * sigma)).exp())
}

/// Union error bound clipped to `[0, 1]`.
pub fn union_error_bound(gain: f64, alpha_mag: f64, sigma: f64, d_min: f64, n_grid: usize) -> Result<f64> {
    Ok(union_error_bound_raw(gain, alpha_mag, sigma, d_min, n_grid)?.min(1.0))
}

/// Bound for a convolutional beamspace: gain `|B(f_k; w)|^2 T`. With
/// `use_ruler_lower_bound` the distance is replaced by `2/T`, the lower end
/// of the Bose-Chowla shift guarantee.
#[allow(clippy::too_many_arguments)]
pub fn cbs_error_bound(
    filter: &Filter,
    f_k: f64,
    shifts_dmin: f64,
    alpha_mag: f64,
    sigma: f64,
    n_grid: usize,
    t: usize,
    use_ruler_lower_bound: bool,
) -> Result<f64> {
    if t == 0 {
        return Err(Error::Dimension("T must be positive".into()));
    }
    let gain = filter.response(f_k).norm_sqr() * t as f64;
    let d = if use_ruler_lower_bound { 2.0 / t as f64 } else { shifts_dmin };
    union_error_bound(gain, alpha_mag, sigma, d, n_grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub snr_db: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
    /// Inclusive frequency interval for the true direction; `None` is the whole grid.
    pub region: Option<(f64, f64)>,
    /// Rayon worker count; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
    /// Distance used in the bound; `None` uses the code's measured `d_min`.
    pub bound_dmin: Option<f64>,
}

impl SimConfig {
    pub fn new(snr_db: Vec<f64>, n_trials: usize, seed: u64) -> Self {
        SimConfig { snr_db, n_trials, seed, region: None, workers: None, bound_dmin: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::InvalidConfig("empty SNR sweep".into()));
        }
        if let Some(&s) = self.snr_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(Error::InvalidConfig(format!("invalid SNR {s}")));
        }
        if let Some(d) = self.bound_dmin {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::DistanceRange(d));
            }
        }
        Ok(())
    }
}

/// One SNR point of a probability-of-error curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeRecord {
    pub snr_db: f64,
    pub empirical_pe: f64,
    pub bound_pe: f64,
    pub n_trials: usize,
    pub n_errors: usize,
}

impl PeRecord {
    /// `empirical_pe <= bound_pe + 3 sqrt(bound_pe (1 - bound_pe) / M)`.
    pub fn bound_dominates(&self) -> bool {
        let m = self.n_trials as f64;
        let slack = 3.0 * (self.bound_pe * (1.0 - self.bound_pe) / m).sqrt();
        self.empirical_pe <= self.bound_pe + slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeCurve {
    pub records: Vec<PeRecord>,
}

impl PeCurve {
    /// Whitespace-separated table with header `SNR Pe Peub`.
    pub fn to_dat(&self) -> String {
        let mut out = String::from("SNR Pe Peub\n");
        for r in &self.records {
            writeln!(out, "{:.9e} {:.9e} {:.9e}", r.snr_db, r.empirical_pe, r.bound_pe).unwrap();
        }
        out
    }
}

/// Per-trial stream: master seed, then `(snr_index, trial)` packed into the stream id.
fn trial_rng(seed: u64, snr_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 32) | trial as u64);
    rng
}

/// Runs `n_trials` decodes per SNR point. Each trial draws the true index
/// uniformly from the region, `alpha` uniformly on the unit circle and the
/// noise, all from its own stream, so the curve is independent of scheduling.
///
/// A true direction at an excluded (zero-gain) grid point yields `y = z` and
/// always counts as an error.
pub fn monte_carlo(cfg: &SimConfig, code: &SubspaceCode, grid: &SpatialGrid) -> Result<PeCurve> {
    cfg.validate()?;
    if grid.n_points() != code.n_grid() {
        return Err(Error::LengthMismatch { left: grid.n_points(), right: code.n_grid() });
    }
    if cfg.n_trials > u32::MAX as usize || cfg.snr_db.len() > u32::MAX as usize {
        return Err(Error::InvalidConfig("too many trials or SNR points".into()));
    }
    let region = match cfg.region {
        Some((lo, hi)) => grid.indices_in(lo, hi),
        None => (0..grid.n_points()).collect(),
    };
    if region.len() < 2 {
        let (lo, hi) = cfg.region.unwrap_or((-1.0, 1.0));
        return Err(Error::EmptyRegion { lo, hi });
    }
    let d_min = cfg.bound_dmin.unwrap_or_else(|| code.min_distance().0);
    let run = || -> Result<PeCurve> {
        let mut records = Vec::with_capacity(cfg.snr_db.len());
        for (s, &snr) in cfg.snr_db.iter().enumerate() {
            let sigma = sigma_from_snr_db(snr);
            let outcomes: Vec<(bool, f64)> = (0..cfg.n_trials)
                .into_par_iter()
                .map(|trial| run_trial(code, &region, sigma, d_min, cfg.seed, s, trial))
                .collect::<Result<_>>()?;
            let n_errors = outcomes.iter().filter(|o| o.0).count();
            let bound_sum: f64 = outcomes.iter().map(|o| o.1).sum();
            let m = cfg.n_trials as f64;
            records.push(PeRecord {
                snr_db: snr,
                empirical_pe: n_errors as f64 / m,
                bound_pe: (bound_sum / m).clamp(0.0, 1.0),
                n_trials: cfg.n_trials,
                n_errors,
            });
        }
        Ok(PeCurve { records })
    };
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn run_trial(
    code: &SubspaceCode,
    region: &[usize],
    sigma: f64,
    d_min: f64,
    seed: u64,
    snr_index: usize,
    trial: usize,
) -> Result<(bool, f64)> {
    let mut rng = trial_rng(seed, snr_index, trial);
    let k = region[rng.random_range(0..region.len())];
    let alpha = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
    let t = code.dim();
    let gain = code.gains()[k];
    let (mut re, mut im) = (vec![0.0; t], vec![0.0; t]);
    if let Some(b) = code.codeword(k) {
        let scale = alpha * gain.sqrt();
        for (i, z) in b.as_slice().iter().enumerate() {
            let v = scale * z;
            re[i] = v.re;
            im[i] = v.im;
        }
    }
    add_noise(&mut rng, sigma, &mut re, &mut im);
    let wrong = code.decode(&re, &im) != k;
    let bound = union_error_bound(gain, 1.0, sigma, d_min, code.n_grid())?;
    Ok((wrong, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamform::{antenna_selection_beamformer, bpsk_beamformer, conv_beamformer};
    use crate::chancode::{prune_deterministic, reed_muller, to_bpsk};
    use crate::golomb::{bose_chowla, extend_ruler};
    use crate::spatial::{make_grid, subspace_distance, CVec, SensorSet};
    use crate::subcode::NullPolicy;

    fn bc_setup(p: u64, n: usize) -> (SpatialGrid, Beamformer, SubspaceCode) {
        let grid = make_grid(n).unwrap();
        let w = antenna_selection_beamformer(&extend_ruler(&bose_chowla(p).unwrap(), 1), n).unwrap();
        let code = SubspaceCode::build(&w, &grid).unwrap();
        (grid, w, code)
    }

    #[test]
    fn snr_convention() {
        assert!((sigma_from_snr_db(0.0) - 1.0).abs() < 1e-15);
        assert!((sigma_from_snr_db(20.0) - 0.1).abs() < 1e-15);
        assert!((sigma_from_snr_db(-10.0) - 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(sigma_from_snr_db(f64::INFINITY), 0.0);
    }

    #[test]
    fn noiseless_synthesis_is_exact() {
        let (grid, w, code) = bc_setup(5, 40);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alpha = Complex64::from_polar(1.0, 0.7);
        let m = synthesize(&w, &grid, ChannelRealization { alpha, f_index: 9 }, 0.0, &mut rng);
        let b = w.response(grid.point(9));
        for (y, b) in m.y.iter().zip(&b) {
            assert!((y - alpha * b).norm() < 1e-15);
        }
        assert_eq!(ml_decode(&m.y, &code), 9);
    }

    #[test]
    fn identity_beamformer_at_broadside() {
        // W = I, f = 0 gives y = 1 + z
        let grid = make_grid(8).unwrap();
        let w = antenna_selection_beamformer(&SensorSet::ula(4).unwrap(), 4).unwrap();
        let truth = ChannelRealization { alpha: Complex64::new(1.0, 0.0), f_index: 4 };
        let m = synthesize(&w, &grid, truth, 0.0, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(m.y.iter().all(|y| (y - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn noise_variance() {
        let sigma = 0.7;
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        add_noise(&mut rng, sigma, &mut re, &mut im);
        let var = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let total = var(&re) + var(&im);
        assert!((total / (sigma * sigma) - 1.0).abs() < 0.02, "{total}");
        assert!((var(&re) / (sigma * sigma / 2.0) - 1.0).abs() < 0.02);
        assert!((var(&im) / (sigma * sigma / 2.0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn noiseless_exhaustive_recovery() {
        let (grid, w, code) = bc_setup(7, 63);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 0..63 {
            let alpha = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
            let m = synthesize(&w, &grid, ChannelRealization { alpha, f_index: k }, 0.0, &mut rng);
            assert_eq!(ml_decode(&m.y, &code), k);
        }
        let rm = prune_deterministic(&reed_muller(4, 2).unwrap(), 256).unwrap();
        let grid = make_grid(256).unwrap();
        let w = bpsk_beamformer(&to_bpsk(&rm), &grid).unwrap();
        let code = SubspaceCode::build(&w, &grid).unwrap();
        for k in 0..256 {
            let m = synthesize(&w, &grid, ChannelRealization { alpha: Complex64::new(0.0, 1.0), f_index: k }, 0.0, &mut rng);
            assert_eq!(ml_decode(&m.y, &code), k);
        }
    }

    #[test]
    fn decoder_ignores_unit_phase_and_matches_min_distance() {
        let (grid, w, code) = bc_setup(5, 40);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let k = rng.random_range(0..40);
            let alpha = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
            let m = synthesize(&w, &grid, ChannelRealization { alpha, f_index: k }, 1.0, &mut rng);
            let decoded = ml_decode(&m.y, &code);
            let rot = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
            let rotated: Vec<Complex64> = m.y.iter().map(|y| rot * y).collect();
            assert_eq!(ml_decode(&rotated, &code), decoded);
            // nearest subspace by distance
            let yv = CVec::new(m.y.clone()).unwrap();
            let mut best = (f64::INFINITY, 0);
            for (slot, c) in code.codewords().iter().enumerate() {
                let d = subspace_distance(&yv, c).unwrap();
                if d < best.0 - 1e-12 {
                    best = (d, code.grid_indices()[slot]);
                }
            }
            assert_eq!(best.1, decoded);
        }
    }

    #[test]
    fn decoder_picks_only_correlated_codeword() {
        let grid = make_grid(8).unwrap();
        let w = antenna_selection_beamformer(&SensorSet::ula(8).unwrap(), 8).unwrap();
        let code = SubspaceCode::build(&w, &grid).unwrap();
        // DFT columns are orthogonal on this grid
        let y = w.response(grid.point(3));
        assert_eq!(ml_decode(&y, &code), 3);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(union_error_bound_raw(32.0, 1.0, 1.0, 0.0, 1024).unwrap(), 1024.0);
        assert_eq!(union_error_bound(32.0, 1.0, 1.0, 0.0, 1024).unwrap(), 1.0);
        let t = 16.0;
        let b = union_error_bound_raw(t, 1.0, 2.0, 1.0, 64).unwrap();
        assert!((b - 64.0 * (-t / 4.0 / 4.0).exp()).abs() < 1e-12);
        let raw = union_error_bound_raw(32.0, 1.0, 1.0, 0.87, 1024).unwrap();
        assert!((raw - 1024.0 * (-8.0 * (1.0 - 0.13f64.sqrt()).powi(2)).exp()).abs() < 1e-9);
        assert!((raw.ln() - 1024f64.ln() + 3.27).abs() < 0.01);
        assert_eq!(union_error_bound(32.0, 1.0, 1.0, 0.87, 1024).unwrap(), 1.0);
        assert_eq!(union_error_bound(32.0, 1.0, 0.0, 0.5, 1024).unwrap(), 0.0);
        assert_eq!(union_error_bound(32.0, 1.0, 1.0, 1.5, 8), Err(Error::DistanceRange(1.5)));
        assert!(union_error_bound(32.0, 1.0, 1.0, -0.1, 8).is_err());
    }

    #[test]
    fn cbs_bound_examples() {
        let p1 = Filter::uniform(1).unwrap();
        let a = cbs_error_bound(&p1, 0.3, 0.5, 1.0, 1.5, 256, 16, false).unwrap();
        assert_eq!(a, union_error_bound(16.0, 1.0, 1.5, 0.5, 256).unwrap());
        let p3 = Filter::uniform(3).unwrap();
        let b = cbs_error_bound(&p3, 0.0, 0.5, 1.0, 3.0, 256, 16, false).unwrap();
        assert!((b - union_error_bound(48.0, 1.0, 3.0, 0.5, 256).unwrap()).abs() < 1e-12);
        let c = cbs_error_bound(&p3, 0.0, 0.9, 1.0, 3.0, 256, 16, true).unwrap();
        assert!((c - union_error_bound(48.0, 1.0, 3.0, 2.0 / 16.0, 256).unwrap()).abs() < 1e-12);
        // a stopband direction loses gain and the bound gets weaker
        let stop = cbs_error_bound(&p3, 2.0 / 3.0 - 0.01, 0.5, 1.0, 0.2, 4, 16, false).unwrap();
        let iso = cbs_error_bound(&p1, 0.0, 0.5, 1.0, 0.2, 4, 16, false).unwrap();
        assert!(stop > iso, "{stop} vs {iso}");
    }

    fn quick_cfg(snrs: Vec<f64>, trials: usize) -> SimConfig {
        SimConfig::new(snrs, trials, 20260401)
    }

    #[test]
    fn monte_carlo_reproducible_across_workers() {
        let (grid, _, code) = bc_setup(5, 40);
        let mut cfg = quick_cfg(vec![-6.0, 0.0, 6.0], 500);
        cfg.workers = Some(1);
        let a = monte_carlo(&cfg, &code, &grid).unwrap();
        cfg.workers = Some(4);
        let b = monte_carlo(&cfg, &code, &grid).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_dat(), b.to_dat());
        cfg.seed += 1;
        assert_ne!(monte_carlo(&cfg, &code, &grid).unwrap(), a);
    }

    #[test]
    fn monte_carlo_properties() {
        let (grid, _, code) = bc_setup(7, 63);
        let snrs: Vec<f64> = (-10..=10).map(f64::from).collect();
        let cfg = quick_cfg(snrs, 2000);
        let curve = monte_carlo(&cfg, &code, &grid).unwrap();
        for r in &curve.records {
            assert!(r.bound_dominates(), "{r:?}");
            assert_eq!(r.empirical_pe, r.n_errors as f64 / r.n_trials as f64);
            assert!((0.0..=1.0).contains(&r.bound_pe));
        }
        for (lo, hi) in curve.records.iter().zip(curve.records.iter().skip(6)) {
            let m = lo.n_trials as f64;
            let margin = 3.0 * (lo.empirical_pe * (1.0 - lo.empirical_pe) / m).sqrt() + 3.0 / m;
            assert!(hi.empirical_pe <= lo.empirical_pe + margin, "{lo:?} {hi:?}");
        }
        let noiseless = monte_carlo(&quick_cfg(vec![f64::INFINITY], 500), &code, &grid).unwrap();
        assert_eq!(noiseless.records[0].n_errors, 0);
        assert_eq!(noiseless.records[0].bound_pe, 0.0);
    }

    #[test]
    fn region_and_config_errors() {
        let (grid, _, code) = bc_setup(5, 40);
        let mut cfg = quick_cfg(vec![0.0], 10);
        cfg.region = Some((0.5, 0.51));
        assert!(matches!(monte_carlo(&cfg, &code, &grid), Err(Error::EmptyRegion { .. })));
        cfg.region = Some((-0.2, 0.2));
        let curve = monte_carlo(&cfg, &code, &grid).unwrap();
        assert_eq!(curve.records.len(), 1);
        cfg.n_trials = 0;
        assert!(monte_carlo(&cfg, &code, &grid).is_err());
        let other = make_grid(41).unwrap();
        assert!(monte_carlo(&quick_cfg(vec![0.0], 5), &code, &other).is_err());
    }

    #[test]
    fn cbs_region_sampling_with_excluded_null() {
        let grid = make_grid(64).unwrap();
        let shifts = bose_chowla(5).unwrap().to_sensor_set();
        let w = conv_beamformer(&Filter::uniform(2).unwrap(), &shifts, 64).unwrap();
        let code = SubspaceCode::build_with(&w, &grid, NullPolicy::Exclude).unwrap();
        let mut cfg = quick_cfg(vec![f64::INFINITY], 300);
        cfg.region = Some((-0.2, 0.2));
        assert_eq!(monte_carlo(&cfg, &code, &grid).unwrap().records[0].n_errors, 0);
    }

    #[test]
    fn dat_format() {
        let curve = PeCurve {
            records: vec![PeRecord { snr_db: -1.0, empirical_pe: 0.25, bound_pe: 1.0, n_trials: 4, n_errors: 1 }],
        };
        assert_eq!(curve.to_dat(), "SNR Pe Peub\n-1.000000000e0 2.500000000e-1 1.000000000e0\n");
    }
}
