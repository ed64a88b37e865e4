//! Beamspace subspace codes `{ <W a_U(f_n)> : f_n in G }`, their minimum
//! distance, and the analytic distance bounds they are checked against.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::beamform::{conv_beamformer, antenna_selection_beamformer, Beamformer, Filter};
use crate::golomb::{bose_chowla, is_prime_u64};
use crate::spatial::{self, min_subspace_distance, steering_vector, CVec, SensorSet, SpatialGrid};
use crate::{Error, Result};

/// Beam gains at or below this fraction of `T` count as zero (A3 violation).
pub const NULL_GAIN_TOL: f64 = 1e-12;
/// Absolute tolerance for comparing distances across codes.
pub const DISTANCE_TOL: f64 = 1e-10;

/// How grid points with zero beam gain are handled when building a code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullPolicy {
    /// Any zero-gain grid point is an error.
    Reject,
    /// Zero-gain grid points are dropped from the codebook. The ML decoder
    /// can never prefer such a hypothesis, so this leaves decoding unchanged.
    Exclude,
}

/// Normalized codewords over a spatial grid.
#[derive(Debug)]
pub struct SubspaceCode {
    n_grid: usize,
    dim: usize,
    /// Grid index of each stored codeword (ascending).
    grid_index: Vec<usize>,
    codewords: Vec<CVec>,
    /// Raw `|W a_U(f_n)|^2` for every grid point.
    gains: Vec<f64>,
    // split re/im, codeword-major, for the decoder's inner loop
    re: Vec<f64>,
    im: Vec<f64>,
    min_cache: OnceLock<(f64, (usize, usize))>,
}

impl Clone for SubspaceCode {
    fn clone(&self) -> Self {
        SubspaceCode {
            n_grid: self.n_grid,
            dim: self.dim,
            grid_index: self.grid_index.clone(),
            codewords: self.codewords.clone(),
            gains: self.gains.clone(),
            re: self.re.clone(),
            im: self.im.clone(),
            min_cache: self.min_cache.clone(),
        }
    }
}

impl SubspaceCode {
    /// Normalized `W a_U(f_n)` for every grid point; errors on a zero codeword.
    pub fn build(w: &Beamformer, grid: &SpatialGrid) -> Result<Self> {
        Self::build_with(w, grid, NullPolicy::Reject)
    }

    pub fn build_with(w: &Beamformer, grid: &SpatialGrid, policy: NullPolicy) -> Result<Self> {
        Self::from_raw(w.responses(grid), policy)
    }

    /// Antenna-space code `C(I, S)`: normalized steering vectors of `sensors`.
    pub fn antenna_space(sensors: &SensorSet, grid: &SpatialGrid) -> Result<Self> {
        let raw = grid.points().iter().map(|&f| steering_vector(sensors, f).into_inner()).collect();
        Self::from_raw(raw, NullPolicy::Reject)
    }

    /// Code from arbitrary (unnormalized) vectors, one per grid point.
    pub fn from_vectors(vectors: Vec<CVec>, policy: NullPolicy) -> Result<Self> {
        Self::from_raw(vectors.into_iter().map(CVec::into_inner).collect(), policy)
    }

    fn from_raw(raw: Vec<Vec<num_complex::Complex64>>, policy: NullPolicy) -> Result<Self> {
        let n_grid = raw.len();
        if n_grid < 2 {
            return Err(Error::TooFewCodewords(n_grid));
        }
        let dim = raw[0].len();
        let gains: Vec<f64> = raw.iter().map(|b| spatial::norm_sqr(b)).collect();
        let floor = NULL_GAIN_TOL * dim as f64;
        let mut grid_index = Vec::with_capacity(n_grid);
        let mut codewords = Vec::with_capacity(n_grid);
        for (n, b) in raw.into_iter().enumerate() {
            if b.len() != dim {
                return Err(Error::LengthMismatch { left: dim, right: b.len() });
            }
            if gains[n] <= floor {
                match policy {
                    NullPolicy::Reject => return Err(Error::ZeroGain { index: n }),
                    NullPolicy::Exclude => continue,
                }
            }
            grid_index.push(n);
            codewords.push(CVec::new(b)?.normalized()?);
        }
        if codewords.len() < 2 {
            return Err(Error::TooFewCodewords(codewords.len()));
        }
        let mut re = Vec::with_capacity(codewords.len() * dim);
        let mut im = Vec::with_capacity(codewords.len() * dim);
        for c in &codewords {
            re.extend(c.as_slice().iter().map(|z| z.re));
            im.extend(c.as_slice().iter().map(|z| z.im));
        }
        Ok(SubspaceCode { n_grid, dim, grid_index, codewords, gains, re, im, min_cache: OnceLock::new() })
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    /// Codeword length `T`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored codewords (identifiable grid points only).
    pub fn codewords(&self) -> &[CVec] {
        &self.codewords
    }

    pub fn grid_indices(&self) -> &[usize] {
        &self.grid_index
    }

    /// Normalized codeword for a grid index, `None` if it was excluded.
    pub fn codeword(&self, grid_index: usize) -> Option<&CVec> {
        self.grid_index.binary_search(&grid_index).ok().map(|s| &self.codewords[s])
    }

    /// Raw beam gain `|W a_U(f_n)|^2` per grid point.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Grid points dropped for zero gain.
    pub fn excluded(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stored = self.grid_index.iter().peekable();
        for n in 0..self.n_grid {
            if stored.peek() == Some(&&n) {
                stored.next();
            } else {
                out.push(n);
            }
        }
        out
    }

    /// Minimum subspace distance and the achieving grid-index pair.
    pub fn min_distance(&self) -> (f64, (usize, usize)) {
        *self.min_cache.get_or_init(|| {
            let (d, (i, j)) = min_subspace_distance(&self.codewords).expect("code holds >= 2 nonzero codewords");
            (d, (self.grid_index[i], self.grid_index[j]))
        })
    }

    /// Index (grid numbering) maximizing `|y^H c_n|^2`; ties go to the smallest index.
    pub fn decode(&self, y_re: &[f64], y_im: &[f64]) -> usize {
        let dim = self.dim;
        let mut best = f64::NEG_INFINITY;
        let mut best_slot = 0;
        for (slot, (cr, ci)) in self.re.chunks_exact(dim).zip(self.im.chunks_exact(dim)).enumerate() {
            // y^H c = sum (yr - j yi)(cr + j ci)
            let mut sr = 0.0;
            let mut si = 0.0;
            for t in 0..dim {
                sr += y_re[t] * cr[t] + y_im[t] * ci[t];
                si += y_re[t] * ci[t] - y_im[t] * cr[t];
            }
            let score = sr * sr + si * si;
            if score > best {
                best = score;
                best_slot = slot;
            }
        }
        self.grid_index[best_slot]
    }
}

pub fn code_min_distance(code: &SubspaceCode) -> (f64, (usize, usize)) {
    code.min_distance()
}

/// Upper bound on `d_min` of any `n_codewords` unit vectors in dimension
/// `dim` implied by the Welch bound: `1 - (N - T) / (T (N - 1))`.
pub fn welch_upper_bound(dim: usize, n_codewords: usize) -> Result<f64> {
    if n_codewords <= dim {
        return Err(Error::WelchVacuous { dim, n_codewords });
    }
    let (t, n) = (dim as f64, n_codewords as f64);
    Ok(1.0 - (n - t) / (t * (n - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    BoseChowla,
    UlaShift,
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBounds {
    pub lower: Option<f64>,
    pub upper: f64,
    pub source: BoundSource,
}

/// `c(T) = (1 - 1/T - 1/T^2) / (1 - 2/T^2)`.
pub fn bose_chowla_c(t: usize) -> f64 {
    let t = t as f64;
    (1.0 - 1.0 / t - 1.0 / (t * t)) / (1.0 - 2.0 / (t * t))
}

/// Sandwich `[1 - 2/T, 1 - c(T)/T]` for the Bose-Chowla antenna-selection
/// code, valid for prime `T` and `N_g = T^2 - 1`.
pub fn bose_chowla_bounds(t: usize, n_grid: usize) -> Result<DistanceBounds> {
    if !is_prime_u64(t as u64) {
        return Err(Error::Regime(format!("T={t} is not prime")));
    }
    if n_grid != t * t - 1 {
        return Err(Error::Regime(format!("N_g={n_grid}, expected T^2-1={}", t * t - 1)));
    }
    let tf = t as f64;
    Ok(DistanceBounds {
        lower: Some(1.0 - 2.0 / tf),
        upper: 1.0 - bose_chowla_c(t) / tf,
        source: BoundSource::BoseChowla,
    })
}

/// Upper bound `1 - 4/pi^2` on the ULA-shift code distance (regime `N_g = T^2 - 1`).
pub fn ula_shift_bound() -> f64 {
    1.0 - 4.0 / (PI * PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterInvarianceReport {
    /// `d_min` of the antenna-space code on the shift set.
    pub reference: f64,
    pub per_filter: Vec<f64>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Builds the convolutional-beamspace code for each filter and compares its
/// `d_min` to the antenna-space code on the shifts.
pub fn verify_filter_invariance(
    shifts: &SensorSet,
    filters: &[Filter],
    grid: &SpatialGrid,
    n_antennas: usize,
) -> Result<FilterInvarianceReport> {
    let reference = SubspaceCode::antenna_space(shifts, grid)?.min_distance().0;
    let per_filter = filters
        .iter()
        .map(|f| {
            let w = conv_beamformer(f, shifts, n_antennas)?;
            Ok(SubspaceCode::build(&w, grid)?.min_distance().0)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = per_filter.iter().map(|d| (d - reference).abs()).fold(0.0, f64::max);
    Ok(FilterInvarianceReport { reference, per_filter, max_deviation, pass: max_deviation <= DISTANCE_TOL })
}

/// Measured distances and bound checks in the `N_g = N_a = T^2 - 1` regime.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub t: usize,
    pub n_grid: usize,
    pub bc_marks: Vec<usize>,
    pub bc_lower: f64,
    pub bc_upper: f64,
    pub bc_c: f64,
    pub bc_measured: f64,
    pub welch: f64,
    pub ula_bound: f64,
    pub ula_measured: f64,
    pub bc_in_sandwich: bool,
    pub ula_below_bound: bool,
    pub within_welch: bool,
    /// `1 - 2/T > 1 - 4/pi^2` agrees with `T >= 5`.
    pub crossover_consistent: bool,
}

impl BoundsReport {
    pub fn pass(&self) -> bool {
        self.bc_in_sandwich && self.ula_below_bound && self.within_welch && self.crossover_consistent
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        let marks: Vec<String> = self.bc_marks.iter().map(|m| m.to_string()).collect();
        vec![
            ("T", self.t.to_string()),
            ("N_g", self.n_grid.to_string()),
            ("bc_marks", marks.join(",")),
            ("bc_lower", format!("{:.9e}", self.bc_lower)),
            ("bc_upper", format!("{:.9e}", self.bc_upper)),
            ("bc_c", format!("{:.9e}", self.bc_c)),
            ("bc_measured", format!("{:.9e}", self.bc_measured)),
            ("welch_upper", format!("{:.9e}", self.welch)),
            ("ula_bound", format!("{:.9e}", self.ula_bound)),
            ("ula_measured", format!("{:.9e}", self.ula_measured)),
            ("bc_in_sandwich", pass_fail(self.bc_in_sandwich)),
            ("ula_below_bound", pass_fail(self.ula_below_bound)),
            ("within_welch", pass_fail(self.within_welch)),
            ("crossover_consistent", pass_fail(self.crossover_consistent)),
            ("overall", pass_fail(self.pass())),
        ]
    }
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

/// Measures the Bose-Chowla antenna-selection code and the ULA-shift code
/// (unit filter, `N_a = N_g`) and checks them against the analytic bounds,
/// with `1e-9` slack.
pub fn verify_distance_bounds(t: usize, n_grid: usize) -> Result<BoundsReport> {
    let bounds = bose_chowla_bounds(t, n_grid)?;
    let lower = bounds.lower.expect("Bose-Chowla bounds have a lower end");
    let grid = SpatialGrid::new(n_grid)?;
    let ruler = bose_chowla(t as u64)?;
    let omega = ruler.to_sensor_set();
    let bc_w = antenna_selection_beamformer(&omega, n_grid)?;
    let bc_measured = SubspaceCode::build(&bc_w, &grid)?.min_distance().0;
    let ula_w = conv_beamformer(&Filter::uniform(1)?, &SensorSet::ula(t)?, n_grid)?;
    let ula_measured = SubspaceCode::build(&ula_w, &grid)?.min_distance().0;
    let welch = welch_upper_bound(t, n_grid)?;
    let slack = 1e-9;
    let ula_bound = ula_shift_bound();
    Ok(BoundsReport {
        t,
        n_grid,
        bc_marks: ruler.marks().to_vec(),
        bc_lower: lower,
        bc_upper: bounds.upper,
        bc_c: bose_chowla_c(t),
        bc_measured,
        welch,
        ula_bound,
        ula_measured,
        bc_in_sandwich: bc_measured >= lower - slack && bc_measured <= bounds.upper + slack,
        ula_below_bound: ula_measured <= ula_bound + slack,
        within_welch: bc_measured <= welch + slack && ula_measured <= welch + slack,
        crossover_consistent: (lower > ula_bound) == (t >= 5),
    })
}
