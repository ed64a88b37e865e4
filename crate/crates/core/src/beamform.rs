//! Beamformer constructions: BPSK-code-induced, antenna selection and
//! convolutional beamspace, plus the isotropy check and a plain-text matrix
//! format.
//!
//! Every beamformer acts on a uniform linear array `{0, ..., N_a - 1}` and
//! has unit-norm rows.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::chancode::BpskCodebook;
use crate::spatial::{self, CVec, SensorSet, SpatialGrid};
use crate::{Error, Result};

const ROW_NORM_TOL: f64 = 1e-9;
const FILTER_NORM_TOL: f64 = 1e-6;
/// Relative isotropy tolerance (times `T`).
pub const ISOTROPY_TOL: f64 = 1e-6;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, t: usize) -> &[Complex64] {
        &self.data[t * self.cols..(t + 1) * self.cols]
    }

    pub fn get(&self, t: usize, i: usize) -> Complex64 {
        self.data[t * self.cols + i]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|t| self.row(t).iter().zip(x).map(|(w, a)| w * a).sum())
            .collect()
    }
}

/// Unit-norm FIR filter `w` used by convolutional beamspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    taps: Vec<Complex64>,
}

impl Filter {
    /// Rejects taps whose norm is not 1 (within 1e-6).
    pub fn new(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::EmptyFilter);
        }
        let norm = spatial::norm_sqr(&taps).sqrt();
        if (norm - 1.0).abs() > FILTER_NORM_TOL {
            return Err(Error::FilterNorm(norm));
        }
        Ok(Filter { taps })
    }

    /// Scales arbitrary nonzero taps to unit norm.
    pub fn normalize(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::EmptyFilter);
        }
        let norm = spatial::norm_sqr(&taps).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::FilterNorm(norm));
        }
        Self::new(taps.into_iter().map(|w| w / norm).collect())
    }

    /// `1_P / sqrt(P)`.
    pub fn uniform(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::EmptyFilter);
        }
        Self::new(vec![Complex64::new(1.0 / (p as f64).sqrt(), 0.0); p])
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Frequency response `B(f; w) = sum_n conj(w_n) exp(j pi n f)`.
    pub fn response(&self, f: f64) -> Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(n, w)| w.conj() * Complex64::from_polar(1.0, PI * n as f64 * f))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BeamformerKind {
    BpskInduced,
    AntennaSelection { positions: SensorSet },
    ConvBeamspace { filter: Filter, shifts: SensorSet },
}

impl BeamformerKind {
    pub fn tag(&self) -> &'static str {
        match self {
            BeamformerKind::BpskInduced => "bpsk-induced",
            BeamformerKind::AntennaSelection { .. } => "antenna-selection",
            BeamformerKind::ConvBeamspace { .. } => "conv-beamspace",
        }
    }
}

/// `T x N_a` beamforming matrix with unit-norm rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    matrix: ComplexMatrix,
    kind: BeamformerKind,
}

impl Beamformer {
    fn new(matrix: ComplexMatrix, kind: BeamformerKind) -> Result<Self> {
        for t in 0..matrix.rows {
            let norm = spatial::norm_sqr(matrix.row(t)).sqrt();
            if (norm - 1.0).abs() > ROW_NORM_TOL {
                return Err(Error::RowNorm { row: t, norm });
            }
        }
        Ok(Beamformer { matrix, kind })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> &BeamformerKind {
        &self.kind
    }

    /// Number of measurements `T`.
    pub fn n_rows(&self) -> usize {
        self.matrix.rows
    }

    /// Number of antennas `N_a`.
    pub fn n_antennas(&self) -> usize {
        self.matrix.cols
    }

    /// `W a_U(f)` for the full ULA.
    pub fn response(&self, f: f64) -> Vec<Complex64> {
        let a: Vec<Complex64> = (0..self.n_antennas())
            .map(|i| Complex64::from_polar(1.0, PI * i as f64 * f))
            .collect();
        self.matrix.mul_vec(&a)
    }

    /// `W a_U(f_n)` for every grid point.
    pub fn responses(&self, grid: &SpatialGrid) -> Vec<Vec<Complex64>> {
        grid.points().par_iter().map(|&f| self.response(f)).collect()
    }
}

/// `W = (1/N_a) B A_U^H`, so that `W a_U(f_n) = b_n` on the grid.
///
/// Requires `N_a = N_g` (the manifold is then a scaled DFT matrix and its
/// pseudoinverse is `A_U^H / N_a`).
pub fn bpsk_beamformer(codebook: &BpskCodebook, grid: &SpatialGrid) -> Result<Beamformer> {
    let n = grid.n_points();
    if codebook.size() != n {
        return Err(Error::Dimension(format!(
            "codebook has {} columns but the grid has {n} points",
            codebook.size()
        )));
    }
    let t_rows = codebook.len();
    // conj(a_U(f_k))_i = (-1)^i exp(-j 2 pi i k / N)
    let twiddle: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let scale = 1.0 / n as f64;
    let rows: Vec<Vec<Complex64>> = (0..t_rows)
        .into_par_iter()
        .map(|t| {
            (0..n)
                .map(|i| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        let b = codebook.entry(t, k) as f64;
                        acc += twiddle[(i * k) % n] * b;
                    }
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    acc * (sign * scale)
                })
                .collect()
        })
        .collect();
    let matrix = ComplexMatrix::new(t_rows, n, rows.concat())?;
    let w = Beamformer::new(matrix, BeamformerKind::BpskInduced)?;
    for (k, b) in w.responses(grid).iter().enumerate() {
        if spatial::norm_sqr(b) == 0.0 {
            return Err(Error::ZeroGain { index: k });
        }
    }
    Ok(w)
}

/// Row `t` is the basis vector selecting antenna `omega[t]`.
pub fn antenna_selection_beamformer(omega: &SensorSet, n_antennas: usize) -> Result<Beamformer> {
    if !omega.fits_aperture(n_antennas) {
        return Err(Error::PositionOutOfRange { position: omega.max_position(), aperture: n_antennas });
    }
    let mut data = vec![Complex64::new(0.0, 0.0); omega.count() * n_antennas];
    for (t, &k) in omega.positions().iter().enumerate() {
        data[t * n_antennas + k] = Complex64::new(1.0, 0.0);
    }
    let matrix = ComplexMatrix::new(omega.count(), n_antennas, data)?;
    Beamformer::new(matrix, BeamformerKind::AntennaSelection { positions: omega.clone() })
}

/// Row `t` is `[0_{k_t}, w^H, 0_{N_a - P - k_t}]`.
pub fn conv_beamformer(filter: &Filter, shifts: &SensorSet, n_antennas: usize) -> Result<Beamformer> {
    let p = filter.len();
    if shifts.max_position() + p > n_antennas {
        return Err(Error::ApertureOverrun { max_shift: shifts.max_position(), filter_len: p, aperture: n_antennas });
    }
    let mut data = vec![Complex64::new(0.0, 0.0); shifts.count() * n_antennas];
    for (t, &k) in shifts.positions().iter().enumerate() {
        for (n, w) in filter.taps().iter().enumerate() {
            data[t * n_antennas + k + n] = w.conj();
        }
    }
    let matrix = ComplexMatrix::new(shifts.count(), n_antennas, data)?;
    Beamformer::new(matrix, BeamformerKind::ConvBeamspace { filter: filter.clone(), shifts: shifts.clone() })
}

/// `|B(f_n; w)|^2` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Beampattern {
    pub frequencies: Vec<f64>,
    pub samples: Vec<f64>,
}

pub fn beampattern(filter: &Filter, grid: &SpatialGrid) -> Beampattern {
    Beampattern {
        frequencies: grid.points().to_vec(),
        samples: grid.points().iter().map(|&f| filter.response(f).norm_sqr()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyReport {
    /// `max_n | |W a_U(f_n)|^2 - T |`
    pub max_deviation: f64,
    pub min_gain: f64,
    pub max_gain: f64,
    pub isotropic: bool,
}

/// Checks `|W a_U(f_n)|^2 = T` on every grid point, to `1e-6 T`.
pub fn check_isotropy(w: &Beamformer, grid: &SpatialGrid) -> IsotropyReport {
    let t = w.n_rows() as f64;
    let gains: Vec<f64> = w.responses(grid).iter().map(|b| spatial::norm_sqr(b)).collect();
    let max_deviation = gains.iter().map(|g| (g - t).abs()).fold(0.0, f64::max);
    IsotropyReport {
        max_deviation,
        min_gain: gains.iter().copied().fold(f64::INFINITY, f64::min),
        max_gain: gains.iter().copied().fold(0.0, f64::max),
        isotropic: max_deviation <= ISOTROPY_TOL * t,
    }
}

fn format_complex(z: Complex64, out: &mut String) {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    let _ = write!(out, "{:e}{}{:e}j", z.re, sign, z.im.abs());
}

fn parse_complex(token: &str) -> std::result::Result<Complex64, String> {
    let body = token.strip_suffix('j').ok_or_else(|| format!("token {token:?} lacks trailing 'j'"))?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(|| format!("token {token:?} is not re+imj"))?;
    let re: f64 = body[..split].parse().map_err(|e| format!("{token:?}: {e}"))?;
    let im: f64 = body[split..].parse().map_err(|e| format!("{token:?}: {e}"))?;
    Ok(Complex64::new(re, im))
}

/// One row per line, whitespace-separated `re+imj` tokens. Values use the
/// shortest exponent notation that parses back to the same `f64`.
pub fn write_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for t in 0..m.rows {
        for (i, &z) in m.row(t).iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            format_complex(z, &mut out);
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed = line
            .split_whitespace()
            .map(parse_complex)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|msg| Error::Parse { line: line_no + 1, msg })?;
        match cols {
            None => cols = Some(parsed.len()),
            Some(c) if c != parsed.len() => {
                return Err(Error::Parse { line: line_no + 1, msg: format!("expected {c} entries, got {}", parsed.len()) })
            }
            _ => {}
        }
        data.extend(parsed);
        rows += 1;
    }
    ComplexMatrix::new(rows, cols.unwrap_or(0), data)
}

/// Steering vector on a shift set scaled by the filter response; the
/// closed form of a convolutional beamspace output.
pub fn conv_response_closed_form(filter: &Filter, shifts: &SensorSet, f: f64) -> CVec {
    spatial::steering_vector(shifts, f).scale(filter.response(f))
}
