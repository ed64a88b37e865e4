//! Complex vector primitives, the uniform spatial-frequency grid, steering
//! vectors and the one-dimensional subspace distance.
//!
//! Grid and codeword indices are zero-based throughout the crate: grid index
//! `i` holds frequency `-1 + 2i/N_g`.

use std::f64::consts::PI;
use std::ops::Index;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Error, Result};

/// A finite, non-empty complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec(Vec<Complex64>);

impl CVec {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(i) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(CVec(entries))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    /// `self^H other`
    pub fn inner(&self, other: &CVec) -> Result<Complex64> {
        check_len(self.len(), other.len())?;
        Ok(inner(&self.0, &other.0))
    }

    pub fn scale(&self, c: Complex64) -> CVec {
        CVec(self.0.iter().map(|z| z * c).collect())
    }

    pub fn normalized(&self) -> Result<CVec> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(CVec(self.0.iter().map(|z| z / n).collect()))
    }
}

impl Index<usize> for CVec {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `u^H v` over raw slices of equal length.
pub(crate) fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

/// Uniform grid of `N_g` spatial frequencies `f_i = -1 + 2i/N_g` covering `[-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    points: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        make_grid(n_points)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> f64 {
        self.points[index]
    }

    /// Indices of grid points inside `[lo, hi]` (inclusive).
    pub fn indices_in(&self, lo: f64, hi: f64) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, &f)| f >= lo && f <= hi)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn make_grid(n_points: usize) -> Result<SpatialGrid> {
    if n_points < 2 {
        return Err(Error::GridTooSmall(n_points));
    }
    let n = n_points as f64;
    let points = (0..n_points).map(|i| -1.0 + 2.0 * i as f64 / n).collect();
    Ok(SpatialGrid { points })
}

/// Integer sensor positions (or beamspace shifts) in half-wavelength units.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SensorSet {
    positions: Vec<usize>,
}

impl SensorSet {
    /// Positions must be strictly increasing.
    pub fn new(positions: Vec<usize>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidSensorSet("no positions".into()));
        }
        if let Some(w) = positions.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSensorSet(format!(
                "positions not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(SensorSet { positions })
    }

    /// Uniform linear array `{0, 1, ..., n - 1}`.
    pub fn ula(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn max_position(&self) -> usize {
        *self.positions.last().expect("sensor set is non-empty")
    }

    pub fn fits_aperture(&self, n_antennas: usize) -> bool {
        self.max_position() < n_antennas
    }
}

/// Single-path channel: unit-modulus gain and the grid index of the true direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub alpha: Complex64,
    pub f_index: usize,
}

/// Array response `exp(j pi d f)` for every sensor position `d`.
pub fn steering_vector(sensors: &SensorSet, f: f64) -> CVec {
    CVec(
        sensors
            .positions
            .iter()
            .map(|&d| Complex64::from_polar(1.0, PI * d as f64 * f))
            .collect(),
    )
}

/// `1 - |u^H v|^2 / (|u|^2 |v|^2)`, clamped to `[0, 1]`.
pub fn subspace_distance(u: &CVec, v: &CVec) -> Result<f64> {
    check_len(u.len(), v.len())?;
    let nu = u.norm_sqr();
    let nv = v.norm_sqr();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(raw_distance(&u.0, &v.0, nu, nv))
}

#[inline]
fn raw_distance(u: &[Complex64], v: &[Complex64], nu: f64, nv: f64) -> f64 {
    let c = inner(u, v).norm_sqr() / (nu * nv);
    (1.0 - c).clamp(0.0, 1.0)
}

/// Minimum pairwise subspace distance and the lexicographically smallest
/// pair `(i, j)`, `i < j`, achieving it.
///
/// Exhaustive over all pairs. Rows are evaluated in parallel but the result
/// is identical to a sequential scan: each pair value is computed the same
/// way and ties resolve to the smallest pair.
pub fn min_subspace_distance(codewords: &[CVec]) -> Result<(f64, (usize, usize))> {
    if codewords.len() < 2 {
        return Err(Error::TooFewCodewords(codewords.len()));
    }
    let len = codewords[0].len();
    let mut norms = Vec::with_capacity(codewords.len());
    for c in codewords {
        check_len(len, c.len())?;
        let n = c.norm_sqr();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        norms.push(n);
    }
    let n = codewords.len();
    let best = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, (i, i + 1));
            for j in i + 1..n {
                let d = raw_distance(&codewords[i].0, &codewords[j].0, norms[i], norms[j]);
                if d < best.0 {
                    best = (d, (i, j));
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, (usize::MAX, usize::MAX)), pick_min);
    Ok(best)
}

/// Order by value, then by pair; used so parallel reductions are scheduling independent.
pub(crate) fn pick_min(a: (f64, (usize, usize)), b: (f64, (usize, usize))) -> (f64, (usize, usize)) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cvec(v: &[(f64, f64)]) -> CVec {
        CVec::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    #[test]
    fn grid_examples() {
        assert_eq!(make_grid(2).unwrap().points(), &[-1.0, 0.0]);
        assert_eq!(make_grid(4).unwrap().points(), &[-1.0, -0.5, 0.0, 0.5]);
        let g = make_grid(1024).unwrap();
        assert_eq!(g.point(0), -1.0);
        assert_eq!(g.point(512), 0.0);
        assert_eq!(g.point(1023), 1.0 - 2.0 / 1024.0);
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_rejects_tiny() {
        assert_eq!(make_grid(1), Err(Error::GridTooSmall(1)));
        assert_eq!(make_grid(0), Err(Error::GridTooSmall(0)));
    }

    #[test]
    fn grid_region() {
        let g = make_grid(1024).unwrap();
        let idx = g.indices_in(-0.2, 0.2);
        assert_eq!(idx.first(), Some(&410));
        assert_eq!(idx.last(), Some(&614));
    }

    #[test]
    fn steering_examples() {
        let s = SensorSet::new(vec![0, 1, 2]).unwrap();
        assert!(steering_vector(&s, 0.0).as_slice().iter().all(|&z| z == c(1.0, 0.0)));
        let s = SensorSet::new(vec![0, 2]).unwrap();
        let a = steering_vector(&s, 0.5);
        assert!((a[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((a[1] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sensor_set_validation() {
        assert!(SensorSet::new(vec![]).is_err());
        assert!(SensorSet::new(vec![1, 1]).is_err());
        assert!(SensorSet::new(vec![3, 2]).is_err());
        assert!(SensorSet::new(vec![0, 5, 9]).unwrap().fits_aperture(10));
        assert!(!SensorSet::new(vec![0, 5, 10]).unwrap().fits_aperture(10));
    }

    #[test]
    fn cvec_validation() {
        assert_eq!(CVec::new(vec![]), Err(Error::EmptyVector));
        assert_eq!(CVec::new(vec![c(0.0, f64::NAN)]), Err(Error::NonFinite(0)));
    }

    #[test]
    fn distance_examples() {
        let u = cvec(&[(1.0, 0.0), (0.0, 1.0)]);
        assert!(subspace_distance(&u, &u).unwrap().abs() < 1e-15);
        let e1 = cvec(&[(1.0, 0.0), (0.0, 0.0)]);
        let e2 = cvec(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(subspace_distance(&e1, &e2).unwrap(), 1.0);
        let ones = cvec(&[(1.0, 0.0), (1.0, 0.0)]);
        assert!((subspace_distance(&ones, &e1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distance_errors() {
        let z = cvec(&[(0.0, 0.0), (0.0, 0.0)]);
        let e1 = cvec(&[(1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(subspace_distance(&z, &e1), Err(Error::ZeroVector));
        let short = cvec(&[(1.0, 0.0)]);
        assert!(matches!(subspace_distance(&short, &e1), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn min_distance_examples() {
        let e1 = cvec(&[(1.0, 0.0), (0.0, 0.0)]);
        let e2 = cvec(&[(0.0, 0.0), (1.0, 0.0)]);
        let ones = cvec(&[(1.0, 0.0), (1.0, 0.0)]);
        let (d, pair) = min_subspace_distance(&[e1.clone(), e2.clone(), ones]).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(pair, (0, 2));

        let u = cvec(&[(0.3, -1.0), (2.0, 0.5)]);
        let (d, _) = min_subspace_distance(&[u.clone(), u.scale(c(-0.7, 2.0))]).unwrap();
        assert!(d.abs() < 1e-12);

        let (d, pair) = min_subspace_distance(&[e1, e2]).unwrap();
        assert_eq!((d, pair), (1.0, (0, 1)));
    }

    #[test]
    fn min_distance_needs_two() {
        let e1 = cvec(&[(1.0, 0.0)]);
        assert_eq!(min_subspace_distance(&[e1]), Err(Error::TooFewCodewords(1)));
        assert_eq!(min_subspace_distance(&[]), Err(Error::TooFewCodewords(0)));
    }

    #[test]
    fn min_distance_matches_sequential_scan() {
        let grid = make_grid(64).unwrap();
        let s = SensorSet::new(vec![0, 1, 4, 9, 11]).unwrap();
        let code: Vec<CVec> = grid.points().iter().map(|&f| steering_vector(&s, f)).collect();
        let mut best = (f64::INFINITY, (0, 0));
        for i in 0..code.len() {
            for j in i + 1..code.len() {
                let d = subspace_distance(&code[i], &code[j]).unwrap();
                if d < best.0 {
                    best = (d, (i, j));
                }
            }
        }
        assert_eq!(min_subspace_distance(&code).unwrap(), best);
    }

    fn arb_cvec(len: usize) -> impl Strategy<Value = CVec> {
        proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), len)
            .prop_filter("nonzero", |v| v.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3))
            .prop_map(|v| cvec(&v))
    }

    fn arb_scalar() -> impl Strategy<Value = Complex64> {
        (0.1f64..5.0, -PI..PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
    }

    proptest! {
        #[test]
        fn distance_symmetric_and_bounded((u, v) in (1usize..8).prop_flat_map(|n| (arb_cvec(n), arb_cvec(n)))) {
            let a = subspace_distance(&u, &v).unwrap();
            let b = subspace_distance(&v, &u).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(subspace_distance(&u, &u).unwrap() < 1e-12);
        }

        #[test]
        fn distance_scale_invariant(
            (u, v) in (1usize..8).prop_flat_map(|n| (arb_cvec(n), arb_cvec(n))),
            c1 in arb_scalar(),
            c2 in arb_scalar(),
        ) {
            let a = subspace_distance(&u, &v).unwrap();
            let b = subspace_distance(&u.scale(c1), &v.scale(c2)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn grid_symmetric_about_zero(n in 2usize..2000) {
            let g = make_grid(n).unwrap();
            for i in 1..n {
                prop_assert!((g.point(i) + g.point(n - i)).abs() < 1e-15);
            }
        }

        #[test]
        fn steering_unit_modulus(pos in proptest::collection::btree_set(0usize..2048, 1..40), f in -1.0f64..1.0) {
            let s = SensorSet::new(pos.into_iter().collect()).unwrap();
            for z in steering_vector(&s, f).as_slice() {
                prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
