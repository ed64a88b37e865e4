//! Cross-module properties of the code constructions.

use beamspace::beamform::{antenna_selection_beamformer, bpsk_beamformer, conv_beamformer, Filter};
use beamspace::chancode::{hamming_stats, min_subspace_from_hamming, reed_muller, to_bpsk, BinaryCodebook};
use beamspace::golomb::{bose_chowla, extend_ruler, primes_up_to};
use beamspace::spatial::{make_grid, min_subspace_distance, CVec, SensorSet};
use beamspace::subcode::{welch_upper_bound, NullPolicy, SubspaceCode};
use beamspace::Complex64;
use proptest::prelude::*;

fn codebook(t: usize, words: &[u64]) -> BinaryCodebook {
    let cols: Vec<Vec<bool>> = words.iter().map(|w| (0..t).map(|i| w >> i & 1 == 1).collect()).collect();
    BinaryCodebook::from_columns(&cols).unwrap()
}

fn distinct_words() -> impl Strategy<Value = (usize, Vec<u64>)> {
    (2usize..=16).prop_flat_map(|t| {
        let max_n = 64.min(1usize << t);
        (Just(t), proptest::collection::btree_set(0u64..(1u64 << t), 2..=max_n))
            .prop_map(|(t, s)| (t, s.into_iter().collect()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_equals_pairwise_distance((t, words) in distinct_words()) {
        let code = codebook(t, &words);
        let bpsk = to_bpsk(&code);
        let vecs: Vec<CVec> = (0..code.size())
            .map(|n| CVec::from_real(&bpsk.column(n).iter().map(|&x| x as f64).collect::<Vec<_>>()).unwrap())
            .collect();
        let brute = min_subspace_distance(&vecs).unwrap().0;
        let closed = min_subspace_from_hamming(&hamming_stats(&code), t).unwrap();
        prop_assert!((brute - closed).abs() < 1e-12, "{} vs {}", brute, closed);
    }

    #[test]
    fn beamspace_code_matches_closed_form(t in 2usize..=16, seed in any::<u64>()) {
        let n = t * t;
        let mut state = seed | 1;
        let mut set = std::collections::BTreeSet::new();
        while set.len() < n.min(1 << t) {
            // xorshift keeps the strategy cheap for T up to 16
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            set.insert(state & ((1u64 << t) - 1));
        }
        let words: Vec<u64> = set.into_iter().collect();
        let code = codebook(t, &words);
        let grid = make_grid(code.size()).unwrap();
        let w = bpsk_beamformer(&to_bpsk(&code), &grid).unwrap();
        let built = SubspaceCode::build(&w, &grid).unwrap();
        let closed = min_subspace_from_hamming(&hamming_stats(&code), t).unwrap();
        prop_assert!((built.min_distance().0 - closed).abs() < 1e-9);
        prop_assert!(built.min_distance().0 <= welch_upper_bound(t, code.size()).unwrap_or(1.0) + 1e-9);
    }

    #[test]
    fn selection_and_cbs_codes_within_welch(
        p in prop::sample::select(vec![3u64, 5, 7]),
        extra in 0usize..3,
        taps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
        n_grid in 60usize..160,
    ) {
        let shifts = extend_ruler(&bose_chowla(p).unwrap(), extra);
        let t = shifts.count();
        let grid = make_grid(n_grid).unwrap();
        let n_antennas = shifts.max_position() + taps.len() + 1;
        let sel = SubspaceCode::build(&antenna_selection_beamformer(&shifts, n_antennas).unwrap(), &grid).unwrap();
        let welch = welch_upper_bound(t, n_grid).unwrap();
        prop_assert!(sel.min_distance().0 <= welch + 1e-9);
        let filter = Filter::normalize(taps.into_iter().map(|(a, b)| Complex64::new(a, b)).collect());
        prop_assume!(filter.is_ok());
        let w = conv_beamformer(&filter.unwrap(), &shifts, n_antennas).unwrap();
        let cbs = SubspaceCode::build_with(&w, &grid, NullPolicy::Exclude).unwrap();
        prop_assert!(cbs.min_distance().0 <= welch_upper_bound(t, cbs.codewords().len()).unwrap() + 1e-9);
    }
}

#[test]
fn rows_unit_norm_and_gains_positive_at_full_scale() {
    let grid = make_grid(1024).unwrap();
    let shifts = extend_ruler(&bose_chowla(31).unwrap(), 1);
    let rm = to_bpsk(&beamspace::chancode::prune_deterministic(&reed_muller(5, 2).unwrap(), 1024).unwrap());
    let designs = [
        bpsk_beamformer(&rm, &grid).unwrap(),
        antenna_selection_beamformer(&shifts, 1024).unwrap(),
        conv_beamformer(&Filter::uniform(1).unwrap(), &shifts, 1024).unwrap(),
        conv_beamformer(&Filter::uniform(3).unwrap(), &shifts, 1024).unwrap(),
        conv_beamformer(&Filter::uniform(1).unwrap(), &SensorSet::ula(32).unwrap(), 1024).unwrap(),
    ];
    for w in &designs {
        let m = w.matrix();
        for t in 0..m.rows() {
            let norm: f64 = m.row(t).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
        let code = SubspaceCode::build(w, &grid).unwrap();
        assert!(code.gains().iter().all(|&g| g > 1e-6));
        assert!(code.min_distance().0 <= welch_upper_bound(32, 1024).unwrap() + 1e-9);
    }
    // the two-tap average has exactly one grid null, at f = -1
    let w2 = conv_beamformer(&Filter::uniform(2).unwrap(), &shifts, 1024).unwrap();
    let code = SubspaceCode::build_with(&w2, &grid, NullPolicy::Exclude).unwrap();
    assert_eq!(code.excluded(), vec![0]);
}

#[test]
fn ruler_codes_for_all_small_primes_within_welch() {
    for p in primes_up_to(13) {
        let t = p as usize;
        let n_grid = t * t - 1;
        let grid = make_grid(n_grid).unwrap();
        let w = antenna_selection_beamformer(&bose_chowla(p).unwrap().to_sensor_set(), n_grid).unwrap();
        let d = SubspaceCode::build(&w, &grid).unwrap().min_distance().0;
        if let Ok(b) = welch_upper_bound(t, n_grid) {
            assert!(d <= b + 1e-9, "p={p}");
        }
    }
}
