mod common;

use std::f64::consts::PI;

use common::*;
use irs_beamsim::beamsearch::{exhaustive_search, fft_search, noisy_measure, NoiseModel};
use irs_beamsim::bim::{vote, BimDatabase, BimEntry, Fingerprint};
use irs_beamsim::channel::{beam_gain, cascade, ChannelG, ChannelH, UpaConfig};
use irs_beamsim::codebook::{make_bs_codebook, make_irs_codebook, BeamPair};
use irs_beamsim::env::{segment_blocked, trace_paths, Blocker, PathComponent, PathSet, SiteLayout};
use irs_beamsim::harness::config::{default_site, SITE_SEED};
use irs_beamsim::pathfile::{read_paths, write_paths};
use irs_beamsim::Vec3;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn small_upa() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cascaded_form_matches_two_hop_form(seed in any::<u64>(), n in 1usize..12, m in 1usize..6) {
        let mut r = rng(seed);
        let h = random_vec(n, &mut r);
        let g = random_mat(n, m, &mut r);
        let (v, f) = (unit_modulus(n, &mut r), unit_norm(m, &mut r));
        let phi = cascade(&ChannelH(h.clone()), &ChannelG(g.clone())).unwrap();
        let a = beam_gain(&phi, v.view(), f.view()).unwrap();
        prop_assert!(rel_err(a, two_hop_gain(&h, &g, &v, &f)) < 1e-10);
    }

    #[test]
    fn gain_ignores_common_phase(seed in any::<u64>(), t1 in -PI..PI, t2 in -PI..PI) {
        let mut r = rng(seed);
        let phi = random_phi(9, 4, &mut r);
        let (v, f) = (unit_modulus(9, &mut r), unit_norm(4, &mut r));
        let base = beam_gain(&phi, v.view(), f.view()).unwrap();
        let rv = v.mapv(|z| z * Complex64::from_polar(1.0, t1));
        let rf = f.mapv(|z| z * Complex64::from_polar(1.0, t2));
        prop_assert!(rel_err(base, beam_gain(&phi, rv.view(), rf.view()).unwrap()) < 1e-12);
    }

    #[test]
    fn gain_scales_with_channel_power(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let phi = random_phi(6, 3, &mut r);
        let (v, f) = (unit_modulus(6, &mut r), unit_norm(3, &mut r));
        let mut scaled = phi.clone();
        scaled.0.mapv_inplace(|z| z * c);
        let a = beam_gain(&phi, v.view(), f.view()).unwrap();
        let b = beam_gain(&scaled, v.view(), f.view()).unwrap();
        prop_assert!(rel_err(b, c * c * a) < 1e-12);
    }

    #[test]
    fn noiseless_measurement_is_linear_in_power(seed in any::<u64>(), p in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let phi = random_phi(4, 4, &mut r);
        let (v, f) = (unit_modulus(4, &mut r), unit_norm(4, &mut r));
        let quiet = NoiseModel::new(0.0, 0).unwrap();
        let y = noisy_measure(&phi, &v, &f, p, &quiet, &mut r).unwrap();
        prop_assert!(rel_err(y, p * beam_gain(&phi, v.view(), f.view()).unwrap()) < 1e-12);
    }

    #[test]
    fn fft_search_equals_brute_force(seed in any::<u64>(), irs in small_upa(), bs in small_upa()) {
        let mut r = rng(seed);
        let phi = random_phi(irs.0 * irs.1, bs.0 * bs.1, &mut r);
        let icb = make_irs_codebook(&UpaConfig::new(irs.0, irs.1));
        let bcb = make_bs_codebook(&UpaConfig::new(bs.0, bs.1));
        let fast = fft_search(&phi, &icb, &bcb).unwrap();
        let slow = exhaustive_search(&phi, &icb, &bcb).unwrap();
        let (pair, gain) = brute_force(&phi.0, irs, bs);
        prop_assert_eq!(fast.pair, pair);
        prop_assert_eq!(slow.pair, pair);
        prop_assert!(rel_err(fast.gain, gain) < 1e-9);
    }

    #[test]
    fn exhaustive_gain_bounds_every_pair(seed in any::<u64>()) {
        let mut r = rng(seed);
        let phi = random_phi(4, 4, &mut r);
        let icb = make_irs_codebook(&UpaConfig::new(2, 2));
        let bcb = make_bs_codebook(&UpaConfig::new(2, 2));
        let best = exhaustive_search(&phi, &icb, &bcb).unwrap();
        for (i, v) in icb.iter().enumerate() {
            for (j, f) in bcb.iter().enumerate() {
                let g = beam_gain(&phi, v.view(), f.view()).unwrap();
                prop_assert!(best.gain >= g, "pair ({i},{j}) beats the optimum");
            }
        }
    }

    #[test]
    fn path_csv_round_trip(seed in any::<u64>(), n_bs in 0usize..4, n_ue in 0usize..5) {
        let mut r = rng(seed);
        let path = |r: &mut rand_chacha::ChaCha8Rng| PathComponent {
            gain: Complex64::from_polar(r.random_range(1e-9..1.0), r.random_range(-PI..PI)),
            depart_zenith: r.random_range(0.0..PI),
            depart_azimuth: r.random_range(-PI..PI),
            arrive_zenith: r.random_range(0.0..PI),
            arrive_azimuth: r.random_range(-PI..PI),
            delay: r.random_range(0.0..1e-6),
        };
        let set = PathSet {
            bs_irs_paths: (0..n_bs).map(|_| path(&mut r)).collect(),
            irs_ue_paths: (0..n_ue).map(|_| path(&mut r)).collect(),
        };
        let mut buf = Vec::new();
        write_paths(&set, &mut buf).unwrap();
        let back = read_paths(buf.as_slice()).unwrap();
        prop_assert_eq!(back.bs_irs_paths.len(), n_bs);
        prop_assert_eq!(back.irs_ue_paths.len(), n_ue);
        let pairs = set.bs_irs_paths.iter().zip(&back.bs_irs_paths)
            .chain(set.irs_ue_paths.iter().zip(&back.irs_ue_paths));
        for (a, b) in pairs {
            prop_assert!((a.gain - b.gain).norm() <= 1e-12 * a.gain.norm().max(1.0));
            prop_assert!((a.depart_zenith - b.depart_zenith).abs() <= 1e-12);
            prop_assert!((a.depart_azimuth - b.depart_azimuth).abs() <= 1e-12);
            prop_assert!((a.arrive_zenith - b.arrive_zenith).abs() <= 1e-12);
            prop_assert!((a.arrive_azimuth - b.arrive_azimuth).abs() <= 1e-12);
            prop_assert!((a.delay - b.delay).abs() <= 1e-12 * a.delay.max(1e-12));
        }
    }

    #[test]
    fn knn_matches_stable_sort(seed in any::<u64>(), len in 1usize..60, k in 1usize..8) {
        let mut r = rng(seed);
        // coarse grid so equal distances actually occur
        let pt = |r: &mut rand_chacha::ChaCha8Rng| Vec3::new(
            r.random_range(0..6) as f64, r.random_range(0..6) as f64, 1.5);
        let entries: Vec<BimEntry> = (0..len)
            .map(|_| BimEntry { location: pt(&mut r), pair: BeamPair::new(r.random_range(0..4), r.random_range(0..4)) })
            .collect();
        let fp = Fingerprint::new(&UpaConfig::new(2, 2), &UpaConfig::new(2, 2));
        let db = BimDatabase::new(fp, entries.clone()).unwrap();
        let q = pt(&mut r);
        let k = k.min(len);
        let mut oracle: Vec<(f64, usize)> = entries.iter().enumerate()
            .map(|(i, e)| (e.location.distance(q), i)).collect();
        oracle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let got = db.knn(q, k).unwrap();
        prop_assert_eq!(got.len(), k);
        for (c, (d, i)) in got.as_slice().iter().zip(&oracle) {
            prop_assert_eq!(c.entry, *i);
            prop_assert_eq!(c.distance, *d);
            prop_assert_eq!(c.pair, entries[*i].pair);
        }
    }

    #[test]
    fn vote_picks_a_neighbour(seed in any::<u64>(), len in 1usize..40, k in 1usize..6) {
        let mut r = rng(seed);
        let entries: Vec<BimEntry> = (0..len)
            .map(|_| BimEntry {
                location: Vec3::new(r.random_range(0.0..10.0), r.random_range(0.0..10.0), 1.5),
                pair: BeamPair::new(r.random_range(0..3), r.random_range(0..3)),
            })
            .collect();
        let fp = Fingerprint::new(&UpaConfig::new(2, 2), &UpaConfig::new(2, 2));
        let db = BimDatabase::new(fp, entries).unwrap();
        let q = Vec3::new(r.random_range(0.0..10.0), r.random_range(0.0..10.0), 1.5);
        let cands = db.knn(q, k.min(len)).unwrap();
        let winner = vote(&cands).unwrap();
        prop_assert!(cands.distinct_pairs().contains(&winner));
        let nearest = db.knn(q, 1).unwrap();
        prop_assert_eq!(vote(&nearest).unwrap(), nearest.as_slice()[0].pair);
    }

    #[test]
    fn blockers_only_remove_paths(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut site: SiteLayout = default_site(SITE_SEED);
        let ue = site.ue_area.sample(&mut r);
        prop_assume!(!site.blockers.iter().any(|b| b.contains(ue)));
        let with = trace_paths(&site, ue).unwrap();
        site.blockers.clear();
        let without = trace_paths(&site, ue).unwrap();
        prop_assert!(with.irs_ue_paths.len() <= without.irs_ue_paths.len());
        for p in &with.irs_ue_paths {
            prop_assert!(without.irs_ue_paths.contains(p));
        }
    }

    #[test]
    fn segment_blocking_is_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = |r: &mut rand_chacha::ChaCha8Rng| Vec3::new(
            r.random_range(-5.0..5.0), r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
        let b = Blocker::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 2.0, 1.5)).unwrap();
        let (a, c) = (p(&mut r), p(&mut r));
        let blockers = [b];
        prop_assert_eq!(segment_blocked(a, c, &blockers), segment_blocked(c, a, &blockers));
    }
}
