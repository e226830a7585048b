//! Brute-force oracles and randomized invariants for the public API.

use approx::assert_relative_eq;
use czkit::covering::{besicovich_cover, max_overlap};
use czkit::cubes::{additivity_defect, delta, Cube, DoublingParams};
use czkit::czdecomp::cz_decompose;
use czkit::io::MeasureFile;
use czkit::maximal::{maximal_field, MaximalKind};
use czkit::measure::{growth_constant, DiscreteMeasure};
use czkit::spaces::{jn_profile, rbmo_norm, SampledFunction};
use proptest::prelude::*;

/// Distinct atoms on a sheared dyadic lattice, so translations by multiples of 1/8 are exact.
fn measure(dim: usize) -> impl Strategy<Value = DiscreteMeasure<f64>> {
    let side = 7usize;
    (
        proptest::collection::btree_set(0..side.pow(dim as u32), 2..14),
        proptest::collection::vec(0.1f64..2.0, 14),
        0.3f64..=1.0,
    )
        .prop_map(move |(cells, w, n)| {
            let pts: Vec<Vec<f64>> = cells
                .iter()
                .map(|&c| (0..dim).map(|k| ((c / side.pow(k as u32)) % side) as f64 * 0.375 + 0.0625 * k as f64).collect())
                .collect();
            let weights = w[..pts.len()].to_vec();
            DiscreteMeasure::new(dim, n * dim as f64, pts, weights).unwrap()
        })
}

fn with_function(dim: usize) -> impl Strategy<Value = (DiscreteMeasure<f64>, SampledFunction<f64>)> {
    measure(dim).prop_flat_map(|mu| {
        let len = mu.len();
        (Just(mu), proptest::collection::vec(-3.0f64..3.0, len).prop_map(SampledFunction::from_values))
    })
}

fn dim_strategy() -> impl Strategy<Value = usize> {
    prop_oneof![Just(1usize), Just(2usize)]
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn mass(mu: &DiscreteMeasure<f64>, q: &Cube<f64>) -> f64 {
    mu.points().iter().zip(mu.weights()).filter(|(p, _)| linf(p, &q.center) <= q.half()).map(|(_, w)| w).sum()
}

/// Sides at which the mass of a cube centered at atom `c` jumps. Both oracles below are step
/// functions of the side that only decrease between jumps, so these sides suffice.
fn critical_sides(mu: &DiscreteMeasure<f64>, c: usize) -> Vec<f64> {
    mu.points().iter().map(|p| 2.0 * linf(p, mu.point(c))).collect()
}

/// Centered-cube Hardy-Littlewood value by direct summation.
fn hl_oracle(mu: &DiscreteMeasure<f64>, f: &SampledFunction<f64>, x: &[f64], rho: f64, wide: bool) -> f64 {
    let mut best = 0.0f64;
    for c in 0..mu.len() {
        for s in critical_sides(mu, c) {
            let q = Cube::new(mu.point(c).to_vec(), s);
            if linf(x, &q.center) > q.half() {
                continue;
            }
            let outer = Cube::new(q.center.clone(), s * rho);
            let domain = if wide { &outer } else { &q };
            let num: f64 = (0..mu.len())
                .filter(|&i| linf(mu.point(i), &domain.center) <= domain.half())
                .map(|i| f.values[i].abs() * mu.weight(i))
                .sum();
            best = best.max(num / mass(mu, &outer));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn growth_constant_matches_exhaustive_search(mu in dim_strategy().prop_flat_map(measure)) {
        let g = growth_constant(&mu).unwrap();
        let n = mu.growth_exponent();
        let mut best = 0.0f64;
        for c in 0..mu.len() {
            for s in critical_sides(&mu, c).into_iter().filter(|&s| s > 0.0) {
                best = best.max(mass(&mu, &Cube::new(mu.point(c).to_vec(), s)) / s.powf(n));
                let between = s * 1.37;
                let q = Cube::new(mu.point(c).to_vec(), between);
                prop_assert!(mass(&mu, &q) / between.powf(n) <= g.cube_constant * (1.0 + 1e-12));
            }
        }
        assert_relative_eq!(g.cube_constant, best, max_relative = 1e-12);
        let w = Cube::new(mu.point(g.cube_witness.center).to_vec(), g.cube_witness.scale);
        assert_relative_eq!(mass(&mu, &w) / w.side.powf(n), g.cube_constant, max_relative = 1e-12);
    }

    #[test]
    fn delta_is_symmetric_and_additive_on_concentric_cubes(
        mu in dim_strategy().prop_flat_map(measure),
        pick in 0usize..64,
        s in 0.05f64..1.0,
        k1 in 1.1f64..3.0,
        k2 in 1.1f64..3.0,
    ) {
        let c = mu.point(pick % mu.len()).to_vec();
        let p = Cube::new(c.clone(), s);
        let q = Cube::new(c.clone(), s * k1);
        let r = Cube::new(c, s * k1 * k2);
        prop_assert_eq!(delta(&mu, &p, &r).unwrap(), delta(&mu, &r, &p).unwrap());
        prop_assert!(additivity_defect(&mu, &p, &q, &r) <= 1e-12 * (1.0 + delta(&mu, &p, &r).unwrap()));
        prop_assert!(delta(&mu, &p, &q).unwrap() <= delta(&mu, &p, &r).unwrap());
    }

    #[test]
    fn delta_in_single_precision_tracks_double(mu in measure(1), pick in 0usize..64, s in 0.1f64..1.0) {
        let c = mu.point(pick % mu.len()).to_vec();
        let (q, r) = (Cube::new(c.clone(), s), Cube::new(c, 3.0 * s));
        let d64 = delta(&mu, &q, &r).unwrap();
        let d32 = delta(&mu.cast::<f32>(), &q.cast::<f32>(), &r.cast::<f32>()).unwrap() as f64;
        prop_assert!((d64 - d32).abs() <= 1e-4 * (1.0 + d64));
    }

    #[test]
    fn hl_fields_match_direct_summation((mu, f) in dim_strategy().prop_flat_map(with_function), rho in 1.5f64..3.0) {
        let pts = mu.points().to_vec();
        for (wide, kind) in [(false, MaximalKind::HlLower { rho }), (true, MaximalKind::HlUpper { rho })] {
            let got = maximal_field(&mu, &f, kind, &pts).unwrap();
            for (x, g) in pts.iter().zip(&got) {
                assert_relative_eq!(*g, hl_oracle(&mu, &f, x, rho, wide), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn maximal_is_homogeneous_and_translation_invariant(
        (mu, f) in with_function(1),
        c in -4.0f64..4.0,
        eighths in -80i32..80,
    ) {
        let pts = mu.points().to_vec();
        let moved = mu.translated(&[eighths as f64 / 8.0]);
        let moved_pts = moved.points().to_vec();
        for kind in [MaximalKind::GrandLower, MaximalKind::GrandUpper, MaximalKind::HlLower { rho: 2.0 }] {
            let base = maximal_field(&mu, &f, kind, &pts).unwrap();
            let scaled = maximal_field(&mu, &f.scaled(c), kind, &pts).unwrap();
            let shifted = maximal_field(&moved, &f, kind, &moved_pts).unwrap();
            for i in 0..pts.len() {
                prop_assert!((scaled[i] - c.abs() * base[i]).abs() <= 1e-8 * (1.0 + base[i] * c.abs()));
                prop_assert!((shifted[i] - base[i]).abs() <= 1e-9 * (1.0 + base[i]));
            }
        }
    }

    #[test]
    fn grand_bounds_are_ordered((mu, f) in dim_strategy().prop_flat_map(with_function)) {
        let pts = mu.points().to_vec();
        let lo = maximal_field(&mu, &f, MaximalKind::GrandLower, &pts).unwrap();
        let hi = maximal_field(&mu, &f, MaximalKind::GrandUpper, &pts).unwrap();
        for (l, h) in lo.iter().zip(&hi) {
            prop_assert!(*l >= 0.0 && *l <= h * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn rbmo_ignores_constants_and_scales((mu, f) in with_function(1), c in 0.1f64..5.0, k in -5.0f64..5.0) {
        let d = DoublingParams::standard(1);
        let base = rbmo_norm(&mu, &f, &d).unwrap().value;
        let moved = rbmo_norm(&mu, &f.scaled(c).shifted(k), &d).unwrap().value;
        prop_assert!((moved - c * base).abs() <= 1e-9 * (1.0 + c * base));
        let flat = SampledFunction::from_values(vec![k; mu.len()]);
        prop_assert!(rbmo_norm(&mu, &flat, &d).unwrap().value <= 1e-12 * (1.0 + k.abs()));
    }

    #[test]
    fn jn_profile_is_a_decreasing_fraction((mu, f) in with_function(2)) {
        let q = mu.bounding_cube();
        let lambdas: Vec<f64> = (0..20).map(|j| j as f64 * 0.3).collect();
        let prof = jn_profile(&mu, &f, &q, &lambdas).unwrap();
        prop_assert!(prof.iter().all(|&(_, s)| (0.0..=1.0).contains(&s)));
        prop_assert!(prof.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn besicovitch_selection_covers_every_center(mu in dim_strategy().prop_flat_map(measure), r in 0.2f64..1.5) {
        let items: Vec<(usize, Cube<f64>)> =
            (0..mu.len()).map(|i| (i, Cube::new(mu.point(i).to_vec(), r * (1.0 + i as f64 * 0.1)))).collect();
        let cover = besicovich_cover(&items).unwrap();
        for (_, q) in &items {
            prop_assert!(cover.selected.iter().any(|(_, s)| s.contains_point(&q.center)));
        }
        let chosen: Vec<Cube<f64>> = cover.selected.iter().map(|(_, q)| q.clone()).collect();
        prop_assert_eq!(max_overlap(&chosen), cover.overlap_achieved);
        for fam in &cover.families {
            for (a, &i) in fam.iter().enumerate() {
                for &j in &fam[a + 1..] {
                    prop_assert!(!chosen[i].intersects(&chosen[j]));
                }
            }
        }
    }

    #[test]
    fn measure_file_round_trip_is_identity(mu in dim_strategy().prop_flat_map(measure)) {
        let text = serde_json::to_string(&MeasureFile::from_measure(&mu)).unwrap();
        let back: MeasureFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_measure::<f64>().unwrap(), mu);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cz_invariants_hold_on_grids(per_axis in 12usize..30, seed in 0u64..1000, level in 0.3f64..3.0) {
        let mu: DiscreteMeasure<f64> = czkit::measure::generate_measure(
            &czkit::measure::Generator::Grid { dim: 1, per_axis },
            0,
        )
        .unwrap();
        let f = czkit::corpus::random_mean_zero(&mu, seed);
        let cz = match cz_decompose(&mu, &f, level * f.l1(&mu) / mu.total_mass()) {
            Ok(cz) => cz,
            Err(czkit::Error::OmegaIsEverything) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let rep = cz.check(&mu, &f);
        prop_assert!(rep.all_pass(), "{:?}", rep.failures());
        prop_assert!(cz.b.integral(&mu).abs() <= 1e-10 * (1.0 + f.l1(&mu)));
        prop_assert!(linf(&cz.g.plus(&cz.b).values, &f.values) <= 1e-10);
    }
}
