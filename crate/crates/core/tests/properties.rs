use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sos_core::geometry::{hausdorff, signed_area};
use sos_core::io::{read_field, write_field};
use sos_core::levellines::{audit_field, edge_set, extract_ensemble, trace_loops};
use sos_core::sampler::{heat_bath_weights, monotone_coupled_sweep, ChainState, HeatBath};
use sos_core::wulff::{opening_boundary, wulff_body, SurfaceTension};
use sos_core::HeightField;

fn field_strategy(max_side: usize, max_cap: u32) -> impl Strategy<Value = HeightField> {
    (1..=max_side, 1..=max_cap).prop_flat_map(|(side, cap)| {
        proptest::collection::vec(0..=cap, side * side)
            .prop_map(move |h| HeightField::from_rows(side, cap, &h).unwrap())
    })
}

proptest! {
    #[test]
    fn level_lines_pass_audit(f in field_strategy(12, 4)) {
        prop_assert!(audit_field(&f).is_ok(), "{:?}", audit_field(&f));
    }

    #[test]
    fn loop_areas_survive_symmetries(f in field_strategy(10, 3)) {
        let totals = |g: &HeightField| -> Vec<i64> {
            (1..=3).map(|h| {
                trace_loops(&edge_set(g, h).unwrap()).unwrap()
                    .iter().map(|lp| lp.sign as i64 * lp.area as i64).sum()
            }).collect()
        };
        prop_assert_eq!(totals(&f), totals(&f.rotated()));
        prop_assert_eq!(totals(&f), totals(&f.reflected()));
    }

    #[test]
    fn energy_delta_matches_recomputation(f in field_strategy(8, 5), i in 1usize..=8, j in 1usize..=8, h in 0u32..=5) {
        let (i, j) = ((i - 1) % f.side() + 1, (j - 1) % f.side() + 1);
        let h = h.min(f.cap());
        let mut g = f.clone();
        g.set(i, j, h).unwrap();
        let delta = f.local_energy_delta(i, j, h).unwrap();
        prop_assert_eq!(g.energy() as i64 - f.energy() as i64, delta);
    }

    #[test]
    fn heat_bath_ratio(nb in proptest::array::uniform4(0u32..6), beta in 0.1f64..3.0, a in 0u32..6, b in 0u32..6) {
        let p = heat_bath_weights(nb, beta, 5);
        let cost = |h: u32| nb.iter().map(|&n| (h as f64 - n as f64).abs()).sum::<f64>();
        let ratio = p[a as usize] / p[b as usize];
        let want = (-beta * (cost(a) - cost(b))).exp();
        prop_assert!((ratio / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn field_file_round_trip(f in field_strategy(9, 6), beta in 0.01f64..10.0, seed in any::<u64>()) {
        let mut buf = Vec::new();
        write_field(&mut buf, &f, beta, seed).unwrap();
        let rec = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(rec.field, f);
        prop_assert_eq!(rec.beta.to_bits(), beta.to_bits());
        prop_assert_eq!(rec.seed, seed);
    }

    #[test]
    fn coupling_keeps_order(lo in field_strategy(6, 3), bump in proptest::collection::vec(0u32..=3, 36), seed in any::<u64>()) {
        let side = lo.side();
        let cap = lo.cap();
        let hi_rows: Vec<u32> = lo.rows().iter().zip(&bump).map(|(&a, &b)| (a + b).min(cap)).collect();
        let hi = HeightField::from_rows(side, cap, &hi_rows).unwrap();
        let kernel = HeatBath::new(1.0, cap);
        let mut low = ChainState::new(lo, 1);
        let mut high = ChainState::new(hi, 2);
        let mut shared = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            monotone_coupled_sweep(&mut low, &mut high, &kernel, &mut shared).unwrap();
            prop_assert!(low.field.is_below(&high.field));
        }
    }

    #[test]
    fn hausdorff_is_symmetric_and_translation_bounded(dx in -0.3f64..0.3, dy in -0.3f64..0.3) {
        let body = wulff_body(&SurfaceTension::Constant, 64).unwrap();
        let curve = opening_boundary(&body.dilate(0.2).unwrap()).unwrap();
        let moved: Vec<_> = curve.iter().map(|p| sos_core::Point::new(p.x + dx, p.y + dy)).collect();
        let ab = hausdorff(&curve, &moved, 1e-3).unwrap();
        let ba = hausdorff(&moved, &curve, 1e-3).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab <= (dx * dx + dy * dy).sqrt() + 1e-12);
    }
}

#[test]
fn opening_shrinks_as_radius_grows() {
    let body = wulff_body(&SurfaceTension::L1, 128).unwrap();
    let areas: Vec<f64> = [0.05, 0.2, 0.4, 0.6]
        .iter()
        .map(|&r| signed_area(&opening_boundary(&body.dilate(r).unwrap()).unwrap()))
        .collect();
    assert!(areas.windows(2).all(|w| w[1] < w[0]), "{areas:?}");
}

#[test]
fn sampled_fields_have_consistent_loops() {
    let cfg = sos_core::SimConfig::new(24, 0.6).with_seed(5);
    let run = sos_core::sampler::sample(&cfg, 5, 3).unwrap();
    for f in &run.fields {
        audit_field(f).unwrap();
        let e = extract_ensemble(f).unwrap();
        assert_eq!(e.max_level(), f.max_height());
    }
}
