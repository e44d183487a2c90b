use sos_core::sampler::{config_index, enumerate_exact, sample, total_variation};
use sos_core::SimConfig;

#[test]
fn sampler_matches_enumeration_on_small_box() {
    for &(side, cap, beta) in &[(2usize, 1u32, 1.0f64), (1, 3, 0.5), (2, 2, 0.7)] {
        let exact = enumerate_exact(side, cap, beta).unwrap();
        let mut cfg = SimConfig::new(side, beta).with_cap(cap).with_seed(17);
        cfg.start_level = Some(0);
        cfg.burn_in = 100;
        let n = 100_000;
        let run = sample(&cfg, n, 2).unwrap();
        let mut counts = vec![0.0; exact.probabilities.len()];
        for f in &run.fields {
            counts[config_index(f)] += 1.0 / n as f64;
        }
        let tv = total_variation(&counts, &exact.probabilities);
        assert!(tv < 0.02, "L={side} M={cap} beta={beta}: tv {tv}");
    }
}

#[test]
fn partition_function_is_symmetric_in_reflections() {
    let exact = enumerate_exact(2, 2, 0.9).unwrap();
    for k in 0..exact.probabilities.len() {
        let f = exact.decode(k);
        let r = exact.config_index(&f.rotated());
        let m = exact.config_index(&f.reflected());
        assert!((exact.probabilities[k] - exact.probabilities[r]).abs() < 1e-15);
        assert!((exact.probabilities[k] - exact.probabilities[m]).abs() < 1e-15);
    }
}
