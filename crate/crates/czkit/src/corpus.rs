//! Named measures and seeded mean-zero functions shared by the tests, the acceptance suite and
//! the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cubes::DoublingParams;
use crate::error::Result;
use crate::mainlemma::{auto_r0, instance_constants, MainParams};
use crate::measure::{generate_measure, DiscreteMeasure, Generator};
use crate::scalar::Scalar;
use crate::spaces::SampledFunction;

/// Seed for the generators that use randomness.
pub const CORPUS_SEED: u64 = 11;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    pub id: &'static str,
    pub measure: DiscreteMeasure<T>,
}

fn cantor_n(dim: usize) -> f64 {
    dim as f64 * 2f64.ln() / 3f64.ln()
}

/// Generator settings of the regular corpus, by id.
pub fn specs() -> Vec<(&'static str, Generator)> {
    vec![
        ("grid1d_32", Generator::Grid { dim: 1, per_axis: 32 }),
        ("grid2d_8x8", Generator::Grid { dim: 2, per_axis: 8 }),
        ("cantor1d_d5", Generator::Cantor { dim: 1, depth: 5, ratio: 1.0 / 3.0, n: cantor_n(1) }),
        ("cantor2d_d3", Generator::Cantor { dim: 2, depth: 3, ratio: 1.0 / 3.0, n: cantor_n(2) }),
        ("clustered2d", Generator::Clustered { dim: 2, clusters: 4, per_cluster: 12, spread: 0.3, n: 1.0 }),
    ]
}

/// Size-scaling pairs: a small and a large member of the same family.
pub fn scaling_specs() -> Vec<(&'static str, Generator, &'static str, Generator)> {
    vec![
        (
            "grid1d_32",
            Generator::Grid { dim: 1, per_axis: 32 },
            "grid1d_256",
            Generator::Grid { dim: 1, per_axis: 256 },
        ),
        (
            "cantor1d_d5",
            Generator::Cantor { dim: 1, depth: 5, ratio: 1.0 / 3.0, n: cantor_n(1) },
            "cantor1d_d8",
            Generator::Cantor { dim: 1, depth: 8, ratio: 1.0 / 3.0, n: cantor_n(1) },
        ),
    ]
}

/// The regular corpus.
pub fn corpus<T: Scalar>() -> Result<Vec<Instance<T>>> {
    specs().into_iter().map(|(id, g)| Ok(Instance { id, measure: generate_measure(&g, CORPUS_SEED)? })).collect()
}

/// Only the cantor members.
pub fn cantor_corpus<T: Scalar>() -> Result<Vec<Instance<T>>> {
    Ok(corpus()?.into_iter().filter(|i: &Instance<T>| i.id.starts_with("cantor")).collect())
}

/// Uniform values in `[-1, 1]` made mean zero.
pub fn random_mean_zero<T: Scalar>(mu: &DiscreteMeasure<T>, seed: u64) -> SampledFunction<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = SampledFunction::from_values((0..mu.len()).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect());
    let c = f.integral(mu) / mu.total_mass();
    f.shifted(-c)
}

/// `count` functions from consecutive seeds.
pub fn mean_zero_family<T: Scalar>(mu: &DiscreteMeasure<T>, count: usize, seed: u64) -> Vec<SampledFunction<T>> {
    (0..count as u64).map(|k| random_mean_zero(mu, seed.wrapping_add(k))).collect()
}

/// Atoms at `±2^{-k}` with weights `3·2^{-k-3}`, plus the origin: deep δ at the center. The
/// weight factor balances the oscillation and coherence parts of the norm of `log_function`.
pub fn geometric(levels: i32) -> DiscreteMeasure<f64> {
    let c = 0.375;
    let mut pts = vec![vec![0.0]];
    let mut w = vec![c * 2f64.powi(-levels)];
    for k in 1..=levels {
        let r = 2f64.powi(-k);
        pts.push(vec![r]);
        pts.push(vec![-r]);
        w.push(c * r);
        w.push(c * r);
    }
    DiscreteMeasure::new(1, 1.0, pts, w).expect("distinct atoms with positive weights")
}

/// Smallest chain allowed by the measured `ε₁`, unchecked.
pub fn tight_params(mu: &DiscreteMeasure<f64>) -> Result<MainParams<f64>> {
    let d = DoublingParams::standard(mu.dim());
    let e = instance_constants(mu, &auto_r0(mu), &d)?.eps1;
    let sigma = 2.0 * e + 0.5;
    let alpha1 = 2.0 * sigma + 2.0 * e + 0.5;
    let alpha2 = sigma + 2.0 * e + 0.5;
    let alpha3 = 10.0 * alpha2 + 0.5;
    let a = (alpha3 + 0.5).max(alpha1 + alpha2 + 3.0 * sigma + 2.0 * e + 0.5);
    let mut p = MainParams::custom(a, alpha1, alpha2, alpha3, sigma, 0.5, 1.0, d);
    p.checked = false;
    Ok(p)
}

/// `log₂(1/|x|)` made mean zero; the origin gets the deepest level.
pub fn log_function(mu: &DiscreteMeasure<f64>) -> SampledFunction<f64> {
    let deepest = mu.points().iter().map(|p| p[0].abs()).filter(|&r| r > 0.0).fold(1.0, f64::min);
    let vals: Vec<f64> = mu.points().iter().map(|p| -(p[0].abs().max(deepest)).log2()).collect();
    let f = SampledFunction::from_values(vals);
    let c = f.integral(mu) / mu.total_mass();
    f.shifted(-c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_sized() {
        let a: Vec<Instance<f64>> = corpus().unwrap();
        let b: Vec<Instance<f64>> = corpus().unwrap();
        assert_eq!(a, b);
        let sizes: Vec<usize> = a.iter().map(|i| i.measure.len()).collect();
        assert_eq!(sizes, vec![32, 64, 32, 64, 48]);
    }

    #[test]
    fn functions_are_mean_zero() {
        let mu: DiscreteMeasure<f64> = generate_measure(&Generator::Grid { dim: 1, per_axis: 9 }, 0).unwrap();
        for f in mean_zero_family(&mu, 3, 5) {
            assert!(f.integral(&mu).abs() < 1e-12);
            assert!(!f.is_zero());
        }
        assert_eq!(random_mean_zero(&mu, 5), random_mean_zero(&mu, 5));
    }
}
