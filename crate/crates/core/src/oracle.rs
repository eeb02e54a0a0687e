//! Brute-force finite-volume measures.
//!
//! `mu_n(sigma) ~ exp(-beta H(sigma) + sum_{x in W_n} h_{sigma(x), x})` is
//! tabulated over every configuration of `V_n`, and the compatibility
//! condition is checked by summing out the outer sphere. Nothing here uses
//! the boundary-law map; the Hamiltonian is evaluated edge by edge.
//!
//! Configurations are indexed in mixed radix with vertex 0 as the least
//! significant digit. Since `V_{n-1}` is a prefix of `V_n`, the index of the
//! restriction to `V_{n-1}` is the full index modulo `(m+1)^|V_{n-1}|`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::recursion::ReducedField;
use crate::tree::{energy, FiniteConfig, FiniteTree};

/// Default cap on the number of enumerated configurations.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

const CHUNK: usize = 4096;

/// Exact probability table of `mu_n` over all configurations of `V_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    tree: FiniteTree,
    m: usize,
    log_partition: f64,
    probs: Vec<f64>,
}

impl MeasureTable {
    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `ln Z_n`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn config(&self, index: usize) -> FiniteConfig {
        let spins = decode(index, self.tree.len(), self.m);
        FiniteConfig::new(&self.tree, self.m, spins).expect("decoded spins are in range")
    }

    pub fn index_of(&self, config: &FiniteConfig) -> usize {
        encode(config.spins(), self.m)
    }

    pub fn probability(&self, config: &FiniteConfig) -> f64 {
        self.probs[self.index_of(config)]
    }

    /// Sums out the outer sphere, giving a table over configurations of
    /// `V_{n-1}` (same indexing).
    pub fn marginal_inner(&self) -> Vec<f64> {
        let n = self.tree.depth();
        assert!(n >= 1, "no inner ball to marginalise onto");
        let inner = self.tree.ball(n - 1).len();
        let size = (self.m + 1).pow(inner as u32);
        let mut out = vec![0.0; size];
        for (i, p) in self.probs.iter().enumerate() {
            out[i % size] += p;
        }
        out
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.probs)
    }
}

fn decode(mut index: usize, len: usize, m: usize) -> Vec<usize> {
    let base = m + 1;
    (0..len)
        .map(|_| {
            let s = index % base;
            index /= base;
            s
        })
        .collect()
}

fn encode(spins: &[usize], m: usize) -> usize {
    spins.iter().rev().fold(0, |acc, &s| acc * (m + 1) + s)
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Fails when `(m+1)^|V_n|` exceeds `cap`.
pub fn check_cap(tree: &FiniteTree, m: usize, cap: u128) -> Result<usize> {
    let configs = tree.config_count(m).unwrap_or(u128::MAX);
    if configs > cap || configs > usize::MAX as u128 {
        return Err(Error::EnumerationCap { configs, cap });
    }
    Ok(configs as usize)
}

/// Tabulates `mu_n` with full `(m+1)`-component fields on the outer sphere,
/// normalised by log-sum-exp.
pub fn finite_volume_measure(
    tree: &FiniteTree,
    params: &ModelParams,
    boundary: &[Vec<f64>],
    cap: u128,
) -> Result<MeasureTable> {
    let m = params.m;
    let count = check_cap(tree, m, cap)?;
    let n = tree.depth();
    let outer = tree.sphere(n);
    if boundary.len() != outer.len() {
        return Err(Error::BoundaryLength { expected: outer.len(), got: boundary.len() });
    }
    if let Some(bad) = boundary.iter().find(|h| h.len() != m + 1) {
        return Err(Error::Dimension { expected: m + 1, got: bad.len() });
    }
    if boundary.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("boundary fields must be finite".into()));
    }

    let log_weight = |index: usize| -> Result<f64> {
        let config = FiniteConfig::new(tree, m, decode(index, tree.len(), m))?;
        let h = energy(tree, &config, params.j, params.j_p)?;
        let field: f64 = outer
            .clone()
            .zip(boundary)
            .map(|(v, hv)| hv[config.spin(v)])
            .sum();
        Ok(-params.beta * h + field)
    };
    let log_weights: Vec<f64> = (0..count)
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(log_weight)
        .collect::<Result<_>>()?;

    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_weights.par_iter().map(|w| (w - max).exp()).collect();
    let z = pairwise_sum(&probs);
    probs.par_iter_mut().for_each(|p| *p /= z);
    Ok(MeasureTable { tree: tree.clone(), m, log_partition: max + z.ln(), probs })
}

/// Max-norm distance between the `V_{n-1}` marginal of `mu_n` (fields on
/// `W_n`) and `mu_{n-1}` (fields on `W_{n-1}`). Reduced fields are lifted
/// by appending a zero component.
pub fn compatibility_residual_general(
    params: &ModelParams,
    n: usize,
    inner: &[ReducedField],
    outer: &[ReducedField],
    cap: u128,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("compatibility needs n >= 2".into()));
    }
    let lift = |fields: &[ReducedField]| -> Result<Vec<Vec<f64>>> {
        fields
            .iter()
            .map(|f| {
                if f.len() != params.m {
                    return Err(Error::Dimension { expected: params.m, got: f.len() });
                }
                Ok(f.lifted())
            })
            .collect()
    };
    let big = FiniteTree::new(params.k, n)?;
    let small = FiniteTree::new(params.k, n - 1)?;
    let mu_n = finite_volume_measure(&big, params, &lift(outer)?, cap)?;
    let mu_prev = finite_volume_measure(&small, params, &lift(inner)?, cap)?;
    let marginal = mu_n.marginal_inner();
    debug_assert_eq!(marginal.len(), mu_prev.len());
    Ok(marginal
        .iter()
        .zip(mu_prev.probabilities())
        .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}

/// Compatibility residual between `mu_2` and `mu_1` with the default cap.
pub fn compatibility_residual(
    params: &ModelParams,
    w1: &[ReducedField],
    w2: &[ReducedField],
) -> Result<f64> {
    compatibility_residual_general(params, 2, w1, w2, DEFAULT_ENUMERATION_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recursion::propagate;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_at_zero_coupling() {
        let tree = FiniteTree::new(2, 1).unwrap();
        let params = ModelParams::from_theta_r(2, 2, 1.0, 1.0).unwrap();
        let table = finite_volume_measure(&tree, &params, &vec![vec![0.0; 3]; 3], DEFAULT_ENUMERATION_CAP).unwrap();
        let expected = 3f64.powi(-4);
        assert_eq!(table.len(), 81);
        assert!(table.probabilities().iter().all(|p| (p - expected).abs() < 1e-15));
    }

    #[test]
    fn normalised_on_k2_n2() {
        let tree = FiniteTree::new(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = ModelParams::from_theta_r(2, 2, rng.random_range(0.2..3.0), rng.random_range(0.2..3.0)).unwrap();
        let boundary: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let table = finite_volume_measure(&tree, &params, &boundary, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(table.len(), 59049);
        assert!((table.total() - 1.0).abs() < 1e-12);
        assert!(table.probabilities().iter().all(|&p| p >= 0.0));
        assert!((pairwise_sum(&table.marginal_inner()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_enumeration_path() {
        let tree = FiniteTree::new(1, 1).unwrap();
        let zero = vec![vec![0.0; 2]; 2];

        // J = J_p = -1: every bond weighs e^{-1} whatever the spins.
        let params = ModelParams::new(1, 1, -1.0, -1.0, 1.0).unwrap();
        let table = finite_volume_measure(&tree, &params, &zero, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(table.len(), 8);
        for p in table.probabilities() {
            assert_relative_eq!(*p, 0.125, max_relative = 1e-14);
        }
        assert_relative_eq!(table.log_partition(), 8f64.ln() - 2.0, max_relative = 1e-14);

        // J = -1, J_p = -2: equal bond e^{-2}, unequal bond e^{-1}.
        // Z = 2 e^{-4} + 4 e^{-3} + 2 e^{-2}.
        let params = ModelParams::new(1, 1, -1.0, -2.0, 1.0).unwrap();
        let table = finite_volume_measure(&tree, &params, &zero, DEFAULT_ENUMERATION_CAP).unwrap();
        let e = |x: f64| x.exp();
        let z = 2.0 * e(-4.0) + 4.0 * e(-3.0) + 2.0 * e(-2.0);
        for idx in 0..8 {
            let spins = table.config(idx).spins().to_vec();
            let unequal = (spins[1] != spins[0]) as i32 + (spins[2] != spins[0]) as i32;
            let weight = e(-4.0 + unequal as f64);
            assert_relative_eq!(table.probabilities()[idx], weight / z, max_relative = 1e-13);
        }
    }

    #[test]
    fn index_round_trip() {
        let tree = FiniteTree::new(2, 1).unwrap();
        let params = ModelParams::from_theta_r(2, 2, 0.5, 0.5).unwrap();
        let table = finite_volume_measure(&tree, &params, &vec![vec![0.0; 3]; 3], DEFAULT_ENUMERATION_CAP).unwrap();
        for idx in [0, 1, 17, 80] {
            assert_eq!(table.index_of(&table.config(idx)), idx);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let tree = FiniteTree::new(2, 2).unwrap();
        let params = ModelParams::from_theta_r(2, 2, 0.5, 0.5).unwrap();
        let err = finite_volume_measure(&tree, &params, &vec![vec![0.0; 3]; 6], 1000).unwrap_err();
        assert_eq!(err, Error::EnumerationCap { configs: 59049, cap: 1000 });
        let big = FiniteTree::new(3, 3).unwrap();
        assert!(check_cap(&big, 2, DEFAULT_ENUMERATION_CAP).is_err());
    }

    #[test]
    fn zero_fields_compatible_at_zero_coupling() {
        let params = ModelParams::from_theta_r(2, 2, 1.0, 1.0).unwrap();
        let w1 = vec![ReducedField::zeros(2); 3];
        let w2 = vec![ReducedField::zeros(2); 6];
        assert!(compatibility_residual(&params, &w1, &w2).unwrap() < 1e-15);
    }

    fn random_fields(rng: &mut ChaCha8Rng, count: usize, m: usize) -> Vec<ReducedField> {
        (0..count)
            .map(|_| ReducedField::new((0..m).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap())
            .collect()
    }

    #[test]
    fn recursion_gives_compatible_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let params = ModelParams::from_theta_r(2, 2, 0.5, 0.25).unwrap();
        let tree = FiniteTree::new(2, 2).unwrap();
        let w2 = random_fields(&mut rng, 6, 2);
        let w1 = propagate(&tree, &w2, params.theta, params.r).unwrap().sphere(&tree, 1);
        assert!(compatibility_residual(&params, &w1, &w2).unwrap() <= 1e-12);

        let mut bumped = w1.clone();
        let mut v = bumped[0].as_slice().to_vec();
        v[1] += 0.5;
        bumped[0] = ReducedField::new(v).unwrap();
        assert!(compatibility_residual(&params, &bumped, &w2).unwrap() >= 1e-4);
    }

    #[test]
    fn compatibility_for_other_shapes() {
        // k = 1, m = 3 and k = 3, m = 1 exercise the general recursion.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (k, m, n) in [(1, 3, 3), (3, 1, 2), (2, 1, 3)] {
            let params = ModelParams::from_theta_r(k, m, 0.7, 1.8).unwrap();
            let big = FiniteTree::new(k, n).unwrap();
            let outer = random_fields(&mut rng, big.sphere(n).len(), m);
            let inner = propagate(&big, &outer, params.theta, params.r).unwrap().sphere(&big, n - 1);
            let res = compatibility_residual_general(&params, n, &inner, &outer, DEFAULT_ENUMERATION_CAP).unwrap();
            assert!(res <= 1e-12, "k={k} m={m} n={n}: {res}");
        }
    }

    #[test]
    fn reflection_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let tree = FiniteTree::new(2, 1).unwrap();
        let m = 2;
        let params = ModelParams::from_theta_r(2, m, 0.4, 2.2).unwrap();
        let boundary: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let reversed: Vec<Vec<f64>> = boundary.iter().map(|h| h.iter().rev().copied().collect()).collect();
        let a = finite_volume_measure(&tree, &params, &boundary, DEFAULT_ENUMERATION_CAP).unwrap();
        let b = finite_volume_measure(&tree, &params, &reversed, DEFAULT_ENUMERATION_CAP).unwrap();
        for idx in 0..a.len() {
            let sigma = a.config(idx);
            assert_relative_eq!(a.probability(&sigma), b.probability(&sigma.reflected(m)), max_relative = 1e-12);
        }
    }
}
