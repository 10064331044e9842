//! Workloads shared by the benchmarks.

use psk_core::models::{ch1, ch1_candidate, ch1_cubed_candidate, ch1_product, ch1_pair_algebra, ch1_pair_candidate};
use psk_core::{AdaptedBasis, LieAlgebra, PskCandidate};

pub struct Workload {
    pub name: &'static str,
    pub algebra: LieAlgebra,
    pub basis: AdaptedBasis,
    pub candidate: PskCandidate,
}

/// Known solutions of increasing size.
pub fn workloads() -> Vec<Workload> {
    let c = 2.0 / 3f64.sqrt();
    let w = |name, algebra, n, candidate| Workload { name, algebra, basis: AdaptedBasis::new(n), candidate };
    vec![
        w("ch1_2_over_sqrt3", ch1(c), 1, ch1_candidate(c, c)),
        w("ch1_pair", ch1_pair_algebra(), 2, ch1_pair_candidate()),
        w("ch1_cubed", ch1_product(&[2.0; 3]), 3, ch1_cubed_candidate()),
    ]
}
