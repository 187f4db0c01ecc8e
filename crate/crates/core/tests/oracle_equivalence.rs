mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use saddle_core::linalg::{dense_eigenvalues, spectral_radius_dense};
use saddle_core::spectral::{iteration_matrix_dense, predicted_rho};
use saddle_core::{MethodId, QCase};

#[test]
fn dense_spectrum_matches_functional_relationship_p2_p4() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [2, 4] {
        for case in [QCase::TridiagA, QCase::DiagA] {
            let inst = instance(p, case);
            let (m, n) = (inst.system.m(), inst.system.n());
            for id in MethodId::ALL {
                for _ in 0..4 {
                    let params = random_valid_params(&mut rng, id, &inst.mu);
                    let h = iteration_matrix_dense(&inst.system, inst.q.dense(), &params).unwrap();
                    let dense = dense_eigenvalues(&h).unwrap();
                    let predicted = predicted_multiset(&params, &inst.mu, m, n);
                    let d = greedy_match_distance(&predicted, &dense);
                    assert!(d < 1e-8, "p={p} {case} {params}: distance {d:e}");
                    let rho = spectral_radius_dense(&h).unwrap();
                    let pr = predicted_rho(&params, &inst.mu, m > n).unwrap();
                    assert!((rho - pr).abs() < 1e-6, "p={p} {case} {params}: {rho} vs {pr}");
                }
            }
        }
    }
}
