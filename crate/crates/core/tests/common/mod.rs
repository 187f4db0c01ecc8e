#![allow(dead_code)]

use rand::Rng;
use saddle_core::problem::{build_q, stokes_problem};
use saddle_core::spectral::{predicted_lambda, schur_complement};
use saddle_core::{MethodId, MethodParams, QCase, QMatrix, SaddlePointSystem};

pub struct Instance {
    pub system: SaddlePointSystem,
    pub q: QMatrix,
    pub mu: Vec<f64>,
}

pub fn instance(p: usize, case: QCase) -> Instance {
    let system = stokes_problem(p).unwrap();
    let q = build_q(&system, case).unwrap();
    let s = schur_complement(&system).unwrap();
    let (mu, _) = saddle_core::spectral::j_spectrum(&s, q.dense(), q.sign()).unwrap();
    Instance { system, q, mu }
}

/// Largest distance in a greedy nearest-neighbour pairing of two equal-size
/// multisets of complex numbers.
pub fn greedy_match_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    // pair the most isolated points first so clusters do not steal partners
    for &(ar, ai) in a {
        let mut best = (f64::INFINITY, usize::MAX);
        for (k, &(br, bi)) in b.iter().enumerate() {
            if !used[k] {
                let d = (ar - br).hypot(ai - bi);
                if d < best.0 {
                    best = (d, k);
                }
            }
        }
        used[best.1] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// Predicted multiset: both roots for every μ plus `1 − τ₁` with multiplicity `m − n`.
pub fn predicted_multiset(p: &MethodParams, mu: &[f64], m: usize, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m + n);
    for &x in mu {
        let l = predicted_lambda(p, x).unwrap();
        out.extend_from_slice(&l.roots);
    }
    out.extend(std::iter::repeat_n((1.0 - p.tau1, 0.0), m - n));
    out
}

/// Draws are rejected when a quadratic is close to a double root or a root
/// is close to `1 − τ₁`: such eigenvalues are defective and only accurate to √ε.
pub fn well_separated(p: &MethodParams, mu: &[f64]) -> bool {
    mu.iter().all(|&x| {
        let l = predicted_lambda(p, x).unwrap();
        let scale = l.b * l.b + l.c.abs() + 1.0;
        let fixed = 1.0 - p.tau1;
        l.discriminant().abs() > 1e-6 * scale
            && l.roots.iter().all(|&(re, im)| (re - fixed).hypot(im) > 1e-3)
            && l.max_modulus() < 50.0
    })
}

pub fn random_free<R: Rng>(rng: &mut R, id: MethodId) -> Vec<f64> {
    id.free_params()
        .iter()
        .map(|name| match *name {
            "a" => rng.random_range(-1.0..2.0),
            "tau" | "tau1" | "tau2" => rng.random_range(0.1..1.9),
            _ => rng.random_range(-0.5..1.5),
        })
        .collect()
}

/// Uzawa has nothing to draw; its coincident zero roots are not defective
/// (the `x` block of its iteration matrix vanishes).
pub fn random_valid_params<R: Rng>(rng: &mut R, id: MethodId, mu: &[f64]) -> MethodParams {
    if id.free_params().is_empty() {
        return MethodParams::from_free(id, &[]).unwrap();
    }
    for _ in 0..100_000 {
        let p = MethodParams::from_free(id, &random_free(rng, id)).unwrap();
        if p.validate().is_empty() && p.q_scale().abs() > 0.05 && well_separated(&p, mu) {
            return p;
        }
    }
    panic!("no well-separated draw for {id}");
}
