//! Statistical checks of the basic coupling: marginal faithfulness, the
//! coupling upper-bound comparison, and the contraction trend on a
//! sigmoid-observation target.

mod common;

use common::*;
use rcar_core::basis::BasisSpec;
use rcar_core::coupling::*;
use rcar_core::measures::{sample_gamma_prior, GammaPriorSpec};
use rcar_core::mh::{rcar_step, Innovation, ProposalKernel, Thinning};
use rcar_core::potential::{ObservationData, SslPotential};
use rcar_core::rng::RngStream;
use rcar_core::semimetric::{coupled_tilde_d_mean, SemimetricParams};

fn ssl_setup(n_modes: usize) -> (ProposalKernel, SslPotential, GammaPriorSpec) {
    let basis = BasisSpec::new(n_modes).unwrap();
    let (r, beta) = (0.5, 0.5);
    let kernel = ProposalKernel::new(
        Thinning::Beta { r, beta },
        Innovation::GammaProduct {
            r,
            beta,
            shape_deficit: 0.0,
        },
        basis,
    )
    .unwrap();
    let data = ObservationData::new(
        vec![0.5, 1.7, 3.1, 4.9],
        vec![0.8, -0.3, 0.5, -0.9],
        0.5,
    )
    .unwrap();
    let potential = SslPotential::new(data, 1.0, basis).unwrap();
    let prior = GammaPriorSpec::new(r, basis).unwrap();
    (kernel, potential, prior)
}

/// The u-component of one coupled step has the same law as an uncoupled RCAR
/// step (two-sample KS on the norm functional at level 0.01).
#[test]
fn coupled_marginal_is_a_faithful_chain() {
    let (kernel, potential, prior) = ssl_setup(16);
    let mut rng = RngStream::new(61001);
    let u0 = sample_gamma_prior(&prior, &mut rng);
    let v0 = sample_gamma_prior(&prior, &mut rng);

    let reps = 100_000;
    let mut coupled: Vec<f64> = Vec::with_capacity(reps);
    let mut plain: Vec<f64> = Vec::with_capacity(reps);
    let mut rng_c = RngStream::replica(61002, 1);
    let mut rng_p = RngStream::replica(61003, 2);
    for _ in 0..reps {
        let (u1, _) = basic_coupled_step(&u0, &v0, &kernel, &potential, &mut rng_c).unwrap();
        coupled.push(u1.h1_norm());
        let out = rcar_step(&u0, &kernel, &potential, &mut rng_p).unwrap();
        plain.push(out.next.h1_norm());
    }
    let d = ks_statistic_two_sample(&mut coupled, &mut plain);
    let p = ks_p_value_two_sample(d, reps, reps);
    assert!(p >= 0.01, "marginal KS p-value {p} (stat {d})");
}

/// The basic coupling gives a smaller mean `d̃` than independent runs on a
/// matched budget: the coupling bound is genuinely tighter.
#[test]
fn coupled_bound_tighter_than_independent_pairs() {
    let (kernel, potential, prior) = ssl_setup(16);
    let params = SemimetricParams::with_exponent(0.0).unwrap();
    let mut rng = RngStream::new(61010);
    let u0 = sample_gamma_prior(&prior, &mut rng);
    let v0 = sample_gamma_prior(&prior, &mut rng);

    let reps = 20_000;
    let mut coupled_pairs = Vec::with_capacity(reps);
    let mut indep_pairs = Vec::with_capacity(reps);
    let mut rng_c = RngStream::replica(61011, 1);
    let mut rng_a = RngStream::replica(61012, 2);
    let mut rng_b = RngStream::replica(61013, 3);
    for _ in 0..reps {
        coupled_pairs.push(basic_coupled_step(&u0, &v0, &kernel, &potential, &mut rng_c).unwrap());
        let a = rcar_step(&u0, &kernel, &potential, &mut rng_a).unwrap().next;
        let b = rcar_step(&v0, &kernel, &potential, &mut rng_b).unwrap().next;
        indep_pairs.push((a, b));
    }
    let coupled_mean = coupled_tilde_d_mean(&coupled_pairs, &params).unwrap();
    let indep_mean = coupled_tilde_d_mean(&indep_pairs, &params).unwrap();
    assert!(
        coupled_mean < indep_mean,
        "coupled bound {coupled_mean} not below independent bound {indep_mean}"
    );
}

/// Median coupled distance over replicas does not increase along a dyadic
/// step grid on the sigmoid-observation target.
#[test]
fn coupled_distance_trend_non_increasing() {
    let (kernel, potential, prior) = ssl_setup(16);
    let params = SemimetricParams::with_exponent(0.0).unwrap();
    let replicas = 64;
    let total_steps = 64;
    let checkpoints = [1usize, 2, 4, 8, 16, 32, 64];

    let mut histories: Vec<Vec<f64>> = Vec::with_capacity(replicas);
    for i in 0..replicas {
        let mut rng = RngStream::replica(61020, i as u64);
        let u0 = sample_gamma_prior(&prior, &mut rng);
        let v0 = sample_gamma_prior(&prior, &mut rng);
        let trace = run_coupled_chain(
            u0,
            v0,
            total_steps,
            &kernel,
            &potential,
            &params,
            &mut rng,
        )
        .unwrap();
        histories.push(trace.d_history);
    }

    let median_at = |n: usize| -> f64 {
        let mut vals: Vec<f64> = histories.iter().map(|h| h[n - 1]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals[vals.len() / 2]
    };
    let medians: Vec<f64> = checkpoints.iter().map(|n| median_at(*n)).collect();
    for w in medians.windows(2) {
        assert!(
            w[1] <= w[0] + 0.02,
            "median coupled distance increased: {medians:?}"
        );
    }
    assert!(
        medians[checkpoints.len() - 1] < medians[0],
        "no overall contraction: {medians:?}"
    );
}
