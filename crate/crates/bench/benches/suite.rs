//! Benchmarks for the hot paths: witness search over superposed chains,
//! full process validity (spanning plus sampled routes), and the dense
//! tensor primitives they are built on.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use procmat::channels::{random_unitary, random_pure_state};
use procmat::nogo::{find_violation, NoGoContext};
use procmat::process::{
    default_chain_parties, is_valid_process_vector, markovian_unitary_process, switch3, switch4,
    CausalOrder, ValidityOptions,
};
use procmat::tensor::{LabeledOperator, SpaceLayout};
use procmat::Complex64 as C64;

fn context(dim: usize, seed: u64) -> NoGoContext {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let u: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(dim, &mut rng)).collect();
    let v: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(dim, &mut rng)).collect();
    NoGoContext::new(&u, &v, C64::new(0.6, 0.15), C64::new(-0.3, 0.45)).expect("valid context")
}

fn witness_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("witness_search");
    for dim in [2usize, 3] {
        let ctx = context(dim, 40 + dim as u64);
        group.bench_function(format!("d{dim}"), |b| {
            b.iter(|| find_violation(black_box(&ctx)).expect("violation found"))
        });
    }
    group.finish();
}

fn process_validity(c: &mut Criterion) {
    let mut group = c.benchmark_group("process_validity");
    let opts = ValidityOptions::default();

    let w4 = switch4();
    group.bench_function("switch4", |b| {
        b.iter(|| is_valid_process_vector(black_box(&w4), &opts).expect("check runs"))
    });

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let psi = random_pure_state(2, &mut rng);
    let w3 = switch3(&psi).expect("valid switch");
    group.bench_function("switch3", |b| {
        b.iter(|| is_valid_process_vector(black_box(&w3), &opts).expect("check runs"))
    });

    let parties = default_chain_parties(2, 2).expect("chain parties");
    let us: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
    let chain = markovian_unitary_process(&parties, &CausalOrder::sequential(2), &us)
        .expect("valid chain");
    group.bench_function("chain_two_middles_d2", |b| {
        b.iter(|| is_valid_process_vector(black_box(&chain), &opts).expect("check runs"))
    });
    group.finish();
}

fn tensor_primitives(c: &mut Criterion) {
    let mut group = c.benchmark_group("tensor_primitives");
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let relabel = |label: &str, op: LabeledOperator| {
        LabeledOperator::square(
            SpaceLayout::single(label, 16).expect("valid layout"),
            op.into_matrix(),
        )
        .expect("square matrix")
    };
    let a = relabel("a", random_unitary(16, &mut rng));
    let b16 = relabel("b", random_unitary(16, &mut rng));
    group.bench_function("kronecker_16x16", |b| {
        b.iter(|| black_box(&a).tensor(black_box(&b16)).expect("disjoint labels"))
    });

    let w = switch4();
    let proj = w.vector().outer(w.vector());
    group.bench_function("partial_trace_256_to_64", |b| {
        b.iter(|| black_box(&proj).partial_trace(&["A_I", "A_O"]).expect("labels exist"))
    });
    group.finish();
}

criterion_group!(benches, witness_search, process_validity, tensor_primitives);
criterion_main!(benches);
