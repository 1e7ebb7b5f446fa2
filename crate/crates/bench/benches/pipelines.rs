use cantorkit::adversary::adversarial_tree;
use cantorkit::density::{density_witness_greedy, density_witness_maximization};
use cantorkit::forcing::{forcing_step, lookup, splitting_extend};
use cantorkit::{extract_perfect, prune, Condition, HaltingTable};
use cantorkit_bench::{dyadic, tree};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn pruning(c: &mut Criterion) {
    let mut group = c.benchmark_group("prune");
    for depth in [10, 14, 18] {
        let t = tree(depth, "3/4", 1);
        let eps = dyadic("1/8");
        group.bench_with_input(BenchmarkId::from_parameter(depth), &t, |b, t| {
            b.iter(|| prune(black_box(t), &eps))
        });
    }
    group.finish();
}

fn extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract");
    for depth in [9, 12] {
        let t = tree(depth, "7/8", 2);
        let eps = dyadic("1/2");
        group.bench_with_input(BenchmarkId::from_parameter(depth), &t, |b, t| {
            b.iter(|| extract_perfect(black_box(t), &eps).unwrap())
        });
    }
    group.finish();
}

fn density(c: &mut Criterion) {
    let t = tree(16, "1/2", 3);
    let eps = dyadic("1/4");
    let delta = t.measure().half();
    c.bench_function("density/greedy/16", |b| {
        b.iter(|| density_witness_greedy(black_box(&t), &eps).unwrap())
    });
    c.bench_function("density/maximization/16", |b| {
        b.iter(|| density_witness_maximization(black_box(&t), &eps, &delta).unwrap())
    });
}

fn adversary(c: &mut Criterion) {
    let h = HaltingTable::new(vec![Some(5), None, Some(12), Some(1), None, Some(30)]);
    c.bench_function("adversary/encode/16", |b| {
        b.iter(|| adversarial_tree(black_box(&h), 16).unwrap())
    });
}

fn forcing(c: &mut Criterion) {
    let t = tree(6, "15/16", 4);
    let root = Condition::initial(t.clone(), t);
    let c1 = splitting_extend(&root).unwrap();
    c.bench_function("force/split/6", |b| {
        b.iter(|| splitting_extend(black_box(&c1)).unwrap())
    });
    for id in ["parity", "majority"] {
        let phi = lookup(id, 3).unwrap();
        c.bench_function(&format!("force/step/{id}"), |b| {
            b.iter(|| forcing_step(black_box(&c1), phi.as_ref(), &[true, false, true], 4).unwrap())
        });
    }
}

criterion_group!(benches, pruning, extraction, density, adversary, forcing);
criterion_main!(benches);
