//! Benchmarks for the brute-force scans, comparing the sequential path
//! against the rayon path on the same workloads.
//!
//! With the default `parallel` feature the in-process seq/par pairs run
//! side by side; `cargo bench --no-default-features` benches the pure
//! sequential build (criterion baselines can then compare the two).

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use lnec::analyze::{min_distance, AnalyzeOpts};
use lnec::construct::{self, ConstructOpts};
use lnec::exec;
use lnec::fixtures;
use lnec::galois::FieldSpec;
use lnec::network::{EnumLimits, ErrorPattern, Network, TargetRef};

/// The rank-filter workload behind pattern enumeration: all size-3 subsets
/// of an 18-channel network, each tested by a max-flow computation.
fn bench_pattern_rank_scan(c: &mut Criterion) {
    let net = fixtures::parallel(18, 1);
    let t = net.node_index("t").unwrap();
    let target = TargetRef::Node(t);
    let n = net.n_channels();
    let count = exec::binomial(n as u64, 3).unwrap() as u64;
    let test = |r: u64| -> Option<u64> {
        let rho = ErrorPattern::from_indices(&net, exec::unrank_combination(n, 3, r)).unwrap();
        (net.pattern_rank(&rho, &target).unwrap() == 3).then_some(r)
    };

    let mut group = c.benchmark_group("pattern_rank_scan");
    group.bench_function("seq", |b| {
        b.iter(|| black_box(exec::filter_map_collect_seq(count, test).len()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("par", |b| {
        b.iter(|| black_box(exec::filter_map_collect_par(count, test).len()))
    });
    group.finish();
}

/// The intersect-test workload behind the distance search: every weight-3
/// pattern of a random 16-element-field code on the butterfly.
fn bench_distance_weight_scan(c: &mut Criterion) {
    let net = fixtures::butterfly();
    let code = construct::random_code(&net, &FieldSpec::binary(4), 42).unwrap();
    let t = net.node_index("t1").unwrap();
    let view = code.decoding_view(&TargetRef::Node(t)).unwrap();
    let phi = view.message_space();
    let n = net.n_channels();
    let count = exec::binomial(n as u64, 3).unwrap() as u64;
    let test = |r: u64| -> Option<u64> {
        let rho = ErrorPattern::from_indices(&net, exec::unrank_combination(n, 3, r)).unwrap();
        let delta = view.error_space(&rho);
        lnec::galois::spaces_intersect_nontrivially(&delta, &phi, code.field())
            .unwrap()
            .then_some(r)
    };

    let mut group = c.benchmark_group("distance_weight_scan");
    group.bench_function("seq", |b| {
        b.iter(|| black_box(exec::min_map_seq(count, test)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("par", |b| {
        b.iter(|| black_box(exec::min_map_par(count, test)))
    });
    group.finish();
}

/// Public entry points under the active feature set.
fn bench_public_ops(c: &mut Criterion) {
    let tp = fixtures::three_path();
    c.bench_function("multicast_construct/three_path_gf13", |b| {
        b.iter(|| {
            black_box(
                construct::multicast_mds(&tp, &FieldSpec::prime(13), &ConstructOpts::default())
                    .unwrap()
                    .code,
            )
        })
    });

    let code = {
        let net = fixtures::three_path();
        lnec::code::LnecCode::new(
            net.clone(),
            lnec::galois::Field::prime(5).unwrap(),
            fixtures::all_ones_kernels(&net),
        )
        .unwrap()
    };
    let t = TargetRef::Node(tp.node_index("t").unwrap());
    c.bench_function("min_distance/three_path_repetition", |b| {
        b.iter(|| {
            black_box(
                min_distance(&code, &t, &AnalyzeOpts::default())
                    .unwrap()
                    .d_by_size,
            )
        })
    });

    let bfly: Network = fixtures::butterfly();
    let t1 = bfly.node_index("t1").unwrap();
    c.bench_function("full_rank_patterns/butterfly_weight2", |b| {
        b.iter(|| {
            black_box(
                bfly.full_rank_patterns(t1, 2, &EnumLimits::budget(1_000_000))
                    .unwrap()
                    .len(),
            )
        })
    });
}

criterion_group!(
    benches,
    bench_pattern_rank_scan,
    bench_distance_weight_scan,
    bench_public_ops
);
criterion_main!(benches);
