use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use nsdwt::rng::random_image;
use nsdwt::{all_variants, build_variant, compile, get_wavelet, polyphase_split, Extension, Precision, SchemeKind};

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn schemes(c: &mut Criterion) {
    for name in ["cdf53", "cdf97"] {
        let w = get_wavelet(name).unwrap();
        let mut group = c.benchmark_group(format!("transform/{name}"));
        group.sample_size(10);
        for size in [256usize, 1024] {
            let input = polyphase_split(&random_image(size, size, 1, Precision::F32), Extension::Periodic).unwrap();
            // one read and one write of the image per transform
            group.throughput(Throughput::Bytes((2 * size * size * 4) as u64));
            for s in all_variants(&w).unwrap() {
                let plan = compile(&s, Precision::F32, Extension::Periodic, workers());
                group.bench_with_input(BenchmarkId::new(s.id(), size), &input, |b, input| {
                    b.iter(|| plan.run(input).unwrap())
                });
            }
        }
        group.finish();
    }
}

fn worker_scaling(c: &mut Criterion) {
    let w = get_wavelet("cdf97").unwrap();
    let s = build_variant(SchemeKind::NonSeparableLifting, &w, true).unwrap();
    let input = polyphase_split(&random_image(2048, 2048, 1, Precision::F32), Extension::Periodic).unwrap();
    let mut group = c.benchmark_group("workers/cdf97-ns-lift+opt");
    group.sample_size(10);
    let mut counts = vec![1, 2, workers()];
    counts.sort_unstable();
    counts.dedup();
    for n in counts {
        let plan = compile(&s, Precision::F32, Extension::Periodic, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &input, |b, input| {
            b.iter(|| plan.run(input).unwrap())
        });
    }
    group.finish();
}

fn algebra(c: &mut Criterion) {
    let w = get_wavelet("cdf97").unwrap();
    c.bench_function("build/cdf97-all-variants", |b| b.iter(|| all_variants(&w).unwrap()));
    c.bench_function("build/cdf97-ns-conv-count", |b| {
        b.iter(|| {
            build_variant(SchemeKind::NonSeparableConvolution, &w, true)
                .unwrap()
                .count_operations()
        })
    });
}

criterion_group!(benches, schemes, worker_scaling, algebra);
criterion_main!(benches);
