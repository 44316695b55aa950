use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use flagqec::*;

struct Setup {
    code: CssCode,
    hf: FaultCheckMatrix,
    table: LookupTable,
    ordering: CnotOrdering,
}

fn setup(d: usize) -> Setup {
    let (code, _) = build_hex_color_code(d).unwrap();
    let ordering = CnotOrdering::ascending(&code);
    let hf = build_fault_check_matrix(&code, &ordering);
    let table = build_cache(&hf, code.t()).unwrap();
    Setup {
        code,
        hf,
        table,
        ordering,
    }
}

fn bench_cache_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("cache_build");
    for d in [3usize, 5, 7] {
        let (code, _) = build_hex_color_code(d).unwrap();
        let ordering = CnotOrdering::ascending(&code);
        let hf = build_fault_check_matrix(&code, &ordering);
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| build_cache(black_box(&hf), code.t()).unwrap())
        });
    }
    group.finish();
}

fn bench_decode(c: &mut Criterion) {
    let s = setup(5);
    let r = s.code.generators();
    // a weight-2 hook syndrome that is present in the table
    let v = BitVec::from_support(s.hf.columns(), &[30, 55]);
    let (sigma, _) = s.hf.fault_vector_outcome(&v);
    let missing = FullSyndrome::new(
        BitVec::from_support(r, &[0, 2, 5, 7]),
        BitVec::from_support(r, &[1, 3, 6]),
    );
    c.bench_function("decode_hit_d5", |b| {
        b.iter(|| decode(black_box(&s.table), &s.code, black_box(&sigma)))
    });
    c.bench_function("mim_decode_miss_d5", |b| {
        b.iter(|| mim_decode(black_box(&s.table), &s.hf, &s.code, black_box(&missing), 2))
    });
}

fn bench_protocol_shot(c: &mut Criterion) {
    let mut group = c.benchmark_group("protocol_shot");
    group.sample_size(20);
    for d in [3usize, 5, 9] {
        let s = setup(d);
        let decoder = DecoderConfig {
            kind: DecoderKind::TwoTailed,
            strategy: Strategy::Zx,
            mim: true,
            rho: s.code.t(),
        };
        let protocol = Protocol::new(
            &s.code,
            &s.hf,
            &s.table,
            &s.ordering,
            decoder,
            NoiseParams::gate_only(1e-3),
            99,
        )
        .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            let mut shot = 0u64;
            b.iter(|| {
                shot += 1;
                protocol.run_shot(black_box(shot))
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_cache_build, bench_decode, bench_protocol_shot);
criterion_main!(benches);
