//! Exit-kernel acceleration against step-by-step walks out of `B[n]`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use uidla_core::lattice::{Aggregate, Dim, LatticePoint};
use uidla_core::rng::Streams;
use uidla_core::walk::Walker;

fn exits(c: &mut Criterion) {
    let dim = Dim::new(2).unwrap();
    let plain = Walker::plain(dim);
    let accel = Walker::accelerated(dim, 12).unwrap();
    let mut group = c.benchmark_group("exit_from_ball");
    for n in [10.0, 40.0] {
        let ball = Aggregate::ball(dim, n).unwrap();
        for (name, w) in [("plain", &plain), ("accelerated", &accel)] {
            group.bench_with_input(BenchmarkId::new(name, n), &ball, |b, ball| {
                let mut k = 0u64;
                b.iter(|| {
                    k += 1;
                    w.walk_until_exit(LatticePoint::ORIGIN, ball, &mut Streams::new(1, 0).particle(k)).unwrap().exit
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, exits);
criterion_main!(benches);
