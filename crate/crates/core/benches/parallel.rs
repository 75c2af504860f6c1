use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use teichlab::flow::{mixing_correlation, FlowBox};
use teichlab::hyp::ModelPoint;
use teichlab::mcg::{enumerate_raw, EnumOptions};
use teichlab::par::Exec;

fn modes() -> [(&'static str, Exec); 2] {
    [("serial", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_r5");
    for (name, exec) in modes() {
        let opts = EnumOptions {
            exec,
            ..Default::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| enumerate_raw(black_box(5.0), &opts).unwrap().len())
        });
    }
    g.finish();
}

fn mixing(c: &mut Criterion) {
    let u = FlowBox::with_measure(ModelPoint::new(0.0, 1.4).unwrap(), PI, 0.015).unwrap();
    let mut g = c.benchmark_group("mixing_r4_1e5");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(name, |b| {
            b.iter(|| mixing_correlation(&u, black_box(4.0), 100_000, 1, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, enumeration, mixing);
criterion_main!(benches);
