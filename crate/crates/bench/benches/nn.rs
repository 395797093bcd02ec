use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand_chacha::ChaCha8Rng;
use satd_core::detector::{layer_plan, DlNet};
use satd_core::generator::GenNet;
use satd_core::nn::Pooling;
use satd_core::rng::stream_rng;
use satd_core::text::{EOS_INDEX, SOS_INDEX};

fn detector_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("detector loss+grad, 100 tokens");
    let x: Vec<usize> = (0..100).map(|i| 1 + i % 499).collect();
    for latent in [32, 64, 128] {
        let net = DlNet::new(
            500,
            latent,
            &layer_plan(latent, 1).unwrap(),
            Pooling::Max,
            1.0,
            &mut stream_rng(0, 0),
        );
        group.bench_with_input(BenchmarkId::from_parameter(latent), &net, |b, net| {
            b.iter(|| {
                net.loss_and_grad::<ChaCha8Rng>(black_box(&x), true, None)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn generator_step(c: &mut Criterion) {
    let net = GenNet::new(500, 300, 64, 1, 1.0, &mut stream_rng(0, 1));
    let code: Vec<usize> = (0..60).map(|i| 1 + i % 499).collect();
    let mut framed = vec![SOS_INDEX];
    framed.extend((0..12).map(|i| 3 + i % 290));
    framed.push(EOS_INDEX);
    c.bench_function("generator loss+grad, 60 code / 12 words", |b| {
        b.iter(|| {
            net.loss_and_grad::<ChaCha8Rng>(black_box(&code), &framed, None)
                .unwrap()
        })
    });
    c.bench_function("generator greedy decode, 60 code tokens", |b| {
        b.iter(|| net.greedy_decode(black_box(&code), 20).unwrap())
    });
}

criterion_group!(benches, detector_step, generator_step);
criterion_main!(benches);
