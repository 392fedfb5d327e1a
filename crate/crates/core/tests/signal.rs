use choreo_core::pose_pipeline::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-50.0..50.0)).collect()
}

/// Per-bin DFT with trigonometry evaluated directly at each (k, n).
fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let a = -2.0 * PI * (k * t) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            (re, im)
        })
        .collect()
}

/// Windowed mean over an explicitly replicated-edge buffer.
fn blur_oracle(x: &[f64], size: usize) -> Vec<f64> {
    let half = size / 2;
    let mut padded = vec![x[0]; half];
    padded.extend_from_slice(x);
    padded.extend(std::iter::repeat(x[x.len() - 1]).take(half));
    (0..x.len()).map(|i| padded[i..i + size].iter().sum::<f64>() / size as f64).collect()
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[test]
fn dft_matches_naive_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1, 2, 7, 64, 100] {
        let x = random_signal(&mut rng, n);
        let fast = dft(&x);
        for (b, (re, im)) in fast.bins.iter().zip(naive_dft(&x)) {
            assert!((b.re - re).abs() < 1e-9 && (b.im - im).abs() < 1e-9, "n={n}");
        }
    }
}

#[test]
fn round_trip_within_1e9() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [3, 64, 255, 1024, 4096] {
        let x = random_signal(&mut rng, n);
        let back = idft(&dft(&x)).unwrap();
        let worst = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-9, "n={n}: {worst:e}");
    }
}

#[test]
fn real_input_is_conjugate_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_signal(&mut rng, 128);
    let s = dft(&x);
    for k in 1..128 {
        let d = s.bins[128 - k] - s.bins[k].conj();
        assert!(d.norm() < 1e-9);
    }
}

#[test]
fn pure_cosine_lands_in_its_bins() {
    for (n, k0, a) in [(256usize, 5usize, 1.0), (300, 10, 0.4), (4096, 100, 2.5)] {
        let x: Vec<f64> = (0..n).map(|t| a * (2.0 * PI * (k0 * t) as f64 / n as f64).cos()).collect();
        let mags = dft(&x).magnitudes();
        let expect = n as f64 * a / 2.0;
        assert!((mags[k0] - expect).abs() <= 1e-6);
        assert!((mags[n - k0] - expect).abs() <= 1e-6);
        for (k, m) in mags.iter().enumerate() {
            if k != k0 && k != n - k0 {
                assert!(*m < 1e-6, "bin {k}");
            }
        }
    }
}

#[test]
fn filtering_never_adds_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..100 {
        let n = rng.random_range(8..300);
        let x = random_signal(&mut rng, n);
        for mode in [FilterMode::Magnitude, FilterMode::LowpassBins] {
            let threshold = if mode == FilterMode::Magnitude { rng.random_range(0.0..400.0) } else { rng.random_range(0.0..20.0) };
            let cfg = FilterConfig { blur_size: 1, threshold, mode };
            let y = frequency_filter(&x, &cfg).unwrap();
            let (ein, eout) = (dft(&x).energy(), dft(&y).energy());
            assert!(eout <= ein * (1.0 + 1e-12), "signal {i} {mode:?}");
            assert!(energy(&y) <= energy(&x) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn blur_matches_windowed_mean_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(15..400);
        let x = random_signal(&mut rng, n);
        assert_eq!(box_blur(&x, 15).unwrap(), blur_oracle(&x, 15));
    }
}

#[test]
fn blur_rejects_bad_sizes() {
    assert!(box_blur(&[1.0; 20], 4).is_err());
    assert!(box_blur(&[1.0; 10], 15).is_err());
    assert_eq!(box_blur(&[1.0, 2.0, 3.0], 1).unwrap(), vec![1.0, 2.0, 3.0]);
}

#[test]
fn lowpass_keeps_only_low_bins() {
    let n = 200;
    let x: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64 / n as f64;
            (2.0 * PI * 3.0 * t).cos() + 0.5 * (2.0 * PI * 40.0 * t).sin()
        })
        .collect();
    let y = frequency_filter(&x, &FilterConfig { blur_size: 1, threshold: 10.0, mode: FilterMode::LowpassBins }).unwrap();
    for (t, v) in y.iter().enumerate() {
        let expect = (2.0 * PI * 3.0 * t as f64 / n as f64).cos();
        assert!((v - expect).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn dft_is_linear(
        x in prop::collection::vec(-10.0..10.0f64, 64),
        y in prop::collection::vec(-10.0..10.0f64, 64),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (fx, fy, fm) = (dft(&x), dft(&y), dft(&mix));
        for k in 0..64 {
            let d = fm.bins[k] - (fx.bins[k] * a + fy.bins[k] * b);
            prop_assert!(d.norm() < 1e-9);
        }
    }

    #[test]
    fn blur_stays_within_signal_range(x in prop::collection::vec(-5.0..5.0f64, 15..80), half in 0usize..7) {
        let size = 2 * half + 1;
        let out = box_blur(&x, size).unwrap();
        let (lo, hi) = x.iter().fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(*v), h.max(*v)));
        for v in out {
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
