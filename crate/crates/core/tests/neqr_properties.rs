mod common;

use common::{all_2x2_q2, max_deviation, random_images, reference_neqr};
use qpix_core::{
    analytic_neqr_state, build_neqr_circuit, decode_from_counts, marginal_probabilities, GrayImage,
    MeasurementCounts, Statevector,
};

fn circuit_state(img: &GrayImage) -> Statevector {
    let c = build_neqr_circuit(img).unwrap();
    let mut s = Statevector::new(c.num_qubits()).unwrap();
    s.apply_circuit(&c).unwrap();
    s
}

fn test_images() -> Vec<GrayImage> {
    let mut images = random_images(0x5eed, 100);
    images.extend(all_2x2_q2());
    images
}

#[test]
fn sample_state_via_both_paths() {
    let img = GrayImage::new(1, 8, vec![0, 100, 200, 255]).unwrap();
    let analytic = analytic_neqr_state(&img).unwrap();
    let circuit = circuit_state(&img);
    assert!(max_deviation(analytic.amplitudes(), circuit.amplitudes()) < 1e-10);
    for s in [&analytic, &circuit] {
        let nz: Vec<usize> = (0..s.dimension())
            .filter(|&k| s.amplitude(k).norm() > 1e-10)
            .collect();
        assert_eq!(nz, vec![0, 356, 712, 1023]);
        for k in nz {
            assert!((s.amplitude(k).norm() - 0.5).abs() < 1e-10);
        }
    }
}

#[test]
fn analytic_matches_bitstring_reference() {
    for img in test_images() {
        let s = analytic_neqr_state(&img).unwrap();
        assert!(max_deviation(s.amplitudes(), &reference_neqr(&img)) < 1e-15);
    }
}

#[test]
fn circuit_matches_analytic() {
    let mut worst = 0.0f64;
    for img in test_images() {
        let a = analytic_neqr_state(&img).unwrap();
        let c = circuit_state(&img);
        worst = worst.max(max_deviation(a.amplitudes(), c.amplitudes()));
        assert!((c.norm() - 1.0).abs() < 1e-10);
    }
    assert!(worst < 1e-10, "max deviation {worst}");
}

#[test]
fn support_and_position_marginals() {
    for img in test_images() {
        let layout = img.layout();
        let s = circuit_state(&img);
        let amp = 1.0 / layout.side() as f64;
        let nonzero: Vec<_> = s.amplitudes().iter().filter(|a| a.norm() > 1e-12).collect();
        assert!(nonzero.len() <= layout.num_pixels());
        assert!(nonzero.iter().all(|a| (a.norm() - amp).abs() < 1e-10));

        let marg = marginal_probabilities(
            &s.probabilities(),
            layout.position_offset(),
            2 * layout.side_exp() as usize,
        );
        let expected = 1.0 / layout.num_pixels() as f64;
        assert!(marg.iter().all(|p| (p - expected).abs() < 1e-12));
    }
}

#[test]
fn decode_inverts_encode_on_exact_counts() {
    for img in test_images() {
        let s = analytic_neqr_state(&img).unwrap();
        for shots in [4u64, 1000] {
            // exact expected counts: p * shots, with p = 1/N
            let counts = MeasurementCounts::from_counts(
                s.num_qubits(),
                s.probabilities().iter().enumerate().map(|(k, p)| {
                    (
                        k,
                        (p * shots as f64 * img.pixels().len() as f64).round() as u64,
                    )
                }),
            )
            .unwrap();
            assert_eq!(decode_from_counts(&counts, img.layout()).unwrap(), img);
        }
    }
}

#[test]
fn sample_state_histogram_band() {
    let img = GrayImage::new(1, 8, vec![0, 100, 200, 255]).unwrap();
    let s = analytic_neqr_state(&img).unwrap();
    let p = s.probabilities();
    for k in [0, 356, 712, 1023] {
        assert!((p[k] - 0.25).abs() < 1e-12);
    }
    for seed in 0..20 {
        let counts = s.sample(4096, seed).unwrap();
        for k in [0, 356, 712, 1023] {
            let c = counts.get(k) as i64;
            assert!((c - 1024).abs() <= 150, "seed {seed} index {k}: {c}");
        }
        assert_eq!(decode_from_counts(&counts, img.layout()).unwrap(), img);
    }
}
