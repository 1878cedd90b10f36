use std::time::Instant;

use proptest::prelude::*;
use rand::Rng;
use subsys::bp::{self, BpConfig, TannerGraph};
use subsys::classical::{code_from_graph, sample_biregular};
use subsys::codes::{build_bbs, build_shp, SubsystemCode};
use subsys::exec::trial_rng;
use subsys::induced::{InducedDecoder, SyndromeFrame};
use subsys::stats::BernoulliSampler;
use subsys::{BinaryMatrix, BitVector};

fn ldpc(n: usize, seed: u64) -> subsys::classical::ClassicalCode {
    code_from_graph(&sample_biregular(n, 3, 6, seed).unwrap())
}

fn random_gauge_product<R: Rng>(n: usize, gens: &[Vec<usize>], rng: &mut R) -> BitVector {
    let mut g = BitVector::zeros(n);
    for gen in gens {
        if rng.random_bool(0.5) {
            g.xor_assign(&BitVector::from_indices(n, gen));
        }
    }
    g
}

fn check_decoder(code: &SubsystemCode, p: f64, seed: u64) -> Result<(), TestCaseError> {
    let n = code.n_qubits();
    let dec = InducedDecoder::new(code, p.max(0.01), 0.0).unwrap();
    let mut rng = trial_rng(seed, 0);
    let sampler = BernoulliSampler::new(p);
    for _ in 0..20 {
        let x = BitVector::from_indices(n, &sampler.sample(n, &mut rng));
        let z = BitVector::from_indices(n, &sampler.sample(n, &mut rng));
        let corr = dec.decode(&SyndromeFrame::of_error(code, &x, &z));
        if corr.converged {
            prop_assert!(code.z_syndrome_of(&x.xor(&corr.x_corr)).is_zero());
            prop_assert!(code.x_syndrome_of(&z.xor(&corr.z_corr)).is_zero());
        }
        // the correction sees the syndrome only, so gauge-equivalent errors match
        let x2 = x.xor(&random_gauge_product(n, code.gauge_x(), &mut rng));
        let z2 = z.xor(&random_gauge_product(n, code.gauge_z(), &mut rng));
        let corr2 = dec.decode(&SyndromeFrame::of_error(code, &x2, &z2));
        prop_assert_eq!(&corr.x_corr, &corr2.x_corr);
        prop_assert_eq!(&corr.z_corr, &corr2.z_corr);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bbs_corrections_are_consistent(seed in any::<u64>(), half in 6usize..12, p in 0.0f64..0.03) {
        let c = ldpc(2 * half, seed);
        let code = build_bbs(&c, &c, &BinaryMatrix::identity(c.k())).unwrap();
        check_decoder(&code, p, seed)?;
    }

    #[test]
    fn shp_corrections_are_consistent(seed in any::<u64>(), p in 0.0f64..0.03) {
        let h1 = ldpc(8, seed);
        let h2 = ldpc(10, seed ^ 1);
        let code = build_shp(h1.parity_check(), h2.parity_check()).unwrap();
        check_decoder(&code, p, seed)?;
    }
}

fn ring(n: usize) -> BinaryMatrix {
    BinaryMatrix::from_supports(n, &(0..n).map(|i| vec![i, (i + 1) % n]).collect::<Vec<_>>())
}

fn rotate(v: &BitVector, k: usize) -> BitVector {
    let n = v.len();
    BitVector::from_indices(n, &v.ones_iter().map(|i| (i + k) % n).collect::<Vec<_>>())
}

#[test]
fn ring_decoding_commutes_with_rotation() {
    // check i covers bits i and i+1, so rotating bits rotates checks
    let n = 7;
    for measurement in [false, true] {
        let g = TannerGraph::new(&ring(n), measurement);
        let cfg = BpConfig::new(0.08, 0.05).unwrap();
        for bits in 0u64..1 << n {
            let s = BitVector::from_indices(n, &(0..n).filter(|&j| bits >> j & 1 == 1).collect::<Vec<_>>());
            let base = bp::decode(&g, &cfg, &s);
            for k in 1..n {
                let r = bp::decode(&g, &cfg, &rotate(&s, k));
                assert_eq!(r.data_correction, rotate(&base.data_correction, k));
                assert_eq!(r.meas_correction, rotate(&base.meas_correction, k));
                assert_eq!(r.converged, base.converged);
            }
        }
    }
}

#[test]
fn a_million_decodes_stay_finite() {
    let code = ldpc(24, 5);
    let h = code.parity_check();
    let g = TannerGraph::new(h, true);
    let mut rng = trial_rng(17, 0);
    let mut decodes = 0u64;
    while decodes < 1_000_000 {
        let cfg = BpConfig::new(rng.random_range(1e-4..0.45), rng.random_range(1e-4..0.45))
            .unwrap()
            .with_max_iters(1 + rng.random_range(0..4))
            .unwrap();
        let prior = bp::init_llrs(&cfg, &BitVector::zeros(h.rows()));
        let bound = cfg.clip * h.rows() as f64 + prior.data.abs() + prior.meas.abs();
        for _ in 0..100 {
            let s = BitVector::from_indices(h.rows(), &(0..h.rows()).filter(|_| rng.random_bool(0.5)).collect::<Vec<_>>());
            let r = bp::decode(&g, &cfg, &s);
            for l in r.data_posterior.iter().chain(&r.meas_posterior) {
                assert!(l.is_finite() && l.abs() <= bound, "posterior {l}");
            }
            decodes += 1;
        }
    }
}

/// Seconds per BBS decode, with one flipped qubit in each column with
/// probability `col_p` so the classical channel is the same at every size.
fn bbs_decode_time(n: usize, col_p: f64) -> f64 {
    let c = ldpc(n, 11);
    let code = build_bbs(&c, &c, &BinaryMatrix::identity(c.k())).unwrap();
    let dec = InducedDecoder::new(&code, col_p, 0.0).unwrap();
    let n_qubits = code.n_qubits();
    let mut rng = trial_rng(12, n as u64);
    let columns: Vec<Vec<usize>> = {
        let mut cols = vec![Vec::new(); n];
        for q in 0..n_qubits {
            cols[code.layout()[q].col].push(q);
        }
        cols
    };
    let frames: Vec<SyndromeFrame> = (0..200)
        .map(|_| {
            let mut x = BitVector::zeros(n_qubits);
            for col in columns.iter().filter(|c| !c.is_empty()) {
                if rng.random_bool(col_p) {
                    x.flip(col[rng.random_range(0..col.len())]);
                }
            }
            SyndromeFrame::of_error(&code, &x, &BitVector::zeros(n_qubits))
        })
        .collect();
    let mut best = f64::INFINITY;
    for _ in 0..5 {
        let t = Instant::now();
        for f in &frames {
            std::hint::black_box(dec.decode(f));
        }
        best = best.min(t.elapsed().as_secs_f64() / frames.len() as f64);
    }
    best
}

#[test]
fn bbs_decoding_scales_at_most_linearly_in_n() {
    let times: Vec<f64> = [60, 120, 240].iter().map(|&n| bbs_decode_time(n, 0.02)).collect();
    // doubling n should at most double the time; allow a factor 2 for noise
    for w in times.windows(2) {
        assert!(w[1] / w[0] <= 4.0, "decode times {times:?}");
    }
}
