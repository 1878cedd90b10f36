use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::reference::*;
use super::*;
use crate::classical::{min_distance_bruteforce, ClassicalCode};

fn hamming() -> ClassicalCode {
    ClassicalCode::hamming_7_4()
}

fn hamming_bbs() -> SubsystemCode {
    build_bbs(&hamming(), &hamming(), &hamming_bbs_q()).unwrap()
}

fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> BinaryMatrix {
    let mut m = BinaryMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, rng.random());
        }
    }
    m
}

fn random_full_rank<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> BinaryMatrix {
    loop {
        let m = random_matrix(rows, cols, rng);
        if m.rank() == rows {
            return m;
        }
    }
}

/// Full-rank generator with no coordinate that is zero in every codeword.
fn random_generator<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> BinaryMatrix {
    loop {
        let m = random_full_rank(rows, cols, rng);
        if (0..cols).all(|c| !m.column(c).is_zero()) {
            return m;
        }
    }
}

#[test]
fn pauli_commutation_and_display() {
    let x = PauliOp::x_type(BitVector::from_indices(3, &[0, 1]));
    let z = PauliOp::z_type(BitVector::from_indices(3, &[1]));
    assert!(x.anticommutes(&z));
    assert!(!x.anticommutes(&PauliOp::z_type(BitVector::from_indices(3, &[0, 1]))));
    assert_eq!(x.mul(&z).to_string(), "X0 Y1");
    assert_eq!(PauliOp::identity(2).to_string(), "I");
    assert_eq!(x.mul(&z).weight(), 2);
}

#[test]
fn hamming_bbs_parameters_and_support() {
    let code = hamming_bbs();
    assert_eq!((code.n_qubits(), code.k()), (21, 4));
    if let Construction::Bbs { a, .. } = code.construction() {
        assert_eq!(*a, hamming_bbs_a());
    } else {
        panic!("wrong construction");
    }
    assert_eq!(subsystem_distance_bruteforce(&code, 24), Some(3));
    assert_eq!(code.k_from_ranks(), 4);
}

#[test]
fn hamming_bbs_matches_reference_table() {
    let code = hamming_bbs();
    assert!(code.stab_x().same_row_space(&support_matrix(&HAMMING_BBS_STAB_X)));
    assert!(code.stab_z().same_row_space(&support_matrix(&HAMMING_BBS_STAB_Z)));
    let tx = support_matrix(&HAMMING_BBS_LOGICAL_X);
    let tz = support_matrix(&HAMMING_BBS_LOGICAL_Z);
    // the reference logicals are bare
    let as_pairs = |m: &BinaryMatrix| BinaryMatrix::from_supports(21, &m.row_iter().map(|r| r.support()).collect::<Vec<_>>());
    assert!(first_anticommuting_sparse(&as_pairs(&tx), code.gauge_z()).is_none());
    assert!(first_anticommuting_sparse(&as_pairs(&tz), code.gauge_x()).is_none());
    // ...and span the same logical classes as ours
    assert_eq!(code.logical_x().mul_transpose(&tz).rank(), 4);
    assert_eq!(tx.mul_transpose(code.logical_z()).rank(), 4);
    // our Z choices coincide with the table
    assert_eq!(*code.logical_z(), tz);
    // the table's fourth X logical overlaps the third Z logical on qubit 6 only
    assert!(tx.row(3).dot(&tz.row(2)));
}

#[test]
fn weight_three_dressed_logical_hits_qubit_four() {
    let code = hamming_bbs();
    let z = BitVector::from_indices(21, &[4, 13, 19]);
    assert!(code.x_syndrome_of(&z).is_zero());
    assert!(!code.gauge_z_span().contains(&z));
    let flips = code.logical_flips_z(&z).unwrap();
    assert!(flips.get(3));
    // the reference X logicals see the same two flips (qubits 2 and 4)
    assert_eq!(support_matrix(&HAMMING_BBS_LOGICAL_X).mul_vec(&z), flips);
    assert_eq!(flips, BitVector::from_indices(4, &[1, 3]));
}

#[test]
fn bacon_shor_from_repetition() {
    let rep = ClassicalCode::repetition(3);
    let bbs = build_bbs(&rep, &rep, &BinaryMatrix::identity(1)).unwrap();
    assert_eq!((bbs.n_qubits(), bbs.k()), (9, 1));
    if let Construction::Bbs { a, .. } = bbs.construction() {
        assert_eq!(a.weight(), 9);
    }
    // XX on vertically adjacent sites, ZZ on horizontally adjacent ones
    let mut expected_x: Vec<Vec<usize>> = (0..3).flat_map(|c| [vec![c, c + 3], vec![c + 3, c + 6]]).collect();
    expected_x.sort();
    let mut got_x = bbs.gauge_x().to_vec();
    got_x.sort();
    assert_eq!(got_x, expected_x);
    let mut expected_z: Vec<Vec<usize>> = (0..3).flat_map(|r| [vec![3 * r, 3 * r + 1], vec![3 * r + 1, 3 * r + 2]]).collect();
    expected_z.sort();
    let mut got_z = bbs.gauge_z().to_vec();
    got_z.sort();
    assert_eq!(got_z, expected_z);
    assert_eq!(subsystem_distance_bruteforce(&bbs, 24), Some(3));

    let shp = build_shp(rep.parity_check(), rep.parity_check()).unwrap();
    assert_eq!((shp.n_qubits(), shp.k()), (9, 1));
    assert!(shp.gauge_x_matrix().same_row_space(&bbs.gauge_x_matrix()));
    assert!(shp.gauge_z_matrix().same_row_space(&bbs.gauge_z_matrix()));
}

#[test]
fn bbs_rejects_bad_q() {
    let h = hamming();
    assert!(build_bbs(&h, &h, &BinaryMatrix::zeros(4, 4)).is_err());
    assert!(build_bbs(&h, &ClassicalCode::repetition(3), &BinaryMatrix::identity(4)).is_err());
}

#[test]
fn minimize_q_reaches_21_qubits() {
    let h = hamming();
    let q = minimize_qubits_q(&h, &h, 40, 7).unwrap();
    assert_eq!(qubit_count(&h, &h, &q), 21);
    let one = minimize_qubits_q(&h, &h, 1, 7).unwrap();
    assert_eq!(one, BinaryMatrix::identity(4));
    assert_eq!(qubit_count(&h, &h, &one), h.generator().transpose().mul(h.generator()).weight());
}

#[test]
fn minimize_q_is_an_argmin_over_examined_candidates() {
    let h = hamming();
    let best = qubit_count(&h, &h, &minimize_qubits_q(&h, &h, 5, 3).unwrap());
    assert!(best <= qubit_count(&h, &h, &BinaryMatrix::identity(4)));
    assert!(best <= qubit_count(&h, &h, &minimize_qubits_q(&h, &h, 3, 3).unwrap()));
}

#[test]
fn bbs_parameter_theorem_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let k = rng.random_range(1..=3);
        let n1 = rng.random_range(k + 1..=7);
        let n2 = rng.random_range(k + 1..=7);
        let c1 = ClassicalCode::from_generator(&random_generator(k, n1, &mut rng));
        let c2 = ClassicalCode::from_generator(&random_generator(k, n2, &mut rng));
        let q = random_full_rank(k, k, &mut rng);
        let code = build_bbs(&c1, &c2, &q).unwrap();
        let d1 = min_distance_bruteforce(&c1, 24).unwrap();
        let d2 = min_distance_bruteforce(&c2, 24).unwrap();
        let n = code.n_qubits();
        assert!((n1 * d2).min(d1 * n2) <= n && n <= n1 * n2);
        let Construction::Bbs { a, .. } = code.construction() else { unreachable!() };
        assert_eq!(code.k(), a.rank());
        assert_eq!(code.k(), k);
        assert_eq!(subsystem_distance_bruteforce(&code, 24), Some(d1.min(d2)));
    }
}

#[test]
fn hamming_shp_parameters() {
    let h = hamming();
    let code = build_shp(h.parity_check(), h.parity_check()).unwrap();
    assert_eq!((code.n_qubits(), code.k()), (49, 16));
    assert_eq!(code.stab_x().rows() + code.stab_z().rows(), 24);
    assert_eq!(code.gauge_qubits(), 9);
    assert_eq!(code.n_qubits() - code.k() - 24, 9);
    assert_eq!(subsystem_distance_bruteforce(&code, 24), Some(3));
}

#[test]
fn shp_depends_only_on_row_spaces() {
    let h = hamming().parity_check().clone();
    let mut h2 = h.clone();
    h2.xor_row_into(0, 1);
    h2.swap_rows(0, 2);
    let a = build_shp(&h, &h).unwrap();
    let b = build_shp(&h2, &h).unwrap();
    assert!(a.gauge_x_matrix().same_row_space(&b.gauge_x_matrix()));
    assert!(a.gauge_z_matrix().same_row_space(&b.gauge_z_matrix()));
    assert!(a.stab_x().same_row_space(b.stab_x()));
    assert!(a.stab_z().same_row_space(b.stab_z()));
}

#[test]
fn shp_parameter_formula_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 25 {
        let (n1, n2) = (rng.random_range(3..=8), rng.random_range(3..=8));
        let h1 = random_matrix(rng.random_range(1..n1), n1, &mut rng);
        let h2 = random_matrix(rng.random_range(1..n2), n2, &mut rng);
        let c1 = ClassicalCode::from_parity_check(h1.clone());
        let c2 = ClassicalCode::from_parity_check(h2.clone());
        if c1.k() == 0 || c2.k() == 0 || c1.k() * c2.k() > 12 || n1 * n2 > 100 {
            continue;
        }
        let code = build_shp(&h1, &h2).unwrap();
        assert_eq!(code.n_qubits(), n1 * n2);
        assert_eq!(code.k(), c1.k() * c2.k());
        let d = min_distance_bruteforce(&c1, 24).unwrap().min(min_distance_bruteforce(&c2, 24).unwrap());
        assert_eq!(subsystem_distance_bruteforce(&code, 30), Some(d), "h1={h1:?} h2={h2:?}");
        checked += 1;
    }
}

#[test]
fn hgp_parameters() {
    let rep = ClassicalCode::repetition(3);
    let code = build_hgp(rep.parity_check(), rep.parity_check()).unwrap();
    assert_eq!((code.n_qubits(), code.k()), (13, 1));
    assert_eq!(subsystem_distance_bruteforce(&code, 24), Some(3));
    let h = hamming();
    let code = build_hgp(h.parity_check(), h.parity_check()).unwrap();
    assert_eq!((code.n_qubits(), code.k()), (58, 16));
    assert!(code.stab_x().mul_transpose(code.stab_z()).is_zero());
    assert_eq!(code.gauge_qubits(), 0);
    assert_eq!(code.layout()[49].lattice, LatticeTag::Small);
}

#[test]
fn gauge_fixing_named_pairs() {
    let h = hamming().parity_check().clone();
    let r = verify_gauge_fixing(&h, &h).unwrap();
    assert!(r.passed, "{:?}", r.witness);
    assert_eq!((r.k_hgp, r.k_shp), (16, 16));
    let rep = ClassicalCode::repetition(3).parity_check().clone();
    let r = verify_gauge_fixing(&rep, &rep).unwrap();
    assert!(r.passed);
    assert_eq!(r.gauge_qubits.0, r.gauge_qubits.1);
}

#[test]
fn gauge_fixing_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let h1 = random_matrix(4, 6, &mut rng);
        let h2 = random_matrix(3, 5, &mut rng);
        let r = verify_gauge_fixing(&h1, &h2).unwrap();
        assert!(r.passed, "{:?}", r.witness);
        assert_eq!(r.k_hgp, r.k_shp);
    }
}

#[test]
fn symplectic_basis_of_small_example() {
    // two X candidates, two Z candidates with full pairing
    let xs = vec![BitVector::from_indices(3, &[0, 1]), BitVector::from_indices(3, &[0])];
    let zs = vec![BitVector::from_indices(3, &[0]), BitVector::from_indices(3, &[1])];
    let (lx, lz) = symplectic_gram_schmidt(xs, zs);
    assert_eq!(lx.len(), 2);
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(lx[i].dot(&lz[j]), i == j);
        }
    }
    assert_eq!(lx[0], BitVector::from_indices(3, &[0]));
}

#[test]
fn violations_carry_witnesses() {
    let code = hamming_bbs();
    let mut m = Manifest::from_code(&code, Some(3));
    m.stab_x[0].retain(|&q| q != 0);
    let broken = m.to_code().unwrap();
    let v = broken.violations();
    assert!(v.iter().any(|v| v.message.starts_with("stab_x[0] anticommutes with gauge_z[")), "{v:?}");
    assert!(code.violations().is_empty());
}

#[test]
fn manifest_round_trip() {
    let code = hamming_bbs();
    let m = Manifest::from_code(&code, Some(3));
    let text = m.to_json().unwrap();
    let back = Manifest::from_json(&text).unwrap();
    assert_eq!(back, m);
    let rebuilt = back.rebuild().unwrap();
    assert_eq!(rebuilt.stab_x(), code.stab_x());
    assert_eq!(back.to_code().unwrap().logical_z(), code.logical_z());
    assert!(Manifest::from_json(&text.replace("\"format_version\": 1", "\"format_version\": 9")).is_err());
}

#[test]
fn span_pairs_matches_dense() {
    let code = hamming_bbs();
    let fast = code.gauge_x_span();
    let dense = code.gauge_x_matrix().rref();
    assert!(matches!(fast, Span::Pairs { .. }));
    assert_eq!(fast.rank(), dense.rank());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let mut v = BitVector::zeros(21);
        for q in 0..21 {
            v.set(q, rng.random_bool(0.2));
        }
        assert_eq!(fast.contains(&v), dense.contains(&v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]
    #[test]
    fn random_shp_and_hgp_satisfy_invariants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h1 = random_matrix(rng.random_range(1..5), rng.random_range(2..7), &mut rng);
        let h2 = random_matrix(rng.random_range(1..5), rng.random_range(2..7), &mut rng);
        let shp = build_shp(&h1, &h2).unwrap();
        prop_assert!(shp.violations().is_empty());
        let k1 = h1.cols() - h1.rank();
        let k2 = h2.cols() - h2.rank();
        prop_assert_eq!(shp.k(), k1 * k2);
        let hgp = build_hgp(&h1, &h2).unwrap();
        let kt1 = h1.rows() - h1.rank();
        let kt2 = h2.rows() - h2.rank();
        prop_assert_eq!(hgp.k(), k1 * k2 + kt1 * kt2);
    }
}
