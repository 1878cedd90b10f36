//! Bravyi-Bacon-Shor codes `BBS(A)` with `A = G1ᵀ·Q·G2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{symplectic_gram_schmidt, CodeParts, Construction, LatticeTag, QubitLattice, Site, SubsystemCode};
use crate::classical::ClassicalCode;
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

fn support_matrix(c1: &ClassicalCode, c2: &ClassicalCode, q: &BinaryMatrix) -> BinaryMatrix {
    c1.generator().transpose().mul(&q.mul(c2.generator()))
}

/// `|G1ᵀ·Q·G2|`, the number of physical qubits `Q` would give.
pub fn qubit_count(c1: &ClassicalCode, c2: &ClassicalCode, q: &BinaryMatrix) -> usize {
    support_matrix(c1, c2, q).weight()
}

/// Builds `BBS(G1ᵀ·Q·G2)`.
///
/// Qubits sit on the ones of `A`, numbered row-major. X gauges pair
/// consecutive qubits of a column, Z gauges consecutive qubits of a row.
/// X stabilizers are `X(diag(r)·A)` for each row `r` of `H1`, Z stabilizers
/// `Z(A·diag(c))` for each row `c` of `H2`.
pub fn build_bbs(c1: &ClassicalCode, c2: &ClassicalCode, q: &BinaryMatrix) -> Result<SubsystemCode> {
    let k = c1.k();
    if c2.k() != k {
        return Err(Error::InvalidArgument(format!("code dimensions differ: {k} vs {}", c2.k())));
    }
    if q.rows() != k || q.cols() != k {
        return Err(Error::Dimension(format!("Q must be {k}x{k}, got {}x{}", q.rows(), q.cols())));
    }
    if q.rank() != k {
        return Err(Error::InvalidArgument("Q is not full rank".into()));
    }
    let a = support_matrix(c1, c2, q);
    let lat = QubitLattice::new(a.clone());
    let n = lat.len();

    let mut gauge_x = Vec::new();
    for c in 0..lat.cols() {
        let col = lat.col_qubits(c);
        gauge_x.extend(col.windows(2).map(|w| vec![w[0], w[1]]));
    }
    let mut gauge_z = Vec::new();
    for r in 0..lat.rows() {
        let row = lat.row_qubits(r);
        gauge_z.extend(row.windows(2).map(|w| vec![w[0], w[1]]));
    }

    let rows: Vec<Vec<usize>> = (0..lat.rows()).map(|r| lat.row_qubits(r)).collect();
    let cols: Vec<Vec<usize>> = (0..lat.cols()).map(|c| lat.col_qubits(c)).collect();
    let union = |lines: &[Vec<usize>], pick: &BitVector| {
        let mut v = BitVector::zeros(n);
        for l in pick.ones_iter() {
            lines[l].iter().for_each(|&q| v.set(q, true));
        }
        v
    };
    let stab_x = BinaryMatrix::from_rows(n, &c1.parity_check().row_iter().map(|r| union(&rows, &r)).collect::<Vec<_>>());
    let stab_z = BinaryMatrix::from_rows(n, &c2.parity_check().row_iter().map(|c| union(&cols, &c)).collect::<Vec<_>>());

    // bare logicals: X on whole rows, Z on whole columns
    let xs: Vec<BitVector> = (0..lat.rows()).map(|r| union(&rows, &BitVector::unit(lat.rows(), r))).collect();
    let zs: Vec<BitVector> = (0..lat.cols()).map(|c| union(&cols, &BitVector::unit(lat.cols(), c))).collect();
    let (lx, lz) = symplectic_gram_schmidt(xs, zs);

    let layout = (0..n)
        .map(|i| {
            let (row, col) = lat.site(i);
            Site {
                lattice: LatticeTag::Single,
                row,
                col,
            }
        })
        .collect();
    SubsystemCode::assemble(CodeParts {
        layout,
        gauge_x,
        gauge_z,
        stab_x,
        stab_z,
        logical_x: BinaryMatrix::from_rows(n, &lx),
        logical_z: BinaryMatrix::from_rows(n, &lz),
        construction: Construction::Bbs {
            c1: c1.clone(),
            c2: c2.clone(),
            q: q.clone(),
            a,
        },
    })
}

/// Searches for a full-rank `Q` minimising `|G1ᵀ·Q·G2|`.
///
/// Attempt 0 evaluates the identity. Every further attempt starts from a
/// random full-rank `Q` and descends greedily through elementary row
/// operations (which preserve rank) while the qubit count drops. Ties are
/// broken by the lexicographically smaller `A`.
pub fn minimize_qubits_q(c1: &ClassicalCode, c2: &ClassicalCode, attempts: usize, seed: u64) -> Result<BinaryMatrix> {
    let k = c1.k();
    if c2.k() != k {
        return Err(Error::InvalidArgument(format!("code dimensions differ: {k} vs {}", c2.k())));
    }
    let score = |q: &BinaryMatrix| {
        let a = support_matrix(c1, c2, q);
        (a.weight(), a.to_text())
    };
    let mut best = BinaryMatrix::identity(k);
    let mut best_score = score(&best);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 1..attempts {
        let mut q = random_full_rank(k, &mut rng);
        let mut cur = score(&q);
        loop {
            let mut step: Option<(usize, usize, (usize, String))> = None;
            for src in 0..k {
                for dst in 0..k {
                    if src == dst {
                        continue;
                    }
                    q.xor_row_into(src, dst);
                    let s = score(&q);
                    q.xor_row_into(src, dst);
                    if s.0 < cur.0 && step.as_ref().is_none_or(|(_, _, b)| s < *b) {
                        step = Some((src, dst, s));
                    }
                }
            }
            match step {
                Some((src, dst, s)) => {
                    q.xor_row_into(src, dst);
                    cur = s;
                }
                None => break,
            }
        }
        if cur < best_score {
            best_score = cur;
            best = q;
        }
    }
    Ok(best)
}

fn random_full_rank<R: Rng>(k: usize, rng: &mut R) -> BinaryMatrix {
    loop {
        let mut q = BinaryMatrix::zeros(k, k);
        for r in 0..k {
            for c in 0..k {
                q.set(r, c, rng.random());
            }
        }
        if q.rank() == k {
            return q;
        }
    }
}
