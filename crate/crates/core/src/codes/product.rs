//! Product constructions: subsystem hypergraph product (SHP) codes, hypergraph
//! product (HGP) codes, and the check that two SHP codes gauge-fix to an HGP
//! code.

use super::{symplectic_gram_schmidt, CodeParts, Construction, LatticeTag, Site, SubsystemCode};
use crate::error::Result;
use crate::gf2::{BinaryMatrix, BitVector};

fn lattice_layout(tag: LatticeTag, rows: usize, cols: usize) -> impl Iterator<Item = Site> {
    (0..rows * cols).map(move |i| Site {
        lattice: tag,
        row: i / cols,
        col: i % cols,
    })
}

/// Builds `SHP(H1, H2)` on the full `n1 × n2` lattice (qubit `(i, j)` has
/// index `i·n2 + j`).
///
/// X gauges are the rows of `H1 ⊗ I`, Z gauges the rows of `I ⊗ H2`.
/// Stabilizers are `H1 ⊗ G2` (X, row `a·k2 + j`) and `G1 ⊗ H2` (Z, row
/// `i·m2 + b`), where `G1`, `G2` are kernel bases in reduced row echelon
/// form. Logical pair `(i, j)` is `X(e_{piv1(i)} ⊗ g2_j)`, `Z(g1_i ⊗ e_{piv2(j)})`.
pub fn build_shp(h1: &BinaryMatrix, h2: &BinaryMatrix) -> Result<SubsystemCode> {
    let (n1, n2) = (h1.cols(), h2.cols());
    let r1 = h1.kernel_basis().rref();
    let r2 = h2.kernel_basis().rref();
    let (g1, g2) = (r1.basis(), r2.basis());
    let (piv1, piv2) = (r1.pivots.clone(), r2.pivots.clone());
    let (k1, k2) = (g1.rows(), g2.rows());
    let n = n1 * n2;

    let mut gauge_x = Vec::new();
    for a in 0..h1.rows() {
        let supp = h1.row_support(a);
        if supp.is_empty() {
            continue;
        }
        for j in 0..n2 {
            gauge_x.push(supp.iter().map(|&i| i * n2 + j).collect());
        }
    }
    let mut gauge_z = Vec::new();
    for i in 0..n1 {
        for b in 0..h2.rows() {
            let supp = h2.row_support(b);
            if !supp.is_empty() {
                gauge_z.push(supp.iter().map(|&c| i * n2 + c).collect());
            }
        }
    }

    let mut logical_x = BinaryMatrix::zeros(0, n);
    let mut logical_z = BinaryMatrix::zeros(0, n);
    for i in 0..k1 {
        for j in 0..k2 {
            let mut x = BitVector::zeros(n);
            for c in g2.row(j).ones_iter() {
                x.set(piv1[i] * n2 + c, true);
            }
            logical_x.push_row(&x);
            let mut z = BitVector::zeros(n);
            for r in g1.row(i).ones_iter() {
                z.set(r * n2 + piv2[j], true);
            }
            logical_z.push_row(&z);
        }
    }

    SubsystemCode::assemble(CodeParts {
        layout: lattice_layout(LatticeTag::Single, n1, n2).collect(),
        gauge_x,
        gauge_z,
        stab_x: h1.kron(&g2),
        stab_z: g1.kron(h2),
        logical_x,
        logical_z,
        construction: Construction::Shp {
            h1: h1.clone(),
            h2: h2.clone(),
            g1,
            g2,
            piv1,
            piv2,
        },
    })
}

/// Builds `HGP(H1, H2)`: qubits on a large `n1 × n2` lattice followed by a
/// small `m1 × m2` lattice, with stabilizers `(H1 ⊗ I, I ⊗ H2ᵀ)` and
/// `(I ⊗ H2, H1ᵀ ⊗ I)`. Gauge generators equal the stabilizers.
pub fn build_hgp(h1: &BinaryMatrix, h2: &BinaryMatrix) -> Result<SubsystemCode> {
    let (m1, n1) = (h1.rows(), h1.cols());
    let (m2, n2) = (h2.rows(), h2.cols());
    let big = n1 * n2;
    let n = big + m1 * m2;
    let stab_x = h1.kron(&BinaryMatrix::identity(n2)).hstack(&BinaryMatrix::identity(m1).kron(&h2.transpose()));
    let stab_z = BinaryMatrix::identity(n1).kron(h2).hstack(&h1.transpose().kron(&BinaryMatrix::identity(m2)));

    let g1 = h1.kernel_basis();
    let g2 = h2.kernel_basis();
    let f1 = h1.transpose().kernel_basis();
    let f2 = h2.transpose().kernel_basis();
    let large = |i: usize, j: usize| i * n2 + j;
    let small = |a: usize, b: usize| big + a * m2 + b;

    let mut xs = Vec::new();
    for a in 0..n1 {
        for g in g2.row_iter() {
            xs.push(BitVector::from_indices(n, &g.ones_iter().map(|c| large(a, c)).collect::<Vec<_>>()));
        }
    }
    for f in f1.row_iter() {
        for b in 0..m2 {
            xs.push(BitVector::from_indices(n, &f.ones_iter().map(|a| small(a, b)).collect::<Vec<_>>()));
        }
    }
    let mut zs = Vec::new();
    for g in g1.row_iter() {
        for b in 0..n2 {
            zs.push(BitVector::from_indices(n, &g.ones_iter().map(|i| large(i, b)).collect::<Vec<_>>()));
        }
    }
    for a in 0..m1 {
        for f in f2.row_iter() {
            zs.push(BitVector::from_indices(n, &f.ones_iter().map(|b| small(a, b)).collect::<Vec<_>>()));
        }
    }
    let (lx, lz) = symplectic_gram_schmidt(xs, zs);

    let supports = |m: &BinaryMatrix| (0..m.rows()).map(|r| m.row_support(r)).filter(|s| !s.is_empty()).collect();
    SubsystemCode::assemble(CodeParts {
        layout: lattice_layout(LatticeTag::Large, n1, n2)
            .chain(lattice_layout(LatticeTag::Small, m1, m2))
            .collect(),
        gauge_x: supports(&stab_x),
        gauge_z: supports(&stab_z),
        stab_x,
        stab_z,
        logical_x: BinaryMatrix::from_rows(n, &lx),
        logical_z: BinaryMatrix::from_rows(n, &lz),
        construction: Construction::Hgp {
            h1: h1.clone(),
            h2: h2.clone(),
        },
    })
}

/// Outcome of [`verify_gauge_fixing`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeFixingReport {
    pub passed: bool,
    /// Logical count of `HGP(H1, H2)`.
    pub k_hgp: usize,
    /// Logical count of `SHP(H1, H2)` plus `SHP(H2ᵀ, H1ᵀ)`.
    pub k_shp: usize,
    /// Gauge-qubit counts of the two SHP codes.
    pub gauge_qubits: (usize, usize),
    /// First failed condition, if any.
    pub witness: Option<String>,
}

/// Checks that `SHP(H1, H2) ∪ SHP(H2ᵀ, H1ᵀ)` is a gauge fixing of
/// `HGP(H1, H2)`: `S(shp) ≤ S(hgp) ≤ G(shp)` for both Pauli types, and the
/// logical counts agree. Qubit `(i, j)` of the first SHP code is qubit
/// `(i, j)` of the large lattice; qubit `(i, j)` of the second is qubit
/// `(j, i)` of the small lattice.
pub fn verify_gauge_fixing(h1: &BinaryMatrix, h2: &BinaryMatrix) -> Result<GaugeFixingReport> {
    let hgp = build_hgp(h1, h2)?;
    let first = build_shp(h1, h2)?;
    let second = build_shp(&h2.transpose(), &h1.transpose())?;
    let (n1, n2) = (h1.cols(), h2.cols());
    let (m1, m2) = (h1.rows(), h2.rows());
    let n = hgp.n_qubits();
    let big = n1 * n2;

    // second SHP lattice is m2 × m1; its (p, q) is the small lattice (q, p)
    let place_second = |q: usize| big + (q % m1) * m2 + q / m1;
    let embed_rows = |m: &BinaryMatrix, place: &dyn Fn(usize) -> usize| -> Vec<BitVector> {
        m.row_iter()
            .map(|r| BitVector::from_indices(n, &r.ones_iter().map(place).collect::<Vec<_>>()))
            .collect()
    };
    let embed_sparse = |gens: &[Vec<usize>], place: &dyn Fn(usize) -> usize| -> Vec<BitVector> {
        gens.iter()
            .map(|g| BitVector::from_indices(n, &g.iter().map(|&q| place(q)).collect::<Vec<_>>()))
            .collect()
    };
    let id = |q: usize| q;

    let mut witness = None;
    for (ty, s1, s2, g1, g2, s_hgp) in [
        ("X", first.stab_x(), second.stab_x(), first.gauge_x(), second.gauge_x(), hgp.stab_x()),
        ("Z", first.stab_z(), second.stab_z(), first.gauge_z(), second.gauge_z(), hgp.stab_z()),
    ] {
        let mut stabs = embed_rows(s1, &id);
        stabs.extend(embed_rows(s2, &place_second));
        let mut gauges = embed_sparse(g1, &id);
        gauges.extend(embed_sparse(g2, &place_second));
        let hgp_span = s_hgp.rref();
        let gauge_span = BinaryMatrix::from_rows(n, &gauges).rref();
        if witness.is_none() {
            if let Some(i) = stabs.iter().position(|s| !hgp_span.contains(s)) {
                witness = Some(format!("SHP {ty} stabilizer {i} is not an HGP stabilizer"));
            } else if let Some(i) = (0..s_hgp.rows()).find(|&i| !gauge_span.contains(&s_hgp.row(i))) {
                witness = Some(format!("HGP {ty} stabilizer {i} is not in the SHP gauge group"));
            }
        }
    }
    let k_shp = first.k() + second.k();
    if witness.is_none() && k_shp != hgp.k() {
        witness = Some(format!("logical counts differ: SHP {k_shp}, HGP {}", hgp.k()));
    }
    Ok(GaugeFixingReport {
        passed: witness.is_none(),
        k_hgp: hgp.k(),
        k_shp,
        gauge_qubits: (first.gauge_qubits(), second.gauge_qubits()),
        witness,
    })
}
