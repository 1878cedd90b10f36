//! CSS subsystem codes: Pauli algebra, the code container with its invariant
//! checks, and the BBS, SHP and HGP constructions.

mod bbs;
mod manifest;
mod product;
pub mod reference;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classical::ClassicalCode;
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector, Rref};

pub use bbs::{build_bbs, minimize_qubits_q, qubit_count};
pub use manifest::{Manifest, MANIFEST_VERSION};
pub use product::{build_hgp, build_shp, verify_gauge_fixing, GaugeFixingReport};

/// Codes up to this many qubits get the dense center/rank cross-checks.
const DENSE_CHECK_LIMIT: usize = 2000;

/// An `n`-qubit Pauli operator up to phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    pub x: BitVector,
    pub z: BitVector,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn x_type(x: BitVector) -> Self {
        let n = x.len();
        Self { x, z: BitVector::zeros(n) }
    }

    pub fn z_type(z: BitVector) -> Self {
        let n = z.len();
        Self { x: BitVector::zeros(n), z }
    }

    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    /// Symplectic product: true iff the operators anticommute.
    pub fn anticommutes(&self, other: &PauliOp) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    pub fn weight(&self) -> usize {
        (0..self.n_qubits()).filter(|&i| self.x.get(i) || self.z.get(i)).count()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Product up to phase.
    pub fn mul(&self, other: &PauliOp) -> PauliOp {
        PauliOp {
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
        }
    }
}

impl fmt::Display for PauliOp {
    /// Sparse form such as `X0 Y3 Z7`; the identity prints as `I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..self.n_qubits() {
            let c = match (self.x.get(i), self.z.get(i)) {
                (false, false) => continue,
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{c}{i}")?;
            first = false;
        }
        if first {
            f.write_str("I")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOp({self})")
    }
}

/// Which lattice a qubit lives on. HGP codes use a large and a small lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeTag {
    Single,
    Large,
    Small,
}

/// Lattice coordinate of a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub lattice: LatticeTag,
    pub row: usize,
    pub col: usize,
}

/// Qubits placed on the ones of a binary mask, indexed row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitLattice {
    mask: BinaryMatrix,
    index: Vec<Option<usize>>,
    sites: Vec<(usize, usize)>,
}

impl QubitLattice {
    pub fn new(mask: BinaryMatrix) -> Self {
        let mut index = vec![None; mask.rows() * mask.cols()];
        let mut sites = Vec::with_capacity(mask.weight());
        for r in 0..mask.rows() {
            for c in mask.row(r).ones_iter() {
                index[r * mask.cols() + c] = Some(sites.len());
                sites.push((r, c));
            }
        }
        Self { mask, index, sites }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        let mut m = BinaryMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, true);
            }
        }
        Self::new(m)
    }

    pub fn mask(&self) -> &BinaryMatrix {
        &self.mask
    }

    pub fn rows(&self) -> usize {
        self.mask.rows()
    }

    pub fn cols(&self) -> usize {
        self.mask.cols()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn qubit_at(&self, row: usize, col: usize) -> Option<usize> {
        self.index[row * self.cols() + col]
    }

    pub fn site(&self, q: usize) -> (usize, usize) {
        self.sites[q]
    }

    /// Qubits of row `r`, left to right.
    pub fn row_qubits(&self, r: usize) -> Vec<usize> {
        (0..self.cols()).filter_map(|c| self.qubit_at(r, c)).collect()
    }

    /// Qubits of column `c`, top to bottom.
    pub fn col_qubits(&self, c: usize) -> Vec<usize> {
        (0..self.rows()).filter_map(|r| self.qubit_at(r, c)).collect()
    }
}

/// Construction inputs, kept so decoders and verifiers can be rebuilt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Construction {
    Bbs {
        c1: ClassicalCode,
        c2: ClassicalCode,
        q: BinaryMatrix,
        a: BinaryMatrix,
    },
    Shp {
        h1: BinaryMatrix,
        h2: BinaryMatrix,
        /// Kernel bases of `h1`, `h2` in reduced row echelon form.
        g1: BinaryMatrix,
        g2: BinaryMatrix,
        piv1: Vec<usize>,
        piv2: Vec<usize>,
    },
    Hgp {
        h1: BinaryMatrix,
        h2: BinaryMatrix,
    },
}

impl Construction {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Construction::Bbs { .. } => "bbs",
            Construction::Shp { .. } => "shp",
            Construction::Hgp { .. } => "hgp",
        }
    }
}

/// A CSS subsystem code with explicit gauge generators, stabilizer
/// generators and a canonical basis of bare logicals.
#[derive(Clone, Debug)]
pub struct SubsystemCode {
    n_qubits: usize,
    k: usize,
    layout: Vec<Site>,
    gauge_x: Vec<Vec<usize>>,
    gauge_z: Vec<Vec<usize>>,
    stab_x: BinaryMatrix,
    stab_z: BinaryMatrix,
    logical_x: BinaryMatrix,
    logical_z: BinaryMatrix,
    construction: Construction,
}

/// Generator parts handed to [`SubsystemCode::assemble`].
pub struct CodeParts {
    pub layout: Vec<Site>,
    pub gauge_x: Vec<Vec<usize>>,
    pub gauge_z: Vec<Vec<usize>>,
    pub stab_x: BinaryMatrix,
    pub stab_z: BinaryMatrix,
    pub logical_x: BinaryMatrix,
    pub logical_z: BinaryMatrix,
    pub construction: Construction,
}

/// One failed invariant, naming the offending generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl SubsystemCode {
    /// Assembles a code and checks every invariant; the first violation is
    /// returned as an error.
    pub fn assemble(parts: CodeParts) -> Result<Self> {
        let code = Self::assemble_unchecked(parts)?;
        if let Some(v) = code.violations().into_iter().next() {
            return Err(Error::Invariant(v.message));
        }
        Ok(code)
    }

    /// Assembles without the commutation checks; shapes are still validated.
    pub fn assemble_unchecked(parts: CodeParts) -> Result<Self> {
        let n = parts.layout.len();
        for (name, m) in [
            ("stab_x", &parts.stab_x),
            ("stab_z", &parts.stab_z),
            ("logical_x", &parts.logical_x),
            ("logical_z", &parts.logical_z),
        ] {
            if m.cols() != n {
                return Err(Error::Dimension(format!("{name} has {} columns for {n} qubits", m.cols())));
            }
        }
        for gens in [&parts.gauge_x, &parts.gauge_z] {
            if gens.iter().flatten().any(|&q| q >= n) {
                return Err(Error::Dimension("gauge generator touches a missing qubit".into()));
            }
        }
        if parts.logical_x.rows() != parts.logical_z.rows() {
            return Err(Error::Dimension("logical_x and logical_z differ in count".into()));
        }
        Ok(Self {
            n_qubits: n,
            k: parts.logical_x.rows(),
            layout: parts.layout,
            gauge_x: parts.gauge_x,
            gauge_z: parts.gauge_z,
            stab_x: parts.stab_x,
            stab_z: parts.stab_z,
            logical_x: parts.logical_x,
            logical_z: parts.logical_z,
            construction: parts.construction,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of logical qubits.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layout(&self) -> &[Site] {
        &self.layout
    }

    pub fn gauge_x(&self) -> &[Vec<usize>] {
        &self.gauge_x
    }

    pub fn gauge_z(&self) -> &[Vec<usize>] {
        &self.gauge_z
    }

    pub fn stab_x(&self) -> &BinaryMatrix {
        &self.stab_x
    }

    pub fn stab_z(&self) -> &BinaryMatrix {
        &self.stab_z
    }

    pub fn logical_x(&self) -> &BinaryMatrix {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &BinaryMatrix {
        &self.logical_z
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    /// Short identifier such as `bbs-21-4`.
    pub fn code_id(&self) -> String {
        format!("{}-{}-{}", self.construction.kind_name(), self.n_qubits, self.k)
    }

    /// Length of the underlying classical code(s), `n1` for products.
    pub fn classical_length(&self) -> usize {
        match &self.construction {
            Construction::Bbs { c1, .. } => c1.n(),
            Construction::Shp { h1, .. } | Construction::Hgp { h1, .. } => h1.cols(),
        }
    }

    pub fn gauge_x_matrix(&self) -> BinaryMatrix {
        BinaryMatrix::from_supports(self.n_qubits, &self.gauge_x)
    }

    pub fn gauge_z_matrix(&self) -> BinaryMatrix {
        BinaryMatrix::from_supports(self.n_qubits, &self.gauge_z)
    }

    pub fn gauge_x_span(&self) -> Span {
        Span::new(self.n_qubits, &self.gauge_x)
    }

    pub fn gauge_z_span(&self) -> Span {
        Span::new(self.n_qubits, &self.gauge_z)
    }

    /// Number of gauge qubits, `(rank G_X + rank G_Z − rank S_X − rank S_Z) / 2`.
    pub fn gauge_qubits(&self) -> usize {
        let g = self.gauge_x_span().rank() + self.gauge_z_span().rank();
        let s = self.stab_x.rank() + self.stab_z.rank();
        g.saturating_sub(s) / 2
    }

    /// `N − rank S_X − rank S_Z − gauge qubits`.
    pub fn k_from_ranks(&self) -> usize {
        let sx = self.stab_x.rank();
        let sz = self.stab_z.rank();
        let gx = self.gauge_x_span().rank();
        let gz = self.gauge_z_span().rank();
        // N - sx - sz - (gx + gz - sx - sz)/2
        ((2 * self.n_qubits + sx + sz).saturating_sub(gx + gz) / 2).saturating_sub(sx + sz)
    }

    /// X stabilizer syndrome of a Z-type error (one bit per X generator).
    pub fn x_syndrome_of(&self, z_err: &BitVector) -> BitVector {
        self.stab_x.mul_vec(z_err)
    }

    /// Z stabilizer syndrome of an X-type error.
    pub fn z_syndrome_of(&self, x_err: &BitVector) -> BitVector {
        self.stab_z.mul_vec(x_err)
    }

    /// Every invariant failure found, with witnesses.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |message: String| out.push(Violation { message });

        let checks: [(&str, &BinaryMatrix, &str, &[Vec<usize>]); 4] = [
            ("stab_x", &self.stab_x, "gauge_z", &self.gauge_z),
            ("stab_z", &self.stab_z, "gauge_x", &self.gauge_x),
            ("logical_x", &self.logical_x, "gauge_z", &self.gauge_z),
            ("logical_z", &self.logical_z, "gauge_x", &self.gauge_x),
        ];
        for (an, a, bn, b) in checks {
            if let Some((i, j)) = first_anticommuting_sparse(a, b) {
                push(format!("{an}[{i}] anticommutes with {bn}[{j}]"));
            }
        }
        for (an, a, bn, b) in [
            ("stab_x", &self.stab_x, "stab_z", &self.stab_z),
            ("stab_x", &self.stab_x, "logical_z", &self.logical_z),
            ("stab_z", &self.stab_z, "logical_x", &self.logical_x),
        ] {
            let prod = a.mul_transpose(b);
            if let Some(i) = (0..prod.rows()).find(|&i| !prod.row(i).is_zero()) {
                let j = prod.row(i).first_one().expect("nonzero row");
                push(format!("{an}[{i}] anticommutes with {bn}[{j}]"));
            }
        }
        let pairing = self.logical_x.mul_transpose(&self.logical_z);
        'outer: for i in 0..self.k {
            for j in 0..self.k {
                if pairing.get(i, j) != (i == j) {
                    push(format!(
                        "logical_x[{i}] and logical_z[{j}] have symplectic product {}, expected {}",
                        u8::from(pairing.get(i, j)),
                        u8::from(i == j)
                    ));
                    break 'outer;
                }
            }
        }

        let gx = self.gauge_x_span();
        let gz = self.gauge_z_span();
        for (name, stab, span) in [("stab_x", &self.stab_x, &gx), ("stab_z", &self.stab_z, &gz)] {
            if let Some(i) = (0..stab.rows()).find(|&i| !span.contains(&stab.row(i))) {
                push(format!("{name}[{i}] is not generated by the gauge group"));
            }
        }
        let sx = self.stab_x.rank();
        let sz = self.stab_z.rank();
        if (gx.rank() + gz.rank()) < sx + sz || !(gx.rank() + gz.rank() - sx - sz).is_multiple_of(2) {
            push("gauge and stabilizer ranks are inconsistent".into());
        } else if self.k_from_ranks() != self.k {
            push(format!(
                "logical count {} differs from N - rank(S) - gauge qubits = {}",
                self.k,
                self.k_from_ranks()
            ));
        }
        if self.n_qubits <= DENSE_CHECK_LIMIT {
            // stabilizers must span the whole center of the gauge group
            let gxm = self.gauge_x_matrix();
            let gzm = self.gauge_z_matrix();
            let cross = gzm.mul_transpose(&gxm).rank();
            if sx + cross != gx.rank() {
                push(format!("stab_x has rank {sx}, center of the X gauge group has rank {}", gx.rank() - cross));
            }
            if sz + cross != gz.rank() {
                push(format!("stab_z has rank {sz}, center of the Z gauge group has rank {}", gz.rank() - cross));
            }
        }
        out
    }

    pub fn verify(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(v) => Err(Error::Invariant(v.message)),
            None => Ok(()),
        }
    }

    /// Logical qubits flipped by an X-type residual with trivial Z syndrome:
    /// bit `i` is set iff the residual anticommutes with `logical_z[i]`.
    pub fn logical_flips_x(&self, residual_x: &BitVector) -> Result<BitVector> {
        if !self.z_syndrome_of(residual_x).is_zero() {
            return Err(Error::NonzeroSyndrome);
        }
        Ok(self.logical_z.mul_vec(residual_x))
    }

    /// Logical qubits flipped by a Z-type residual with trivial X syndrome.
    pub fn logical_flips_z(&self, residual_z: &BitVector) -> Result<BitVector> {
        if !self.x_syndrome_of(residual_z).is_zero() {
            return Err(Error::NonzeroSyndrome);
        }
        Ok(self.logical_x.mul_vec(residual_z))
    }
}

/// Row space of a generator list. Lists of weight-2 generators (BBS gauge
/// groups) are handled by union-find, everything else by row reduction.
#[derive(Clone, Debug)]
pub enum Span {
    Pairs { component: Vec<Option<usize>>, n_components: usize, rank: usize },
    Dense(Rref),
}

impl Span {
    pub fn new(n: usize, gens: &[Vec<usize>]) -> Self {
        if gens.iter().all(|g| g.len() == 2) {
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], mut a: usize) -> usize {
                while p[a] != a {
                    p[a] = p[p[a]];
                    a = p[a];
                }
                a
            }
            let mut touched = vec![false; n];
            let mut rank = 0;
            for g in gens {
                touched[g[0]] = true;
                touched[g[1]] = true;
                let (a, b) = (find(&mut parent, g[0]), find(&mut parent, g[1]));
                if a != b {
                    parent[a] = b;
                    rank += 1;
                }
            }
            let mut label = vec![None; n];
            let mut component = vec![None; n];
            let mut n_components = 0;
            for q in 0..n {
                if touched[q] {
                    let r = find(&mut parent, q);
                    let id = *label[r].get_or_insert_with(|| {
                        n_components += 1;
                        n_components - 1
                    });
                    component[q] = Some(id);
                }
            }
            Span::Pairs { component, n_components, rank }
        } else {
            Span::Dense(BinaryMatrix::from_supports(n, gens).rref())
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Span::Pairs { rank, .. } => *rank,
            Span::Dense(r) => r.rank(),
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        match self {
            Span::Pairs { component, n_components, .. } => {
                let mut parity = vec![false; *n_components];
                for q in v.ones_iter() {
                    match component[q] {
                        Some(c) => parity[c] ^= true,
                        None => return false,
                    }
                }
                parity.iter().all(|p| !p)
            }
            Span::Dense(r) => r.contains(v),
        }
    }
}

/// First `(row of dense, index of sparse)` pair with odd overlap.
fn first_anticommuting_sparse(dense: &BinaryMatrix, sparse: &[Vec<usize>]) -> Option<(usize, usize)> {
    if dense.rows() == 0 {
        return None;
    }
    let t = dense.transpose();
    let words = dense.rows().div_ceil(64);
    let mut acc = vec![0u64; words];
    for (j, supp) in sparse.iter().enumerate() {
        acc.iter_mut().for_each(|w| *w = 0);
        for &q in supp {
            for (a, b) in acc.iter_mut().zip(t.row_words(q)) {
                *a ^= b;
            }
        }
        if let Some((wi, w)) = acc.iter().enumerate().find(|(_, w)| **w != 0) {
            return Some((wi * 64 + w.trailing_zeros() as usize, j));
        }
    }
    None
}

/// Pairs up X and Z candidates into a canonical symplectic basis. At each step
/// the lightest remaining X candidate with a partner is taken, paired with its
/// lightest partner, and both are cleaned out of the remaining candidates.
/// Ties go to the lower original index.
pub fn symplectic_gram_schmidt(xs: Vec<BitVector>, zs: Vec<BitVector>) -> (Vec<BitVector>, Vec<BitVector>) {
    let mut xs = xs;
    let mut zs = zs;
    let nz = zs.len();
    let mut pairing: Vec<BitVector> = xs
        .iter()
        .map(|x| BitVector::from_bools(&zs.iter().map(|z| x.dot(z)).collect::<Vec<_>>()))
        .collect();
    let mut x_alive = vec![true; xs.len()];
    let mut z_alive = BitVector::ones(nz);
    let (mut out_x, mut out_z) = (Vec::new(), Vec::new());
    loop {
        let pick_x = (0..xs.len())
            .filter(|&i| x_alive[i] && pairing[i].dot_any(&z_alive))
            .min_by_key(|&i| (xs[i].weight(), i));
        let Some(i) = pick_x else { break };
        let j = pairing[i]
            .ones_iter()
            .filter(|&j| z_alive.get(j))
            .min_by_key(|&j| (zs[j].weight(), j))
            .expect("candidate has a partner");
        x_alive[i] = false;
        z_alive.set(j, false);
        let (xi, zj, pi) = (xs[i].clone(), zs[j].clone(), pairing[i].clone());
        for r in 0..xs.len() {
            if x_alive[r] && pairing[r].get(j) {
                xs[r].xor_assign(&xi);
                let row = pairing[r].xor(&pi);
                pairing[r] = row;
            }
        }
        for c in pi.ones_iter() {
            if z_alive.get(c) {
                zs[c].xor_assign(&zj);
            }
        }
        out_x.push(xi);
        out_z.push(zj);
    }
    (out_x, out_z)
}

trait DotAny {
    fn dot_any(&self, mask: &BitVector) -> bool;
}

impl DotAny for BitVector {
    fn dot_any(&self, mask: &BitVector) -> bool {
        self.words().iter().zip(mask.words()).any(|(a, b)| a & b != 0)
    }
}

/// Minimum dressed-logical weight: the lightest X (or Z) operator that
/// commutes with every opposite-type stabilizer but is not in the gauge
/// group, found by enumerating supports in order of weight. Returns `None`
/// once more than `2^cap` supports would be needed, or when `K = 0`.
pub fn subsystem_distance_bruteforce(code: &SubsystemCode, cap: u32) -> Option<usize> {
    if code.k() == 0 {
        return None;
    }
    let dx = min_dressed_weight(code.stab_z(), &code.gauge_x_span(), code.n_qubits(), cap)?;
    let dz = min_dressed_weight(code.stab_x(), &code.gauge_z_span(), code.n_qubits(), cap)?;
    Some(dx.min(dz))
}

/// Lightest dressed logical of one type, with its support.
pub fn min_dressed_logical(checks: &BinaryMatrix, gauge: &Span, n: usize, cap: u32) -> Option<BitVector> {
    let cols: Vec<BitVector> = (0..n).map(|q| checks.column(q)).collect();
    let budget = 1u128 << cap.min(120);
    let mut spent: u128 = 0;
    for w in 1..=n {
        spent += binomial(n, w);
        if spent > budget {
            return None;
        }
        let mut found = None;
        let mut support = Vec::with_capacity(w);
        search_weight(&cols, gauge, n, w, 0, &mut support, &BitVector::zeros(checks.rows()), &mut found);
        if found.is_some() {
            return found;
        }
    }
    None
}

fn min_dressed_weight(checks: &BinaryMatrix, gauge: &Span, n: usize, cap: u32) -> Option<usize> {
    min_dressed_logical(checks, gauge, n, cap).map(|v| v.weight())
}

#[allow(clippy::too_many_arguments)]
fn search_weight(
    cols: &[BitVector],
    gauge: &Span,
    n: usize,
    left: usize,
    start: usize,
    support: &mut Vec<usize>,
    syndrome: &BitVector,
    found: &mut Option<BitVector>,
) {
    if found.is_some() {
        return;
    }
    if left == 0 {
        if syndrome.is_zero() {
            let v = BitVector::from_indices(n, support);
            if !gauge.contains(&v) {
                *found = Some(v);
            }
        }
        return;
    }
    for q in start..=(n - left) {
        support.push(q);
        let s = syndrome.xor(&cols[q]);
        search_weight(cols, gauge, n, left - 1, q + 1, support, &s, found);
        support.pop();
        if found.is_some() {
            return;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u128::MAX / 4;
        }
    }
    acc
}

#[cfg(test)]
mod tests;
