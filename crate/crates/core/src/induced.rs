//! Induced decoders for BBS and SHP codes.
//!
//! Each stabilizer syndrome is turned into one or more classical syndromes of
//! the underlying classical codes, decoded with BP, and every flipped
//! classical bit is lifted to a single-qubit correction on a designated
//! qubit of the matching lattice row or column.

use crate::bp::{self, BpConfig, TannerGraph};
use crate::codes::{Construction, PauliOp, QubitLattice, SubsystemCode};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

/// Measured stabilizer outcomes: one bit per X generator and per Z generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeFrame {
    pub x_syndrome: BitVector,
    pub z_syndrome: BitVector,
}

impl SyndromeFrame {
    /// Perfect syndrome of an error with X part `x_err` and Z part `z_err`.
    pub fn of_error(code: &SubsystemCode, x_err: &BitVector, z_err: &BitVector) -> Self {
        Self {
            x_syndrome: code.x_syndrome_of(z_err),
            z_syndrome: code.z_syndrome_of(x_err),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.x_syndrome.is_zero() && self.z_syndrome.is_zero()
    }
}

/// Pauli correction to apply: `X(x_corr)·Z(z_corr)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectionFrame {
    pub x_corr: BitVector,
    pub z_corr: BitVector,
    /// False if any BP run hit its iteration budget.
    pub converged: bool,
}

/// Which logical qubits a residual error flips.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalOutcome {
    pub per_qubit_flips: BitVector,
    pub block_failure: bool,
}

impl LogicalOutcome {
    pub fn from_flips(per_qubit_flips: BitVector) -> Self {
        let block_failure = !per_qubit_flips.is_zero();
        Self {
            per_qubit_flips,
            block_failure,
        }
    }

    pub fn none(k: usize) -> Self {
        Self::from_flips(BitVector::zeros(k))
    }
}

/// Flags logical qubit `i` when the residual anticommutes with the
/// opposite-type bare logical `i`. Residuals must have trivial syndrome.
pub fn classify_residual(code: &SubsystemCode, residual: &PauliOp) -> Result<LogicalOutcome> {
    let mut flips = code.logical_flips_x(&residual.x)?;
    // an X flip and a Z flip of the same qubit still count once
    for i in code.logical_flips_z(&residual.z)?.ones_iter() {
        flips.set(i, true);
    }
    Ok(LogicalOutcome::from_flips(flips))
}

/// BP stage for one classical parity-check matrix `H`.
///
/// Besides the rows of `H`, the graph carries the sum of every pair of rows
/// that overlap in two or more bits. Without these, flooding BP oscillates
/// on short cycles; on the Hamming code it never settles on the single flip
/// of the weight-3 column. Derived check values are XORs of measured ones.
#[derive(Clone, Debug)]
pub struct ClassicalStage {
    graph: TannerGraph,
    n_rows: usize,
    derived: Vec<(usize, usize)>,
}

impl ClassicalStage {
    pub fn new(h: &BinaryMatrix, measurement: bool) -> Self {
        Self::build(h, measurement, true)
    }

    /// Stage on the rows of `H` alone.
    pub fn plain(h: &BinaryMatrix, measurement: bool) -> Self {
        Self::build(h, measurement, false)
    }

    fn build(h: &BinaryMatrix, measurement: bool, redundant: bool) -> Self {
        let mut checks: Vec<Vec<usize>> = (0..h.rows()).map(|r| h.row_support(r)).collect();
        let mut derived = Vec::new();
        if redundant {
            let mut seen: std::collections::HashSet<Vec<usize>> = checks.iter().cloned().collect();
            for a in 0..h.rows() {
                for b in a + 1..h.rows() {
                    let (ra, rb) = (h.row(a), h.row(b));
                    let mut both = ra.clone();
                    for i in 0..both.len() {
                        both.set(i, ra.get(i) && rb.get(i));
                    }
                    if both.weight() < 2 {
                        continue;
                    }
                    let sum = ra.xor(&rb).support();
                    if !sum.is_empty() && seen.insert(sum.clone()) {
                        checks.push(sum);
                        derived.push((a, b));
                    }
                }
            }
        }
        let mut graph = TannerGraph::from_supports(h.cols(), &checks, measurement);
        if measurement && !derived.is_empty() {
            let mult = (0..checks.len()).map(|j| if j < h.rows() { 1 } else { 2 }).collect();
            graph = graph.with_measurement_multiplicity(mult).expect("one multiplicity per check");
        }
        Self {
            graph,
            n_rows: h.rows(),
            derived,
        }
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn n_derived(&self) -> usize {
        self.derived.len()
    }

    /// Decodes a syndrome over the rows of `H`.
    pub fn decode(&self, cfg: &BpConfig, syndrome: &BitVector) -> bp::BpResult {
        assert_eq!(syndrome.len(), self.n_rows, "syndrome length must equal the rows of H");
        if self.derived.is_empty() {
            return bp::decode(&self.graph, cfg, syndrome);
        }
        let mut full = BitVector::zeros(self.graph.n_check());
        for i in syndrome.ones_iter() {
            full.set(i, true);
        }
        for (t, &(a, b)) in self.derived.iter().enumerate() {
            full.set(self.n_rows + t, syndrome.get(a) ^ syndrome.get(b));
        }
        bp::decode(&self.graph, cfg, &full)
    }
}

#[derive(Clone, Debug)]
enum Lift {
    /// BBS: one classical bit per column (X) or row (Z), lifted to a fixed qubit.
    Bbs {
        col_qubit: Vec<Option<usize>>,
        row_qubit: Vec<Option<usize>>,
    },
    /// SHP: `k1` column-code problems for X errors and `k2` row-code problems
    /// for Z errors.
    Shp {
        n2: usize,
        k1: usize,
        k2: usize,
        m1: usize,
        m2: usize,
        piv1: Vec<usize>,
        piv2: Vec<usize>,
    },
}

/// Prebuilt induced decoder for one code and noise level. Immutable and
/// shareable across threads.
#[derive(Clone, Debug)]
pub struct InducedDecoder {
    lift: Lift,
    n_qubits: usize,
    /// Decodes X errors from the Z syndrome (checks of the column code).
    x_stage: ClassicalStage,
    /// Decodes Z errors from the X syndrome (checks of the row code).
    z_stage: ClassicalStage,
    cfg: BpConfig,
}

impl InducedDecoder {
    /// Decoder for data flip rate `p_data` and syndrome flip rate `p_meas`.
    /// Measurement-error nodes are added when `p_meas > 0`. Priors are
    /// clamped into the open interval BP accepts.
    pub fn new(code: &SubsystemCode, p_data: f64, p_meas: f64) -> Result<Self> {
        let prior = |p: f64| p.clamp(1e-9, 0.49);
        let cfg = BpConfig::new(prior(p_data), prior(p_meas))?;
        Self::with_config(code, cfg, p_meas > 0.0)
    }

    pub fn with_config(code: &SubsystemCode, cfg: BpConfig, measurement: bool) -> Result<Self> {
        cfg.validate()?;
        match code.construction() {
            Construction::Bbs { c1, c2, a, .. } => {
                let lat = QubitLattice::new(a.clone());
                Ok(Self {
                    lift: Lift::Bbs {
                        col_qubit: (0..lat.cols()).map(|c| lat.col_qubits(c).first().copied()).collect(),
                        row_qubit: (0..lat.rows()).map(|r| lat.row_qubits(r).first().copied()).collect(),
                    },
                    n_qubits: code.n_qubits(),
                    x_stage: ClassicalStage::new(c2.parity_check(), measurement),
                    z_stage: ClassicalStage::new(c1.parity_check(), measurement),
                    cfg,
                })
            }
            Construction::Shp {
                h1,
                h2,
                g1,
                g2,
                piv1,
                piv2,
            } => Ok(Self {
                lift: Lift::Shp {
                    n2: h2.cols(),
                    k1: g1.rows(),
                    k2: g2.rows(),
                    m1: h1.rows(),
                    m2: h2.rows(),
                    piv1: piv1.clone(),
                    piv2: piv2.clone(),
                },
                n_qubits: code.n_qubits(),
                x_stage: ClassicalStage::new(h2, measurement),
                z_stage: ClassicalStage::new(h1, measurement),
                cfg,
            }),
            Construction::Hgp { .. } => Err(Error::InvalidArgument(
                "induced decoding is defined for BBS and SHP codes only".into(),
            )),
        }
    }

    pub fn config(&self) -> &BpConfig {
        &self.cfg
    }

    pub fn has_measurement_nodes(&self) -> bool {
        self.x_stage.graph().has_measurement_nodes()
    }

    /// X correction from the Z-stabilizer syndrome.
    pub fn decode_x(&self, z_syndrome: &BitVector) -> (BitVector, bool) {
        let mut corr = BitVector::zeros(self.n_qubits);
        let mut converged = true;
        match &self.lift {
            Lift::Bbs { col_qubit, .. } => {
                let r = self.x_stage.decode(&self.cfg, z_syndrome);
                converged = r.converged;
                for c in r.data_correction.ones_iter() {
                    if let Some(q) = col_qubit[c] {
                        corr.flip(q);
                    }
                }
            }
            Lift::Shp { n2, k1, m2, piv1, .. } => {
                for i in 0..*k1 {
                    let sub = slice(z_syndrome, i * m2, *m2, 1);
                    if sub.is_zero() {
                        continue;
                    }
                    let r = self.x_stage.decode(&self.cfg, &sub);
                    converged &= r.converged;
                    for c in r.data_correction.ones_iter() {
                        corr.flip(piv1[i] * n2 + c);
                    }
                }
            }
        }
        (corr, converged)
    }

    /// Z correction from the X-stabilizer syndrome.
    pub fn decode_z(&self, x_syndrome: &BitVector) -> (BitVector, bool) {
        let mut corr = BitVector::zeros(self.n_qubits);
        let mut converged = true;
        match &self.lift {
            Lift::Bbs { row_qubit, .. } => {
                let r = self.z_stage.decode(&self.cfg, x_syndrome);
                converged = r.converged;
                for row in r.data_correction.ones_iter() {
                    if let Some(q) = row_qubit[row] {
                        corr.flip(q);
                    }
                }
            }
            Lift::Shp { n2, k2, m1, piv2, .. } => {
                for j in 0..*k2 {
                    let sub = slice(x_syndrome, j, *m1, *k2);
                    if sub.is_zero() {
                        continue;
                    }
                    let r = self.z_stage.decode(&self.cfg, &sub);
                    converged &= r.converged;
                    for row in r.data_correction.ones_iter() {
                        corr.flip(row * n2 + piv2[j]);
                    }
                }
            }
        }
        (corr, converged)
    }

    pub fn decode(&self, s: &SyndromeFrame) -> CorrectionFrame {
        let (x_corr, cx) = self.decode_x(&s.z_syndrome);
        let (z_corr, cz) = self.decode_z(&s.x_syndrome);
        CorrectionFrame {
            x_corr,
            z_corr,
            converged: cx && cz,
        }
    }
}

/// Bits `start, start + step, ...` (`len` of them) of `v`.
fn slice(v: &BitVector, start: usize, len: usize, step: usize) -> BitVector {
    let mut out = BitVector::zeros(len);
    for t in 0..len {
        if v.get(start + t * step) {
            out.set(t, true);
        }
    }
    out
}

/// One-shot BBS decode; builds the Tanner graphs on every call.
pub fn bbs_decode(code: &SubsystemCode, syndrome: &SyndromeFrame, cfg: &BpConfig) -> Result<CorrectionFrame> {
    if !matches!(code.construction(), Construction::Bbs { .. }) {
        return Err(Error::InvalidArgument("bbs_decode needs a BBS code".into()));
    }
    Ok(InducedDecoder::with_config(code, *cfg, false)?.decode(syndrome))
}

/// One-shot SHP decode; builds the Tanner graphs on every call.
pub fn shp_decode(code: &SubsystemCode, syndrome: &SyndromeFrame, cfg: &BpConfig) -> Result<CorrectionFrame> {
    if !matches!(code.construction(), Construction::Shp { .. }) {
        return Err(Error::InvalidArgument("shp_decode needs an SHP code".into()));
    }
    Ok(InducedDecoder::with_config(code, *cfg, false)?.decode(syndrome))
}

/// Finds some error of one Pauli type reproducing a syndrome exactly, used
/// when BP leaves a residual syndrome.
#[derive(Clone, Debug)]
pub struct SyndromeInverter {
    /// Pivot columns of the echelon form of the check matrix.
    pivots: Vec<usize>,
    /// Row operations bringing the check matrix to echelon form.
    transform: BinaryMatrix,
    n_qubits: usize,
}

impl SyndromeInverter {
    pub fn new(checks: &BinaryMatrix) -> Self {
        let (m, n) = (checks.rows(), checks.cols());
        let r = checks.hstack(&BinaryMatrix::identity(m)).rref();
        Self {
            pivots: r.pivots.iter().copied().filter(|&p| p < n).collect(),
            transform: r.matrix.select_cols(&(n..n + m).collect::<Vec<_>>()),
            n_qubits: n,
        }
    }

    /// Some `e` with `checks·e = syndrome`, or `None` if there is none.
    pub fn solve(&self, syndrome: &BitVector) -> Option<BitVector> {
        let t = self.transform.mul_vec(syndrome);
        if (self.pivots.len()..t.len()).any(|r| t.get(r)) {
            return None;
        }
        let mut e = BitVector::zeros(self.n_qubits);
        for (r, &p) in self.pivots.iter().enumerate() {
            if t.get(r) {
                e.set(p, true);
            }
        }
        Some(e)
    }
}
