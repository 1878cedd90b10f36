//! Circuit-level depolarizing noise for small codes, simulated with a Pauli
//! frame.
//!
//! Each stabilizer is measured with one ancilla. X stabilizers use
//! `PREP_X a; CNOT a d ...; MEAS_X a`, Z stabilizers use
//! `PREP_Z a; CNOT d a ...; MEAS_Z a`. Stabilizers are extracted one after the
//! other. Data qubits are visited gauge by gauge: column-major for X
//! stabilizers (X gauges run along columns), row-major for Z stabilizers.
//!
//! The protocol starts from an ideal logical `|0...0>`, applies memory noise
//! to every data qubit, runs one noisy extraction round and, if any outcome
//! is nontrivial, a second round whose syndrome is decoded with a lookup
//! table. All data qubits are then measured in the Z basis; the Z
//! stabilizers are recomputed from the readout, decoded once more, and the
//! bare Z logicals give the per-qubit readout flips.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::SubsystemCode;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gf2::{BinaryMatrix, BitVector};
use crate::pheno::{Estimator, SimResult};
use crate::stats::{log_log_crossing, BernoulliSampler, Estimate};

/// One instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    /// Noiseless reset to `|0>`.
    PrepZ(usize),
    /// Noiseless reset to `|+>`.
    PrepX(usize),
    H(usize),
    Cnot(usize, usize),
    /// Z-basis measurement recorded as outcome `.1`.
    MeasZ(usize, usize),
    /// X-basis measurement recorded as outcome `.1`.
    MeasX(usize, usize),
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::PrepZ(q) => write!(f, "PREP_Z {q}"),
            Op::PrepX(q) => write!(f, "PREP_X {q}"),
            Op::H(q) => write!(f, "H {q}"),
            Op::Cnot(c, t) => write!(f, "CNOT {c} {t}"),
            Op::MeasZ(q, _) => write!(f, "MEAS_Z {q}"),
            Op::MeasX(q, _) => write!(f, "MEAS_X {q}"),
        }
    }
}

/// What can go wrong at a location.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocationKind {
    /// X, Y or Z on one qubit.
    OneQubit(usize),
    /// One of the 15 non-identity two-qubit Paulis.
    TwoQubit(usize, usize),
    /// Flipped classical outcome.
    MeasureFlip,
}

impl LocationKind {
    pub fn n_faults(&self) -> u8 {
        match self {
            LocationKind::OneQubit(_) => 3,
            LocationKind::TwoQubit(..) => 15,
            LocationKind::MeasureFlip => 1,
        }
    }
}

/// One extraction round: data qubits `0..n_data`, then one ancilla per
/// X stabilizer and one per Z stabilizer. Outcome `j < sx` belongs to X
/// stabilizer `j`, outcome `sx + j` to Z stabilizer `j`.
#[derive(Clone, Debug)]
pub struct Circuit {
    n_data: usize,
    n_x: usize,
    n_z: usize,
    ops: Vec<Op>,
    /// Fault location of each op; preparations have none.
    location: Vec<Option<usize>>,
    kinds: Vec<LocationKind>,
}

impl Circuit {
    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn n_ancillas(&self) -> usize {
        self.n_x + self.n_z
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data + self.n_ancillas()
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_x + self.n_z
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn n_locations(&self) -> usize {
        self.kinds.len()
    }

    pub fn location_kind(&self, loc: usize) -> LocationKind {
        self.kinds[loc]
    }

    /// Data qubits touched by the CNOTs of ancilla `a`, in gate order.
    pub fn cnot_support(&self, ancilla: usize) -> Vec<usize> {
        self.ops
            .iter()
            .filter_map(|op| match *op {
                Op::Cnot(c, t) if c == ancilla => Some(t),
                Op::Cnot(c, t) if t == ancilla => Some(c),
                _ => None,
            })
            .collect()
    }

    /// One instruction per line: `PREP_Z q`, `PREP_X q`, `H q`, `CNOT c t`,
    /// `MEAS_Z q` or `MEAS_X q`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for op in &self.ops {
            s.push_str(&op.to_string());
            s.push('\n');
        }
        s
    }
}

/// Extraction circuit for a CSS code with lattice layout.
pub fn build_extraction_circuit(code: &SubsystemCode) -> Circuit {
    let n = code.n_qubits();
    let (sx, sz) = (code.stab_x().rows(), code.stab_z().rows());
    let sites = code.layout();
    let col_major = |q: &usize| (sites[*q].lattice, sites[*q].col, sites[*q].row);
    let row_major = |q: &usize| (sites[*q].lattice, sites[*q].row, sites[*q].col);
    let mut ops = Vec::new();
    for j in 0..sx {
        let a = n + j;
        let mut supp = code.stab_x().row_support(j);
        supp.sort_by_key(col_major);
        ops.push(Op::PrepX(a));
        ops.extend(supp.iter().map(|&d| Op::Cnot(a, d)));
        ops.push(Op::MeasX(a, j));
    }
    for j in 0..sz {
        let a = n + sx + j;
        let mut supp = code.stab_z().row_support(j);
        supp.sort_by_key(row_major);
        ops.push(Op::PrepZ(a));
        ops.extend(supp.iter().map(|&d| Op::Cnot(d, a)));
        ops.push(Op::MeasZ(a, sx + j));
    }
    let mut location = Vec::with_capacity(ops.len());
    let mut kinds = Vec::new();
    for op in &ops {
        let kind = match *op {
            Op::PrepZ(_) | Op::PrepX(_) => None,
            Op::H(q) => Some(LocationKind::OneQubit(q)),
            Op::Cnot(c, t) => Some(LocationKind::TwoQubit(c, t)),
            Op::MeasZ(..) | Op::MeasX(..) => Some(LocationKind::MeasureFlip),
        };
        location.push(kind.map(|k| {
            kinds.push(k);
            kinds.len() - 1
        }));
    }
    Circuit {
        n_data: n,
        n_x: sx,
        n_z: sz,
        ops,
        location,
        kinds,
    }
}

/// Uniform depolarizing noise at rate `p` after every gate, on every
/// measurement outcome, as memory noise before correction and on the final
/// readout. Idle qubits are noiseless.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingModel {
    pub p: f64,
}

impl DepolarizingModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("error rate {p} outside [0, 1]")));
        }
        Ok(Self { p })
    }

    /// Probability of each non-identity Pauli after a one-qubit gate.
    pub fn one_qubit(&self) -> f64 {
        self.p / 3.0
    }

    /// Probability of each non-identity Pauli after a two-qubit gate.
    pub fn two_qubit(&self) -> f64 {
        self.p / 15.0
    }
}

/// X and Z flip record of every qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    pub x: BitVector,
    pub z: BitVector,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn reset(&mut self, q: usize) {
        self.x.set(q, false);
        self.z.set(q, false);
    }

    pub fn h(&mut self, q: usize) {
        let (x, z) = (self.x.get(q), self.z.get(q));
        self.x.set(q, z);
        self.z.set(q, x);
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        if self.x.get(c) {
            self.x.flip(t);
        }
        if self.z.get(t) {
            self.z.flip(c);
        }
    }

    /// Multiplies in a one-qubit Pauli: bit 0 is X, bit 1 is Z.
    pub fn apply(&mut self, q: usize, pauli: u8) {
        if pauli & 1 != 0 {
            self.x.flip(q);
        }
        if pauli & 2 != 0 {
            self.z.flip(q);
        }
    }
}

/// Syndrome-to-correction table for one Pauli type: every single-qubit
/// syndrome maps to its lowest-index qubit, remaining two-qubit syndromes
/// to their lexicographically first pair, anything else to the identity.
#[derive(Clone, Debug)]
pub struct LookupTable {
    checks: BinaryMatrix,
    table: HashMap<BitVector, Vec<usize>>,
}

impl LookupTable {
    pub fn new(checks: &BinaryMatrix) -> Self {
        let n = checks.cols();
        let cols: Vec<BitVector> = (0..n).map(|q| checks.column(q)).collect();
        let mut table = HashMap::new();
        table.insert(BitVector::zeros(checks.rows()), Vec::new());
        for (q, c) in cols.iter().enumerate() {
            table.entry(c.clone()).or_insert_with(|| vec![q]);
        }
        for a in 0..n {
            for b in a + 1..n {
                table.entry(cols[a].xor(&cols[b])).or_insert_with(|| vec![a, b]);
            }
        }
        Self {
            checks: checks.clone(),
            table,
        }
    }

    pub fn get(&self, syndrome: &BitVector) -> Option<&[usize]> {
        self.table.get(syndrome).map(Vec::as_slice)
    }

    /// Correction for `syndrome`, identity when the table has no entry.
    pub fn correct(&self, syndrome: &BitVector) -> BitVector {
        let n = self.checks.cols();
        self.get(syndrome).map_or_else(|| BitVector::zeros(n), |s| BitVector::from_indices(n, s))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// X corrections from Z-stabilizer syndromes and Z corrections from
/// X-stabilizer syndromes.
#[derive(Clone, Debug)]
pub struct LookupDecoder {
    pub x: LookupTable,
    pub z: LookupTable,
}

impl LookupDecoder {
    pub fn new(code: &SubsystemCode) -> Self {
        Self {
            x: LookupTable::new(code.stab_z()),
            z: LookupTable::new(code.stab_x()),
        }
    }
}

pub fn lookup_decoder_build(code: &SubsystemCode) -> LookupDecoder {
    LookupDecoder::new(code)
}

/// A fault: location index in the protocol and a kind in
/// `1..=n_faults` (a Pauli code for gates and memory, `1` for flips).
pub type Fault = (usize, u8);

/// Result of one protocol run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolOutcome {
    pub flips: BitVector,
    pub second_round: bool,
}

impl ProtocolOutcome {
    pub fn block_failure(&self) -> bool {
        !self.flips.is_zero()
    }
}

/// Circuit, decoder and fault layout for one code. Protocol locations are
/// numbered: memory noise on each data qubit, round 1, round 2, readout
/// flip on each data qubit.
#[derive(Clone, Debug)]
pub struct CircuitEngine {
    circuit: Circuit,
    decoder: LookupDecoder,
    stab_z: BinaryMatrix,
    logical_z: BinaryMatrix,
    k: usize,
}

impl CircuitEngine {
    pub fn new(code: &SubsystemCode) -> Self {
        Self {
            circuit: build_extraction_circuit(code),
            decoder: LookupDecoder::new(code),
            stab_z: code.stab_z().clone(),
            logical_z: code.logical_z().clone(),
            k: code.k(),
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_locations(&self) -> usize {
        2 * self.circuit.n_data + 2 * self.circuit.n_locations()
    }

    pub fn location_kind(&self, loc: usize) -> LocationKind {
        let n = self.circuit.n_data;
        let l = self.circuit.n_locations();
        if loc < n {
            LocationKind::OneQubit(loc)
        } else if loc < n + 2 * l {
            self.circuit.kinds[(loc - n) % l]
        } else {
            LocationKind::MeasureFlip
        }
    }

    /// Runs the protocol with the given faults (sorted by location).
    pub fn run(&self, faults: &[Fault]) -> ProtocolOutcome {
        let c = &self.circuit;
        let (n, l) = (c.n_data, c.n_locations());
        let mut frame = PauliFrame::new(c.n_qubits());
        let mut cur = 0;
        while cur < faults.len() && faults[cur].0 < n {
            frame.apply(faults[cur].0, faults[cur].1);
            cur += 1;
        }
        let round1 = self.round(&mut frame, faults, &mut cur, n);
        let second_round = !round1.is_zero();
        while cur < faults.len() && faults[cur].0 < n + l {
            cur += 1;
        }
        if second_round {
            let round2 = self.round(&mut frame, faults, &mut cur, n + l);
            let (sx, sz) = (c.n_x, c.n_z);
            let x_syn = BitVector::from_indices(sx, &round2.ones_iter().filter(|&j| j < sx).collect::<Vec<_>>());
            let z_syn = BitVector::from_indices(sz, &round2.ones_iter().filter(|&j| j >= sx).map(|j| j - sx).collect::<Vec<_>>());
            for q in self.decoder.x.correct(&z_syn).ones_iter() {
                frame.apply(q, 1);
            }
            for q in self.decoder.z.correct(&x_syn).ones_iter() {
                frame.apply(q, 2);
            }
        }
        while cur < faults.len() && faults[cur].0 < n + 2 * l {
            cur += 1;
        }
        let mut readout = BitVector::from_indices(n, &(0..n).filter(|&q| frame.x.get(q)).collect::<Vec<_>>());
        for &(loc, _) in &faults[cur..] {
            readout.flip(loc - n - 2 * l);
        }
        let syn = self.stab_z.mul_vec(&readout);
        readout.xor_assign(&self.decoder.x.correct(&syn));
        ProtocolOutcome {
            flips: self.logical_z.mul_vec(&readout),
            second_round,
        }
    }

    fn round(&self, frame: &mut PauliFrame, faults: &[Fault], cur: &mut usize, base: usize) -> BitVector {
        let c = &self.circuit;
        let mut outcomes = BitVector::zeros(c.n_outcomes());
        for (op, loc) in c.ops.iter().zip(&c.location) {
            let fault = match loc {
                Some(l) if *cur < faults.len() && faults[*cur].0 == base + l => {
                    *cur += 1;
                    Some(faults[*cur - 1].1)
                }
                _ => None,
            };
            match *op {
                Op::PrepZ(q) | Op::PrepX(q) => frame.reset(q),
                Op::H(q) => {
                    frame.h(q);
                    if let Some(f) = fault {
                        frame.apply(q, f);
                    }
                }
                Op::Cnot(a, b) => {
                    frame.cnot(a, b);
                    if let Some(f) = fault {
                        frame.apply(a, f >> 2);
                        frame.apply(b, f & 3);
                    }
                }
                Op::MeasZ(q, j) => outcomes.set(j, frame.x.get(q) ^ fault.is_some()),
                Op::MeasX(q, j) => outcomes.set(j, frame.z.get(q) ^ fault.is_some()),
            }
        }
        outcomes
    }

    /// Samples faults at rate `p`: every location fails with probability
    /// `p`, and a failing location draws its fault uniformly.
    pub fn sample_faults<R: Rng + ?Sized>(&self, model: DepolarizingModel, rng: &mut R) -> Vec<Fault> {
        let mut locs = Vec::new();
        BernoulliSampler::new(model.p).for_each(self.n_locations(), rng, |l| locs.push(l));
        locs.into_iter()
            .map(|l| (l, rng.random_range(1..=self.location_kind(l).n_faults())))
            .collect()
    }

    pub fn trial<R: Rng + ?Sized>(&self, model: DepolarizingModel, rng: &mut R) -> ProtocolOutcome {
        let faults = self.sample_faults(model, rng);
        if faults.is_empty() {
            return ProtocolOutcome {
                flips: BitVector::zeros(self.k),
                second_round: false,
            };
        }
        self.run(&faults)
    }

    /// Every single fault at every location; returns the faults that flip
    /// some logical readout.
    pub fn single_fault_failures(&self, exec: Execution) -> Vec<Fault> {
        let all: Vec<Fault> = (0..self.n_locations())
            .flat_map(|l| (1..=self.location_kind(l).n_faults()).map(move |k| (l, k)))
            .collect();
        let bad = exec::map_collect(exec, 0..all.len() as u64, |i| {
            let f = all[i as usize];
            self.run(&[f]).block_failure().then_some(f)
        });
        bad.into_iter().flatten().collect()
    }
}

/// One protocol run seeded by `(seed, 0)`.
pub fn run_protocol_trial(engine: &CircuitEngine, model: DepolarizingModel, seed: u64) -> ProtocolOutcome {
    engine.trial(model, &mut exec::trial_rng(seed, 0))
}

/// Monte Carlo statistics at one error rate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitPoint {
    pub p_bits: u64,
    pub trials: u64,
    pub block_failures: u64,
    pub per_qubit_failures: Vec<u64>,
    pub second_rounds: u64,
    pub seed: u64,
}

impl CircuitPoint {
    pub fn p(&self) -> f64 {
        f64::from_bits(self.p_bits)
    }

    pub fn block_rate(&self) -> Estimate {
        Estimate::proportion(self.block_failures, self.trials)
    }

    pub fn qubit_rate(&self, i: usize) -> Estimate {
        Estimate::proportion(self.per_qubit_failures[i], self.trials)
    }

    /// Same record shape as the phenomenological results, for CSV output.
    pub fn to_sim_result(&self) -> SimResult {
        SimResult {
            p: self.p(),
            p_meas: self.p(),
            trials: self.trials,
            block_failures: self.block_failures,
            per_qubit_failures: self.per_qubit_failures.clone(),
            x_failures: self.block_failures,
            z_failures: 0,
            fallback_solves: 0,
            block_rate: self.block_rate(),
            per_qubit_rate: (0..self.per_qubit_failures.len()).map(|i| self.qubit_rate(i).value).collect(),
            wall_time: std::time::Duration::ZERO,
            seed: self.seed,
            estimator: Estimator::Direct,
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Counts {
    trials: u64,
    block: u64,
    second: u64,
    per_qubit: Vec<u64>,
}

impl Counts {
    fn of(o: &ProtocolOutcome) -> Self {
        Self {
            trials: 1,
            block: u64::from(o.block_failure()),
            second: u64::from(o.second_round),
            per_qubit: (0..o.flips.len()).map(|i| u64::from(o.flips.get(i))).collect(),
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.trials += o.trials;
        self.block += o.block;
        self.second += o.second;
        if self.per_qubit.len() < o.per_qubit.len() {
            self.per_qubit.resize(o.per_qubit.len(), 0);
        }
        for (a, b) in self.per_qubit.iter_mut().zip(&o.per_qubit) {
            *a += b;
        }
        self
    }
}

/// `trials` protocol runs at rate `p`; trial `i` uses stream `(seed, i)`.
pub fn run_circuit_trials(engine: &CircuitEngine, model: DepolarizingModel, trials: u64, seed: u64, exec: Execution) -> CircuitPoint {
    let c = exec::map_reduce(
        exec,
        0..trials,
        Counts::default,
        |i| Counts::of(&engine.trial(model, &mut exec::trial_rng(seed, i))),
        Counts::merge,
    );
    let mut per_qubit = c.per_qubit;
    per_qubit.resize(engine.k, 0);
    CircuitPoint {
        p_bits: model.p.to_bits(),
        trials: c.trials,
        block_failures: c.block,
        per_qubit_failures: per_qubit,
        second_rounds: c.second,
        seed,
    }
}

/// Runs every rate of `grid`; point `j` uses seed `derive_seed(seed, j)`.
pub fn circuit_sweep(engine: &CircuitEngine, grid: &[f64], trials: u64, seed: u64, exec: Execution) -> Result<Vec<CircuitPoint>> {
    grid.iter()
        .enumerate()
        .map(|(j, &p)| Ok(run_circuit_trials(engine, DepolarizingModel::new(p)?, trials, exec::derive_seed(seed, j as u64), exec)))
        .collect()
}

/// What the encoded block failure rate is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockReference {
    /// The physical rate `p`.
    Physical,
    /// `1 - (1 - p)^K`, the chance that `K` unencoded qubits see an error.
    Unencoded,
}

impl BlockReference {
    pub fn rate(&self, p: f64, k: usize) -> f64 {
        match self {
            BlockReference::Physical => p,
            BlockReference::Unencoded => 1.0 - (1.0 - p).powi(k as i32),
        }
    }
}

/// Crossing points of the Monte Carlo curves with their references.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pseudothresholds {
    pub block: Option<f64>,
    pub per_qubit: Vec<Option<f64>>,
}

/// Block crossing against `reference`; points must be sorted by `p`.
pub fn block_pseudothreshold(points: &[CircuitPoint], k: usize, reference: BlockReference) -> Result<f64> {
    let curve: Vec<(f64, f64)> = points.iter().map(|pt| (pt.p(), pt.block_rate().value)).collect();
    log_log_crossing(&curve, |p| reference.rate(p, k))
}

/// Crossing of logical qubit `i`'s failure rate with `p`.
pub fn qubit_pseudothreshold(points: &[CircuitPoint], i: usize) -> Result<f64> {
    let curve: Vec<(f64, f64)> = points.iter().map(|pt| (pt.p(), pt.qubit_rate(i).value)).collect();
    log_log_crossing(&curve, |p| p)
}

/// Sweeps `grid` (ascending) and locates every crossing.
pub fn pseudothreshold(
    engine: &CircuitEngine,
    grid: &[f64],
    trials: u64,
    seed: u64,
    reference: BlockReference,
    exec: Execution,
) -> Result<(Pseudothresholds, Vec<CircuitPoint>)> {
    let points = circuit_sweep(engine, grid, trials, seed, exec)?;
    let block = block_pseudothreshold(&points, engine.k, reference).ok();
    let per_qubit = (0..engine.k).map(|i| qubit_pseudothreshold(&points, i).ok()).collect();
    Ok((Pseudothresholds { block, per_qubit }, points))
}
