//! Phenomenological noise: independent bit and phase flips on data qubits
//! plus independently flipped stabilizer outcomes, decoded by the induced
//! decoder with measurement-error nodes.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::SubsystemCode;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gf2::BitVector;
use crate::induced::{InducedDecoder, SyndromeInverter};
use crate::stats::{binomial_pmf, BernoulliSampler, Estimate};

pub use crate::stats::{fit_power_law, FitResult};

/// Flip rates of one phenomenological point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhenoModel {
    pub p_data: f64,
    pub p_meas: f64,
}

impl PhenoModel {
    /// Data and measurement flips at the same rate.
    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn new(p_data: f64, p_meas: f64) -> Result<Self> {
        for p in [p_data, p_meas] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("flip rate {p} outside [0, 1)")));
            }
        }
        Ok(Self { p_data, p_meas })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Direct,
    Importance,
}

impl Estimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Direct => "direct",
            Estimator::Importance => "importance",
        }
    }
}

/// Failure statistics of one point.
///
/// `per_qubit_failures[i]` counts trials in which logical qubit `i` suffered
/// an X flip, a Z flip or both; `x_failures`/`z_failures` count trials with
/// any X-type or Z-type logical flip. For importance results the counts are
/// raw failing samples and the rates come from the stratified estimator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimResult {
    pub p: f64,
    pub p_meas: f64,
    pub trials: u64,
    pub block_failures: u64,
    pub per_qubit_failures: Vec<u64>,
    pub x_failures: u64,
    pub z_failures: u64,
    /// Trials whose residual syndrome survived the perfect decode and was
    /// cleared by linear algebra instead.
    pub fallback_solves: u64,
    pub block_rate: Estimate,
    pub per_qubit_rate: Vec<f64>,
    pub wall_time: Duration,
    pub seed: u64,
    pub estimator: Estimator,
}

impl PartialEq for SimResult {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p
            && self.p_meas == o.p_meas
            && self.trials == o.trials
            && self.block_failures == o.block_failures
            && self.per_qubit_failures == o.per_qubit_failures
            && self.x_failures == o.x_failures
            && self.z_failures == o.z_failures
            && self.fallback_solves == o.fallback_solves
            && self.block_rate == o.block_rate
            && self.per_qubit_rate == o.per_qubit_rate
            && self.seed == o.seed
            && self.estimator == o.estimator
    }
}

impl SimResult {
    pub fn mean_qubit_rate(&self) -> f64 {
        if self.per_qubit_rate.is_empty() {
            0.0
        } else {
            self.per_qubit_rate.iter().sum::<f64>() / self.per_qubit_rate.len() as f64
        }
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub x_flips: BitVector,
    pub z_flips: BitVector,
    pub fallback: bool,
}

impl TrialOutcome {
    pub fn block_failure(&self) -> bool {
        !self.x_flips.is_zero() || !self.z_flips.is_zero()
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    trials: u64,
    block: u64,
    x: u64,
    z: u64,
    fallback: u64,
    per_qubit: Vec<u64>,
}

impl Tally {
    fn of(o: &TrialOutcome) -> Self {
        let k = o.x_flips.len();
        let per_qubit = (0..k).map(|i| u64::from(o.x_flips.get(i) || o.z_flips.get(i))).collect();
        Self {
            trials: 1,
            block: u64::from(o.block_failure()),
            x: u64::from(!o.x_flips.is_zero()),
            z: u64::from(!o.z_flips.is_zero()),
            fallback: u64::from(o.fallback),
            per_qubit,
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.trials += o.trials;
        self.block += o.block;
        self.x += o.x;
        self.z += o.z;
        self.fallback += o.fallback;
        if self.per_qubit.len() < o.per_qubit.len() {
            self.per_qubit.resize(o.per_qubit.len(), 0);
        }
        for (a, b) in self.per_qubit.iter_mut().zip(&o.per_qubit) {
            *a += b;
        }
        self
    }
}

/// Decoders and samplers for one code at one noise point.
pub struct PhenoEngine<'a> {
    code: &'a SubsystemCode,
    model: PhenoModel,
    noisy: InducedDecoder,
    perfect: InducedDecoder,
    inv_x: SyndromeInverter,
    inv_z: SyndromeInverter,
}

impl<'a> PhenoEngine<'a> {
    pub fn new(code: &'a SubsystemCode, model: PhenoModel) -> Result<Self> {
        Self::with_decoder_rates(code, model, model)
    }

    /// Engine whose noise is `model` but whose BP priors come from `prior`.
    pub fn with_decoder_rates(code: &'a SubsystemCode, model: PhenoModel, prior: PhenoModel) -> Result<Self> {
        Ok(Self {
            code,
            model,
            noisy: InducedDecoder::new(code, prior.p_data, prior.p_meas)?,
            perfect: InducedDecoder::new(code, prior.p_data, 0.0)?,
            inv_x: SyndromeInverter::new(code.stab_z()),
            inv_z: SyndromeInverter::new(code.stab_x()),
        })
    }

    pub fn code(&self) -> &SubsystemCode {
        self.code
    }

    pub fn model(&self) -> PhenoModel {
        self.model
    }

    /// Number of fault locations: X and Z on every qubit, plus one per
    /// stabilizer outcome when measurements are noisy.
    pub fn n_loci(&self) -> usize {
        let n = self.code.n_qubits();
        2 * n + if self.model.p_meas > 0.0 { self.n_meas_loci() } else { 0 }
    }

    fn n_meas_loci(&self) -> usize {
        self.code.stab_x().rows() + self.code.stab_z().rows()
    }

    /// Samples and decodes one trial.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        let n = self.code.n_qubits();
        let (sx, sz) = (self.code.stab_x().rows(), self.code.stab_z().rows());
        let data = BernoulliSampler::new(self.model.p_data);
        let meas = BernoulliSampler::new(self.model.p_meas);
        let x_err = BitVector::from_indices(n, &data.sample(n, rng));
        let z_err = BitVector::from_indices(n, &data.sample(n, rng));
        let x_meas = BitVector::from_indices(sx, &meas.sample(sx, rng));
        let z_meas = BitVector::from_indices(sz, &meas.sample(sz, rng));
        self.decode_faults(&x_err, &z_err, &x_meas, &z_meas)
    }

    /// Decodes a fixed fault configuration. `x_meas` flips outcomes of the X
    /// stabilizers, `z_meas` those of the Z stabilizers.
    pub fn decode_faults(&self, x_err: &BitVector, z_err: &BitVector, x_meas: &BitVector, z_meas: &BitVector) -> TrialOutcome {
        let code = self.code;
        let mut z_syn = code.z_syndrome_of(x_err);
        z_syn.xor_assign(z_meas);
        let mut x_syn = code.x_syndrome_of(z_err);
        x_syn.xor_assign(x_meas);
        let (cx, _) = self.noisy.decode_x(&z_syn);
        let (cz, _) = self.noisy.decode_z(&x_syn);
        let (rx, fx) = self.finish(x_err.xor(&cx), |r| code.z_syndrome_of(r), |s| self.perfect.decode_x(s).0, &self.inv_x);
        let (rz, fz) = self.finish(z_err.xor(&cz), |r| code.x_syndrome_of(r), |s| self.perfect.decode_z(s).0, &self.inv_z);
        TrialOutcome {
            x_flips: code.logical_flips_x(&rx).expect("residual syndrome cleared"),
            z_flips: code.logical_flips_z(&rz).expect("residual syndrome cleared"),
            fallback: fx || fz,
        }
    }

    // perfect-measurement round on the residual, then a linear solve if BP
    // still leaves a syndrome
    fn finish(
        &self,
        mut residual: BitVector,
        syndrome: impl Fn(&BitVector) -> BitVector,
        decode: impl Fn(&BitVector) -> BitVector,
        inv: &SyndromeInverter,
    ) -> (BitVector, bool) {
        let s = syndrome(&residual);
        if s.is_zero() {
            return (residual, false);
        }
        residual.xor_assign(&decode(&s));
        let s = syndrome(&residual);
        if s.is_zero() {
            return (residual, false);
        }
        let fix = inv.solve(&s).expect("stabilizer syndromes lie in the column space");
        residual.xor_assign(&fix);
        (residual, true)
    }

    fn tally(&self, range: std::ops::Range<u64>, seed: u64, exec: Execution) -> Tally {
        exec::map_reduce(
            exec,
            range,
            Tally::default,
            |i| Tally::of(&self.trial(&mut exec::trial_rng(seed, i))),
            Tally::merge,
        )
    }
}

fn direct_result(model: PhenoModel, t: Tally, k: usize, seed: u64, wall: Duration) -> SimResult {
    let mut per_qubit = t.per_qubit;
    per_qubit.resize(k, 0);
    SimResult {
        p: model.p_data,
        p_meas: model.p_meas,
        trials: t.trials,
        block_failures: t.block,
        per_qubit_rate: per_qubit.iter().map(|&f| Estimate::proportion(f, t.trials).value).collect(),
        per_qubit_failures: per_qubit,
        x_failures: t.x,
        z_failures: t.z,
        fallback_solves: t.fallback,
        block_rate: Estimate::proportion(t.block, t.trials),
        wall_time: wall,
        seed,
        estimator: Estimator::Direct,
    }
}

/// Runs `trials` independent trials; trial `i` draws from stream `(seed, i)`.
pub fn run_trials(code: &SubsystemCode, model: PhenoModel, trials: u64, seed: u64, exec: Execution) -> Result<SimResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let start = Instant::now();
    let engine = PhenoEngine::new(code, model)?;
    let t = engine.tally(0..trials, seed, exec);
    Ok(direct_result(model, t, code.k(), seed, start.elapsed()))
}

/// Adaptive trial budget: batches of `batch` trials until `target_failures`
/// block failures are seen or `max_trials` is reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSchedule {
    pub target_failures: u64,
    pub min_trials: u64,
    pub max_trials: u64,
    pub batch: u64,
}

impl Default for TrialSchedule {
    fn default() -> Self {
        Self {
            target_failures: 100,
            min_trials: 1000,
            max_trials: 1_000_000,
            batch: 10_000,
        }
    }
}

impl TrialSchedule {
    pub fn fixed(trials: u64) -> Self {
        Self {
            target_failures: u64::MAX,
            min_trials: trials,
            max_trials: trials,
            batch: trials.max(1),
        }
    }
}

/// Runs every model of `grid` under `schedule`. Point `j` uses seed
/// `derive_seed(seed, j)`; batch boundaries do not depend on the executor,
/// so the results do not either.
pub fn sweep(code: &SubsystemCode, grid: &[PhenoModel], schedule: TrialSchedule, seed: u64, exec: Execution) -> Result<Vec<SimResult>> {
    if schedule.batch == 0 || schedule.max_trials == 0 {
        return Err(Error::InvalidArgument("trial schedule needs positive batch and cap".into()));
    }
    let mut out = Vec::with_capacity(grid.len());
    for (j, &model) in grid.iter().enumerate() {
        let start = Instant::now();
        let point_seed = exec::derive_seed(seed, j as u64);
        let engine = PhenoEngine::new(code, model)?;
        let mut t = Tally::default();
        while t.trials < schedule.max_trials && (t.trials < schedule.min_trials || t.block < schedule.target_failures) {
            let end = (t.trials + schedule.batch).min(schedule.max_trials);
            let batch = engine.tally(t.trials..end, point_seed, exec);
            t = t.merge(batch);
        }
        out.push(direct_result(model, t, code.k(), point_seed, start.elapsed()));
    }
    Ok(out)
}

/// `P(fail | w)` estimate for one fault weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub weight: usize,
    pub samples: u64,
    pub failures: u64,
    pub per_qubit_failures: Vec<u64>,
    /// True when every configuration of this weight was enumerated.
    pub exhaustive: bool,
}

impl Stratum {
    pub fn rate(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.failures as f64 / self.samples as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.exhaustive || self.samples == 0 {
            0.0
        } else {
            let f = self.rate();
            f * (1.0 - f) / self.samples as f64
        }
    }
}

/// Stratified failure estimates over the fault weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceResult {
    pub n_loci: usize,
    pub noisy_measurements: bool,
    pub strata: Vec<Stratum>,
    pub seed: u64,
}

impl ImportanceResult {
    /// `P_L(p)` from the strata, with every location failing at rate `p`.
    /// Weights above the largest stratum are bounded by their total
    /// probability, which is added to `sigma`.
    pub fn estimate(&self, p: f64) -> Estimate {
        let n = self.n_loci as u64;
        let (mut value, mut var, mut covered) = (0.0, 0.0, 0.0);
        for s in &self.strata {
            let w = binomial_pmf(n, s.weight as u64, p);
            value += w * s.rate();
            var += w * w * s.variance();
            covered += w;
        }
        let tail = (1.0 - covered).max(0.0);
        Estimate {
            value,
            sigma: var.sqrt() + tail,
        }
    }

    pub fn per_qubit_estimate(&self, p: f64) -> Vec<f64> {
        let n = self.n_loci as u64;
        let k = self.strata.first().map_or(0, |s| s.per_qubit_failures.len());
        (0..k)
            .map(|i| {
                self.strata
                    .iter()
                    .filter(|s| s.samples > 0)
                    .map(|s| binomial_pmf(n, s.weight as u64, p) * s.per_qubit_failures[i] as f64 / s.samples as f64)
                    .sum()
            })
            .collect()
    }

    /// Point result at `p` in the same shape as a direct run.
    pub fn at(&self, p: f64) -> SimResult {
        let samples = self.strata.iter().map(|s| s.samples).sum();
        let k = self.strata.first().map_or(0, |s| s.per_qubit_failures.len());
        SimResult {
            p,
            p_meas: if self.noisy_measurements { p } else { 0.0 },
            trials: samples,
            block_failures: self.strata.iter().map(|s| s.failures).sum(),
            per_qubit_failures: (0..k).map(|i| self.strata.iter().map(|s| s.per_qubit_failures[i]).sum()).collect(),
            x_failures: 0,
            z_failures: 0,
            fallback_solves: 0,
            block_rate: self.estimate(p),
            per_qubit_rate: self.per_qubit_estimate(p),
            wall_time: Duration::ZERO,
            seed: self.seed,
            estimator: Estimator::Importance,
        }
    }
}

/// Importance sampling by total fault count.
///
/// Every location (X and Z on each qubit, plus each stabilizer outcome if
/// `model.p_meas > 0`) fails at the same rate, so conditioned on `w` faults
/// the failing set is uniform. For each `w` in `0..=weight_max`,
/// `samples_per_weight` uniform configurations are decoded, or all of them
/// when there are no more than that. The decoder priors use `model`.
/// Requires `p_meas` to be `0` or equal to `p_data`.
pub fn run_importance(
    code: &SubsystemCode,
    model: PhenoModel,
    weight_max: usize,
    samples_per_weight: u64,
    seed: u64,
    exec: Execution,
) -> Result<ImportanceResult> {
    if weight_max == 0 || samples_per_weight == 0 {
        return Err(Error::InvalidArgument("weight_max and samples_per_weight must be positive".into()));
    }
    if model.p_meas != 0.0 && model.p_meas != model.p_data {
        return Err(Error::InvalidArgument("importance sampling needs p_meas = 0 or p_meas = p_data".into()));
    }
    let engine = PhenoEngine::new(code, model)?;
    let n = code.n_qubits();
    let (sx, sz) = (code.stab_x().rows(), code.stab_z().rows());
    let loci = engine.n_loci();
    let k = code.k();
    let decode_set = |set: &[usize]| {
        let mut x = BitVector::zeros(n);
        let mut z = BitVector::zeros(n);
        let mut mx = BitVector::zeros(sx);
        let mut mz = BitVector::zeros(sz);
        for &l in set {
            match l {
                l if l < n => x.flip(l),
                l if l < 2 * n => z.flip(l - n),
                l if l < 2 * n + sx => mx.flip(l - 2 * n),
                l => mz.flip(l - 2 * n - sx),
            }
        }
        Tally::of(&engine.decode_faults(&x, &z, &mx, &mz))
    };

    let mut strata = Vec::new();
    for w in 0..=weight_max.min(loci) {
        let stratum_seed = exec::derive_seed(seed, w as u64);
        let total = binomial_count(loci, w);
        let exhaustive = total.is_some_and(|c| c <= samples_per_weight);
        let t = if w == 0 {
            decode_set(&[])
        } else if exhaustive {
            let all = combinations(loci, w);
            exec::map_reduce(exec, 0..all.len() as u64, Tally::default, |i| decode_set(&all[i as usize]), Tally::merge)
        } else {
            exec::map_reduce(
                exec,
                0..samples_per_weight,
                Tally::default,
                |i| {
                    let mut rng = exec::trial_rng(stratum_seed, i);
                    let mut set = rand::seq::index::sample(&mut rng, loci, w).into_vec();
                    set.sort_unstable();
                    decode_set(&set)
                },
                Tally::merge,
            )
        };
        let mut per_qubit = t.per_qubit;
        per_qubit.resize(k, 0);
        strata.push(Stratum {
            weight: w,
            samples: t.trials,
            failures: t.block,
            per_qubit_failures: per_qubit,
            exhaustive: w == 0 || exhaustive,
        });
    }
    Ok(ImportanceResult {
        n_loci: loci,
        noisy_measurements: model.p_meas > 0.0,
        strata,
        seed,
    })
}

fn binomial_count(n: usize, w: usize) -> Option<u64> {
    let mut c: u64 = 1;
    for i in 0..w.min(n - w) as u64 {
        c = c.checked_mul(n as u64 - i)? / (i + 1);
    }
    Some(c)
}

fn combinations(n: usize, w: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..w).collect();
    loop {
        out.push(idx.clone());
        let mut i = w;
        while i > 0 && idx[i - 1] == n - w + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for t in i..w {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Identifies the code in CSV rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeInfo {
    pub code_id: String,
    pub n_classical: usize,
    pub n_qubits: usize,
    pub k: usize,
}

impl CodeInfo {
    pub fn of(code: &SubsystemCode) -> Self {
        Self {
            code_id: code.code_id(),
            n_classical: code.classical_length(),
            n_qubits: code.n_qubits(),
            k: code.k(),
        }
    }
}

/// CSV header written by [`write_csv`].
pub const CSV_HEADER: [&str; 13] = [
    "code_id",
    "n_classical",
    "N",
    "K",
    "p",
    "trials",
    "block_failures",
    "qubit_index",
    "qubit_failures",
    "estimator",
    "seed",
    "rate",
    "sigma",
];

/// One block row (`qubit_index = -1`) and one row per logical qubit for each
/// result. `rate` is the block or per-qubit failure rate.
pub fn write_csv<W: Write>(out: W, info: &CodeInfo, results: &[SimResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in results {
        let base = |idx: i64, failures: u64, rate: f64, sigma: f64| {
            vec![
                info.code_id.clone(),
                info.n_classical.to_string(),
                info.n_qubits.to_string(),
                info.k.to_string(),
                r.p.to_string(),
                r.trials.to_string(),
                r.block_failures.to_string(),
                idx.to_string(),
                failures.to_string(),
                r.estimator.as_str().to_string(),
                r.seed.to_string(),
                rate.to_string(),
                sigma.to_string(),
            ]
        };
        w.write_record(base(-1, r.block_failures, r.block_rate.value, r.block_rate.sigma)).map_err(csv_err)?;
        for (i, (&f, &rate)) in r.per_qubit_failures.iter().zip(&r.per_qubit_rate).enumerate() {
            let sigma = if r.trials > 0 { (rate * (1.0 - rate) / r.trials as f64).sqrt() } else { 0.0 };
            w.write_record(base(i as i64, f, rate, sigma)).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::ClassicalCode;
    use crate::codes::{build_bbs, build_shp, reference};
    use crate::gf2::BinaryMatrix;

    fn hamming_bbs() -> SubsystemCode {
        let h = ClassicalCode::hamming_7_4();
        build_bbs(&h, &h, &reference::hamming_bbs_q()).unwrap()
    }

    fn bacon_shor() -> SubsystemCode {
        let r = ClassicalCode::repetition(3);
        build_bbs(&r, &r, &BinaryMatrix::identity(1)).unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(PhenoModel::uniform(0.5).is_ok());
        assert!(PhenoModel::uniform(1.0).is_err());
        assert!(PhenoModel::new(0.1, -0.1).is_err());
    }

    #[test]
    fn zero_noise_never_fails() {
        let code = hamming_bbs();
        let r = run_trials(&code, PhenoModel::uniform(0.0).unwrap(), 500, 1, Execution::Sequential).unwrap();
        assert_eq!((r.trials, r.block_failures, r.fallback_solves), (500, 0, 0));
        assert!(run_trials(&code, PhenoModel::uniform(0.0).unwrap(), 0, 1, Execution::Sequential).is_err());
    }

    /// Exact failure rate by decoding every X pattern and every Z pattern;
    /// with perfect measurements the two are independent.
    fn exact_block_rate(code: &SubsystemCode, p: f64) -> f64 {
        let n = code.n_qubits();
        let engine = PhenoEngine::new(code, PhenoModel::new(p, 0.0).unwrap()).unwrap();
        let (zero, sx, sz) = (BitVector::zeros(n), BitVector::zeros(code.stab_x().rows()), BitVector::zeros(code.stab_z().rows()));
        let (mut px, mut pz) = (0.0, 0.0);
        for mask in 0u32..(1 << n) {
            let e = BitVector::from_indices(n, &(0..n).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>());
            let w = e.weight() as i32;
            let prob = p.powi(w) * (1.0 - p).powi(n as i32 - w);
            if engine.decode_faults(&e, &zero, &sx, &sz).block_failure() {
                px += prob;
            }
            if engine.decode_faults(&zero, &e, &sx, &sz).block_failure() {
                pz += prob;
            }
        }
        1.0 - (1.0 - px) * (1.0 - pz)
    }

    #[test]
    fn bacon_shor_matches_exact_enumeration() {
        let code = bacon_shor();
        let p = 1e-2;
        let exact = exact_block_rate(&code, p);
        // weight-2 X errors in distinct columns and Z errors in distinct rows fail
        assert!((exact - 2.0 * 27.0 * p * p).abs() < 0.2 * exact, "exact {exact}");
        let r = run_trials(&code, PhenoModel::new(p, 0.0).unwrap(), 200_000, 11, Execution::Parallel).unwrap();
        let sep = (r.block_rate.value - exact).abs() / r.block_rate.sigma;
        assert!(sep < 3.0, "direct {} vs exact {exact}: {sep} sigma", r.block_rate.value);
    }

    #[test]
    fn single_faults_never_fail_on_distance_three_codes() {
        let h = ClassicalCode::hamming_7_4();
        for code in [hamming_bbs(), bacon_shor(), build_shp(h.parity_check(), h.parity_check()).unwrap()] {
            for model in [PhenoModel::new(1e-3, 0.0).unwrap(), PhenoModel::uniform(1e-3).unwrap()] {
                let r = run_importance(&code, model, 1, 1 << 20, 0, Execution::Sequential).unwrap();
                assert_eq!(r.strata[0].failures, 0);
                assert!(r.strata[1].exhaustive);
                assert_eq!(r.strata[1].failures, 0, "{} p_meas={}", code.code_id(), model.p_meas);
            }
        }
    }

    #[test]
    fn importance_agrees_with_direct() {
        let code = hamming_bbs();
        let model = PhenoModel::uniform(2e-2).unwrap();
        let imp = run_importance(&code, model, 8, 3000, 5, Execution::Parallel).unwrap();
        let direct = run_trials(&code, model, 40_000, 5, Execution::Parallel).unwrap();
        let est = imp.estimate(2e-2);
        assert!(est.separation(&direct.block_rate) < 3.0, "{est:?} vs {:?}", direct.block_rate);
    }

    #[test]
    fn importance_rejects_mixed_rates() {
        let code = bacon_shor();
        assert!(run_importance(&code, PhenoModel::new(0.01, 0.02).unwrap(), 2, 10, 0, Execution::Sequential).is_err());
        assert!(run_importance(&code, PhenoModel::uniform(0.01).unwrap(), 0, 10, 0, Execution::Sequential).is_err());
    }

    #[test]
    fn results_do_not_depend_on_the_executor() {
        let code = hamming_bbs();
        let grid = [PhenoModel::uniform(0.03).unwrap(), PhenoModel::uniform(0.01).unwrap()];
        let sched = TrialSchedule {
            target_failures: 50,
            min_trials: 500,
            max_trials: 5000,
            batch: 700,
        };
        let a = sweep(&code, &grid, sched, 42, Execution::Parallel).unwrap();
        let b = sweep(&code, &grid, sched, 42, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(sweep(&code, &[], sched, 42, Execution::Parallel).unwrap().is_empty());
    }

    #[test]
    fn single_point_sweep_equals_run_trials() {
        let code = bacon_shor();
        let m = PhenoModel::uniform(0.05).unwrap();
        let s = sweep(&code, &[m], TrialSchedule::fixed(3000), 9, Execution::Parallel).unwrap();
        let r = run_trials(&code, m, 3000, exec::derive_seed(9, 0), Execution::Parallel).unwrap();
        assert_eq!(s[0], r);
    }

    #[test]
    fn estimator_sanity_and_monotonicity() {
        let code = hamming_bbs();
        let grid: Vec<_> = [0.04, 0.02, 0.01].iter().map(|&p| PhenoModel::uniform(p).unwrap()).collect();
        let res = sweep(&code, &grid, TrialSchedule::fixed(20_000), 3, Execution::Parallel).unwrap();
        for r in &res {
            let mean = r.mean_qubit_rate();
            assert!(mean <= r.block_rate.value + 1e-12);
            assert!(r.block_rate.value <= code.k() as f64 * mean + 1e-12);
            assert!(r.block_failures <= r.trials);
        }
        for w in res.windows(2) {
            let diff = w[1].block_rate.value - w[0].block_rate.value;
            assert!(diff < 3.0 * (w[0].block_rate.sigma.hypot(w[1].block_rate.sigma)), "{} -> {}", w[0].p, w[1].p);
        }
    }

    #[test]
    fn csv_has_block_and_qubit_rows() {
        let code = bacon_shor();
        let r = run_trials(&code, PhenoModel::uniform(0.05).unwrap(), 1000, 1, Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &CodeInfo::of(&code), std::slice::from_ref(&r)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 1 + code.k());
        assert!(lines[0].starts_with("code_id,n_classical,N,K,p,trials,block_failures,qubit_index"));
        assert!(lines[1].contains(",-1,"));
        assert!(lines[1].contains(&format!(",{},", r.block_failures)));
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(binomial_count(54, 3), Some(24804));
        assert_eq!(binomial_count(10, 0), Some(1));
    }
}
