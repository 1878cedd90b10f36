//! Sum-product belief propagation on a Tanner graph, optionally with one
//! measurement-error variable node and one fixed syndrome node per check.
//!
//! Check-node updates use the sign/magnitude form
//! `h = sign · φ(Σ φ(|g|))` with `φ(x) = ln((e^x + 1) / (e^x − 1))`, which is
//! the same map as `2·atanh(Π tanh(g/2))` but cannot overflow.

use rand::Rng;

use crate::classical::ClassicalCode;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gf2::{BinaryMatrix, BitVector};
use crate::stats::BernoulliSampler;

/// Default iteration budget.
pub const DEFAULT_MAX_ITERS: usize = 60;
/// Default magnitude of the syndrome-node surrogate for an infinite LLR.
pub const DEFAULT_CLIP: f64 = 50.0;

/// Immutable Tanner graph in compressed adjacency form. Shareable across
/// concurrent decodes.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n_data: usize,
    n_check: usize,
    measurement: bool,
    // number of independent measurement flips folded into each check
    meas_mult: Vec<u32>,
    // edges grouped by check: check j owns edges check_ptr[j]..check_ptr[j+1]
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    // edge ids grouped by data variable
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
}

impl TannerGraph {
    /// Graph of the parity-check matrix `h` (checks × variables). With
    /// `measurement` set, every check also gets a private error node.
    pub fn new(h: &BinaryMatrix, measurement: bool) -> Self {
        let supports: Vec<Vec<usize>> = (0..h.rows()).map(|r| h.row_support(r)).collect();
        Self::from_supports(h.cols(), &supports, measurement)
    }

    /// Graph from per-check variable lists (each sorted, no duplicates).
    pub fn from_supports(n_data: usize, checks: &[Vec<usize>], measurement: bool) -> Self {
        let mut check_ptr = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::new();
        check_ptr.push(0);
        for c in checks {
            edge_var.extend_from_slice(c);
            check_ptr.push(edge_var.len());
        }
        let mut deg = vec![0usize; n_data + 1];
        for &v in &edge_var {
            deg[v + 1] += 1;
        }
        for i in 0..n_data {
            deg[i + 1] += deg[i];
        }
        let var_ptr = deg.clone();
        let mut fill = deg;
        let mut var_edges = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        Self {
            n_data,
            n_check: checks.len(),
            measurement,
            meas_mult: vec![1; checks.len()],
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
        }
    }

    /// Marks check `j` as the sum of `mult[j]` measured checks, so its
    /// measurement node has the prior of an odd number of flips among them.
    pub fn with_measurement_multiplicity(mut self, mult: Vec<u32>) -> Result<Self> {
        if mult.len() != self.n_check || mult.contains(&0) {
            return Err(Error::InvalidArgument("one positive multiplicity per check required".into()));
        }
        self.meas_mult = mult;
        Ok(self)
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn n_check(&self) -> usize {
        self.n_check
    }

    pub fn has_measurement_nodes(&self) -> bool {
        self.measurement
    }

    /// Sorted data variables of check `j`.
    pub fn check_vars(&self, j: usize) -> &[usize] {
        &self.edge_var[self.check_ptr[j]..self.check_ptr[j + 1]]
    }

    /// Checks adjacent to data variable `i`.
    pub fn var_checks(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.var_edges[self.var_ptr[i]..self.var_ptr[i + 1]]
            .iter()
            .map(move |&e| self.check_of_edge(e))
    }

    fn check_of_edge(&self, e: usize) -> usize {
        self.check_ptr.partition_point(|&p| p <= e) - 1
    }

    pub fn max_check_degree(&self) -> usize {
        self.check_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// Noisy syndrome `H·data ⊕ meas`.
    pub fn syndrome(&self, data: &BitVector, meas: Option<&BitVector>) -> BitVector {
        let mut s = BitVector::zeros(self.n_check);
        for j in 0..self.n_check {
            let mut bit = self.check_vars(j).iter().fold(false, |acc, &v| acc ^ data.get(v));
            if let Some(m) = meas {
                bit ^= m.get(j);
            }
            s.set(j, bit);
        }
        s
    }
}

/// Channel parameters and numerical knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpConfig {
    pub p_data: f64,
    pub p_meas: f64,
    pub max_iters: usize,
    pub clip: f64,
}

impl BpConfig {
    pub fn new(p_data: f64, p_meas: f64) -> Result<Self> {
        let cfg = Self {
            p_data,
            p_meas,
            max_iters: DEFAULT_MAX_ITERS,
            clip: DEFAULT_CLIP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Result<Self> {
        self.max_iters = max_iters;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |p: f64| p > 0.0 && p < 0.5;
        if !open(self.p_data) || !open(self.p_meas) {
            return Err(Error::InvalidArgument(format!(
                "BP priors must lie in (0, 1/2), got p={} q={}",
                self.p_data, self.p_meas
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.clip > 0.0 && self.clip.is_finite()) {
            return Err(Error::InvalidArgument("clip must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Prior log-likelihood ratios of every node class.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeLlrs {
    pub data: f64,
    pub meas: f64,
    pub syndrome: Vec<f64>,
}

pub fn init_llrs(cfg: &BpConfig, syndrome: &BitVector) -> NodeLlrs {
    let llr = |p: f64| ((1.0 - p) / p).ln();
    NodeLlrs {
        data: llr(cfg.p_data),
        meas: llr(cfg.p_meas),
        syndrome: (0..syndrome.len())
            .map(|j| if syndrome.get(j) { -cfg.clip } else { cfg.clip })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpResult {
    pub data_correction: BitVector,
    pub meas_correction: BitVector,
    pub converged: bool,
    pub iterations: usize,
    /// Posterior LLRs of the data nodes after the last iteration.
    pub data_posterior: Vec<f64>,
    /// Posterior LLRs of the measurement nodes (empty when the mode is off).
    pub meas_posterior: Vec<f64>,
}

/// Runs BP until every check is satisfied or `cfg.max_iters` is reached.
pub fn decode(g: &TannerGraph, cfg: &BpConfig, syndrome: &BitVector) -> BpResult {
    run(g, cfg, syndrome, cfg.max_iters, true)
}

/// Runs exactly `iterations` rounds without the early stop; used to compare
/// posteriors against exact marginals.
pub fn decode_fixed(g: &TannerGraph, cfg: &BpConfig, syndrome: &BitVector, iterations: usize) -> BpResult {
    run(g, cfg, syndrome, iterations, false)
}

fn phi(x: f64) -> f64 {
    // ln((1 + e^-x) / (1 - e^-x)); phi(0) = inf and phi(inf) = 0
    (-x).exp().ln_1p() - (-(-x).exp_m1()).ln()
}

fn run(g: &TannerGraph, cfg: &BpConfig, syndrome: &BitVector, max_iters: usize, early_stop: bool) -> BpResult {
    assert_eq!(syndrome.len(), g.n_check, "syndrome length must equal the number of checks");
    let priors = init_llrs(cfg, syndrome);
    let n_edges = g.edge_var.len();
    let meas = g.measurement;

    // h: check -> variable messages on data edges, hm: check -> meas node
    let mut h = vec![0.0f64; n_edges];
    let mut hm = vec![0.0f64; if meas { g.n_check } else { 0 }];
    let mut post = vec![priors.data; g.n_data];
    let meas_prior: Vec<f64> = if meas {
        g.meas_mult
            .iter()
            .map(|&w| {
                if w == 1 {
                    priors.meas
                } else {
                    let q = 0.5 * (1.0 - (1.0 - 2.0 * cfg.p_meas).powi(w as i32));
                    ((1.0 - q) / q).ln()
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut post_m = meas_prior.clone();
    let mut data = BitVector::zeros(g.n_data);
    let mut meas_bits = BitVector::zeros(g.n_check);

    let satisfied = |data: &BitVector, meas_bits: &BitVector| {
        (0..g.n_check).all(|j| {
            let par = g.check_vars(j).iter().fold(meas && meas_bits.get(j), |acc, &v| acc ^ data.get(v));
            par == syndrome.get(j)
        })
    };

    let mut iterations = 0;
    let mut converged = early_stop && satisfied(&data, &meas_bits);
    let width = g.max_check_degree() + 2;
    let mut mags = vec![0.0f64; width];
    let mut negs = vec![false; width];
    let mut suffix = vec![0.0f64; width + 1];

    while !converged && iterations < max_iters {
        iterations += 1;
        // leftbound: every check sees g = posterior - own contribution
        for j in 0..g.n_check {
            let (lo, hi) = (g.check_ptr[j], g.check_ptr[j + 1]);
            let d = hi - lo;
            let mut k = 0;
            for e in lo..hi {
                let v = g.edge_var[e];
                let msg = post[v] - h[e];
                mags[k] = phi(msg.abs());
                negs[k] = msg < 0.0;
                k += 1;
            }
            if meas {
                let msg = meas_prior[j];
                mags[k] = phi(msg.abs());
                negs[k] = msg < 0.0;
                k += 1;
            }
            let s = priors.syndrome[j];
            mags[k] = phi(s.abs());
            negs[k] = s < 0.0;
            k += 1;

            let parity = negs[..k].iter().fold(false, |a, &b| a ^ b);
            suffix[k] = 0.0;
            for t in (0..k).rev() {
                suffix[t] = suffix[t + 1] + mags[t];
            }
            // only the k-1 variable-node edges receive messages
            let mut prefix = 0.0;
            for t in 0..k - 1 {
                let mag = phi(prefix + suffix[t + 1]).min(cfg.clip);
                let out = if parity ^ negs[t] { -mag } else { mag };
                if t < d {
                    h[lo + t] = out;
                } else {
                    hm[j] = out;
                }
                prefix += mags[t];
            }
        }
        // posteriors and hard decisions
        for i in 0..g.n_data {
            let sum: f64 = g.var_edges[g.var_ptr[i]..g.var_ptr[i + 1]].iter().map(|&e| h[e]).sum();
            post[i] = priors.data + sum;
            data.set(i, post[i] < 0.0);
        }
        if meas {
            for j in 0..g.n_check {
                post_m[j] = meas_prior[j] + hm[j];
                meas_bits.set(j, post_m[j] < 0.0);
            }
        }
        if early_stop {
            converged = satisfied(&data, &meas_bits);
        }
    }
    if !early_stop {
        converged = satisfied(&data, &meas_bits);
    }
    BpResult {
        data_correction: data,
        meas_correction: meas_bits,
        converged,
        iterations,
        data_posterior: post,
        meas_posterior: post_m,
    }
}

/// Reusable BSC experiment for one classical code.
#[derive(Clone, Debug)]
pub struct BscChannel {
    graph: TannerGraph,
    cfg: BpConfig,
    p: f64,
    q: f64,
}

impl BscChannel {
    /// Data flips at rate `p`, syndrome flips at rate `q`. The decoder priors
    /// are clamped into the open interval BP accepts.
    pub fn new(code: &ClassicalCode, p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument("BSC rates must lie in [0, 1]".into()));
        }
        let prior = |x: f64| x.clamp(1e-9, 0.49);
        Ok(Self {
            graph: TannerGraph::new(code.parity_check(), q > 0.0),
            cfg: BpConfig::new(prior(p), prior(q))?,
            p,
            q,
        })
    }

    /// One trial; true when the decoder returns exactly the channel error.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        let n = self.graph.n_data();
        let mut err = BitVector::zeros(n);
        BernoulliSampler::new(self.p).for_each(n, rng, |i| err.flip(i));
        let mut flips = BitVector::zeros(self.graph.n_check());
        BernoulliSampler::new(self.q).for_each(self.graph.n_check(), rng, |j| flips.flip(j));
        let s = self.graph.syndrome(&err, Some(&flips));
        if s.is_zero() && err.is_zero() {
            return true;
        }
        let res = decode(&self.graph, &self.cfg, &s);
        res.data_correction == err
    }

    /// Number of failed trials out of `trials`, trial `t` seeded by `(seed, t)`.
    pub fn failures(&self, trials: u64, seed: u64, exec: Execution) -> u64 {
        exec::map_reduce(
            exec,
            0..trials,
            || 0u64,
            |t| u64::from(!self.trial(&mut exec::trial_rng(seed, t))),
            |a, b| a + b,
        )
    }
}

/// Single BSC trial of `code`: true when BP recovers the data error exactly.
pub fn bsc_trial(code: &ClassicalCode, p: f64, q: f64, seed: u64) -> Result<bool> {
    Ok(BscChannel::new(code, p, q)?.trial(&mut exec::trial_rng(seed, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::ClassicalCode;
    use proptest::prelude::*;
    use rand::Rng;

    /// Exact marginals by enumerating every (data, meas) pattern consistent
    /// with the syndrome; returns P(bit = 1) for data then meas nodes.
    fn exact_marginals(h: &BinaryMatrix, p: f64, q: Option<f64>, s: &BitVector) -> Vec<f64> {
        let n = h.cols();
        let m = h.rows();
        let nm = if q.is_some() { m } else { 0 };
        let total_bits = n + nm;
        let mut marg = vec![0.0; total_bits];
        let mut z = 0.0;
        for pat in 0u64..(1 << total_bits) {
            let data = BitVector::from_indices(n, &(0..n).filter(|&i| pat >> i & 1 == 1).collect::<Vec<_>>());
            let mut syn = h.mul_vec(&data);
            let mut w = 1.0;
            for i in 0..n {
                w *= if data.get(i) { p } else { 1.0 - p };
            }
            if let Some(q) = q {
                for j in 0..m {
                    let bit = pat >> (n + j) & 1 == 1;
                    if bit {
                        syn.flip(j);
                    }
                    w *= if bit { q } else { 1.0 - q };
                }
            }
            if syn != *s {
                continue;
            }
            z += w;
            for (b, slot) in marg.iter_mut().enumerate() {
                if pat >> b & 1 == 1 {
                    *slot += w;
                }
            }
        }
        marg.iter().map(|x| x / z).collect()
    }

    fn llr_to_prob(l: f64) -> f64 {
        1.0 / (1.0 + l.exp())
    }

    #[test]
    fn priors_closed_form() {
        let cfg = BpConfig::new(0.1, 0.1).unwrap();
        let l = init_llrs(&cfg, &BitVector::zeros(3));
        assert!((l.data - 9f64.ln()).abs() < 1e-12);
        assert!((l.meas - 2.1972).abs() < 1e-4);
        assert!(l.syndrome.iter().all(|&x| x == 50.0));
        let near_half = init_llrs(&BpConfig::new(0.5 - 1e-9, 0.1).unwrap(), &BitVector::zeros(1));
        assert!(near_half.data > 0.0 && near_half.data < 1e-7);
        let s = BitVector::from_indices(2, &[1]);
        assert_eq!(init_llrs(&cfg, &s).syndrome, vec![50.0, -50.0]);
    }

    #[test]
    fn config_validation() {
        assert!(BpConfig::new(0.0, 0.1).is_err());
        assert!(BpConfig::new(0.1, 0.5).is_err());
        assert!(BpConfig::new(0.1, 0.1).unwrap().with_max_iters(0).is_err());
    }

    #[test]
    fn hamming_single_flip_at_bit_zero() {
        let code = ClassicalCode::hamming_7_4();
        let g = TannerGraph::new(code.parity_check(), false);
        let e0 = BitVector::unit(7, 0);
        let s = g.syndrome(&e0, None);
        let cfg = BpConfig::new(0.05, 0.05).unwrap();
        let r = decode(&g, &cfg, &s);
        // MAP oracle: the likeliest pattern with this syndrome
        let h = code.parity_check();
        let best = (0u64..128)
            .map(|pat| BitVector::from_indices(7, &(0..7).filter(|&i| pat >> i & 1 == 1).collect::<Vec<_>>()))
            .filter(|v| h.mul_vec(v) == s)
            .min_by_key(|v| v.weight())
            .unwrap();
        assert_eq!(best, e0);
        assert_eq!(r.data_correction, e0);
        assert!(r.converged);
    }

    #[test]
    fn zero_syndrome_converges_immediately() {
        let code = ClassicalCode::hamming_7_4();
        for meas in [false, true] {
            let g = TannerGraph::new(code.parity_check(), meas);
            let r = decode(&g, &BpConfig::new(0.1, 0.1).unwrap(), &BitVector::zeros(3));
            assert!(r.converged);
            assert_eq!(r.iterations, 0);
            assert!(r.data_correction.is_zero() && r.meas_correction.is_zero());
        }
    }

    #[test]
    fn repetition_prefers_measurement_flip() {
        let code = ClassicalCode::repetition(3);
        let g = TannerGraph::new(code.parity_check(), true);
        let s = BitVector::from_indices(2, &[0]);
        let cfg = BpConfig::new(0.01, 0.3).unwrap();
        let r = decode(&g, &cfg, &s);
        assert!(r.data_correction.is_zero());
        assert_eq!(r.meas_correction, BitVector::unit(2, 0));
        assert!(r.converged);
        // enumeration oracle: MAP over all 2^5 patterns agrees
        let marg = exact_marginals(code.parity_check(), 0.01, Some(0.3), &s);
        assert!(marg[3] > 0.5 && marg[..3].iter().all(|&x| x < 0.5) && marg[4] < 0.5);
    }

    #[test]
    fn tree_posteriors_match_exact_marginals() {
        for n in [3usize, 5] {
            let code = ClassicalCode::repetition(n);
            let h = code.parity_check();
            for meas in [false, true] {
                let g = TannerGraph::new(h, meas);
                let cfg = BpConfig::new(0.07, 0.2).unwrap();
                for pat in 0u64..(1 << (n - 1)) {
                    let s = BitVector::from_indices(n - 1, &(0..n - 1).filter(|&i| pat >> i & 1 == 1).collect::<Vec<_>>());
                    let r = decode_fixed(&g, &cfg, &s, 2 * n + 2);
                    let exact = exact_marginals(h, 0.07, meas.then_some(0.2), &s);
                    let bp: Vec<f64> = r
                        .data_posterior
                        .iter()
                        .chain(r.meas_posterior.iter())
                        .map(|&l| llr_to_prob(l))
                        .collect();
                    for (a, b) in bp.iter().zip(&exact) {
                        assert!((a - b).abs() < 1e-9, "n={n} meas={meas} s={s}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn measurement_multiplicity_sets_the_folded_prior() {
        // one check over one bit, measured as the sum of three noisy checks
        let h = BinaryMatrix::from_strs(&["1"]).unwrap();
        let g = TannerGraph::new(&h, true).with_measurement_multiplicity(vec![3]).unwrap();
        let q: f64 = 0.1;
        let q3 = (q * q * q) + 3.0 * q * (1.0 - q) * (1.0 - q);
        let cfg = BpConfig::new(0.07, q).unwrap();
        let s = BitVector::from_indices(1, &[0]);
        let r = decode_fixed(&g, &cfg, &s, 3);
        let exact = exact_marginals(&h, 0.07, Some(q3), &s);
        assert!((llr_to_prob(r.data_posterior[0]) - exact[0]).abs() < 1e-9);
        assert!((llr_to_prob(r.meas_posterior[0]) - exact[1]).abs() < 1e-9);
        assert!(TannerGraph::new(&h, true).with_measurement_multiplicity(vec![0]).is_err());
    }

    #[test]
    fn converged_results_reproduce_syndrome() {
        let code = ClassicalCode::hamming_7_4();
        let g = TannerGraph::new(code.parity_check(), true);
        let cfg = BpConfig::new(0.05, 0.05).unwrap();
        for pat in 0u64..8 {
            let s = BitVector::from_indices(3, &(0..3).filter(|&i| pat >> i & 1 == 1).collect::<Vec<_>>());
            let r = decode(&g, &cfg, &s);
            if r.converged {
                assert_eq!(g.syndrome(&r.data_correction, Some(&r.meas_correction)), s);
            }
        }
    }

    #[test]
    fn bsc_trial_basics() {
        let code = ClassicalCode::hamming_7_4();
        assert!(bsc_trial(&code, 0.0, 0.0, 1).unwrap());
        let ch = BscChannel::new(&code, 0.0, 0.0).unwrap();
        assert_eq!(ch.failures(50, 3, Execution::Sequential), 0);
        // a single flip is always corrected
        let g = TannerGraph::new(code.parity_check(), false);
        let cfg = BpConfig::new(0.01, 0.01).unwrap();
        for i in [0, 1, 2, 4, 5, 6] {
            let e = BitVector::unit(7, i);
            assert_eq!(decode(&g, &cfg, &g.syndrome(&e, None)).data_correction, e);
        }
        // bit 3 touches every check: the first flooding round already lands
        // on the consistent pattern 1111000 and the stop rule fires
        let e3 = BitVector::unit(7, 3);
        let r = decode(&g, &cfg, &g.syndrome(&e3, None));
        assert!(r.converged && r.iterations == 1);
        assert_eq!(r.data_correction, BitVector::from_indices(7, &[0, 1, 2, 3]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn posteriors_stay_finite_and_bounded(seed in any::<u64>(), p in 0.001f64..0.45, q in 0.001f64..0.45) {
            let code = ClassicalCode::hamming_7_4();
            let g = TannerGraph::new(code.parity_check(), true);
            let cfg = BpConfig::new(p, q).unwrap();
            let mut rng = exec::trial_rng(seed, 0);
            for _ in 0..50 {
                let s = BitVector::from_bools(&[rng.random(), rng.random(), rng.random()]);
                let r = decode(&g, &cfg, &s);
                let prior = init_llrs(&cfg, &s);
                let bound = cfg.clip * 3.0 + prior.data.abs() + prior.meas.abs();
                for l in r.data_posterior.iter().chain(&r.meas_posterior) {
                    prop_assert!(l.is_finite() && l.abs() <= bound);
                }
                if r.converged {
                    prop_assert_eq!(g.syndrome(&r.data_correction, Some(&r.meas_correction)), s);
                }
            }
        }
    }
}
