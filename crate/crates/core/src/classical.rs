//! Classical binary linear codes, random biregular LDPC ensembles and the
//! alist exchange format.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bp::BscChannel;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gf2::{BinaryMatrix, BitVector};

/// Default `k` limit for exhaustive distance computation.
pub const DEFAULT_DISTANCE_CAP: usize = 24;
/// Default BSC rate used to rank candidate graphs.
pub const DEFAULT_SELECTION_P: f64 = 0.03;
/// Default number of BSC trials per candidate graph.
pub const DEFAULT_SELECTION_TRIALS: u64 = 1000;

const MAX_SAMPLING_ATTEMPTS: usize = 1000;

/// An `[n, k, d]` code with generator `G` (k × n, full rank) and parity-check
/// matrix `H` (m × n, possibly rank deficient).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCode {
    n: usize,
    k: usize,
    d: Option<usize>,
    g: BinaryMatrix,
    h: BinaryMatrix,
}

impl ClassicalCode {
    /// Checks `G·Hᵀ = 0`, `rank G = k = n − rank H`.
    pub fn new(g: BinaryMatrix, h: BinaryMatrix, d: Option<usize>) -> Result<Self> {
        if g.cols() != h.cols() {
            return Err(Error::Dimension(format!("G has {} columns, H has {}", g.cols(), h.cols())));
        }
        let n = g.cols();
        let k = g.rows();
        if g.rank() != k {
            return Err(Error::Invariant("generator rows are not independent".into()));
        }
        if k != n - h.rank() {
            return Err(Error::Invariant(format!("k = {k} but n - rank(H) = {}", n - h.rank())));
        }
        if !g.mul_transpose(&h).is_zero() {
            return Err(Error::Invariant("G·Hᵀ ≠ 0".into()));
        }
        Ok(Self { n, k, d, g, h })
    }

    /// Code with parity checks `h`; `G` is the kernel of `h` in reduced form.
    pub fn from_parity_check(h: BinaryMatrix) -> Self {
        let g = h.kernel_basis().rref().basis();
        let n = h.cols();
        Self {
            n,
            k: g.rows(),
            d: None,
            g,
            h,
        }
    }

    /// Code spanned by the rows of `g`; redundant rows are dropped.
    pub fn from_generator(g: &BinaryMatrix) -> Self {
        let basis = if g.rank() == g.rows() { g.clone() } else { g.rref().basis() };
        let h = basis.kernel_basis();
        Self {
            n: basis.cols(),
            k: basis.rows(),
            d: None,
            g: basis,
            h,
        }
    }

    /// The `[7, 4, 3]` Hamming code.
    pub fn hamming_7_4() -> Self {
        let g = BinaryMatrix::from_strs(&["1000110", "0100101", "0010011", "0001111"]).expect("static matrix");
        let h = BinaryMatrix::from_strs(&["1101100", "1011010", "0111001"]).expect("static matrix");
        Self {
            n: 7,
            k: 4,
            d: Some(3),
            g,
            h,
        }
    }

    /// The `[n, 1, n]` repetition code with adjacent-pair checks.
    pub fn repetition(n: usize) -> Self {
        assert!(n >= 1, "repetition code needs n >= 1");
        let g = BinaryMatrix::from_rows(n, &[BitVector::ones(n)]);
        let supports: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
        Self {
            n,
            k: 1,
            d: Some(n),
            g,
            h: BinaryMatrix::from_supports(n, &supports),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Known minimum distance, if any.
    pub fn distance(&self) -> Option<usize> {
        self.d
    }

    pub fn with_distance(mut self, d: usize) -> Self {
        self.d = Some(d);
        self
    }

    pub fn generator(&self) -> &BinaryMatrix {
        &self.g
    }

    pub fn parity_check(&self) -> &BinaryMatrix {
        &self.h
    }

    /// Number of parity checks (rows of `H`).
    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn is_codeword(&self, v: &BitVector) -> bool {
        self.h.mul_vec(v).is_zero()
    }
}

/// Bipartite graph between `n_var` variable nodes and `n_check` check nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub n_var: usize,
    pub n_check: usize,
    /// `(var, check)` pairs, sorted and unique.
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn var_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_var];
        self.edges.iter().for_each(|&(v, _)| d[v] += 1);
        d
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_check];
        self.edges.iter().for_each(|&(_, c)| d[c] += 1);
        d
    }

    pub fn is_simple(&self) -> bool {
        self.edges.windows(2).all(|w| w[0] != w[1])
    }

    /// Biadjacency matrix, checks × variables.
    pub fn biadjacency(&self) -> BinaryMatrix {
        let mut h = BinaryMatrix::zeros(self.n_check, self.n_var);
        for &(v, c) in &self.edges {
            h.set(c, v, true);
        }
        h
    }
}

/// Samples a simple `(b, c)`-biregular graph on `n_var` variables.
///
/// Stubs are paired uniformly at random; any repeated edges are then removed
/// by random degree-preserving double-edge swaps. If the repair stalls the
/// whole pairing is redrawn, up to a bounded number of attempts.
pub fn sample_biregular(n_var: usize, b: usize, c: usize, seed: u64) -> Result<BipartiteGraph> {
    if b == 0 || c == 0 || n_var == 0 {
        return Err(Error::InvalidArgument("degrees and n_var must be positive".into()));
    }
    if !(n_var * b).is_multiple_of(c) {
        return Err(Error::InvalidArgument(format!("n_var·b = {} is not divisible by c = {c}", n_var * b)));
    }
    let n_check = n_var * b / c;
    if c > n_var || b > n_check {
        return Err(Error::InvalidArgument(format!(
            "no simple ({b},{c})-biregular graph on {n_var} variables"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_edges = n_var * b;
    let vars: Vec<usize> = (0..n_var).flat_map(|v| std::iter::repeat_n(v, b)).collect();
    let mut checks: Vec<usize> = (0..n_check).flat_map(|ch| std::iter::repeat_n(ch, c)).collect();
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        checks.shuffle(&mut rng);
        let mut edges: Vec<(usize, usize)> = vars.iter().copied().zip(checks.iter().copied()).collect();
        if repair_multi_edges(&mut edges, &mut rng, 200 * n_edges) {
            edges.sort_unstable();
            return Ok(BipartiteGraph { n_var, n_check, edges });
        }
    }
    Err(Error::SamplingFailed {
        attempts: MAX_SAMPLING_ATTEMPTS,
    })
}

fn repair_multi_edges<R: Rng>(edges: &mut [(usize, usize)], rng: &mut R, budget: usize) -> bool {
    let mut mult: HashMap<(usize, usize), u32> = HashMap::with_capacity(edges.len());
    for &e in edges.iter() {
        *mult.entry(e).or_default() += 1;
    }
    let mut bad: Vec<usize> = (0..edges.len()).filter(|&i| mult[&edges[i]] > 1).collect();
    let mut steps = 0;
    while let Some(&i) = bad.last() {
        if mult[&edges[i]] <= 1 {
            bad.pop();
            continue;
        }
        if steps >= budget {
            return false;
        }
        steps += 1;
        let j = rng.random_range(0..edges.len());
        let (vi, ci) = edges[i];
        let (vj, cj) = edges[j];
        if vi == vj || ci == cj {
            continue;
        }
        let (a, b) = ((vi, cj), (vj, ci));
        if mult.get(&a).copied().unwrap_or(0) > 0 || mult.get(&b).copied().unwrap_or(0) > 0 {
            continue;
        }
        for e in [edges[i], edges[j]] {
            *mult.get_mut(&e).expect("present") -= 1;
        }
        edges[i] = a;
        edges[j] = b;
        *mult.entry(a).or_default() += 1;
        *mult.entry(b).or_default() += 1;
        if mult[&(vj, cj)] > 1 {
            bad.push(j);
        }
    }
    true
}

/// LDPC code whose parity-check matrix is the biadjacency matrix of `g`.
pub fn code_from_graph(g: &BipartiteGraph) -> ClassicalCode {
    ClassicalCode::from_parity_check(g.biadjacency())
}

/// Exact minimum distance by enumerating all `2^k` codewords in Gray-code
/// order. Returns `None` when `k > cap` or the code is trivial.
pub fn min_distance_bruteforce(code: &ClassicalCode, cap: usize) -> Option<usize> {
    let k = code.k();
    if k == 0 || k > cap || k >= 63 {
        return None;
    }
    let g = code.generator();
    let mut word = BitVector::zeros(code.n());
    let mut best = usize::MAX;
    for step in 1u64..(1u64 << k) {
        let flip = step.trailing_zeros() as usize;
        word.xor_assign(&g.row(flip));
        best = best.min(word.weight());
    }
    Some(best)
}

/// Outcome of ranking random graphs by BSC performance.
#[derive(Clone, Debug)]
pub struct Selection {
    pub code: ClassicalCode,
    pub index: usize,
    /// Failure counts of every candidate, in generation order.
    pub failures: Vec<u64>,
    pub bsc_trials: u64,
}

/// Parameters for [`select_best_code`].
#[derive(Clone, Copy, Debug)]
pub struct SelectionConfig {
    pub n_var: usize,
    pub b: usize,
    pub c: usize,
    pub graphs: usize,
    pub channel_p: f64,
    pub bsc_trials: u64,
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(n_var: usize, b: usize, c: usize, graphs: usize, seed: u64) -> Self {
        Self {
            n_var,
            b,
            c,
            graphs,
            channel_p: DEFAULT_SELECTION_P,
            bsc_trials: DEFAULT_SELECTION_TRIALS,
            seed,
        }
    }
}

/// Samples `graphs` candidates, evaluates each under BSC(channel_p) with BP
/// and returns the one with fewest failures (lowest index on ties).
pub fn select_best_code(cfg: &SelectionConfig, exec: Execution) -> Result<Selection> {
    if cfg.graphs == 0 {
        return Err(Error::InvalidArgument("need at least one candidate graph".into()));
    }
    let evaluated: Vec<Result<(ClassicalCode, u64)>> = exec::map_collect(exec, 0..cfg.graphs as u64, |i| {
        let graph = sample_biregular(cfg.n_var, cfg.b, cfg.c, exec::derive_seed(cfg.seed, 2 * i))?;
        let code = code_from_graph(&graph);
        let channel = BscChannel::new(&code, cfg.channel_p, 0.0)?;
        // candidates are already spread over workers
        let fails = channel.failures(cfg.bsc_trials, exec::derive_seed(cfg.seed, 2 * i + 1), Execution::Sequential);
        Ok((code, fails))
    });
    let mut codes = Vec::with_capacity(cfg.graphs);
    let mut failures = Vec::with_capacity(cfg.graphs);
    for r in evaluated {
        let (code, f) = r?;
        codes.push(code);
        failures.push(f);
    }
    let index = (0..failures.len()).min_by_key(|&i| (failures[i], i)).expect("non-empty");
    Ok(Selection {
        code: codes.swap_remove(index),
        index,
        failures,
        bsc_trials: cfg.bsc_trials,
    })
}

/// Writes `h` in MacKay's alist format.
pub fn write_alist(h: &BinaryMatrix) -> String {
    let (m, n) = (h.rows(), h.cols());
    let cols: Vec<Vec<usize>> = (0..n).map(|c| h.column(c).support()).collect();
    let rows: Vec<Vec<usize>> = (0..m).map(|r| h.row_support(r)).collect();
    let mut out = String::new();
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let degs = |l: &[Vec<usize>]| l.iter().map(|x| x.len()).collect::<Vec<_>>();
    let _ = writeln!(out, "{n} {m}");
    let cd = degs(&cols);
    let rd = degs(&rows);
    let _ = writeln!(out, "{} {}", cd.iter().max().unwrap_or(&0), rd.iter().max().unwrap_or(&0));
    let _ = writeln!(out, "{}", join(&cd));
    let _ = writeln!(out, "{}", join(&rd));
    let max_c = cd.iter().copied().max().unwrap_or(0);
    let max_r = rd.iter().copied().max().unwrap_or(0);
    for (list, width) in [(&cols, max_c), (&rows, max_r)] {
        for l in list.iter() {
            let mut entries: Vec<usize> = l.iter().map(|x| x + 1).collect();
            entries.resize(width.max(entries.len()), 0);
            let _ = writeln!(out, "{}", join(&entries));
        }
    }
    out
}

/// Parses MacKay's alist format; zero padding entries are accepted.
pub fn read_alist(text: &str) -> Result<BinaryMatrix> {
    let mut nums = text.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|_| Error::Parse(format!("alist: expected an integer, found {t:?}")))
    });
    let mut next = || nums.next().unwrap_or_else(|| Err(Error::Parse("alist: unexpected end of input".into())));
    let n = next()?;
    let m = next()?;
    let max_c = next()?;
    let max_r = next()?;
    let cd: Vec<usize> = (0..n).map(|_| next()).collect::<Result<_>>()?;
    let rd: Vec<usize> = (0..m).map(|_| next()).collect::<Result<_>>()?;
    let mut h = BinaryMatrix::zeros(m, n);
    for (c, &deg) in cd.iter().enumerate() {
        let mut seen = 0;
        for _ in 0..max_c.max(deg) {
            let r = next()?;
            if r == 0 {
                continue;
            }
            if r > m {
                return Err(Error::Parse(format!("alist: row index {r} out of range")));
            }
            h.set(r - 1, c, true);
            seen += 1;
        }
        if seen != deg {
            return Err(Error::Parse(format!("alist: column {} lists {seen} entries, degree {deg}", c + 1)));
        }
    }
    for (r, &deg) in rd.iter().enumerate() {
        let mut listed = Vec::new();
        for _ in 0..max_r.max(deg) {
            let c = next()?;
            if c != 0 {
                listed.push(c - 1);
            }
        }
        listed.sort_unstable();
        if listed != h.row_support(r) {
            return Err(Error::Parse(format!("alist: row {} disagrees with column lists", r + 1)));
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hamming_parameters() {
        let c = ClassicalCode::hamming_7_4();
        assert_eq!((c.n(), c.k(), c.distance()), (7, 4, Some(3)));
        assert!(c.generator().mul_transpose(c.parity_check()).is_zero());
        assert_eq!(min_distance_bruteforce(&c, DEFAULT_DISTANCE_CAP), Some(3));
        assert!(ClassicalCode::new(c.generator().clone(), c.parity_check().clone(), Some(3)).is_ok());
    }

    #[test]
    fn repetition_codes() {
        let r3 = ClassicalCode::repetition(3);
        assert_eq!((r3.n(), r3.k(), r3.distance()), (3, 1, Some(3)));
        let r1 = ClassicalCode::repetition(1);
        assert_eq!((r1.n(), r1.k(), r1.m()), (1, 1, 0));
        let r2 = ClassicalCode::repetition(2);
        assert_eq!(r2.parity_check(), &BinaryMatrix::from_strs(&["11"]).unwrap());
        assert_eq!(min_distance_bruteforce(&ClassicalCode::repetition(5), 24), Some(5));
    }

    #[test]
    fn from_generator_and_parity_check_agree() {
        let ham = ClassicalCode::hamming_7_4();
        let a = ClassicalCode::from_parity_check(ham.parity_check().clone());
        let b = ClassicalCode::from_generator(ham.generator());
        assert!(a.generator().same_row_space(ham.generator()));
        assert!(b.parity_check().same_row_space(ham.parity_check()));
        assert_eq!(a.k(), 4);
    }

    #[test]
    fn new_rejects_inconsistent_pairs() {
        let ham = ClassicalCode::hamming_7_4();
        let rep = ClassicalCode::repetition(7);
        assert!(ClassicalCode::new(rep.generator().clone(), ham.parity_check().clone(), None).is_err());
    }

    #[test]
    fn biregular_degree_counts() {
        let g = sample_biregular(6, 3, 6, 5).unwrap();
        assert_eq!(g.n_check, 3);
        assert!(g.check_degrees().iter().all(|&d| d == 6));
        let g = sample_biregular(60, 5, 6, 9).unwrap();
        assert_eq!(g.n_check, 50);
        assert!(g.var_degrees().iter().all(|&d| d == 5));
        assert!(g.check_degrees().iter().all(|&d| d == 6));
        assert!(g.is_simple());
        assert_eq!(g, sample_biregular(60, 5, 6, 9).unwrap());
        assert_ne!(g, sample_biregular(60, 5, 6, 10).unwrap());
    }

    #[test]
    fn biregular_rejects_bad_degrees() {
        assert!(matches!(sample_biregular(7, 3, 6, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(sample_biregular(4, 3, 6, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn code_from_repetition_graph() {
        let h = ClassicalCode::repetition(3).parity_check().clone();
        let edges = (0..h.rows())
            .flat_map(|r| h.row_support(r).into_iter().map(move |v| (v, r)))
            .collect::<Vec<_>>();
        let mut edges = edges;
        edges.sort_unstable();
        let code = code_from_graph(&BipartiteGraph { n_var: 3, n_check: 2, edges });
        assert_eq!((code.n(), code.k()), (3, 1));
        assert_eq!(min_distance_bruteforce(&code, 24), Some(3));
    }

    #[test]
    fn ldpc_dimension_bounds() {
        let code = code_from_graph(&sample_biregular(60, 3, 6, 1).unwrap());
        assert!(code.k() >= 30);
        let g = sample_biregular(60, 5, 6, 2).unwrap();
        let code = code_from_graph(&g);
        assert_eq!(code.k(), 60 - code.parity_check().rank());
        assert!(code.k() >= 10);
    }

    /// Second distance oracle: smallest `w` such that some `w` columns of `H`
    /// sum to zero, found by enumerating supports of increasing weight.
    fn distance_by_dependent_columns(code: &ClassicalCode, max_w: usize) -> Option<usize> {
        let h = code.parity_check().transpose();
        fn search(h: &BinaryMatrix, start: usize, left: usize, acc: &BitVector) -> bool {
            if left == 0 {
                return acc.is_zero();
            }
            (start..h.rows()).any(|i| search(h, i + 1, left - 1, &acc.xor(&h.row(i))))
        }
        (1..=max_w).find(|&w| search(&h, 0, w, &BitVector::zeros(h.cols())))
    }

    #[test]
    fn distance_oracles_agree_on_random_ldpc() {
        for seed in 0..3 {
            let code = code_from_graph(&sample_biregular(24, 5, 6, seed).unwrap());
            let brute = min_distance_bruteforce(&code, 24).unwrap();
            assert_eq!(distance_by_dependent_columns(&code, brute), Some(brute), "seed {seed}");
        }
        assert_eq!(min_distance_bruteforce(&code_from_graph(&sample_biregular(60, 3, 6, 0).unwrap()), 24), None);
    }

    #[test]
    fn selection_properties() {
        let one = select_best_code(&SelectionConfig { bsc_trials: 50, ..SelectionConfig::new(24, 3, 6, 1, 4) }, Execution::Sequential).unwrap();
        assert_eq!(one.index, 0);
        let cfg = SelectionConfig {
            bsc_trials: 200,
            channel_p: 0.05,
            ..SelectionConfig::new(24, 3, 6, 8, 4)
        };
        let sel = select_best_code(&cfg, Execution::Parallel).unwrap();
        let mut sorted = sel.failures.clone();
        sorted.sort_unstable();
        assert!(sel.failures[sel.index] <= sorted[sorted.len() / 2]);
        let again = select_best_code(&cfg, Execution::Sequential).unwrap();
        assert_eq!(again.failures, sel.failures);
        assert_eq!(again.code, sel.code);
    }

    #[test]
    fn alist_round_trip_and_errors() {
        let h = code_from_graph(&sample_biregular(12, 3, 6, 3).unwrap()).parity_check().clone();
        assert_eq!(read_alist(&write_alist(&h)).unwrap(), h);
        let ham = ClassicalCode::hamming_7_4();
        assert_eq!(read_alist(&write_alist(ham.parity_check())).unwrap(), *ham.parity_check());
        assert!(read_alist("3 2\n2 3\n").is_err());
        assert!(read_alist("2 1\n1 2\n1 1\n2\n1\n5\n1 2\n").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn sampled_codes_are_consistent(seed in any::<u64>()) {
            let g = sample_biregular(30, 3, 6, seed).unwrap();
            prop_assert!(g.is_simple());
            prop_assert!(g.var_degrees().iter().all(|&d| d == 3));
            prop_assert!(g.check_degrees().iter().all(|&d| d == 6));
            let code = code_from_graph(&g);
            prop_assert!(code.generator().mul_transpose(code.parity_check()).is_zero());
            prop_assert!(code.k() >= g.n_var - g.n_check);
            if code.parity_check().rank() == g.n_check {
                prop_assert_eq!(code.k(), g.n_var - g.n_check);
            }
        }
    }
}
