use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use subsys::circuit::{self, BlockReference, CircuitEngine};
use subsys::classical::{min_distance_bruteforce, select_best_code, write_alist, SelectionConfig, DEFAULT_DISTANCE_CAP};
use subsys::codes::reference::{self, support_matrix};
use subsys::codes::{
    build_bbs, build_hgp, build_shp, minimize_qubits_q, subsystem_distance_bruteforce, verify_gauge_fixing, Construction,
    Manifest, SubsystemCode,
};
use subsys::exec::{with_jobs, Execution};
use subsys::pheno::{self, fit_power_law, CodeInfo, PhenoModel, SimResult, TrialSchedule};
use subsys::BinaryMatrix;

use crate::output::{gnuplot_data, gnuplot_script, Outputs};
use crate::{
    codespec, BuildArgs, Cli, CodeKind, Command, EstimatorArg, Failure, FitArgs, ReferenceArg, SelectArgs, SimMode,
    SimulateArgs, VerifyArgs,
};

type Outcome = Result<(), Failure>;

pub fn run(cli: &Cli) -> Outcome {
    with_jobs(cli.jobs, || match &cli.command {
        Command::Build(a) => build(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::SelectCode(a) => select_code(cli, a),
        Command::Fit(a) => fit(cli, a),
    })
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned())
}

fn build(cli: &Cli, a: &BuildArgs) -> Outcome {
    let (s1, s2) = match (&a.code, &a.h1, &a.h2) {
        (Some(c), _, _) => (c.as_str(), c.as_str()),
        (None, Some(h1), Some(h2)) => (h1.as_str(), h2.as_str()),
        _ => return Err(usage("build needs --code, or both --h1 and --h2")),
    };
    if (a.minimize_q || a.q.is_some()) && a.kind != CodeKind::Bbs {
        return Err(usage("--minimize-q and --q only apply to bbs"));
    }
    let c1 = codespec::parse(s1)?;
    let c2 = codespec::parse(s2)?;
    let code = match a.kind {
        CodeKind::Bbs => {
            if c1.k() != c2.k() {
                return Err(usage(format!("bbs needs equal dimensions, got k1={} and k2={}", c1.k(), c2.k())));
            }
            let q = if let Some(rows) = &a.q {
                let rows: Vec<&str> = rows.split(',').map(str::trim).collect();
                BinaryMatrix::from_strs(&rows).map_err(|e| usage(format!("bad --q: {e}")))?
            } else if a.minimize_q {
                minimize_qubits_q(&c1, &c2, a.q_attempts.max(1), a.seed)?
            } else {
                BinaryMatrix::identity(c1.k())
            };
            build_bbs(&c1, &c2, &q)?
        }
        CodeKind::Shp => build_shp(c1.parity_check(), c2.parity_check())?,
        CodeKind::Hgp => build_hgp(c1.parity_check(), c2.parity_check())?,
    };
    let distance = subsystem_distance_bruteforce(&code, a.distance_cap);
    if a.require_distance && distance.is_none() {
        return Err(anyhow!(
            "distance of {} is not computable within 2^{} candidate supports",
            code.code_id(),
            a.distance_cap
        )
        .into());
    }
    let stem = a.name.clone().unwrap_or_else(|| code.code_id());
    let mut out = Outputs::new(&cli.out_dir, &stem)?;
    let manifest = Manifest::from_code(&code, distance);
    out.write(".json", manifest.to_json()?.as_bytes())?;

    let d = distance.map_or("?".to_string(), |d| d.to_string());
    let mut report = format!("{} [[{},{},{d}]]\n", code.code_id(), code.n_qubits(), code.k());
    let _ = writeln!(report, "classical length: {}", code.classical_length());
    let _ = writeln!(report, "stabilizer generators: {} X, {} Z", code.stab_x().rank(), code.stab_z().rank());
    let _ = writeln!(report, "gauge qubits: {}", code.gauge_qubits());
    if distance.is_none() {
        let _ = writeln!(report, "distance: not computed (budget 2^{})", a.distance_cap);
    }
    out.write(".report.txt", report.as_bytes())?;
    out.finish("build", cli.jobs, cli)?;
    print!("{report}");
    Ok(())
}

fn load_code(path: &Path) -> Result<SubsystemCode, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
    let manifest = Manifest::from_json(&text).with_context(|| format!("invalid manifest {}", path.display()))?;
    Ok(manifest.to_code()?)
}

fn grid(a: &SimulateArgs) -> Result<Vec<f64>, Failure> {
    let grid = match (&a.grid, a.p_min, a.p_max) {
        (Some(g), _, _) => g.clone(),
        (None, Some(lo), Some(hi)) => {
            if !(lo > 0.0 && hi >= lo) || a.points == 0 {
                return Err(usage("log grid needs 0 < p-min <= p-max and at least one point"));
            }
            if a.points == 1 {
                vec![lo]
            } else {
                (0..a.points)
                    .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (a.points - 1) as f64).exp())
                    .collect()
            }
        }
        _ => return Err(usage("simulate needs --grid or --p-min/--p-max")),
    };
    if grid.is_empty() || grid.iter().any(|p| !(0.0..1.0).contains(p)) {
        return Err(usage("grid rates must lie in [0, 1)"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("grid must be strictly increasing"));
    }
    Ok(grid)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Outcome {
    let grid = grid(a)?;
    if a.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let code = load_code(&a.manifest)?;
    if let Some(v) = code.violations().first() {
        return Err(Failure::Verification(format!("{}: {v}", a.manifest.display())));
    }
    let exec = Execution::Parallel;
    let started = Instant::now();
    let mut summary = String::new();
    let results: Vec<SimResult> = match a.mode {
        SimMode::Pheno => match a.estimator {
            EstimatorArg::Direct => {
                let models = grid
                    .iter()
                    .map(|&p| PhenoModel::new(p, a.p_meas.unwrap_or(p)))
                    .collect::<Result<Vec<_>, _>>()?;
                let schedule = match a.target_failures {
                    Some(t) => TrialSchedule {
                        target_failures: t,
                        min_trials: a.trials.min(1000),
                        max_trials: a.trials,
                        batch: a.trials.min(10_000),
                    },
                    None => TrialSchedule::fixed(a.trials),
                };
                pheno::sweep(&code, &models, schedule, a.seed, exec)?
            }
            EstimatorArg::Importance => {
                let prior = match a.prior {
                    Some(p) => p,
                    None => {
                        let lo = grid.iter().copied().find(|&p| p > 0.0).ok_or_else(|| usage("grid has no positive rate"))?;
                        (lo * grid[grid.len() - 1]).sqrt()
                    }
                };
                let noisy = match a.p_meas {
                    None => true,
                    Some(0.0) => false,
                    Some(_) => return Err(usage("importance sampling supports --p-meas 0 or the default p_meas = p")),
                };
                let model = PhenoModel::new(prior, if noisy { prior } else { 0.0 })?;
                let imp = pheno::run_importance(&code, model, a.weight_max, a.samples_per_weight, a.seed, exec)?;
                let _ = writeln!(summary, "importance sampling: decoder prior {prior:e}, strata 0..={}", a.weight_max);
                grid.iter().map(|&p| imp.at(p)).collect()
            }
        },
        SimMode::Circuit => {
            let engine = CircuitEngine::new(&code);
            let points = circuit::circuit_sweep(&engine, &grid, a.trials, a.seed, exec)?;
            let reference = match a.reference {
                ReferenceArg::Unencoded => BlockReference::Unencoded,
                ReferenceArg::Physical => BlockReference::Physical,
            };
            let name = format!("{:?}", a.reference).to_lowercase();
            match circuit::block_pseudothreshold(&points, code.k(), reference) {
                Ok(t) => _ = writeln!(summary, "block pseudothreshold ({name} reference): {t:.4e}"),
                Err(e) => _ = writeln!(summary, "block pseudothreshold ({name} reference): none ({e})"),
            }
            for i in 0..code.k() {
                match circuit::qubit_pseudothreshold(&points, i) {
                    Ok(t) => _ = writeln!(summary, "qubit {} pseudothreshold: {t:.4e}", i + 1),
                    Err(_) => _ = writeln!(summary, "qubit {} pseudothreshold: none in grid", i + 1),
                }
            }
            points.iter().map(|p| p.to_sim_result()).collect()
        }
    };

    let curve: Vec<(f64, f64)> = results.iter().map(|r| (r.p, r.block_rate.value)).collect();
    match fit_power_law(&curve) {
        Ok(f) => _ = writeln!(summary, "fit: P_L = {:.4e} * p^{:.4} (log rms {:.3})", f.amplitude, f.exponent, f.residual),
        Err(e) => _ = writeln!(summary, "fit: not available ({e})"),
    }
    let mut head = format!(
        "code {} N={} K={} mode={} estimator={} seed={}\n",
        code.code_id(),
        code.n_qubits(),
        code.k(),
        format!("{:?}", a.mode).to_lowercase(),
        if a.mode == SimMode::Circuit { "direct" } else { results[0].estimator.as_str() },
        a.seed
    );
    for r in &results {
        let _ = writeln!(
            head,
            "p={:.4e} trials={} block_failures={} block_rate={:.4e} sigma={:.2e}",
            r.p, r.trials, r.block_failures, r.block_rate.value, r.block_rate.sigma
        );
    }
    let summary = head + &summary;

    let mode = format!("{:?}", a.mode).to_lowercase();
    let stem = a.name.clone().unwrap_or_else(|| format!("{}.{mode}", file_stem(&a.manifest)));
    let mut out = Outputs::new(&cli.out_dir, &stem)?;
    let mut csv = Vec::new();
    pheno::write_csv(&mut csv, &CodeInfo::of(&code), &results)?;
    out.write(".csv", &csv)?;
    out.write(".dat", gnuplot_data(&results).as_bytes())?;
    let data_name = out.file_name(".dat");
    out.write(".gp", gnuplot_script(&data_name, code.k(), &format!("{} ({mode})", code.code_id())).as_bytes())?;
    out.write(".summary.txt", summary.as_bytes())?;
    out.finish("simulate", cli.jobs, cli)?;
    print!("{summary}");
    eprintln!("wall time {:.2} s", started.elapsed().as_secs_f64());
    Ok(())
}

struct Checks {
    lines: String,
    failed: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            lines: String::new(),
            failed: Vec::new(),
        }
    }

    fn record(&mut self, name: &str, result: Result<(), String>) {
        match result {
            Ok(()) => _ = writeln!(self.lines, "{name}: ok"),
            Err(msg) => {
                let _ = writeln!(self.lines, "{name}: FAILED: {msg}");
                self.failed.push(format!("{name}: {msg}"));
            }
        }
    }
}

fn gauge_fixing_check(checks: &mut Checks, h1: &BinaryMatrix, h2: &BinaryMatrix) -> Result<(), Failure> {
    let r = verify_gauge_fixing(h1, h2)?;
    let detail = format!("K(HGP) = {}, K(SHP pair) = {}", r.k_hgp, r.k_shp);
    checks.record(
        &format!("gauge fixing ({detail})"),
        match r.witness {
            None => Ok(()),
            Some(w) => Err(w),
        },
    );
    Ok(())
}

fn invariants_check(checks: &mut Checks, label: &str, code: &SubsystemCode) {
    let v = code.violations();
    checks.record(
        &format!("{label} invariants"),
        if v.is_empty() {
            Ok(())
        } else {
            Err(v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
        },
    );
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Outcome {
    let mut checks = Checks::new();
    let stem;
    if let Some(path) = &a.manifest {
        stem = format!("{}.verify", file_stem(path));
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
        let manifest = Manifest::from_json(&text).with_context(|| format!("invalid manifest {}", path.display()))?;
        let code = match manifest.to_code() {
            Ok(c) => c,
            Err(e) => return Err(Failure::Verification(format!("{}: {e}", path.display()))),
        };
        invariants_check(&mut checks, &code.code_id(), &code);

        let rebuilt = manifest.rebuild();
        checks.record(
            "construction inputs reproduce the listed code",
            match &rebuilt {
                Err(e) => Err(e.to_string()),
                Ok(r) if (r.n_qubits(), r.k()) != (code.n_qubits(), code.k()) => {
                    Err(format!("rebuilt [[{},{}]] vs listed [[{},{}]]", r.n_qubits(), r.k(), code.n_qubits(), code.k()))
                }
                Ok(r) if !r.stab_x().same_row_space(code.stab_x()) => Err("stab_x row space differs".into()),
                Ok(r) if !r.stab_z().same_row_space(code.stab_z()) => Err("stab_z row space differs".into()),
                Ok(_) => Ok(()),
            },
        );
        if let Some(d) = manifest.distance {
            let found = subsystem_distance_bruteforce(&code, DEFAULT_DISTANCE_CAP as u32);
            checks.record(
                "distance",
                match found {
                    Some(f) if f == d => Ok(()),
                    Some(f) => Err(format!("listed {d}, brute force finds {f}")),
                    None => Err(format!("listed {d}, not computable within 2^{DEFAULT_DISTANCE_CAP} supports")),
                },
            );
        }
        match code.construction() {
            Construction::Bbs { a: support, .. } if *support == reference::hamming_bbs_a() => {
                let sx = code.stab_x().same_row_space(&support_matrix(&reference::HAMMING_BBS_STAB_X));
                let sz = code.stab_z().same_row_space(&support_matrix(&reference::HAMMING_BBS_STAB_Z));
                checks.record(
                    "[[21,4,3]] reference stabilizers",
                    match (sx, sz) {
                        (true, true) => Ok(()),
                        _ => Err(format!("row spaces equal: X {sx}, Z {sz}")),
                    },
                );
            }
            Construction::Shp { h1, h2, .. } | Construction::Hgp { h1, h2 } => {
                gauge_fixing_check(&mut checks, h1, h2)?;
            }
            _ => {}
        }
    } else {
        let (Some(s1), Some(s2)) = (&a.h1, &a.h2) else {
            return Err(usage("verify needs --manifest or both --h1 and --h2"));
        };
        stem = "gauge-fixing.verify".to_string();
        let h1 = codespec::parity_check(s1)?;
        let h2 = codespec::parity_check(s2)?;
        invariants_check(&mut checks, "SHP(H1, H2)", &build_shp(&h1, &h2)?);
        invariants_check(&mut checks, "SHP(H2^T, H1^T)", &build_shp(&h2.transpose(), &h1.transpose())?);
        invariants_check(&mut checks, "HGP(H1, H2)", &build_hgp(&h1, &h2)?);
        gauge_fixing_check(&mut checks, &h1, &h2)?;
    }
    let verdict = if checks.failed.is_empty() { "verification passed\n" } else { "verification FAILED\n" };
    let report = checks.lines.clone() + verdict;
    let mut out = Outputs::new(&cli.out_dir, &stem)?;
    out.write(".txt", report.as_bytes())?;
    out.finish("verify", cli.jobs, cli)?;
    print!("{report}");
    if checks.failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(checks.failed.join("; ")))
    }
}

fn select_code(cli: &Cli, a: &SelectArgs) -> Outcome {
    if a.graphs == 0 || a.bsc_trials == 0 {
        return Err(usage("--graphs and --bsc-trials must be positive"));
    }
    if !(a.channel_p > 0.0 && a.channel_p < 0.5) {
        return Err(usage("--channel-p must lie in (0, 1/2)"));
    }
    let cfg = SelectionConfig {
        n_var: a.n,
        b: a.b,
        c: a.c,
        graphs: a.graphs,
        channel_p: a.channel_p,
        bsc_trials: a.bsc_trials,
        seed: a.seed,
    };
    let sel = select_best_code(&cfg, Execution::Parallel)?;
    let code = &sel.code;
    let stem = a.name.clone().unwrap_or_else(|| format!("ldpc-{}-{}-{}", a.n, a.b, a.c));
    let mut out = Outputs::new(&cli.out_dir, &stem)?;
    out.write(".alist", write_alist(code.parity_check()).as_bytes())?;
    let mut report = format!(
        "selected candidate {} of {}: {} failures in {} BSC({}) trials\n",
        sel.index, a.graphs, sel.failures[sel.index], sel.bsc_trials, a.channel_p
    );
    let d = min_distance_bruteforce(code, DEFAULT_DISTANCE_CAP).map_or("?".to_string(), |d| d.to_string());
    let _ = writeln!(report, "code [{}, {}, {d}] with {} checks", code.n(), code.k(), code.m());
    let _ = writeln!(
        report,
        "candidate failures: {}",
        sel.failures.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ")
    );
    out.write(".report.txt", report.as_bytes())?;
    out.finish("select-code", cli.jobs, cli)?;
    print!("{report}");
    Ok(())
}

fn fit(cli: &Cli, a: &FitArgs) -> Outcome {
    let mut reader =
        csv::Reader::from_path(&a.csv).with_context(|| format!("cannot read CSV {}", a.csv.display()))?;
    let headers = reader.headers().context("CSV has no header")?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Runtime(anyhow!("CSV lacks a {name} column")))
    };
    let (c_id, c_p, c_q, c_rate) = (col("code_id")?, col("p")?, col("qubit_index")?, col("rate")?);
    let want = a.qubit.map_or(-1, |q| q as i64);
    let mut curves: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("CSV record {}", line + 2))?;
        let num = |i: usize| -> Result<f64, Failure> {
            rec[i].parse::<f64>().map_err(|_| Failure::Runtime(anyhow!("CSV record {}: bad number {:?}", line + 2, &rec[i])))
        };
        if num(c_q)? as i64 != want {
            continue;
        }
        let p = num(c_p)?;
        if a.p_min.is_some_and(|lo| p < lo) || a.p_max.is_some_and(|hi| p > hi) {
            continue;
        }
        curves.entry(rec[c_id].to_string()).or_default().push((p, num(c_rate)?));
    }
    if curves.is_empty() {
        return Err(Failure::Runtime(anyhow!("no matching rows in {}", a.csv.display())));
    }
    let target = a.qubit.map_or("block".to_string(), |q| format!("qubit index {q}"));
    let mut report = String::new();
    for (id, points) in &curves {
        match fit_power_law(points) {
            Ok(f) => _ = writeln!(
                report,
                "{id} {target}: P_L = {:.4e} * p^{:.4} over {} points (log rms {:.3})",
                f.amplitude,
                f.exponent,
                points.len(),
                f.residual
            ),
            Err(e) => _ = writeln!(report, "{id} {target}: fit not available ({e})"),
        }
    }
    let mut out = Outputs::new(&cli.out_dir, &format!("{}.fit", file_stem(&a.csv)))?;
    out.write(".txt", report.as_bytes())?;
    out.finish("fit", cli.jobs, cli)?;
    print!("{report}");
    Ok(())
}
