//! Run manifests and gnuplot data files. Nothing here records wall-clock
//! time, so the same config and seed give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use subsys::pheno::SimResult;

/// Version stamp written into every run manifest. Builds from a checkout can
/// override it with `SUBSYS_BUILD_VERSION` (e.g. the output of `git describe`).
pub fn artifact_version() -> String {
    option_env!("SUBSYS_BUILD_VERSION")
        .map(str::to_string)
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct RunManifest<'a, C: Serialize> {
    tool: &'static str,
    version: String,
    manifest_format: u32,
    csv_schema: u32,
    command: &'a str,
    jobs: Option<usize>,
    config: &'a C,
    outputs: Vec<String>,
}

pub struct Outputs {
    dir: PathBuf,
    stem: String,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path, stem: &str) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            stem: stem.to_string(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    pub fn file_name(&self, suffix: &str) -> String {
        format!("{}{suffix}", self.stem)
    }

    pub fn write(&mut self, suffix: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.path(suffix);
        std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(self.file_name(suffix));
        Ok(path)
    }

    /// Writes `<stem>.run.json` echoing the resolved config.
    pub fn finish<C: Serialize>(mut self, command: &str, jobs: Option<usize>, config: &C) -> Result<PathBuf> {
        self.written.push(self.file_name(".run.json"));
        let run = RunManifest {
            tool: "subsys",
            version: artifact_version(),
            manifest_format: subsys::codes::MANIFEST_VERSION,
            csv_schema: CSV_SCHEMA_VERSION,
            command,
            jobs,
            config,
            outputs: self.written.clone(),
        };
        let text = serde_json::to_string_pretty(&run)? + "\n";
        let path = self.path(".run.json");
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// Whitespace-separated columns: p, block rate, block sigma, then the rate of
/// every logical qubit.
pub fn gnuplot_data(results: &[SimResult]) -> String {
    let k = results.first().map_or(0, |r| r.per_qubit_rate.len());
    let mut s = String::from("# p block_rate block_sigma");
    for i in 0..k {
        let _ = write!(s, " q{}", i + 1);
    }
    s.push('\n');
    for r in results {
        let _ = write!(s, "{:e} {:e} {:e}", r.p, r.block_rate.value, r.block_rate.sigma);
        for q in &r.per_qubit_rate {
            let _ = write!(s, " {q:e}");
        }
        s.push('\n');
    }
    s
}

pub fn gnuplot_script(data_file: &str, k: usize, title: &str) -> String {
    let mut s = format!(
        "set title \"{title}\"\nset logscale xy\nset format xy \"%.0e\"\nset xlabel \"physical error rate p\"\n\
         set ylabel \"logical failure rate\"\nset key left top\n\
         plot \"{data_file}\" using 1:2:3 with yerrorlines title \"block\", \\\n     x with lines dashtype 2 title \"p\""
    );
    for i in 0..k.min(16) {
        let _ = write!(s, ", \\\n     \"{data_file}\" using 1:{} with linespoints title \"qubit {}\"", i + 4, i + 1);
    }
    s.push('\n');
    s
}
