//! Versioned JSON manifest of a constructed code.
//!
//! The manifest lists `N`, `K`, the qubit layout and every generator as a
//! sorted index list, plus the construction inputs so decoders can be
//! rebuilt. Importing keeps the listed generators as they are; run
//! [`SubsystemCode::violations`] to check them.

use serde::{Deserialize, Serialize};

use super::{CodeParts, Construction, Site, SubsystemCode};
use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub code_id: String,
    pub n_qubits: usize,
    pub k: usize,
    /// Brute-force distance, when it was computed.
    pub distance: Option<usize>,
    pub layout: Vec<Site>,
    pub gauge_x: Vec<Vec<usize>>,
    pub gauge_z: Vec<Vec<usize>>,
    pub stab_x: Vec<Vec<usize>>,
    pub stab_z: Vec<Vec<usize>>,
    pub logical_x: Vec<Vec<usize>>,
    pub logical_z: Vec<Vec<usize>>,
    pub construction: Construction,
}

fn supports(m: &BinaryMatrix) -> Vec<Vec<usize>> {
    (0..m.rows()).map(|r| m.row_support(r)).collect()
}

impl Manifest {
    pub fn from_code(code: &SubsystemCode, distance: Option<usize>) -> Self {
        Self {
            format_version: MANIFEST_VERSION,
            code_id: code.code_id(),
            n_qubits: code.n_qubits(),
            k: code.k(),
            distance,
            layout: code.layout().to_vec(),
            gauge_x: code.gauge_x().to_vec(),
            gauge_z: code.gauge_z().to_vec(),
            stab_x: supports(code.stab_x()),
            stab_z: supports(code.stab_z()),
            logical_x: supports(code.logical_x()),
            logical_z: supports(code.logical_z()),
            construction: code.construction().clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        if m.format_version != MANIFEST_VERSION {
            return Err(Error::Parse(format!(
                "unsupported manifest version {} (expected {MANIFEST_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    /// The code exactly as listed, without invariant checks.
    pub fn to_code(&self) -> Result<SubsystemCode> {
        let n = self.n_qubits;
        if self.layout.len() != n {
            return Err(Error::Dimension(format!("layout lists {} sites for {n} qubits", self.layout.len())));
        }
        let dense = |lists: &[Vec<usize>]| -> Result<BinaryMatrix> {
            if lists.iter().flatten().any(|&q| q >= n) {
                return Err(Error::Dimension("generator index out of range".into()));
            }
            Ok(BinaryMatrix::from_supports(n, lists))
        };
        let code = SubsystemCode::assemble_unchecked(CodeParts {
            layout: self.layout.clone(),
            gauge_x: self.gauge_x.clone(),
            gauge_z: self.gauge_z.clone(),
            stab_x: dense(&self.stab_x)?,
            stab_z: dense(&self.stab_z)?,
            logical_x: dense(&self.logical_x)?,
            logical_z: dense(&self.logical_z)?,
            construction: self.construction.clone(),
        })?;
        if code.k() != self.k {
            return Err(Error::Dimension(format!("manifest K = {} but {} logical pairs listed", self.k, code.k())));
        }
        Ok(code)
    }

    /// Rebuilds the code from its construction inputs.
    pub fn rebuild(&self) -> Result<SubsystemCode> {
        match &self.construction {
            Construction::Bbs { c1, c2, q, .. } => super::build_bbs(c1, c2, q),
            Construction::Shp { h1, h2, .. } => super::build_shp(h1, h2),
            Construction::Hgp { h1, h2 } => super::build_hgp(h1, h2),
        }
    }
}
