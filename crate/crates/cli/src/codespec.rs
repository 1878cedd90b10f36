//! Classical code specifications accepted on the command line:
//!
//! - `hamming7`: the [7,4,3] Hamming code
//! - `repN`, e.g. `rep3`: the length-N repetition code
//! - `ldpc:N,B,C,SEED`: a random (B,C)-biregular code on N bits
//! - anything else is read as a path to an alist file

use anyhow::{bail, Context, Result};
use subsys::classical::{code_from_graph, read_alist, sample_biregular, ClassicalCode};
use subsys::BinaryMatrix;

pub fn parse(spec: &str) -> Result<ClassicalCode> {
    if spec == "hamming7" {
        return Ok(ClassicalCode::hamming_7_4());
    }
    if let Some(n) = spec.strip_prefix("rep") {
        if let Ok(n) = n.parse::<usize>() {
            if n < 2 {
                bail!("repetition code needs length at least 2");
            }
            return Ok(ClassicalCode::repetition(n));
        }
    }
    if let Some(rest) = spec.strip_prefix("ldpc:") {
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            bail!("ensemble spec must be ldpc:N,B,C,SEED, got {spec}");
        }
        let num = |s: &str| s.parse::<u64>().with_context(|| format!("bad number {s:?} in {spec}"));
        let (n, b, c, seed) = (num(parts[0])?, num(parts[1])?, num(parts[2])?, num(parts[3])?);
        let graph = sample_biregular(n as usize, b as usize, c as usize, seed)?;
        return Ok(code_from_graph(&graph));
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("cannot read alist file {spec}"))?;
    Ok(ClassicalCode::from_parity_check(read_alist(&text)?))
}

pub fn parity_check(spec: &str) -> Result<BinaryMatrix> {
    Ok(parse(spec)?.parity_check().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_codes() {
        assert_eq!(parse("hamming7").unwrap().k(), 4);
        assert_eq!(parse("rep5").unwrap().n(), 5);
        assert!(parse("rep1").is_err());
    }

    #[test]
    fn ensemble_spec() {
        let c = parse("ldpc:12,3,6,1").unwrap();
        assert_eq!(c.n(), 12);
        assert!(parse("ldpc:12,3").is_err());
        assert!(parse("ldpc:12,3,7,1").is_err());
    }
}
