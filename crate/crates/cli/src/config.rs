//! Config files: flat `key = value` lines grouped into sections.
//!
//! ```text
//! # comment (also `;`)
//! jobs = 2                 # keys before any section, or under [global],
//! out-dir = runs           # are global flags
//!
//! [simulate]               # keys for one subcommand
//! trials = 100000
//! grid = 1e-3,2e-3,4e-3
//! minimize-q = true        # switches take true/false
//! ```
//!
//! Keys are long flag names without the leading dashes. Values run to the end
//! of the line (an inline ` #` starts a comment) and may be double-quoted.
//! Entries are spliced into the command line ahead of the real arguments, so
//! flags given on the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::{ArgAction, Command};

#[derive(Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub sections: BTreeMap<String, Vec<(String, String)>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = ConfigFile::default();
        let mut section = "global".to_string();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| format!("line {}: unterminated section header", lineno + 1))?
                    .trim();
                if name.is_empty() {
                    return Err(format!("line {}: empty section name", lineno + 1));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(format!("line {}: empty key", lineno + 1));
            }
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            cfg.sections
                .entry(section.clone())
                .or_default()
                .push((key.to_string(), value.to_string()));
        }
        Ok(cfg)
    }

    /// Inserts the global section after the program name and the section of
    /// `subcommand` right after its name in `argv`.
    pub fn splice(&self, argv: &[OsString], cmd: &Command, subcommand: &str) -> Result<Vec<OsString>, String> {
        let sub_pos = argv
            .iter()
            .skip(1)
            .position(|a| a == subcommand)
            .map(|i| i + 1)
            .ok_or_else(|| format!("subcommand {subcommand} not found on the command line"))?;
        let sub_cmd = cmd
            .find_subcommand(subcommand)
            .ok_or_else(|| format!("unknown subcommand {subcommand}"))?;
        let mut out: Vec<OsString> = vec![argv[0].clone()];
        for name in self.sections.keys() {
            if name != "global" && cmd.find_subcommand(name).is_none() {
                return Err(format!("unknown config section [{name}]"));
            }
        }
        if let Some(entries) = self.sections.get("global") {
            out.extend(to_args(entries, cmd, "global")?);
        }
        out.extend(argv[1..=sub_pos].iter().cloned());
        if let Some(entries) = self.sections.get(subcommand) {
            out.extend(to_args(entries, sub_cmd, subcommand)?);
        }
        out.extend(argv[sub_pos + 1..].iter().cloned());
        Ok(out)
    }
}

fn strip_comment(line: &str) -> &str {
    let t = line.trim_start();
    if t.starts_with('#') || t.starts_with(';') {
        return "";
    }
    match line.find(" #") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn to_args(entries: &[(String, String)], cmd: &Command, section: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (key, value) in entries {
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| format!("[{section}] has no option named {key}"))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "yes" | "1" => out.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                _ => return Err(format!("[{section}] {key} expects true or false, got {value}")),
            }
        } else {
            out.push(format!("--{key}={value}").into());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_quotes() {
        let cfg = ConfigFile::parse("# top\njobs = 2\n\n[simulate]\ntrials=5 # inline\nname = \"a b\"\n; done\n").unwrap();
        assert_eq!(cfg.sections["global"], vec![("jobs".to_string(), "2".to_string())]);
        assert_eq!(
            cfg.sections["simulate"],
            vec![("trials".to_string(), "5".to_string()), ("name".to_string(), "a b".to_string())]
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("[broken\n").is_err());
        assert!(ConfigFile::parse("novalue\n").is_err());
        assert!(ConfigFile::parse("= 3\n").is_err());
    }
}
