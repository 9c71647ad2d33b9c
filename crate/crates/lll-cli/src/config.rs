//! Key-value run configuration.
//!
//! A config file is plain `key = value` lines with `#` comments; keys are
//! the long flag names of the subcommand. Flags override file values, and
//! every run echoes its fully resolved configuration to `config.kv` in
//! the output directory, so a run can be reproduced with
//! `lll <command> --config <out>/config.kv --out <fresh-dir>`.

use crate::CliError;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Input(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(KvConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }
}

/// Resolve one parameter: explicit flag beats config file beats default.
pub fn resolve<T>(flag: Option<T>, config: &KvConfig, key: &str, default: T) -> Result<T, CliError>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match config.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| CliError::Input(format!("config key `{key}`: cannot parse `{raw}`: {e}"))),
        None => Ok(default),
    }
}

/// Fully resolved configuration echo, serialized deterministically.
#[derive(Debug, Clone, Default)]
pub struct ResolvedConfig {
    entries: Vec<(String, String)>,
}

impl ResolvedConfig {
    pub fn new(command: &str) -> Self {
        ResolvedConfig { entries: vec![("command".into(), command.into())] }
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

/// Parse a `lo:hi:count` linear grid specification.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.trim().split(':').map(|p| p.trim()).collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!("grid spec `{spec}`: expected `lo:hi:count`")));
    }
    let lo: f64 =
        parts[0].parse().map_err(|e| CliError::Input(format!("grid spec `{spec}`: {e}")))?;
    let hi: f64 =
        parts[1].parse().map_err(|e| CliError::Input(format!("grid spec `{spec}`: {e}")))?;
    let count: usize =
        parts[2].parse().map_err(|e| CliError::Input(format!("grid spec `{spec}`: {e}")))?;
    if count == 0 {
        return Err(CliError::Input(format!("grid spec `{spec}`: count must be positive")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let cfg = KvConfig::parse("# comment\n n = 4 \nlmax = 12 # trailing\n\n").unwrap();
        assert_eq!(cfg.get("n"), Some("4"));
        assert_eq!(cfg.get("lmax"), Some("12"));
        assert_eq!(cfg.get("missing"), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(KvConfig::parse("just a word\n").is_err());
    }

    #[test]
    fn flag_beats_config_beats_default() {
        let cfg = KvConfig::parse("n = 7\n").unwrap();
        assert_eq!(resolve(Some(3u32), &cfg, "n", 1).unwrap(), 3);
        assert_eq!(resolve(None::<u32>, &cfg, "n", 1).unwrap(), 7);
        assert_eq!(resolve(None::<u32>, &cfg, "other", 1).unwrap(), 1);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:2:3").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut resolved = ResolvedConfig::new("yrast");
        resolved.set("n", 4);
        resolved.set("lmax", 16);
        let text = resolved.to_kv();
        let reparsed = KvConfig::parse(&text).unwrap();
        assert_eq!(reparsed.get("command"), Some("yrast"));
        assert_eq!(reparsed.get("n"), Some("4"));
    }
}
