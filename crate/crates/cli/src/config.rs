//! Key-value config files. One `key = value` per line, `#` comments.
//! Precedence everywhere: command-line flag, then config file, then the
//! built-in default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Keys any subcommand may read; unknown keys are a usage error so typos
/// do not silently fall back to defaults.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "tornado",
    "null",
    "separation",
    "window_days",
    "start_date",
    "regions",
    "min_gap_days",
    "kind",
    "trees",
    "max_depth",
    "min_samples_split",
    "max_features",
    "bootstrap",
    "k",
    "rounds",
    "lambda",
    "epochs",
    "threshold",
    "test_year",
];

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Config { values })
    }

    /// flag value if given, else parsed config value, else the default.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw.parse().map_err(|e| {
                CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`: {e}"))
            }),
            None => Ok(default),
        }
    }

    /// Same, but with no default: absent everywhere stays `None`.
    pub fn resolve_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(Some(v));
        }
        match self.values.get(key) {
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`: {e}"))
            }),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_comments_and_precedence() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# a comment\nseed = 9\nthreshold = 0.25  # trailing").unwrap();
        let cfg = Config::load(Some(f.path())).unwrap();
        // flag wins
        assert_eq!(cfg.resolve(Some(1u64), "seed", 0).unwrap(), 1);
        // config beats default
        assert_eq!(cfg.resolve(None::<u64>, "seed", 0).unwrap(), 9);
        assert_eq!(cfg.resolve(None::<f64>, "threshold", 0.5).unwrap(), 0.25);
        // default when absent
        assert_eq!(cfg.resolve(None::<usize>, "k", 5).unwrap(), 5);
    }

    #[test]
    fn unknown_keys_and_bad_lines_are_usage_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "tornadoes = 3").unwrap();
        assert!(matches!(
            Config::load(Some(f.path())),
            Err(CliError::Usage(_))
        ));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "just words").unwrap();
        assert!(matches!(
            Config::load(Some(f.path())),
            Err(CliError::Usage(_))
        ));
    }
}
