//! Settings resolution: command-line flags, then `GAUGEGAP_*` environment
//! variables, then a TOML config file, then built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_FILE: &str = "gaugegap.toml";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub max_matvecs: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct FlagValues {
    pub threads: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub max_matvecs: Option<usize>,
    pub config: Option<PathBuf>,
    pub no_cache: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// `None` leaves the thread pool at hardware parallelism.
    pub threads: Option<usize>,
    pub tol: f64,
    pub seed: u64,
    pub max_matvecs: usize,
    pub cache_dir: Option<PathBuf>,
    pub use_cache: bool,
}

fn env_parse<T: std::str::FromStr>(
    env: &dyn Fn(&str) -> Option<String>,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    match env(key) {
        None => Ok(None),
        Some(v) if v.trim().is_empty() => Ok(None),
        Some(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| CliError::Input(format!("{key}={v}: {e}"))),
    }
}

impl Settings {
    /// Resolves settings from the process environment and the working directory.
    pub fn resolve(flags: &FlagValues) -> Result<Self, CliError> {
        Self::resolve_with(flags, &|k| std::env::var(k).ok(), Path::new("."))
    }

    pub fn resolve_with(
        flags: &FlagValues,
        env: &dyn Fn(&str) -> Option<String>,
        cwd: &Path,
    ) -> Result<Self, CliError> {
        let config_path = flags
            .config
            .clone()
            .or_else(|| env("GAUGEGAP_CONFIG").map(PathBuf::from))
            .or_else(|| Some(cwd.join(CONFIG_FILE)).filter(|p| p.is_file()));
        let file = match config_path {
            Some(p) => FileConfig::load(&p)?,
            None => FileConfig::default(),
        };
        let defaults = gaugegap::eigen::EigenConfig::default();

        let threads = flags
            .threads
            .or(env_parse(env, "GAUGEGAP_THREADS")?)
            .or(file.threads);
        if threads == Some(0) {
            return Err(CliError::Input("thread count must be positive".into()));
        }
        let tol = flags.tol.or(env_parse(env, "GAUGEGAP_TOL")?).or(file.tol).unwrap_or(defaults.tol);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Input(format!("tolerance must be positive, got {tol}")));
        }
        let seed = flags.seed.or(env_parse(env, "GAUGEGAP_SEED")?).or(file.seed).unwrap_or(defaults.seed);
        let max_matvecs = flags
            .max_matvecs
            .or(env_parse(env, "GAUGEGAP_MAX_MATVECS")?)
            .or(file.max_matvecs)
            .unwrap_or(defaults.max_matvecs);
        let cache_dir = env("GAUGEGAP_CACHE_DIR")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or(file.cache_dir)
            .or_else(|| dirs::cache_dir().map(|d| d.join("gaugegap")));
        Ok(Self { threads, tol, seed, max_matvecs, cache_dir, use_cache: !flags.no_cache })
    }

    pub fn eigen(&self) -> gaugegap::eigen::EigenConfig {
        gaugegap::eigen::EigenConfig {
            tol: self.tol,
            seed: self.seed,
            max_matvecs: self.max_matvecs,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn env_of(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let m: HashMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        move |k| m.get(k).cloned()
    }

    #[test]
    fn flags_beat_env_beat_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(CONFIG_FILE), "threads = 3\ntol = 1e-6\nseed = 9\n").unwrap();
        let env = env_of(&[("GAUGEGAP_THREADS", "2"), ("GAUGEGAP_SEED", "5")]);
        let s = Settings::resolve_with(&FlagValues::default(), &env, dir.path()).unwrap();
        assert_eq!((s.threads, s.tol, s.seed), (Some(2), 1e-6, 5));
        let flags = FlagValues { threads: Some(1), seed: Some(7), ..Default::default() };
        let s = Settings::resolve_with(&flags, &env, dir.path()).unwrap();
        assert_eq!((s.threads, s.seed), (Some(1), 7));
    }

    #[test]
    fn bad_values_are_input_errors() {
        let env = env_of(&[("GAUGEGAP_THREADS", "many")]);
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            Settings::resolve_with(&FlagValues::default(), &env, dir.path()),
            Err(CliError::Input(_))
        ));
        std::fs::write(dir.path().join(CONFIG_FILE), "colour = 1\n").unwrap();
        assert!(Settings::resolve_with(&FlagValues::default(), &env_of(&[]), dir.path()).is_err());
    }

    #[test]
    fn cache_dir_from_env() {
        let dir = tempfile::tempdir().unwrap();
        let env = env_of(&[("GAUGEGAP_CACHE_DIR", "/tmp/x")]);
        let s = Settings::resolve_with(&FlagValues::default(), &env, dir.path()).unwrap();
        assert_eq!(s.cache_dir, Some(PathBuf::from("/tmp/x")));
    }
}
