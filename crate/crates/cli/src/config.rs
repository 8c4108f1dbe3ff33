//! Experiment config files and command-line overrides.
//!
//! A config is a JSON object
//! `{"experiment": "...", "seed": 7, "out": "dir", "jobs": 4, "params": {...}}`
//! where every key is optional and `params` holds the subcommand's
//! parameter block. Unknown keys are rejected at every level.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

/// Invalid or unreadable configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<P> {
    experiment: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    params: Option<P>,
}

/// Values given on the command line; they win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug)]
pub struct Resolved<P> {
    pub params: P,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| ConfigError(format!("at `{}`: {}", e.path(), e.inner())))
}

fn env_seed() -> Result<Option<u64>, ConfigError> {
    match std::env::var("QLLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError(format!("QLLAB_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Reads the config (if any) and applies overrides.
///
/// Seed precedence: `--seed`, then the config's `seed`, then `QLLAB_SEED`,
/// then 0. The output directory defaults to `qllab-out/<experiment>`.
pub fn resolve<P: DeserializeOwned>(experiment: &str, o: &Overrides) -> Result<Resolved<P>, ConfigError> {
    let env: Envelope<P> = match &o.config {
        Some(path) => {
            let text = read(path)?;
            // Name mismatches are reported before any parameter error.
            if let Ok(Value::Object(m)) = serde_json::from_str::<Value>(&text) {
                if let Some(Value::String(name)) = m.get("experiment") {
                    if name != experiment {
                        return Err(ConfigError(format!("at `experiment`: config is for `{name}`, not `{experiment}`")));
                    }
                }
            }
            parse_json(&text)?
        }
        None => Envelope { experiment: None, seed: None, out: None, jobs: None, params: None },
    };
    if let Some(name) = &env.experiment {
        if name != experiment {
            return Err(ConfigError(format!("at `experiment`: expected `{experiment}`, got {name:?}")));
        }
    }
    let params = match env.params {
        Some(p) => p,
        None => serde_json::from_value(Value::Object(Default::default()))
            .map_err(|e| ConfigError(format!("at `params`: {e}")))?,
    };
    let seed = match o.seed.or(env.seed) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let jobs = o.jobs.or(env.jobs);
    if jobs == Some(0) {
        return Err(ConfigError("at `jobs`: must be at least 1".into()));
    }
    let out = o.out.clone().or(env.out).unwrap_or_else(|| Path::new("qllab-out").join(experiment));
    Ok(Resolved { params, seed, out, jobs })
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Debug, Deserialize, Serialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(default)]
        n: usize,
        #[serde(default)]
        inner: Inner,
    }

    #[derive(Debug, Default, Deserialize, Serialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Inner {
        #[serde(default)]
        d: usize,
    }

    fn with_file(text: &str) -> (tempfile::NamedTempFile, Overrides) {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        let o = Overrides { config: Some(f.path().to_path_buf()), ..Default::default() };
        (f, o)
    }

    #[test]
    fn key_path_in_errors() {
        let (_f, o) = with_file(r#"{"params": {"inner": {"d": "x"}}}"#);
        let err = resolve::<P>("t", &o).unwrap_err();
        assert!(err.0.contains("`params.inner.d`"), "{}", err.0);
        let (_f, o) = with_file(r#"{"params": {"inner": {"e": 1}}}"#);
        assert!(resolve::<P>("t", &o).unwrap_err().0.contains("`params.inner.e`"));
        let (_f, o) = with_file(r#"{"bogus": 1}"#);
        assert!(resolve::<P>("t", &o).unwrap_err().0.contains("`bogus`"));
    }

    #[test]
    fn overrides_win() {
        let (_f, mut o) = with_file(r#"{"experiment": "t", "seed": 5, "out": "a", "params": {"n": 3}}"#);
        let r = resolve::<P>("t", &o).unwrap();
        assert_eq!((r.seed, r.out.clone(), r.params.n), (5, PathBuf::from("a"), 3));
        o.seed = Some(9);
        o.out = Some("b".into());
        let r = resolve::<P>("t", &o).unwrap();
        assert_eq!((r.seed, r.out), (9, PathBuf::from("b")));
        assert!(resolve::<P>("other", &o).is_err());
    }

    #[test]
    fn defaults_without_file() {
        let r = resolve::<P>("t", &Overrides { seed: Some(1), ..Default::default() }).unwrap();
        assert_eq!(r.params, P { n: 0, inner: Inner::default() });
        assert_eq!(r.out, Path::new("qllab-out").join("t"));
    }
}
