//! Merged configuration: defaults < environment < config file < flags.

use std::path::Path;

use serde_json::{Map, Value};
use svv_verify::ExperimentConfig;

use crate::CliError;

/// Values given on the command line; `None` leaves lower layers in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub tol: Option<f64>,
    pub trials: Option<usize>,
    pub mc_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub experiment: ExperimentConfig,
    /// Worker count; never part of any output.
    pub threads: Option<usize>,
}

/// Environment lookups, injectable for tests.
pub trait Env {
    fn var(&self, key: &str) -> Option<String>;
}

pub struct ProcessEnv;

impl Env for ProcessEnv {
    fn var(&self, key: &str) -> Option<String> {
        std::env::var(key).ok()
    }
}

impl<const N: usize> Env for [(&str, &str); N] {
    fn var(&self, key: &str) -> Option<String> {
        self.iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.to_string())
    }
}

fn parse_env<T: std::str::FromStr>(env: &dyn Env, key: &str) -> Result<Option<T>, CliError> {
    match env.var(key) {
        None => Ok(None),
        Some(v) if v.trim().is_empty() => Ok(None),
        Some(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{key}={v} is not valid"))),
    }
}

/// Parses a TOML config file; an empty file yields no overrides.
pub fn read_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_toml(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_toml(text: &str) -> Result<Map<String, Value>, String> {
    let table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
    match serde_json::to_value(table).map_err(|e| e.to_string())? {
        Value::Object(m) => Ok(m),
        _ => Err("config must be a table".into()),
    }
}

pub fn load_config(
    file: Option<&Path>,
    flags: &Overrides,
    env: &dyn Env,
) -> Result<Settings, CliError> {
    let file = file.map(read_file).transpose()?;
    merge(file, flags, env)
}

pub fn merge(
    file: Option<Map<String, Value>>,
    flags: &Overrides,
    env: &dyn Env,
) -> Result<Settings, CliError> {
    let mut doc =
        match serde_json::to_value(ExperimentConfig::default()).expect("defaults serialize") {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
    let mut threads: Option<usize> = None;

    if let Some(seed) = parse_env::<u64>(env, "SVV_SEED")? {
        doc.insert("seed".into(), seed.into());
    }
    if let Some(t) = parse_env::<usize>(env, "SVV_THREADS")? {
        threads = Some(t);
    }

    if let Some(mut file) = file {
        if let Some(t) = file.remove("threads") {
            threads = Some(t.as_u64().map(|t| t as usize).ok_or_else(|| {
                CliError::Usage(format!("threads must be a non-negative integer, got {t}"))
            })?);
        }
        doc.extend(file);
    }

    if let Some(v) = flags.seed {
        doc.insert("seed".into(), v.into());
    }
    if let Some(v) = flags.tol {
        doc.insert("tol".into(), v.into());
    }
    if let Some(v) = flags.trials {
        doc.insert("trials".into(), v.into());
    }
    if let Some(v) = flags.mc_samples {
        doc.insert("mc_samples".into(), v.into());
    }
    if flags.threads.is_some() {
        threads = flags.threads;
    }

    let experiment: ExperimentConfig = serde_json::from_value(Value::Object(doc))
        .map_err(|e| CliError::Usage(format!("config: {e}")))?;
    experiment
        .validate()
        .map_err(|e| CliError::Usage(format!("config: {e}")))?;
    if threads == Some(0) {
        threads = None;
    }
    Ok(Settings {
        experiment,
        threads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const NO_ENV: [(&str, &str); 0] = [];

    #[test]
    fn empty_file_gives_defaults() {
        let s = merge(
            Some(parse_toml("").unwrap()),
            &Overrides::default(),
            &NO_ENV,
        )
        .unwrap();
        assert_eq!(s.experiment, ExperimentConfig::default());
        assert_eq!(s.threads, None);
    }

    #[test]
    fn precedence_matrix() {
        let file = || Some(parse_toml("seed = 5\ntrials = 7\nthreads = 2").unwrap());
        let env = [("SVV_SEED", "9"), ("SVV_THREADS", "3")];
        let flags = Overrides {
            seed: Some(11),
            ..Default::default()
        };
        let none = Overrides::default();

        // env over defaults
        let s = merge(None, &none, &env).unwrap();
        assert_eq!((s.experiment.seed.master, s.threads), (9, Some(3)));
        // file over env
        let s = merge(file(), &none, &env).unwrap();
        assert_eq!(
            (s.experiment.seed.master, s.experiment.trials, s.threads),
            (5, 7, Some(2))
        );
        // flags over file and env
        let s = merge(file(), &flags, &env).unwrap();
        assert_eq!(s.experiment.seed.master, 11);
        let s = merge(
            None,
            &Overrides {
                threads: Some(1),
                ..Default::default()
            },
            &env,
        )
        .unwrap();
        assert_eq!(s.threads, Some(1));
    }

    #[test]
    fn bad_inputs_are_usage_errors() {
        assert!(matches!(
            merge(None, &Overrides::default(), &[("SVV_SEED", "x")]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            merge(
                Some(parse_toml("trails = 3").unwrap()),
                &Overrides::default(),
                &NO_ENV
            ),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            merge(
                Some(parse_toml("trials = 0").unwrap()),
                &Overrides::default(),
                &NO_ENV
            ),
            Err(CliError::Usage(_))
        ));
        let err = parse_toml("seed = 1\ntrials = = 2").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn file_accepts_orders_and_dims() {
        let s = merge(
            Some(parse_toml("alphas = [1.5, \"inf\"]\ndims = [[2, 2], [3, 2]]").unwrap()),
            &Overrides::default(),
            &NO_ENV,
        )
        .unwrap();
        assert!(s.experiment.alphas[1].is_infinite());
        assert_eq!(s.experiment.dims, vec![vec![2, 2], vec![3, 2]]);
    }
}
