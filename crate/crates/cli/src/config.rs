//! Flat `key = value` experiment configuration.
//!
//! Every key has a default; a config file and command-line overrides replace
//! values key by key. The effective settings are written next to each run so
//! that `--config <run>/config.txt` reproduces it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use zenodrive::coherent::IntegratorOptions;
use zenodrive::geometry::{GeodesicOptions, PathFamily, TrajectoryOptions};
use zenodrive::{Complex64, ParameterPoint};

use crate::error::{CliError, CliResult};

pub const DEFAULTS: &[(&str, &str)] = &[
    ("model.N", "10"),
    ("endpoints.initial", "0,0"),
    ("endpoints.final", "2,0.5"),
    ("path.family", "geodesic,linear-v,linear-u"),
    ("path.K", "100"),
    ("path.resolution", "20000"),
    ("geodesic.steps", "80"),
    ("geodesic.gradient_tol", "1e-9"),
    ("geodesic.max_iterations", "100"),
    ("geodesic.coarsest", "10"),
    ("map.lambda", "linspace:-1,3,81"),
    ("map.chi", "linspace:0,1.5,61"),
    ("zeno.K", "logspace:10,10000,31"),
    ("compare.T", "5,10,15,20,30,50,100"),
    ("compare.K_cap", "1000000"),
    ("integrator.substeps_per_time", "8"),
    ("integrator.min_substeps", "64"),
    ("integrator.abs_tol", "1e-8"),
    ("integrator.rel_tol", "1e-2"),
    ("integrator.max_doublings", "12"),
    ("gadget.tau", "1"),
    ("gadget.a0", "0.7071067811865476"),
    ("gadget.a1", "0.7071067811865476"),
    ("gadget.t_prime", "linspace:0,4,161"),
    ("seed", "0"),
];

/// Raw string settings, always holding every known key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Default for Settings {
    fn default() -> Self {
        Self(
            DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        )
    }
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match self.0.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key '{key}'"))),
        }
    }

    pub fn get(&self, key: &str) -> &str {
        &self.0[key]
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn merge_text(&mut self, text: &str) -> CliResult<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> CliResult<()> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        self.merge_text(&text)
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn parse<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)
            .parse()
            .map_err(|_| CliError::Config(format!("{key}: cannot parse '{}'", self.get(key))))
    }
}

/// Expands `a,b,c`, `linspace:start,stop,n` or `logspace:start,stop,n`
/// (geometric spacing between the endpoints, both included).
pub fn parse_list(key: &str, text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("{key}: cannot parse list '{text}'"));
    let numbers = |s: &str| -> CliResult<Vec<f64>> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    };
    let spaced = |spec: &str, log: bool| -> CliResult<Vec<f64>> {
        let v = numbers(spec)?;
        let [a, b, n] = v[..] else { return Err(bad()) };
        if n < 1.0 || n.fract() != 0.0 || (log && (a <= 0.0 || b <= 0.0)) {
            return Err(bad());
        }
        let n = n as usize;
        Ok((0..n)
            .map(|i| {
                let t = if n == 1 {
                    0.0
                } else {
                    i as f64 / (n - 1) as f64
                };
                if log {
                    (a.ln() + t * (b.ln() - a.ln())).exp()
                } else {
                    a + t * (b - a)
                }
            })
            .collect())
    };
    let text = text.trim();
    let list = if let Some(spec) = text.strip_prefix("linspace:") {
        spaced(spec, false)?
    } else if let Some(spec) = text.strip_prefix("logspace:") {
        spaced(spec, true)?
    } else {
        numbers(text)?
    };
    if list.is_empty() || list.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(list)
}

/// A list of step counts: rounded, deduplicated and ascending.
pub fn parse_steps(key: &str, text: &str) -> CliResult<Vec<usize>> {
    let mut ks: Vec<usize> = parse_list(key, text)?
        .into_iter()
        .map(|x| {
            if x >= 0.5 {
                Ok(x.round() as usize)
            } else {
                Err(CliError::Config(format!("{key}: step counts must be >= 1")))
            }
        })
        .collect::<CliResult<_>>()?;
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}

fn parse_point(key: &str, text: &str) -> CliResult<ParameterPoint> {
    match parse_list(key, text)?[..] {
        [l, c] => Ok(ParameterPoint::lambda_chi(l, c)),
        _ => Err(CliError::Config(format!("{key}: expected 'lambda,chi'"))),
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n_qubits: usize,
    pub initial: ParameterPoint,
    pub target: ParameterPoint,
    pub families: Vec<PathFamily>,
    pub path_steps: usize,
    pub trajectory: TrajectoryOptions,
    pub map_lambda: Vec<f64>,
    pub map_chi: Vec<f64>,
    pub zeno_steps: Vec<usize>,
    pub compare_times: Vec<f64>,
    pub k_cap: usize,
    pub integrator: IntegratorOptions,
    pub gadget_tau: f64,
    pub gadget_a0: Complex64,
    pub gadget_a1: Complex64,
    pub gadget_times: Vec<f64>,
    pub seed: u64,
}

impl TryFrom<&Settings> for ExperimentConfig {
    type Error = CliError;

    fn try_from(s: &Settings) -> CliResult<Self> {
        let mut families: Vec<PathFamily> = s
            .get("path.family")
            .split(',')
            .map(|f| f.trim().parse().map_err(CliError::from))
            .collect::<CliResult<_>>()?;
        families.sort();
        families.dedup();
        let list = |k: &str| parse_list(k, s.get(k));
        Ok(Self {
            n_qubits: s.parse("model.N")?,
            initial: parse_point("endpoints.initial", s.get("endpoints.initial"))?,
            target: parse_point("endpoints.final", s.get("endpoints.final"))?,
            families,
            path_steps: s.parse("path.K")?,
            trajectory: TrajectoryOptions {
                resolution: s.parse("path.resolution")?,
                geodesic_steps: s.parse("geodesic.steps")?,
                geodesic: GeodesicOptions {
                    gradient_tol: s.parse("geodesic.gradient_tol")?,
                    max_iterations: s.parse("geodesic.max_iterations")?,
                    coarsest: s.parse("geodesic.coarsest")?,
                },
            },
            map_lambda: list("map.lambda")?,
            map_chi: list("map.chi")?,
            zeno_steps: parse_steps("zeno.K", s.get("zeno.K"))?,
            compare_times: list("compare.T")?,
            k_cap: s.parse("compare.K_cap")?,
            integrator: IntegratorOptions {
                substeps_per_time: s.parse("integrator.substeps_per_time")?,
                min_substeps: s.parse("integrator.min_substeps")?,
                abs_tol: s.parse("integrator.abs_tol")?,
                rel_tol: s.parse("integrator.rel_tol")?,
                max_doublings: s.parse("integrator.max_doublings")?,
            },
            gadget_tau: s.parse("gadget.tau")?,
            gadget_a0: s.parse("gadget.a0")?,
            gadget_a1: s.parse("gadget.a1")?,
            gadget_times: list("gadget.t_prime")?,
            seed: s.parse("seed")?,
        })
    }
}
