//! One function per subcommand, each returning the CSV tables it produces.

use rayon::prelude::*;
use zenodrive::coherent::minimal_k;
use zenodrive::geometry::{family_trajectory, metric, step_lengths, PathFamily, TimedTrajectory};
use zenodrive::models::LipkinModel;
use zenodrive::protocol::zeno_row;
use zenodrive::spectator::{evolve_gadget, reduced_coherence};
use zenodrive::spectral::eigh;
use zenodrive::{Error, HamiltonianFamily, ParameterPoint};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File stem, `<name>.csv`.
    pub name: String,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn trajectories(
    model: &LipkinModel,
    cfg: &ExperimentConfig,
) -> CliResult<Vec<(PathFamily, TimedTrajectory)>> {
    cfg.families
        .par_iter()
        .map(|&f| {
            log::info!("building {f} trajectory");
            let t = family_trajectory(model, f, &cfg.initial, &cfg.target, &cfg.trajectory)?;
            Ok((f, t))
        })
        .collect()
}

pub fn metric_map(cfg: &ExperimentConfig) -> CliResult<Vec<Table>> {
    if cfg.map_lambda.len() < 2 || cfg.map_chi.len() < 2 {
        return Err(CliError::Config(
            "map grid needs at least 2 points per axis".into(),
        ));
    }
    let model = LipkinModel::new(cfg.n_qubits)?;
    let cells: Vec<(f64, f64)> = cfg
        .map_lambda
        .iter()
        .flat_map(|&l| cfg.map_chi.iter().map(move |&c| (l, c)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(l, c)| {
            let p = ParameterPoint::lambda_chi(l, c);
            model.check_domain(&p)?;
            let gap = eigh(&model.hamiltonian(&p)?).gap();
            let g = match metric(&model, &p) {
                Ok(g) => [g.get(0, 0), g.get(0, 1), g.get(1, 1)],
                Err(Error::DegenerateGroundState { .. }) => [f64::NAN; 3],
                Err(e) => return Err(e.into()),
            };
            Ok(vec![
                num(l),
                num(c),
                num(gap),
                num(g[0]),
                num(g[1]),
                num(g[2]),
            ])
        })
        .collect::<CliResult<_>>()?;
    Ok(vec![Table {
        name: "metric_map".into(),
        header: &["lambda", "chi", "gap", "g_ll", "g_lc", "g_cc"],
        rows,
    }])
}

pub fn path(cfg: &ExperimentConfig) -> CliResult<Vec<Table>> {
    let model = LipkinModel::new(cfg.n_qubits)?;
    let k = cfg.path_steps.max(1);
    trajectories(&model, cfg)?
        .into_iter()
        .map(|(f, traj)| {
            let path = traj.discretize(k);
            let steps = step_lengths(&model, &path)?;
            let euclid = path.euclidean_steps();
            let mut cumulative = 0.0;
            let rows = path
                .points()
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let (dl, du) = if i == 0 {
                        (0.0, 0.0)
                    } else {
                        (steps[i - 1], euclid[i - 1] * k as f64)
                    };
                    cumulative += dl;
                    vec![
                        i.to_string(),
                        num(p.get(0)),
                        num(p.get(1)),
                        num(dl),
                        num(cumulative),
                        num(du),
                    ]
                })
                .collect();
            Ok(Table {
                name: format!("path_{f}"),
                header: &[
                    "k",
                    "lambda",
                    "chi",
                    "delta_ell",
                    "cumulative_ell",
                    "u_speed",
                ],
                rows,
            })
        })
        .collect()
}

pub fn zeno(cfg: &ExperimentConfig) -> CliResult<Vec<Table>> {
    if cfg.zeno_steps.is_empty() {
        return Err(CliError::Config("zeno.K is empty".into()));
    }
    let model = LipkinModel::new(cfg.n_qubits)?;
    let trajs = trajectories(&model, cfg)?;
    let jobs: Vec<_> = trajs
        .iter()
        .flat_map(|(f, t)| cfg.zeno_steps.iter().map(move |&k| (*f, t, k)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(f, t, k)| {
            let r = zeno_row(&model, t, k)?;
            Ok(vec![
                f.to_string(),
                k.to_string(),
                num(r.i_exact),
                num(r.i_one_term),
                num(r.i_two_term),
                num(r.ell),
            ])
        })
        .collect::<CliResult<_>>()?;
    Ok(vec![Table {
        name: "zeno".into(),
        header: &[
            "path_family",
            "K",
            "I_exact",
            "I_one_term",
            "I_two_term",
            "ell",
        ],
        rows,
    }])
}

pub fn compare(cfg: &ExperimentConfig) -> CliResult<Vec<Table>> {
    if cfg.compare_times.is_empty() {
        return Err(CliError::Config("compare.T is empty".into()));
    }
    let model = LipkinModel::new(cfg.n_qubits)?;
    let trajs = trajectories(&model, cfg)?;
    let jobs: Vec<_> = trajs
        .iter()
        .flat_map(|(f, t)| cfg.compare_times.iter().map(move |&time| (*f, t, time)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(f, t, time)| {
            let r = minimal_k(&model, t, time, &cfg.integrator, cfg.k_cap)?;
            let (k, tau) = match (r.steps, r.tau()) {
                (Some(k), Some(tau)) => (k.to_string(), num(tau)),
                _ => (String::new(), String::new()),
            };
            Ok(vec![
                f.to_string(),
                num(time),
                num(r.i_coherent),
                k,
                tau,
                r.steps.is_none().to_string(),
            ])
        })
        .collect::<CliResult<_>>()?;
    Ok(vec![Table {
        name: "compare".into(),
        header: &[
            "path_family",
            "T",
            "I_coherent",
            "K_min",
            "tau_min",
            "cap_exceeded",
        ],
        rows,
    }])
}

pub fn gadget(cfg: &ExperimentConfig) -> CliResult<Vec<Table>> {
    let rows = cfg
        .gadget_times
        .iter()
        .map(|&t| {
            let r = reduced_coherence(&evolve_gadget(
                cfg.gadget_a0,
                cfg.gadget_a1,
                cfg.gadget_tau,
                t,
            )?);
            Ok(vec![
                num(t),
                num(r.coherence_abs()),
                num(r.p0()),
                num(r.p1()),
            ])
        })
        .collect::<CliResult<_>>()?;
    Ok(vec![Table {
        name: "gadget".into(),
        header: &["t_prime", "coherence_abs", "p0", "p1"],
        rows,
    }])
}
