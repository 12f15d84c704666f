//! Task drivers: each writes one result file plus a manifest, all
//! deterministic for a fixed config.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use qplab_core::acceleration::{acceleration_estimate, compute_profile_at};
use qplab_core::arithmetic::parse_decimal;
use qplab_core::arithmetic::{rational_to_f64, ContinuedFraction};
use qplab_core::cocycle::lyapunov_finite_detailed;
use qplab_core::deviation::{deviation_set, fourier_diagnostics};
use qplab_core::localization::{
    best_center_pair, decay_audit, eigen_solve_box, SchrodingerBox,
};
use qplab_core::model::{derive_constants, derive_constants_working, Potential};
use qplab_core::verify;
use qplab_core::zeros::rational_zero_structure;

use crate::config::{ConfigError, HarvestPick, RunConfig};

pub struct TaskIo {
    pub out_dir: PathBuf,
    pub config_sha256: String,
    pub jobs: usize,
}

impl TaskIo {
    fn provenance(&self) -> serde_json::Value {
        json!({
            "config_sha256": self.config_sha256,
            "toolkit_version": env!("CARGO_PKG_VERSION"),
        })
    }

    fn write_json<T: Serialize>(&self, name: &str, payload: &T) -> Result<PathBuf, ConfigError> {
        let path = self.out_dir.join(name);
        let value = json!({
            "provenance": self.provenance(),
            "result": payload,
        });
        let text = serde_json::to_string_pretty(&value)
            .map_err(|e| ConfigError(format!("serialize {name}: {e}")))?;
        std::fs::write(&path, text.as_bytes())
            .map_err(|e| ConfigError(format!("write {name}: {e}")))?;
        Ok(path)
    }

    fn csv_writer(&self, name: &str) -> Result<(PathBuf, csv::Writer<std::fs::File>), ConfigError> {
        let path = self.out_dir.join(name);
        let mut file = std::fs::File::create(&path)
            .map_err(|e| ConfigError(format!("create {name}: {e}")))?;
        writeln!(
            file,
            "# config_sha256={} toolkit_version={}",
            self.config_sha256,
            env!("CARGO_PKG_VERSION")
        )
        .map_err(|e| ConfigError(format!("write {name}: {e}")))?;
        Ok((path, csv::Writer::from_writer(file)))
    }

    fn manifest(&self, command: &str, outputs: &[&Path]) -> Result<(), ConfigError> {
        let value = json!({
            "config_sha256": self.config_sha256,
            "toolkit_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "outputs": outputs.iter().map(|p| p.file_name().unwrap().to_string_lossy()).collect::<Vec<_>>(),
            "metadata": {
                "generated_at": std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            },
        });
        std::fs::write(
            self.out_dir.join("manifest.json"),
            serde_json::to_string_pretty(&value).expect("manifest serializes"),
        )
        .map_err(|e| ConfigError(format!("write manifest: {e}")))
    }
}

fn energies(cfg: &RunConfig, cf: &ContinuedFraction, v: &Potential<f64>) -> Result<Vec<f64>, ConfigError> {
    let spec = cfg
        .energy
        .as_ref()
        .ok_or_else(|| ConfigError("this task needs an [energy] section".into()))?;
    match (&spec.values, &spec.grid, &spec.harvest) {
        (Some(vals), None, None) => Ok(vals.clone()),
        (None, Some(g), None) => {
            if g.count < 2 {
                return Err(ConfigError("energy grid needs count >= 2".into()));
            }
            Ok((0..g.count)
                .map(|i| g.lo + (g.hi - g.lo) * i as f64 / (g.count - 1) as f64)
                .collect())
        }
        (None, None, Some(h)) => {
            let theta = theta_of(cfg)?;
            let bx = SchrodingerBox::new(v.clone(), cf.omega_f64(), theta, h.box_half_width)
                .map_err(|e| ConfigError(e.to_string()))?;
            let pairs = eigen_solve_box(&bx, (h.window[0], h.window[1]))
                .map_err(|e| ConfigError(e.to_string()))?;
            let e = match h.pick {
                HarvestPick::MidSpectrum => pairs
                    .iter()
                    .map(|p| p.energy)
                    .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()),
                HarvestPick::CenterWeight => best_center_pair(&pairs).map(|p| p.energy),
            };
            e.map(|e| vec![e])
                .ok_or_else(|| ConfigError("harvest window contained no eigenvalue".into()))
        }
        _ => Err(ConfigError(
            "energy needs exactly one of `values`, `grid`, `harvest`".into(),
        )),
    }
}

fn theta_of(cfg: &RunConfig) -> Result<f64, ConfigError> {
    match &cfg.params.theta {
        Some(s) => Ok(rational_to_f64(
            &parse_decimal(s).map_err(|e| ConfigError(e.to_string()))?,
        )),
        None => Ok(0.1),
    }
}

/// Run independent energy jobs on up to `jobs` threads, preserving input
/// order in the output.
fn map_energies<T: Send>(
    energies: &[f64],
    jobs: usize,
    f: impl Fn(f64) -> T + Sync,
) -> Vec<T> {
    if jobs <= 1 || energies.len() <= 1 {
        return energies.iter().map(|&e| f(e)).collect();
    }
    let mut results: Vec<Option<T>> = (0..energies.len()).map(|_| None).collect();
    let chunk = energies.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        for (c, slot) in energies.chunks(chunk).zip(results.chunks_mut(chunk)) {
            scope.spawn(|| {
                for (e, s) in c.iter().zip(slot.iter_mut()) {
                    *s = Some(f(*e));
                }
            });
        }
    });
    results.into_iter().map(|r| r.expect("job ran")).collect()
}

pub fn run_cf(cfg: &RunConfig, io: &TaskIo, precision: usize) -> Result<(), ConfigError> {
    let cf = cfg.frequency_cf(precision)?;
    let (path, mut w) = io.csv_writer("cf.csv")?;
    w.write_record(["k", "a_k", "p_k", "q_k", "beta_k", "norm_qk_omega"])
        .map_err(|e| ConfigError(e.to_string()))?;
    for k in 0..=cf.depth() {
        let (p, q) = cf.convergent(k).map_err(|e| ConfigError(e.to_string()))?;
        let a = if k == 0 {
            "".to_string()
        } else {
            cf.quotient(k).map_err(|e| ConfigError(e.to_string()))?.to_string()
        };
        let beta = if k >= 1 && k - 1 < cf.beta_seq().len() {
            format!("{}", cf.beta_seq()[k - 1])
        } else {
            "".to_string()
        };
        let norm = if k < cf.depth() {
            format!("{}", cf.norm_q_omega_f64(k).map_err(|e| ConfigError(e.to_string()))?)
        } else {
            "".to_string()
        };
        w.write_record([
            k.to_string(),
            a,
            p.to_string(),
            q.to_string(),
            beta,
            norm,
        ])
        .map_err(|e| ConfigError(e.to_string()))?;
    }
    w.flush().map_err(|e| ConfigError(e.to_string()))?;
    drop(w);

    let summary = json!({
        "omega": format!("{}", cf.omega_f64()),
        "depth": cf.depth(),
        "beta_proxy": cf.beta_proxy(),
        "beta_running_max": cf.beta_running_max(),
        "source": cf.source(),
    });
    let sp = io.write_json("cf_summary.json", &summary)?;
    io.manifest("cf", &[&path, &sp])
}

pub fn run_lyapunov(cfg: &RunConfig, io: &TaskIo, precision: usize) -> Result<(), ConfigError> {
    let cf = cfg.frequency_cf(precision)?;
    let v = cfg.potential()?;
    let es = energies(cfg, &cf, &v)?;
    let n = cfg.params.n.unwrap_or(1000);
    let grid = cfg.params.grid.unwrap_or(64);
    let eps = cfg.params.eps.unwrap_or(0.0);
    let omega = cf.omega_f64();
    let rows = map_energies(&es, io.jobs, |e| {
        lyapunov_finite_detailed(e, &v, omega, eps, n, grid)
            .map(|(l, err)| (e, l, err))
            .map_err(|er| er.to_string())
    });
    let (path, mut w) = io.csv_writer("lyapunov.csv")?;
    w.write_record(["energy", "lyapunov", "quadrature_err"])
        .map_err(|e| ConfigError(e.to_string()))?;
    for row in rows {
        let (e, l, err) = row.map_err(ConfigError)?;
        w.write_record([format!("{e}"), format!("{l}"), format!("{err}")])
            .map_err(|e| ConfigError(e.to_string()))?;
    }
    w.flush().map_err(|e| ConfigError(e.to_string()))?;
    drop(w);
    io.manifest("lyapunov", &[&path])
}

pub fn run_acceleration(cfg: &RunConfig, io: &TaskIo, precision: usize) -> Result<(), ConfigError> {
    let cf = cfg.frequency_cf(precision)?;
    let v = cfg.potential()?;
    let es = energies(cfg, &cf, &v)?;
    let n = cfg.params.n.unwrap_or(10_000);
    let grid = cfg.params.grid.unwrap_or(64);
    let window = cfg.params.eps_window.unwrap_or([0.01, 0.03]);
    let points = cfg.params.eps_points.unwrap_or(5);
    let omega = cf.omega_f64();
    let eps_values: Vec<f64> = (0..points)
        .map(|i| window[0] + (window[1] - window[0]) * i as f64 / (points - 1) as f64)
        .collect();
    let rows = map_energies(&es, io.jobs, |e| {
        compute_profile_at(e, &v, omega, &eps_values, n, grid)
            .and_then(|p| {
                let est = acceleration_estimate(&p, (window[0], window[1]))?;
                Ok(json!({
                    "energy": e,
                    "kappa_raw": est.kappa_raw,
                    "kappa_int": est.kappa_int,
                    "residual": est.residual,
                    "profile_eps": p.eps_grid,
                    "profile_values": p.values,
                }))
            })
            .map_err(|er| er.to_string())
    });
    let mut out = Vec::new();
    for r in rows {
        out.push(r.map_err(ConfigError)?);
    }
    let path = io.write_json("acceleration.json", &out)?;
    io.manifest("acceleration", &[&path])
}

pub fn run_zeros(cfg: &RunConfig, io: &TaskIo, precision: usize) -> Result<(), ConfigError> {
    let cf = cfg.frequency_cf(precision)?;
    let v = cfg.potential()?;
    let es = energies(cfg, &cf, &v)?;
    let scale = cfg
        .params
        .scale
        .ok_or_else(|| ConfigError("zeros task needs params.scale (convergent index)".into()))?;
    let eps = cfg.params.eps.unwrap_or(0.025);
    let e = es[0];
    let s = rational_zero_structure(e, &v, &cf, scale, eps)
        .map_err(|er| ConfigError(er.to_string()))?;
    let payload = json!({
        "energy": e,
        "structure": s,
        "count_over_2q": s.count as f64 / (2.0 * s.q as f64),
    });
    let path = io.write_json("zeros.json", &payload)?;
    io.manifest("zeros", &[&path])
}

pub fn run_deviation(cfg: &RunConfig, io: &TaskIo, precision: usize) -> Result<(), ConfigError> {
    let cf = cfg.frequency_cf(precision)?;
    let v = cfg.potential()?;
    let es = energies(cfg, &cf, &v)?;
    let m = cfg.params.m.unwrap_or(100);
    let delta = cfg
        .params
        .delta
        .ok_or_else(|| ConfigError("deviation task needs params.delta".into()))?;
    let base_grid = cfg.params.base_grid.unwrap_or(1 << 14);
    let omega = cf.omega_f64();
    let e = es[0];
    let ds = deviation_set(e, &v, omega, m, delta, base_grid)
        .map_err(|er| ConfigError(er.to_string()))?;

    let (ppath, mut w) = io.csv_writer("deviation_profile.csv")?;
    w.write_record(["theta", "v_m"])
        .map_err(|e| ConfigError(e.to_string()))?;
    let profile_grid = 4096usize;
    for i in 0..profile_grid {
        let th = i as f64 / profile_grid as f64;
        let vm = qplab_core::cocycle::v_m_hs(e, &v, omega, th, m)
            .map_err(|er| ConfigError(er.to_string()))?;
        w.write_record([format!("{th}"), format!("{vm}")])
            .map_err(|e| ConfigError(e.to_string()))?;
    }
    w.flush().map_err(|e| ConfigError(e.to_string()))?;
    drop(w);

    let payload = json!({ "energy": e, "set": ds });
    let jpath = io.write_json("deviation.json", &payload)?;
    io.manifest("deviation", &[&jpath, &ppath])
}

pub fn run_localize(cfg: &RunConfig, io: &TaskIo, precision: usize) -> Result<(), ConfigError> {
    let cf = cfg.frequency_cf(precision)?;
    let v = cfg.potential()?;
    let theta = theta_of(cfg)?;
    let n_half = cfg.params.box_half_width.unwrap_or(1000);
    let window = cfg.params.energy_window.unwrap_or([-1.0, 1.0]);
    let bx = SchrodingerBox::new(v.clone(), cf.omega_f64(), theta, n_half)
        .map_err(|e| ConfigError(e.to_string()))?;
    let pairs =
        eigen_solve_box(&bx, (window[0], window[1])).map_err(|e| ConfigError(e.to_string()))?;
    let pair = best_center_pair(&pairs)
        .ok_or_else(|| ConfigError("energy window contained no eigenvalue".into()))?;
    let n = cfg.params.n.unwrap_or(10_000);
    let grid = cfg.params.grid.unwrap_or(64);
    let (l, _) = lyapunov_finite_detailed(pair.energy, &v, cf.omega_f64(), 0.0, n, grid)
        .map_err(|e| ConfigError(e.to_string()))?;
    let delta1 = cfg.params.delta1_working.unwrap_or(1.0);
    let constants = derive_constants_working(&v, delta1, l, cf.beta_proxy(), 2.5)
        .map_err(|e| ConfigError(e.to_string()))?;
    let range = cfg.params.site_range.unwrap_or([50, 400]);
    let audit = decay_audit(pair, &cf, &constants, (range[0], range[1]))
        .map_err(|e| ConfigError(e.to_string()))?;

    let (cpath, mut w) = io.csv_writer("localize.csv")?;
    w.write_record(["y", "phi_y", "bound_y"])
        .map_err(|e| ConfigError(e.to_string()))?;
    for y in -(n_half as i64)..=(n_half as i64) {
        let phi = SchrodingerBox::phi_at(pair, y);
        let bound = (-l * y.abs() as f64 / 40.0).exp();
        w.write_record([format!("{y}"), format!("{phi}"), format!("{bound}")])
            .map_err(|e| ConfigError(e.to_string()))?;
    }
    w.flush().map_err(|e| ConfigError(e.to_string()))?;
    drop(w);

    let payload = json!({
        "energy": pair.energy,
        "center_weight": pair.center_weight,
        "boundary_weight": pair.boundary_weight,
        "residual": pair.residual,
        "lyapunov": l,
        "audit": audit,
    });
    let jpath = io.write_json("localize.json", &payload)?;
    io.manifest("localize", &[&cpath, &jpath])
}

pub fn run_constants(cfg: &RunConfig, io: &TaskIo, precision: usize) -> Result<(), ConfigError> {
    let cf = cfg.frequency_cf(precision)?;
    let v = cfg.potential()?;
    let es = energies(cfg, &cf, &v)?;
    let e = es[0];
    let m = cfg.params.m.unwrap_or(64);
    let k_max = cfg.params.k_max.unwrap_or(256);
    let n = cfg.params.n.unwrap_or(10_000);
    let grid = cfg.params.grid.unwrap_or(64);
    let omega = cf.omega_f64();
    let diag =
        fourier_diagnostics(e, &v, omega, m, k_max).map_err(|er| ConfigError(er.to_string()))?;
    let (l, _) = lyapunov_finite_detailed(e, &v, omega, 0.0, n, grid)
        .map_err(|er| ConfigError(er.to_string()))?;
    let beta = cf.beta_proxy();
    let paper = derive_constants(&v, l, beta, diag.c_v).map_err(|er| ConfigError(er.to_string()))?;
    let working = cfg
        .params
        .delta1_working
        .map(|d1| derive_constants_working(&v, d1, l, beta, diag.c_v))
        .transpose()
        .map_err(|er| ConfigError(er.to_string()))?;
    let payload = json!({
        "energy": e,
        "lyapunov": l,
        "beta_proxy": beta,
        "fourier": diag,
        "paper_constants": paper,
        "working_constants": working,
    });
    let path = io.write_json("constants.json", &payload)?;
    io.manifest("constants", &[&path])
}

pub fn run_verify(io: &TaskIo) -> Result<bool, ConfigError> {
    let report = verify::run_all().map_err(|e| ConfigError(e.to_string()))?;
    for c in &report.criteria {
        println!(
            "criterion {:02} {}: {} — {} [{:?}]",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.details,
            c.runtime
        );
    }
    let path = io.out_dir.join("verify_report.json");
    std::fs::write(&path, report.to_json())
        .map_err(|e| ConfigError(format!("write verify report: {e}")))?;
    io.manifest("verify", &[&path])?;
    Ok(report.all_pass())
}
