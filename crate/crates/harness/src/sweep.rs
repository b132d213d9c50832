//! ε-sweep runner: one independent job per ε, gathered in schedule order.

use std::cell::Cell;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use meanfield_core::dynamics::{
    dyson_residual, evolve, hartree_integrate, Hamiltonian, HartreeFlow, HartreeTolerances, Picture,
};
use meanfield_core::fock::{sector_dim, FockSpace};
use meanfield_core::wigner::{meanfield_distance, reduced_density, CharEvaluator, FamilyKind, LimitMeasure};
use meanfield_core::C64;
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// One line of `results.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub family: String,
    pub eps: f64,
    pub t: f64,
    pub probe_id: String,
    pub k_or_p: String,
    pub measured: C64,
    pub limit: C64,
    pub abs_gap: f64,
    pub n_max_used: usize,
}

/// Per-ε bookkeeping written to `diagnostics.csv`.
#[derive(Clone, Debug)]
pub struct EpsDiagnostics {
    pub eps: f64,
    pub n_max_used: usize,
    pub fock_dim: usize,
    pub max_sector_dim: usize,
    pub tail_mass: f64,
    pub route_deviation: Option<f64>,
    pub hartree_mass_drift: Option<f64>,
    pub hartree_energy_drift: Option<f64>,
    pub dyson_residual: Option<f64>,
    pub runtime_ms: u128,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub diagnostics: Vec<EpsDiagnostics>,
    pub manifest: serde_json::Value,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SweepOptions {
    pub dyson: bool,
}

/// Truncation chosen for one ε before anything is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPlan {
    pub eps: f64,
    /// Level needed by the initial state alone.
    pub state_n_max: usize,
    /// Level used, including room for the Weyl displacement.
    pub n_max: usize,
    pub fock_dim: u128,
    pub max_sector_dim: u128,
    /// Rough working-set size of the assembled run.
    pub memory_bytes: u128,
}

/// Room above the state's support; the characteristic function of a state
/// truncated at its own top sector is badly wrong otherwise.
pub fn auto_headroom(state_n_max: usize) -> usize {
    4 * (state_n_max as f64).sqrt().ceil() as usize + 4
}

pub fn plan(cfg: &ExperimentConfig, eps: f64) -> TruncationPlan {
    let state_n_max = cfg.family.n_max(eps, cfg.tail_tol);
    let headroom = cfg.n_max_headroom.unwrap_or_else(|| auto_headroom(state_n_max));
    let n_max = (state_n_max + headroom).max(cfg.interaction.r());
    let fock_dim = FockSpace::predicted_dim(cfg.d, n_max);
    let max_sector_dim = sector_dim(cfg.d, n_max);
    let blocks: u128 = (0..=n_max).map(|n| sector_dim(cfg.d, n).pow(2)).sum();
    TruncationPlan {
        eps,
        state_n_max,
        n_max,
        fock_dim,
        max_sector_dim,
        // dense blocks of H, its eigenvectors and the free part, plus a few state copies
        memory_bytes: 16 * (if needs_dynamics(cfg) { 4 * blocks } else { 0 } + 8 * fock_dim),
    }
}

pub fn needs_dynamics(cfg: &ExperimentConfig) -> bool {
    cfg.times.iter().any(|&t| t > 0.0)
}

/// Smallest `ε = 1/n` whose truncation fits the sector cap.
fn feasible_min_eps(cfg: &ExperimentConfig) -> Option<f64> {
    let mut best = None;
    for n in 1..=4096u32 {
        let eps = 1.0 / n as f64;
        if plan(cfg, eps).max_sector_dim > cfg.sector_cap as u128 {
            break;
        }
        best = Some(eps);
    }
    best
}

fn check_caps(cfg: &ExperimentConfig) -> Result<()> {
    if !needs_dynamics(cfg) {
        return Ok(());
    }
    for &eps in &cfg.eps {
        let p = plan(cfg, eps);
        if p.max_sector_dim > cfg.sector_cap as u128 {
            let hint = match feasible_min_eps(cfg) {
                Some(e) => format!("smallest feasible eps is 1/{}", (1.0 / e).round()),
                None => "no eps is feasible".into(),
            };
            return Err(HarnessError::ResourceCap(format!(
                "eps = {eps}: sector dimension {} at n_max = {} exceeds the cap {}; {hint}",
                p.max_sector_dim, p.n_max, cfg.sector_cap
            )));
        }
    }
    Ok(())
}

fn family_name(kind: FamilyKind) -> &'static str {
    match kind {
        FamilyKind::Coherent => "coherent",
        FamilyKind::Hermite => "hermite",
        FamilyKind::Superposition => "superposition",
    }
}

struct EpsOutcome {
    rows: Vec<ResultRow>,
    diag: EpsDiagnostics,
}

fn run_eps(cfg: &ExperimentConfig, eps: f64, opts: SweepOptions) -> Result<EpsOutcome> {
    let start = Instant::now();
    let p = plan(cfg, eps);
    let space = FockSpace::new(cfg.d, p.n_max)?;
    let u0 = cfg.family.state_on(eps, &space)?;
    let evaluator = CharEvaluator::new(&u0)?;
    let mu0 = cfg.family.limit_measure();
    let name = family_name(cfg.family.kind());

    let dynamics = needs_dynamics(cfg);
    let hamiltonian = if dynamics {
        let h = Hamiltonian::assemble(&cfg.a, &cfg.interaction, eps, &space)?;
        h.prepare(cfg.sector_cap)?;
        Some(h)
    } else {
        None
    };
    let flow = HartreeFlow::new(&cfg.a, &cfg.interaction)?;
    let mut sorted: Vec<f64> = cfg.times.iter().copied().filter(|&t| t > 0.0).collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let tol = HartreeTolerances::default();

    let mass_drift = Cell::new(None::<f64>);
    let energy_drift = Cell::new(None::<f64>);
    let push = |mu: &LimitMeasure, t: f64| -> Result<LimitMeasure> {
        if t == 0.0 {
            return Ok(mu.clone());
        }
        Ok(mu.push_forward(&|f: &[C64]| {
            let traj = hartree_integrate(f, &sorted, cfg.dt, &flow, tol)?;
            mass_drift.set(Some(mass_drift.get().unwrap_or(0.0).max(traj.max_mass_drift())));
            energy_drift.set(Some(energy_drift.get().unwrap_or(0.0).max(traj.max_energy_drift())));
            Ok(traj.at(t).to_vec())
        })?)
    };

    let mut rows = Vec::new();
    let mut dyson_max = None::<f64>;
    for &t in &cfg.times {
        let ut = match &hamiltonian {
            Some(h) if t > 0.0 => evolve(&u0, t, h, Picture::Schrodinger)?,
            _ => u0.clone(),
        };
        let mu_t = push(&mu0, t)?;
        let row = |probe_id: String, k_or_p: String, measured: C64, limit: C64| ResultRow {
            family: name.to_string(),
            eps,
            t,
            probe_id,
            k_or_p,
            measured,
            limit,
            abs_gap: (measured - limit).norm(),
            n_max_used: p.n_max,
        };
        for (i, xi) in cfg.probes.iter().enumerate() {
            let g = evaluator.eval(&ut, xi)?;
            rows.push(row(format!("xi{i}"), String::new(), g, mu_t.char_function(xi)));
        }
        for &order in &cfg.orders {
            if reduced_density(&ut, order)?.is_zero {
                continue;
            }
            let dist = meanfield_distance(&ut, &mu_t, order)?;
            rows.push(row("rdm".into(), order.to_string(), C64::new(dist, 0.0), C64::new(0.0, 0.0)));
        }
        for &k in &cfg.moments {
            let m = ut.number_moment(k);
            rows.push(row("moment".into(), k.to_string(), C64::new(m, 0.0), C64::new(mu_t.moment(k), 0.0)));
        }
        if opts.dyson && t > 0.0 {
            if let (Some(h), Some(xi)) = (&hamiltonian, cfg.probes.first()) {
                let r = dyson_residual(&u0, xi, t, h, cfg.n_quad, false)?;
                dyson_max = Some(dyson_max.unwrap_or(0.0).max(r.residual));
            }
        }
    }
    Ok(EpsOutcome {
        rows,
        diag: EpsDiagnostics {
            eps,
            n_max_used: p.n_max,
            fock_dim: space.dim(),
            max_sector_dim: space.sector_dim(p.n_max),
            tail_mass: u0.tail_mass(),
            route_deviation: hamiltonian.as_ref().map(|h| h.route_deviation()),
            hartree_mass_drift: mass_drift.get(),
            hartree_energy_drift: energy_drift.get(),
            dyson_residual: dyson_max,
            runtime_ms: start.elapsed().as_millis(),
        },
    })
}

/// Runs every ε in parallel; rows come back in schedule order.
pub fn run_sweep(cfg: &ExperimentConfig, opts: SweepOptions) -> Result<SweepOutput> {
    check_caps(cfg)?;
    let outcomes: Vec<EpsOutcome> = cfg
        .eps
        .par_iter()
        .map(|&eps| run_eps(cfg, eps, opts))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for o in outcomes {
        rows.extend(o.rows);
        diagnostics.push(o.diag);
    }
    let manifest = manifest(cfg, &diagnostics, opts);
    Ok(SweepOutput {
        rows,
        diagnostics,
        manifest,
    })
}

fn manifest(cfg: &ExperimentConfig, diags: &[EpsDiagnostics], opts: SweepOptions) -> serde_json::Value {
    let per_eps: Vec<_> = diags
        .iter()
        .map(|d| {
            json!({
                "eps": d.eps,
                "n_max": d.n_max_used,
                "fock_dim": d.fock_dim,
                "tail_mass": d.tail_mass,
            })
        })
        .collect();
    let mut notes = vec!["runtime_ms is reported in diagnostics.csv only, so results.csv is reproducible byte for byte"];
    if cfg.family.kind() == FamilyKind::Superposition {
        notes.push("superposition states are normalized; limit targets are mass-one mixtures with weights 1/2");
    }
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "dyson": opts.dyson,
        "config": cfg.echo,
        "probes": cfg.probes.iter().map(|p| p.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "per_eps": per_eps,
        "notes": notes,
    })
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub const RESULT_COLUMNS: [&str; 11] = [
    "family",
    "eps",
    "t",
    "probe_id",
    "k_or_p",
    "measured_re",
    "measured_im",
    "limit_re",
    "limit_im",
    "abs_gap",
    "n_max_used",
];

pub fn write_results<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULT_COLUMNS)?;
    for r in rows {
        out.write_record([
            r.family.clone(),
            num(r.eps),
            num(r.t),
            r.probe_id.clone(),
            r.k_or_p.clone(),
            num(r.measured.re),
            num(r.measured.im),
            num(r.limit.re),
            num(r.limit.im),
            num(r.abs_gap),
            r.n_max_used.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_diagnostics<W: Write>(diags: &[EpsDiagnostics], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "eps",
        "n_max_used",
        "fock_dim",
        "max_sector_dim",
        "tail_mass",
        "route_deviation",
        "hartree_mass_drift",
        "hartree_energy_drift",
        "dyson_residual",
        "runtime_ms",
    ])?;
    for d in diags {
        out.write_record([
            num(d.eps),
            d.n_max_used.to_string(),
            d.fock_dim.to_string(),
            d.max_sector_dim.to_string(),
            num(d.tail_mass),
            opt(d.route_deviation),
            opt(d.hartree_mass_drift),
            opt(d.hartree_energy_drift),
            opt(d.dyson_residual),
            d.runtime_ms.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `results.csv`, `diagnostics.csv` and `manifest.json` into `dir`.
pub fn write_outputs(out: &SweepOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_results(&out.rows, std::fs::File::create(dir.join("results.csv"))?)?;
    write_diagnostics(&out.diagnostics, std::fs::File::create(dir.join("diagnostics.csv"))?)?;
    let mut f = std::fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut f, &out.manifest)?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn free_coherent_is_exact() {
        let cfg = parse_config(
            r#"{
  "d": 2, "n_list": [8, 16],
  "a": {"diagonal": [0.3, -0.2]},
  "family": {"kind": "coherent", "f": [[0.8, 0], [0.6, 0]]},
  "times": [0.0, 0.5],
  "probes": {"random": {"count": 3, "radius": 0.4}},
  "orders": [1, 2],
  "moments": [1]
}"#,
            "free.json",
        )
        .unwrap();
        let out = run_sweep(&cfg, SweepOptions::default()).unwrap();
        for r in &out.rows {
            match r.probe_id.as_str() {
                // the coherent gap is the vacuum factor, not a truncation error
                "rdm" => assert!(r.abs_gap < 1e-9, "{r:?}"),
                "moment" => assert!(r.abs_gap < 10.0 * cfg.tail_tol, "{r:?}"),
                _ => {
                    let xi = &cfg.probes[r.probe_id[2..].parse::<usize>().unwrap()];
                    let vac = (-r.eps * std::f64::consts::PI.powi(2) * meanfield_core::linalg::norm(xi).powi(2) / 2.0).exp();
                    assert!((r.measured - r.limit * vac).norm() < 10.0 * cfg.tail_tol, "{r:?}");
                }
            }
        }
        assert_eq!(out.rows.len(), 2 * 2 * (3 + 2 + 1));
    }

    #[test]
    fn t_zero_rows_match_the_initial_state() {
        let text = r#"{
  "d": 2, "n_list": [8],
  "a": {"diagonal": [0.3, -0.2]},
  "interaction": {"source": "seeded-random", "orders": [2]},
  "family": {"kind": "coherent", "f": [[0.8, 0], [0.6, 0]]},
  "times": [0.0, 0.3],
  "probes": {"random": {"count": 2, "radius": 0.4}}
}"#;
        let with_dyn = run_sweep(&parse_config(text, "a").unwrap(), SweepOptions::default()).unwrap();
        let static_only = run_sweep(
            &parse_config(&text.replace("[0.0, 0.3]", "[0.0]"), "b").unwrap(),
            SweepOptions::default(),
        )
        .unwrap();
        let at_zero: Vec<_> = with_dyn.rows.iter().filter(|r| r.t == 0.0).cloned().collect();
        assert_eq!(at_zero, static_only.rows);
    }

    #[test]
    fn cap_reports_feasible_eps() {
        let cfg = parse_config(
            r#"{"d": 3, "n_list": [64], "sector_cap": 200, "times": [0.1],
                "family": {"kind": "hermite", "f": [[1, 0], [0, 0], [0, 0]]}}"#,
            "cap.json",
        )
        .unwrap();
        let e = run_sweep(&cfg, SweepOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("smallest feasible eps"), "{e}");
    }

    #[test]
    fn csv_header_and_formatting() {
        let mut buf = Vec::new();
        let row = ResultRow {
            family: "coherent".into(),
            eps: 0.125,
            t: 0.0,
            probe_id: "xi0".into(),
            k_or_p: String::new(),
            measured: C64::new(1.0, -0.5),
            limit: C64::new(1.0, 0.0),
            abs_gap: 0.5,
            n_max_used: 20,
        };
        write_results(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RESULT_COLUMNS.join(","));
        assert!(lines.next().unwrap().starts_with("coherent,1.250000000000000e-1,0.000000000000000e0,xi0,,"));
    }
}
