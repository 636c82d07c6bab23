//! Command implementations: resolve the configuration, run the computation,
//! and write the requested output.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use hybridoptomech::covariance;
use hybridoptomech::experiments::{self, CellStatus, Strategy, SweepResult};
use hybridoptomech::model::{linearize, ValidatedParams};
use hybridoptomech::spectra;
use hybridoptomech::steadystate::{self, SteadyBranch};

use crate::config::{
    axis_from_specs, default_line_grids, default_map_grids, default_omega_grid,
    default_resonant_grids, grid_specs, ConfigError, Format, GridSpec, RunConfig,
};
use crate::output::{self, OccupationRecord, Provenance};

/// How a command finished: cleanly, or completed with failed cells (exit 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Clean,
    CellFailures,
}

/// Resolved execution context shared by all commands.
pub struct CommandCtx {
    pub config: RunConfig,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

impl CommandCtx {
    fn write_with<F>(&self, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        match &self.out {
            Some(path) => {
                let file = fs::File::create(path)
                    .with_context(|| format!("cannot create {}", path.display()))?;
                let mut w = BufWriter::new(file);
                body(&mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                body(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }

    /// Provenance with the config as resolved for this command; the output
    /// destination is stripped so re-runs reproduce the bytes anywhere.
    fn provenance(
        &self,
        command: &'static str,
        grids: Vec<GridSpec>,
        strategies: Vec<String>,
    ) -> Provenance {
        let mut config = self.config.clone();
        config.grids = grids;
        config.strategies = strategies;
        config.output = None;
        Provenance { command, config }
    }
}

fn completion_of(results: &[&SweepResult]) -> Completion {
    let failed = results
        .iter()
        .flat_map(|r| r.cells.iter())
        .any(|c| c.status == CellStatus::Failed);
    if failed {
        Completion::CellFailures
    } else {
        Completion::Clean
    }
}

/// Force-spectrum table over a frequency window.
pub fn cmd_spectrum(
    ctx: &CommandCtx,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    omega_points: Option<usize>,
) -> Result<Completion> {
    let lin = ctx.config.to_linear()?;
    let mut specs = grid_specs(&ctx.config, "omega", &default_omega_grid());
    if omega_min.is_some() || omega_max.is_some() || omega_points.is_some() {
        let base = &specs[0];
        let points = omega_points.unwrap_or(base.points);
        if points < 2 {
            bail!("--omega-points must be at least 2");
        }
        specs = vec![GridSpec::new(
            "omega",
            omega_min.unwrap_or(base.min),
            omega_max.unwrap_or(base.max),
            points,
            crate::config::Spacing::Linear,
        )];
    }
    let axis = axis_from_specs("omega", &specs)?;
    let rows: Vec<_> = axis
        .values
        .iter()
        .map(|&w| spectra::force_spectrum(&lin, w))
        .collect();
    let prov = ctx.provenance("spectrum", specs, Vec::new());
    ctx.write_with(|w| output::write_spectrum(w, &prov, &rows, lin.omega_m, ctx.format))?;
    Ok(Completion::Clean)
}

/// Pick the branch to linearize around in physical mode.
fn select_branch(
    p: &ValidatedParams,
    branches: &[SteadyBranch],
    requested: Option<usize>,
) -> Result<SteadyBranch> {
    let stability: Vec<bool> = branch_stability(p, branches);
    if let Some(idx) = requested {
        let b = branches
            .get(idx)
            .ok_or_else(|| anyhow!("--branch {idx} out of range ({} branches)", branches.len()))?;
        if b.degenerate {
            bail!("--branch {idx} is degenerate and cannot be linearized");
        }
        return Ok(*b);
    }
    let stable: Vec<&SteadyBranch> = branches
        .iter()
        .zip(&stability)
        .filter(|(b, &s)| s && !b.degenerate)
        .map(|(b, _)| b)
        .collect();
    match stable.len() {
        1 => Ok(*stable[0]),
        0 => bail!("no dynamically stable steady-state branch; pass --branch <index>"),
        n => bail!("{n} stable branches (bistable operating point); pass --branch <index>"),
    }
}

fn branch_stability(p: &ValidatedParams, branches: &[SteadyBranch]) -> Vec<bool> {
    branches
        .iter()
        .map(|b| {
            if b.degenerate {
                return false;
            }
            let lin = linearize(p, b.cbar, b.qbar);
            covariance::dynamical_stability(&covariance::drift_matrix(&lin))
                .map(|r| r.stable)
                .unwrap_or(false)
        })
        .collect()
}

/// Single-point occupation record (JSON).
pub fn cmd_occupation(ctx: &CommandCtx, branch: Option<usize>) -> Result<Completion> {
    let lin = match ctx.config.mode {
        crate::config::Mode::Linear => ctx.config.to_linear()?,
        crate::config::Mode::Physical => {
            let p = ctx
                .config
                .to_physical()?
                .validate()
                .map_err(|e| anyhow!("invalid physical parameters: {e}"))?;
            let branches = steadystate::solve_steady_state(&p)?;
            let chosen = select_branch(&p, &branches, branch)?;
            linearize(&p, chosen.cbar, chosen.qbar)
        }
    };
    let a = covariance::drift_matrix(&lin);
    let report = covariance::dynamical_stability(&a)?;
    let n_f = if report.stable {
        let n = covariance::diffusion_matrix(&lin);
        Some(covariance::final_occupation(&covariance::solve_lyapunov(
            &a, &n,
        )?))
    } else {
        None
    };
    let rec = OccupationRecord {
        n_f,
        stable: report.stable,
        eigen_real_parts: report.eigen_real_parts,
        gamma_cool: spectra::cooling_rate(&lin),
        cooperativity: lin.cooperativity(),
    };
    let prov = ctx.provenance("occupation", Vec::new(), Vec::new());
    ctx.write_with(|w| output::write_occupation(w, &prov, &rec))?;
    Ok(Completion::Clean)
}

/// Final-occupation map over (Δ_c, Δ_a).
pub fn cmd_map2d(ctx: &CommandCtx) -> Result<Completion> {
    let base = ctx.config.to_linear()?;
    let (dc_default, da_default) = default_map_grids();
    let dc_specs = grid_specs(&ctx.config, "delta_c", &dc_default);
    let da_specs = grid_specs(&ctx.config, "delta_a", &da_default);
    let dc_axis = axis_from_specs("delta_c", &dc_specs)?;
    let da_axis = axis_from_specs("delta_a", &da_specs)?;
    let result = experiments::detuning_map(&base, &dc_axis, &da_axis, ctx.workers)?;
    let grids: Vec<GridSpec> = dc_specs.into_iter().chain(da_specs).collect();
    let prov = ctx.provenance("map2d", grids, Vec::new());
    ctx.write_with(|w| output::write_sweep(w, &prov, &result, ctx.format))?;
    Ok(completion_of(&[&result]))
}

fn resolve_strategies(names: &[String]) -> Result<Vec<Strategy>> {
    if names.is_empty() || names.iter().any(|s| s == "all") {
        return Ok(Strategy::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in names {
        let s = Strategy::from_name(name).ok_or_else(|| anyhow!("unknown strategy `{name}`"))?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

/// One final-occupation curve per strategy along the sideband branch.
pub fn cmd_compare(ctx: &CommandCtx) -> Result<Completion> {
    let base = ctx.config.to_linear()?;
    let strategies = resolve_strategies(&ctx.config.strategies)?;
    let dc_specs = grid_specs(&ctx.config, "delta_c", &default_line_grids());
    let dc_axis = axis_from_specs("delta_c", &dc_specs)?;
    let curves: Vec<SweepResult> = strategies
        .iter()
        .map(|&s| experiments::polariton_line_scan(s, &base, &dc_axis.values, ctx.workers))
        .collect::<Result<_, _>>()?;
    let names = strategies.iter().map(|s| s.name().to_string()).collect();
    let prov = ctx.provenance("compare", dc_specs, names);
    ctx.write_with(|w| output::write_curves(w, &prov, &curves, ctx.format))?;
    Ok(completion_of(&curves.iter().collect::<Vec<_>>()))
}

/// Resonant-drive coupling map over (λ, g) with μ = ratio·λ.
pub fn cmd_resonant_map(ctx: &CommandCtx) -> Result<Completion> {
    let base = ctx.config.to_base()?;
    let ratio = ctx
        .config
        .params
        .mu_over_lambda
        .ok_or(ConfigError::MissingField("mu_over_lambda"))?;
    let (lam_default, g_default) = default_resonant_grids();
    let lam_specs = grid_specs(&ctx.config, "lambda", &lam_default);
    let g_specs = grid_specs(&ctx.config, "g", &g_default);
    let lam_axis = axis_from_specs("lambda", &lam_specs)?;
    let g_axis = axis_from_specs("g", &g_specs)?;
    let result = experiments::resonant_map(&base, ratio, &lam_axis, &g_axis, ctx.workers)?;
    let grids: Vec<GridSpec> = lam_specs.into_iter().chain(g_specs).collect();
    let prov = ctx.provenance("resonant-map", grids, Vec::new());
    ctx.write_with(|w| output::write_sweep(w, &prov, &result, ctx.format))?;
    Ok(completion_of(&[&result]))
}

/// Classical steady-state branch listing with per-branch stability.
pub fn cmd_steady_state(ctx: &CommandCtx) -> Result<Completion> {
    let p = ctx
        .config
        .to_physical()?
        .validate()
        .map_err(|e| anyhow!("invalid physical parameters: {e}"))?;
    let branches = steadystate::solve_steady_state(&p)?;
    let stability = branch_stability(&p, &branches);
    let rows: Vec<(SteadyBranch, bool)> = branches.into_iter().zip(stability).collect();
    let prov = ctx.provenance("steady-state", Vec::new(), Vec::new());
    ctx.write_with(|w| output::write_branches(w, &prov, &rows, ctx.format))?;
    Ok(Completion::Clean)
}
