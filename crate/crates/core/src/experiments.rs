//! Cooling-strategy configuration and parallel parameter sweeps: polariton
//! line scans, 2D detuning maps, and resonant coupling maps.
//!
//! Each grid cell is a pure function of its coordinates, so sweeps evaluate
//! cells concurrently on a worker pool and aggregate in row-major order. The
//! output is bit-for-bit independent of the worker count.

use rayon::prelude::*;
use thiserror::Error;

use crate::covariance::{self, CovarianceError};
use crate::model::LinearParams;
use crate::spectra;

/// Guard band |Δ_c − ω_m| inside which line-scan cells are skipped: the
/// sideband relation Δ_a(Δ_c) diverges there.
pub const LINE_SCAN_GUARD: f64 = 1e-3;

/// Errors from sweep execution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentsError {
    /// The worker pool could not be built.
    #[error("worker pool: {0}")]
    ThreadPool(String),
}

/// Cooling strategies: which couplings participate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Bare sideband cooling, λ = μ = 0.
    RadiationPressure,
    /// Dopant dresses the cavity but does not couple to the mechanics, μ = 0.
    DressedCavity,
    /// No direct radiation pressure, g = 0.
    Dopant,
    /// All three couplings present.
    Interference,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Interference,
        Strategy::RadiationPressure,
        Strategy::DressedCavity,
        Strategy::Dopant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::RadiationPressure => "radiation-pressure",
            Strategy::DressedCavity => "dressed-cavity",
            Strategy::Dopant => "dopant",
            Strategy::Interference => "interference",
        }
    }

    pub fn from_name(name: &str) -> Option<Strategy> {
        match name {
            "radiation-pressure" | "radiation_pressure" => Some(Strategy::RadiationPressure),
            "dressed-cavity" | "dressed_cavity" => Some(Strategy::DressedCavity),
            "dopant" => Some(Strategy::Dopant),
            "interference" => Some(Strategy::Interference),
            _ => None,
        }
    }

    /// Zero the couplings this strategy excludes; the effective coupling g̃
    /// follows automatically since it is computed from the stored fields.
    pub fn configure(self, base: &LinearParams) -> LinearParams {
        match self {
            Strategy::RadiationPressure => LinearParams {
                lambda: 0.0,
                mu: 0.0,
                ..*base
            },
            Strategy::DressedCavity => LinearParams { mu: 0.0, ..*base },
            Strategy::Dopant => LinearParams { g: 0.0, ..*base },
            Strategy::Interference => *base,
        }
    }
}

/// Classification of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    /// Stable with n_f ≤ n̄.
    Cooled,
    /// Stable but n_f > n̄.
    Heated,
    /// Dynamically unstable; no occupation.
    Unstable,
    /// Inside a singularity guard band; not evaluated.
    Skipped,
    /// A numerical solver failed on this cell.
    Failed,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Cooled => "cooled",
            CellStatus::Heated => "heated",
            CellStatus::Unstable => "unstable",
            CellStatus::Skipped => "skipped",
            CellStatus::Failed => "failed",
        }
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    /// Coordinate values, in the order of [`SweepResult::coord_names`].
    pub coords: Vec<f64>,
    /// Final occupation, absent unless the cell is stable.
    pub n_f: Option<f64>,
    pub status: CellStatus,
}

/// A named grid axis with explicit sample values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn linear(name: &str, min: f64, max: f64, points: usize) -> Axis {
        let values = if points == 1 {
            vec![min]
        } else {
            (0..points)
                .map(|k| {
                    if k == points - 1 {
                        max
                    } else {
                        min + (max - min) * (k as f64) / ((points - 1) as f64)
                    }
                })
                .collect()
        };
        Axis {
            name: name.to_string(),
            values,
        }
    }

    /// Log-spaced axis; requires 0 < min ≤ max.
    pub fn log(name: &str, min: f64, max: f64, points: usize) -> Axis {
        let (lmin, lmax) = (min.ln(), max.ln());
        let values = if points == 1 {
            vec![min]
        } else {
            (0..points)
                .map(|k| {
                    if k == points - 1 {
                        max
                    } else {
                        (lmin + (lmax - lmin) * (k as f64) / ((points - 1) as f64)).exp()
                    }
                })
                .collect()
        };
        Axis {
            name: name.to_string(),
            values,
        }
    }
}

/// Plot furniture attached to a sweep: polariton branch curves and level
/// contours, as polyline chunks of (x, y) points in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub name: String,
    pub chunks: Vec<Vec<[f64; 2]>>,
}

/// Location and value of the sweep minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub min_nf: Option<f64>,
    pub min_coords: Vec<f64>,
}

/// A completed sweep: grid definition, row-major cells, and summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Grid axes, outer axis first; cell count is the product of lengths.
    pub axes: Vec<Axis>,
    /// Names of the per-cell coordinate columns (axes plus derived values).
    pub coord_names: Vec<String>,
    /// Cells in row-major order (last axis fastest).
    pub cells: Vec<SweepCell>,
    /// Base parameter record the sweep was built from.
    pub base: LinearParams,
    /// Strategy applied to the base parameters, if any.
    pub strategy: Option<Strategy>,
    pub overlays: Vec<Overlay>,
    pub summary: SweepSummary,
}

fn summarize(cells: &[SweepCell]) -> SweepSummary {
    let mut min_nf: Option<f64> = None;
    let mut min_coords = Vec::new();
    for cell in cells {
        if let Some(nf) = cell.n_f {
            if min_nf.is_none_or(|m| nf < m) {
                min_nf = Some(nf);
                min_coords = cell.coords.clone();
            }
        }
    }
    SweepSummary { min_nf, min_coords }
}

/// Evaluate one parameter point: stability gate, then the Lyapunov
/// occupation. Solver failures become a status, never a panic.
pub fn occupation_status(lin: &LinearParams) -> (Option<f64>, CellStatus) {
    let a = covariance::drift_matrix(lin);
    let n = covariance::diffusion_matrix(lin);
    match covariance::solve_lyapunov(&a, &n) {
        Ok(state) => {
            let nf = covariance::final_occupation(&state);
            let status = if nf > lin.nbar {
                CellStatus::Heated
            } else {
                CellStatus::Cooled
            };
            (Some(nf), status)
        }
        Err(CovarianceError::UnstableSystem { .. }) => (None, CellStatus::Unstable),
        Err(_) => (None, CellStatus::Failed),
    }
}

/// Evaluate `n_cells` independent cells on a pool of `workers` threads
/// (0 = one per available core). Output order and values are identical for
/// any worker count.
pub fn run_parallel<F>(
    n_cells: usize,
    workers: usize,
    eval: F,
) -> Result<Vec<SweepCell>, ExperimentsError>
where
    F: Fn(usize) -> SweepCell + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentsError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| (0..n_cells).into_par_iter().map(eval).collect()))
}

/// Scan along the polariton sideband: for each Δ_c the dopant detuning is set
/// by Δ_a = ω_m + λ²/(Δ_c − ω_m), so one polariton mode sits on the lower
/// mechanical sideband. Cells inside the [`LINE_SCAN_GUARD`] band around
/// Δ_c = ω_m are skipped.
pub fn polariton_line_scan(
    strategy: Strategy,
    base: &LinearParams,
    dc_values: &[f64],
    workers: usize,
) -> Result<SweepResult, ExperimentsError> {
    let configured = strategy.configure(base);
    let wm = configured.omega_m;
    let cells = run_parallel(dc_values.len(), workers, |idx| {
        let dc = dc_values[idx];
        if (dc - wm).abs() <= LINE_SCAN_GUARD * wm {
            return SweepCell {
                coords: vec![dc, f64::NAN],
                n_f: None,
                status: CellStatus::Skipped,
            };
        }
        let da = wm + configured.lambda * configured.lambda / (dc - wm);
        let lin = LinearParams {
            delta_c: dc,
            delta_a: da,
            ..configured
        };
        let (n_f, status) = occupation_status(&lin);
        SweepCell {
            coords: vec![dc, da],
            n_f,
            status,
        }
    })?;
    let summary = summarize(&cells);
    Ok(SweepResult {
        axes: vec![Axis {
            name: "delta_c".into(),
            values: dc_values.to_vec(),
        }],
        coord_names: vec!["delta_c".into(), "delta_a".into()],
        cells,
        base: configured,
        strategy: Some(strategy),
        overlays: Vec::new(),
        summary,
    })
}

/// Final occupation over a (Δ_c, Δ_a) grid, with the two polariton branch
/// curves and the n_f = 1 contour attached as overlays.
pub fn detuning_map(
    base: &LinearParams,
    dc_axis: &Axis,
    da_axis: &Axis,
    workers: usize,
) -> Result<SweepResult, ExperimentsError> {
    let (nc, na) = (dc_axis.values.len(), da_axis.values.len());
    let cells = run_parallel(nc * na, workers, |idx| {
        let dc = dc_axis.values[idx / na];
        let da = da_axis.values[idx % na];
        let lin = LinearParams {
            delta_c: dc,
            delta_a: da,
            ..*base
        };
        let (n_f, status) = occupation_status(&lin);
        SweepCell {
            coords: vec![dc, da],
            n_f,
            status,
        }
    })?;

    let mut overlays = branch_overlays(base, da_axis);
    let value = |i: usize, j: usize| cells[i * na + j].n_f;
    let contour = contour_segments(&dc_axis.values, &da_axis.values, &value, 1.0);
    if !contour.is_empty() {
        overlays.push(Overlay {
            name: "nf_equals_one".into(),
            chunks: contour,
        });
    }

    let summary = summarize(&cells);
    Ok(SweepResult {
        axes: vec![dc_axis.clone(), da_axis.clone()],
        coord_names: vec!["delta_c".into(), "delta_a".into()],
        cells,
        base: *base,
        strategy: None,
        overlays,
        summary,
    })
}

/// The two sideband branch curves Δ_c(Δ_a) = ω_m + λ²/(Δ_a − ω_m), sampled on
/// the Δ_a axis and split at the singularity guard band.
fn branch_overlays(base: &LinearParams, da_axis: &Axis) -> Vec<Overlay> {
    let wm = base.omega_m;
    let mut upper = Vec::new(); // Δ_a < ω_m: upper polariton on the sideband
    let mut lower = Vec::new();
    for &da in &da_axis.values {
        match spectra::optimal_cavity_detuning(da, base.lambda, wm) {
            Ok(dc) if da < wm => upper.push([dc, da]),
            Ok(dc) => lower.push([dc, da]),
            Err(_) => {}
        }
    }
    let mut overlays = Vec::new();
    if !upper.is_empty() {
        overlays.push(Overlay {
            name: "polariton_branch_upper".into(),
            chunks: vec![upper],
        });
    }
    if !lower.is_empty() {
        overlays.push(Overlay {
            name: "polariton_branch_lower".into(),
            chunks: vec![lower],
        });
    }
    overlays
}

/// Resonant-drive coupling map: Δ_c = Δ_a = 0 with μ = ratio·λ per cell,
/// swept over (λ, g). The n_f = 1 contour is attached as an overlay.
pub fn resonant_map(
    base: &LinearParams,
    mu_over_lambda: f64,
    lambda_axis: &Axis,
    g_axis: &Axis,
    workers: usize,
) -> Result<SweepResult, ExperimentsError> {
    let (nl, ng) = (lambda_axis.values.len(), g_axis.values.len());
    let cells = run_parallel(nl * ng, workers, |idx| {
        let lam = lambda_axis.values[idx / ng];
        let g = g_axis.values[idx % ng];
        let lin = LinearParams {
            g,
            lambda: lam,
            mu: mu_over_lambda * lam,
            delta_c: 0.0,
            delta_a: 0.0,
            ..*base
        };
        let (n_f, status) = occupation_status(&lin);
        SweepCell {
            coords: vec![lam, g, lin.mu],
            n_f,
            status,
        }
    })?;

    let value = |i: usize, j: usize| cells[i * ng + j].n_f;
    let contour = contour_segments(&lambda_axis.values, &g_axis.values, &value, 1.0);
    let overlays = if contour.is_empty() {
        Vec::new()
    } else {
        vec![Overlay {
            name: "nf_equals_one".into(),
            chunks: contour,
        }]
    };

    let summary = summarize(&cells);
    Ok(SweepResult {
        axes: vec![lambda_axis.clone(), g_axis.clone()],
        coord_names: vec!["lambda".into(), "g".into(), "mu".into()],
        cells,
        base: *base,
        strategy: None,
        overlays,
        summary,
    })
}

/// Marching-squares level contour of a grid function; squares with missing
/// corners are skipped. Each chunk is one line segment.
fn contour_segments<F>(xs: &[f64], ys: &[f64], value: &F, level: f64) -> Vec<Vec<[f64; 2]>>
where
    F: Fn(usize, usize) -> Option<f64>,
{
    let mut segments = Vec::new();
    if xs.len() < 2 || ys.len() < 2 {
        return segments;
    }
    for i in 0..xs.len() - 1 {
        for j in 0..ys.len() - 1 {
            let corners = [
                (value(i, j), xs[i], ys[j]),
                (value(i + 1, j), xs[i + 1], ys[j]),
                (value(i + 1, j + 1), xs[i + 1], ys[j + 1]),
                (value(i, j + 1), xs[i], ys[j + 1]),
            ];
            if corners.iter().any(|(v, _, _)| v.is_none()) {
                continue;
            }
            let vals: Vec<f64> = corners.iter().map(|(v, _, _)| v.unwrap()).collect();
            let mut crossings = Vec::new();
            for e in 0..4 {
                let (v1, x1, y1) = (vals[e], corners[e].1, corners[e].2);
                let next = (e + 1) % 4;
                let (v2, x2, y2) = (vals[next], corners[next].1, corners[next].2);
                if (v1 < level) != (v2 < level) {
                    let t = (level - v1) / (v2 - v1);
                    crossings.push([x1 + t * (x2 - x1), y1 + t * (y2 - y1)]);
                }
            }
            match crossings.len() {
                2 => segments.push(vec![crossings[0], crossings[1]]),
                4 => {
                    // Saddle: disambiguate with the cell-center value.
                    let center = vals.iter().sum::<f64>() / 4.0;
                    if (center < level) == (vals[0] < level) {
                        segments.push(vec![crossings[0], crossings[3]]);
                        segments.push(vec![crossings[1], crossings[2]]);
                    } else {
                        segments.push(vec![crossings[0], crossings[1]]);
                        segments.push(vec![crossings[2], crossings[3]]);
                    }
                }
                _ => {}
            }
        }
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn fig_params() -> LinearParams {
        LinearParams {
            g: 0.25,
            lambda: 8.0,
            mu: 0.01,
            delta_c: 0.0,
            delta_a: 0.0,
            kappa: 20.0,
            gamma: 0.8,
            gamma_m: 1e-6,
            nbar: 1e3,
            omega_m: 1.0,
        }
    }

    #[test]
    fn strategy_configuration() {
        let base = LinearParams {
            delta_a: 1.0,
            ..fig_params()
        };

        let dopant = Strategy::Dopant.configure(&base);
        assert_eq!(dopant.g, 0.0);
        let expect = -Complex64::i() * base.lambda * base.mu / Complex64::new(base.gamma, 1.0);
        assert!((dopant.g_tilde() - expect).norm() < 1e-15);

        let rp = Strategy::RadiationPressure.configure(&base);
        assert_eq!(rp.g_tilde(), Complex64::new(base.g, 0.0));

        assert_eq!(Strategy::Interference.configure(&base), base);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(Strategy::from_name(s.name()), Some(s));
        }
        assert_eq!(
            Strategy::from_name("radiation_pressure"),
            Some(Strategy::RadiationPressure)
        );
        assert_eq!(Strategy::from_name("bogus"), None);
    }

    #[test]
    fn line_scan_obeys_sideband_relation_and_guard() {
        let base = fig_params();
        let mut dc_values: Vec<f64> = (0..40).map(|k| -40.0 + 80.0 * (k as f64) / 39.0).collect();
        dc_values.push(1.0005); // inside the guard band
        let scan = polariton_line_scan(Strategy::Interference, &base, &dc_values, 2).unwrap();
        assert_eq!(scan.cells.len(), dc_values.len());
        for cell in &scan.cells {
            if cell.status == CellStatus::Skipped {
                assert!((cell.coords[0] - 1.0).abs() <= LINE_SCAN_GUARD);
                assert!(cell.n_f.is_none());
                continue;
            }
            let (dc, da) = (cell.coords[0], cell.coords[1]);
            let lhs = (1.0 - da) * (1.0 - dc);
            assert!(
                (lhs - 64.0).abs() <= 1e-10 * (64.0 + dc.abs()),
                "relation violated at dc={dc}"
            );
        }
        assert!(scan.cells.iter().any(|c| c.status == CellStatus::Skipped));
    }

    #[test]
    fn masking_statuses_are_consistent() {
        let base = fig_params();
        let dc = Axis::linear("delta_c", -40.0, 40.0, 17);
        let da = Axis::linear("delta_a", -6.0, 6.0, 9);
        let map = detuning_map(&base, &dc, &da, 2).unwrap();
        assert_eq!(map.cells.len(), 17 * 9);
        let mut seen_unstable = false;
        for cell in &map.cells {
            match cell.status {
                CellStatus::Unstable => {
                    assert!(cell.n_f.is_none());
                    seen_unstable = true;
                }
                CellStatus::Heated => assert!(cell.n_f.unwrap() > base.nbar),
                CellStatus::Cooled => assert!(cell.n_f.unwrap() <= base.nbar),
                CellStatus::Skipped | CellStatus::Failed => {
                    panic!("unexpected status in plain map")
                }
            }
        }
        assert!(seen_unstable, "expected unstable cells on this grid");
        assert!(map.summary.min_nf.unwrap() < base.nbar);
    }

    #[test]
    fn map_carries_branch_overlays() {
        let base = fig_params();
        let dc = Axis::linear("delta_c", -40.0, 40.0, 9);
        let da = Axis::linear("delta_a", -6.0, 6.0, 9);
        let map = detuning_map(&base, &dc, &da, 1).unwrap();
        let names: Vec<&str> = map.overlays.iter().map(|o| o.name.as_str()).collect();
        assert!(names.contains(&"polariton_branch_upper"));
        assert!(names.contains(&"polariton_branch_lower"));
        for overlay in map
            .overlays
            .iter()
            .filter(|o| o.name.starts_with("polariton"))
        {
            for point in overlay.chunks.iter().flatten() {
                let (dc, da) = (point[0], point[1]);
                assert_relative_eq!((1.0 - da) * (1.0 - dc), 64.0, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn sweeps_are_deterministic_across_worker_counts() {
        let base = fig_params();
        let dc = Axis::linear("delta_c", -40.0, 40.0, 13);
        let da = Axis::linear("delta_a", -6.0, 6.0, 7);
        let one = detuning_map(&base, &dc, &da, 1).unwrap();
        let eight = detuning_map(&base, &dc, &da, 8).unwrap();
        assert_eq!(one, eight);
    }

    #[test]
    fn empty_grid_gives_empty_result() {
        let base = fig_params();
        let scan = polariton_line_scan(Strategy::Interference, &base, &[], 2).unwrap();
        assert!(scan.cells.is_empty());
        assert_eq!(scan.summary.min_nf, None);
    }

    #[test]
    fn resonant_map_shape_and_coords() {
        let base = LinearParams {
            kappa: 0.7,
            gamma: 0.5,
            ..fig_params()
        };
        let lam = Axis::linear("lambda", 0.5, 2.0, 4);
        let g = Axis::log("g", 0.01, 1.0, 3);
        let map = resonant_map(&base, 0.05, &lam, &g, 2).unwrap();
        assert_eq!(map.cells.len(), 12);
        for cell in &map.cells {
            assert_relative_eq!(cell.coords[2], 0.05 * cell.coords[0], max_relative = 1e-14);
        }
    }

    #[test]
    fn resonant_zero_g_row_never_cools() {
        // Without radiation pressure the resonant cooling rate vanishes and
        // backaction only heats: n_f ≥ n̄ across the row.
        let base = LinearParams {
            kappa: 0.7,
            gamma: 0.5,
            ..fig_params()
        };
        for k in 0..20 {
            let lam = 0.1 + 19.9 * (k as f64) / 19.0;
            let lin = LinearParams {
                g: 0.0,
                lambda: lam,
                mu: 0.05 * lam,
                delta_c: 0.0,
                delta_a: 0.0,
                ..base
            };
            assert_eq!(spectra::resonant_cooling_rate(&lin).unwrap(), 0.0);
            let (nf, status) = occupation_status(&lin);
            if let Some(nf) = nf {
                assert!(
                    nf >= base.nbar * (1.0 - 1e-9),
                    "spurious cooling: {nf} at λ={lam}"
                );
                assert_eq!(status, CellStatus::Heated);
            }
        }
    }

    #[test]
    fn contour_on_linear_ramp() {
        let xs: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let ys = xs.clone();
        let value = |i: usize, _j: usize| Some(xs[i]);
        let segs = contour_segments(&xs, &ys, &value, 2.5);
        assert_eq!(segs.len(), 4);
        for seg in &segs {
            for p in seg {
                assert_relative_eq!(p[0], 2.5, max_relative = 1e-14);
            }
        }
    }
}
