//! Verb execution: resolve a parsed scenario into core types, run the
//! requested computation, attach the built-in identity checks, and emit the
//! CSV table and JSON report.
//!
//! Every identity check compares a measured deviation against a pinned base
//! tolerance times `--tol-scale`; the effective values are recorded in the
//! report so a reader can re-derive every pass/fail verdict.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use floydlab_core::{
    basis_free, collect_sweep, cycle_stats, cycle_stats_closed, energy_family, geometric_grid,
    indeterminacy_envelope, microstate_from_initial_values, sample, solve_symmetric_levels,
    specfun::Quadrature, sweep_point, timing_report, trajectory_time, validate_sweep_grid,
    BasisPair, CycleStats, Microstate, PhysicalContext, Potential, SweepAxis, SweepScenario,
    WellLevel, WellSpectrum,
};
use floydlab_core::basis::{basis_linear, basis_square_well};

use crate::config::{parse_scenario, EnergySpec, MicrostateSpec, OutputKind, Scenario, SweepSpec};
use crate::report::{
    content_hash, format_float, optional_cell, to_json_bytes, Check, CsvTable, EnvelopeBlock,
    LevelBlock, LevelRow, Meta, MicrostateRow, Report, ReportData, StatsBlock, SweepRow,
    SweepSummary, TrajectoryRow,
};

/// Maximum relative QSHJE residual for trigonometric bases (free motion and
/// the square well), normalized by max(E, |V - E|).
const RESIDUAL_TRIG: f64 = 1e-8;
/// As above for the Airy basis of the linear ramp.
const RESIDUAL_AIRY: f64 = 1e-6;
/// Maximum relative drift of the basis Wronskian from its target.
const WRONSKIAN_DRIFT: f64 = 1e-10;
/// Maximum relative deviation of quadrature cycle statistics from the
/// closed forms.
const CYCLE_CLOSED: f64 = 1e-8;
/// Maximum relative deviation of the cycle-averaged momentum from
/// (2 m E)^(1/2).
const CYCLE_MEAN: f64 = 1e-10;
/// Maximum deviation of (dwell_right + dwell_left)/libration times
/// (kappa q + 1) from one.
const RATIO_IDENTITY: f64 = 1e-12;
/// Maximum relative detuning of a solved level from the even-level
/// condition.
const LEVEL_RESIDUAL: f64 = 1e-10;
/// Maximum |mean momentum ratio - 1| across a sweep, and maximum spread of
/// the dimensionless variance ratio.
const SWEEP_MOMENTUM: f64 = 1e-8;

/// Relative window within which an explicit `context.energy` is accepted as
/// a bound level of the well (and snapped onto the solved root).
const LEVEL_SNAP_REL: f64 = 1e-8;

/// Number of random microstates drawn for the identity suite, in addition
/// to the scenario's own.
const IDENTITY_DRAWS: usize = 32;

/// Which subcommand is running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Run,
    Check,
    Sweep,
    Levels,
}

impl Verb {
    fn label(self) -> &'static str {
        match self {
            Verb::Run => "run",
            Verb::Check => "check",
            Verb::Sweep => "sweep",
            Verb::Levels => "levels",
        }
    }

    /// Suffix inserted before the file extension so different verbs on the
    /// same scenario never collide.
    fn file_tag(self) -> &'static str {
        match self {
            Verb::Run => "",
            Verb::Check => ".check",
            Verb::Sweep => ".sweep",
            Verb::Levels => ".levels",
        }
    }
}

/// Which of the two output files to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatChoice {
    Csv,
    Json,
    Both,
}

impl FormatChoice {
    fn wants_csv(self) -> bool {
        matches!(self, FormatChoice::Csv | FormatChoice::Both)
    }

    fn wants_json(self) -> bool {
        matches!(self, FormatChoice::Json | FormatChoice::Both)
    }
}

/// One fully specified CLI invocation.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub verb: Verb,
    pub config: PathBuf,
    pub out_dir: PathBuf,
    pub format: FormatChoice,
    pub tol_scale: f64,
    pub threads: Option<usize>,
    pub seed: u64,
}

/// Scenario resolved into core types: physical context (with the well level
/// snapped on shell when applicable), the microstate, and the spectrum.
struct Resolved {
    ctx: PhysicalContext,
    ms: Microstate,
    level: Option<WellLevel>,
    spectrum: Option<WellSpectrum>,
}

/// Tracks which tolerances a run actually used, already scaled.
struct Tolerances {
    scale: f64,
    used: BTreeMap<String, f64>,
}

impl Tolerances {
    fn new(scale: f64) -> Self {
        Tolerances { scale, used: BTreeMap::new() }
    }

    fn check(&mut self, name: &'static str, measured: f64, base: f64) -> Check {
        let tolerance = base * self.scale;
        self.used.insert(name.to_string(), tolerance);
        Check::new(name, measured, tolerance)
    }
}

/// Execute one invocation end to end. `Ok(true)` means every built-in
/// identity check passed; errors are configuration or evaluation failures.
pub fn execute(inv: &Invocation) -> Result<bool> {
    if !(inv.tol_scale > 0.0) || !inv.tol_scale.is_finite() {
        bail!("--tol-scale must be positive and finite, got {}", inv.tol_scale);
    }
    let bytes = fs::read(&inv.config)
        .with_context(|| format!("reading scenario `{}`", inv.config.display()))?;
    let name = file_name(&inv.config);
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| anyhow!("{name}: scenario file is not valid UTF-8"))?;
    let scenario = parse_scenario(&text, &name)?;
    let resolved = resolve(&scenario, &name)?;

    let mut tols = Tolerances::new(inv.tol_scale);
    let (data, checks, table) = match inv.verb {
        Verb::Run => {
            let kind = scenario.output.ok_or_else(|| {
                anyhow!("{name}: `run` needs `output.kind` (trajectory, cycle_stats, timing or sweep)")
            })?;
            match kind {
                OutputKind::Trajectory => trajectory_task(&scenario, &resolved, &mut tols)?,
                OutputKind::CycleStats => cycle_stats_task(&resolved, &mut tols)?,
                OutputKind::Timing => timing_task(&name, &resolved, &mut tols)?,
                OutputKind::Sweep => sweep_task(&name, &scenario, &resolved, &mut tols, inv)?,
            }
        }
        Verb::Sweep => sweep_task(&name, &scenario, &resolved, &mut tols, inv)?,
        Verb::Levels => levels_task(&name, &resolved, &mut tols)?,
        Verb::Check => check_task(&scenario, &resolved, &mut tols, inv)?,
    };

    let report = Report {
        meta: Meta {
            tool: "floydlab",
            version: env!("CARGO_PKG_VERSION"),
            verb: inv.verb.label(),
            scenario: name,
            scenario_hash: content_hash(&bytes),
            seed: inv.seed,
            rng: "chacha12",
            tol_scale: inv.tol_scale,
            threads: inv.threads,
            tolerances: tols.used,
        },
        data,
        checks,
    };

    emit(inv, &report, &table)?;
    for check in &report.checks {
        println!(
            "check {}: {} (measured {:.3e}, tolerance {:.3e})",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.measured,
            check.tolerance,
        );
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!("{}: {} of {} checks passed", inv.verb.label(), passed, report.checks.len());
    Ok(report.all_passed())
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| {
        path.display().to_string()
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| {
        "scenario".to_string()
    })
}

/// The config-vocabulary keyword for a potential.
fn kind_keyword(potential: &Potential) -> &'static str {
    match potential {
        Potential::Free => "free",
        Potential::SquareWell { .. } => "square_well",
        Potential::Linear { .. } => "linear",
    }
}

fn build_basis(ctx: &PhysicalContext, ms: &Microstate, potential: &Potential) -> Result<BasisPair> {
    let pair = match *potential {
        Potential::Free => basis_free(ctx, ms),
        Potential::SquareWell { height, half_width } => {
            basis_square_well(ctx, ms, height, half_width)
        }
        Potential::Linear { force } => basis_linear(ctx, ms, force),
    }?;
    Ok(pair)
}

/// Turn the parsed scenario into core types. Square-well energies always
/// come from the solved spectrum: a `context.level` index selects directly,
/// an explicit `context.energy` must sit within a relative 1e-8 of an even
/// level and is snapped onto the solved root.
fn resolve(scenario: &Scenario, name: &str) -> Result<Resolved> {
    let (ctx, level, spectrum) = match scenario.potential {
        Potential::SquareWell { height, half_width } => {
            let probe = PhysicalContext::new(scenario.mass, scenario.hbar, 0.5 * height)?;
            let spectrum = solve_symmetric_levels(&probe, height, half_width)?;
            let count = spectrum.levels.len();
            let level = match scenario.energy {
                EnergySpec::Level(i) => *spectrum.levels.get(i).ok_or_else(|| {
                    anyhow!(
                        "{name}: context.level = {i} is out of range; this well has {count} even \
                         level(s) (0..={})",
                        count - 1
                    )
                })?,
                EnergySpec::Value(e) => {
                    let nearest = spectrum
                        .levels
                        .iter()
                        .min_by(|p, q| (p.energy - e).abs().total_cmp(&(q.energy - e).abs()))
                        .copied()
                        .expect("spectrum is never empty");
                    if (nearest.energy - e).abs() > LEVEL_SNAP_REL * e {
                        bail!(
                            "{name}: context.energy = {e} is not an even bound level of this well; \
                             nearest is level {} at E = {} (use context.level = {})",
                            nearest.index,
                            nearest.energy,
                            nearest.index
                        );
                    }
                    nearest
                }
            };
            (
                PhysicalContext::new(scenario.mass, scenario.hbar, level.energy)?,
                Some(level),
                Some(spectrum),
            )
        }
        _ => match scenario.energy {
            EnergySpec::Value(e) => {
                (PhysicalContext::new(scenario.mass, scenario.hbar, e)?, None, None)
            }
            EnergySpec::Level(_) => unreachable!("config validation ties level to square_well"),
        },
    };
    let ms = match scenario.microstate {
        MicrostateSpec::Fixed(ms) => ms,
        MicrostateSpec::Initial(iv) => {
            let probe = build_basis(&ctx, &Microstate::classical(), &scenario.potential)?;
            microstate_from_initial_values(&iv, &probe)
                .with_context(|| format!("{name}: converting initial values to a microstate"))?
        }
    };
    Ok(Resolved { ctx, ms, level, spectrum })
}

/// Normalization for QSHJE residuals: max(E, |V(x) - E|).
fn residual_scale(potential: &Potential, energy: f64, x: f64) -> f64 {
    energy.abs().max((potential.value(x) - energy).abs())
}

fn residual_base(potential: &Potential) -> f64 {
    match potential {
        Potential::Linear { .. } => RESIDUAL_AIRY,
        _ => RESIDUAL_TRIG,
    }
}

fn stats_block(stats: &CycleStats) -> StatsBlock {
    StatsBlock {
        mean_wx: stats.mean_wx,
        mean_wx2: stats.mean_wx2,
        variance: stats.variance,
        mean_quantum_potential: stats.mean_quantum_potential,
    }
}

fn level_block(level: &WellLevel) -> LevelBlock {
    LevelBlock { index: level.index, energy: level.energy, k: level.k, kappa: level.kappa }
}

/// Relative detuning of a level from the even-level condition
/// k sin(kq) = kappa cos(kq), normalized by the hypotenuse of the two terms.
fn level_detuning(level: &WellLevel) -> f64 {
    let kq = level.k * level.half_width;
    let lhs = level.k * kq.sin();
    let rhs = level.kappa * kq.cos();
    (lhs - rhs).abs() / lhs.hypot(rhs)
}

/// Trajectory table: sample the action field on the grid and difference the
/// action in energy for t - t0, anchored at the left grid edge.
fn trajectory_task(
    scenario: &Scenario,
    r: &Resolved,
    tols: &mut Tolerances,
) -> Result<(ReportData, Vec<Check>, CsvTable)> {
    let grid = scenario.grid.expect("config validation requires a grid for trajectories");
    let xs = grid.points();
    let anchor = grid.min;
    let basis = build_basis(&r.ctx, &r.ms, &scenario.potential)?;
    let points = sample(&basis, anchor, &xs)?;
    let family = energy_family(&r.ctx, &r.ms, &scenario.potential);
    let target = basis.wronskian_target();

    let mut rows = Vec::with_capacity(points.len());
    let mut residual_max: f64 = 0.0;
    let mut drift_max: f64 = 0.0;
    for point in &points {
        let t = trajectory_time(&family, r.ctx.energy, point.x, anchor)?;
        let scale = residual_scale(&scenario.potential, r.ctx.energy, point.x);
        residual_max = residual_max.max(point.residual.abs() / scale);
        drift_max = drift_max.max((basis.wronskian_at(point.x)? / target - 1.0).abs());
        rows.push(TrajectoryRow {
            x: point.x,
            w: point.w,
            w_x: point.wx,
            schwarzian: point.schwarzian,
            residual: point.residual,
            t_minus_t0: t,
        });
    }

    let checks = vec![
        tols.check("qshje_residual", residual_max, residual_base(&scenario.potential)),
        tols.check("wronskian_drift", drift_max, WRONSKIAN_DRIFT),
    ];
    let table = CsvTable {
        header: vec!["x", "W", "W_x", "schwarzian", "residual", "t_minus_t0"],
        rows: rows
            .iter()
            .map(|row| {
                vec![
                    format_float(row.x),
                    format_float(row.w),
                    format_float(row.w_x),
                    format_float(row.schwarzian),
                    format_float(row.residual),
                    format_float(row.t_minus_t0),
                ]
            })
            .collect(),
    };
    let data = ReportData::Trajectory {
        potential: kind_keyword(&scenario.potential),
        anchor,
        rows,
    };
    Ok((data, checks, table))
}

/// Cycle statistics by quadrature, cross-checked against the closed forms.
fn cycle_stats_task(
    r: &Resolved,
    tols: &mut Tolerances,
) -> Result<(ReportData, Vec<Check>, CsvTable)> {
    let basis = basis_free(&r.ctx, &r.ms)?;
    let quadrature = cycle_stats(&basis, Quadrature::default())?;
    let closed = cycle_stats_closed(&r.ctx, &r.ms);
    let envelope = indeterminacy_envelope(&r.ctx, &r.ms);

    let two_me = 2.0 * r.ctx.mass * r.ctx.energy;
    let mean_dev = (quadrature.mean_wx / two_me.sqrt() - 1.0).abs();
    // Deviations are taken relative to the closed value, floored by a small
    // multiple of <Wx^2> so identically-zero classical statistics compare
    // against roundoff rather than against zero.
    let floor = 1e-6 * closed.mean_wx2;
    let closed_dev = [
        (quadrature.mean_wx2, closed.mean_wx2),
        (quadrature.variance, closed.variance),
        (quadrature.mean_quantum_potential, closed.mean_quantum_potential),
    ]
    .iter()
    .map(|(got, want)| (got - want).abs() / want.abs().max(floor))
    .fold(0.0, f64::max);

    let checks = vec![
        tols.check("cycle_mean", mean_dev, CYCLE_MEAN),
        tols.check("cycle_closed", closed_dev, CYCLE_CLOSED),
    ];
    let named: Vec<(&str, f64)> = vec![
        ("mean_wx_quadrature", quadrature.mean_wx),
        ("mean_wx_closed", closed.mean_wx),
        ("mean_wx2_quadrature", quadrature.mean_wx2),
        ("mean_wx2_closed", closed.mean_wx2),
        ("variance_quadrature", quadrature.variance),
        ("variance_closed", closed.variance),
        ("mean_quantum_potential_quadrature", quadrature.mean_quantum_potential),
        ("mean_quantum_potential_closed", closed.mean_quantum_potential),
        ("envelope_wx_min", envelope.wx_min),
        ("envelope_wx_max", envelope.wx_max),
        ("envelope_amplitude", envelope.amplitude),
    ];
    let table = CsvTable {
        header: vec!["name", "value"],
        rows: named.iter().map(|(n, v)| vec![n.to_string(), format_float(*v)]).collect(),
    };
    let data = ReportData::CycleStats {
        convention: quadrature.phase_note,
        quadrature: stats_block(&quadrature),
        closed: stats_block(&closed),
        envelope: EnvelopeBlock {
            wx_min: envelope.wx_min,
            wx_max: envelope.wx_max,
            amplitude: envelope.amplitude,
        },
    };
    Ok((data, checks, table))
}

/// Square-well timing report for the resolved level.
fn timing_task(
    name: &str,
    r: &Resolved,
    tols: &mut Tolerances,
) -> Result<(ReportData, Vec<Check>, CsvTable)> {
    let level = r
        .level
        .ok_or_else(|| anyhow!("{name}: timing output requires potential.kind = square_well"))?;
    let timing = timing_report(&r.ctx, &level, &r.ms);

    let ratio_dev = ((timing.dwell_right + timing.dwell_left) / timing.libration
        * (level.kappa * level.half_width + 1.0)
        - 1.0)
        .abs();
    let checks = vec![
        tols.check("level_residual", level_detuning(&level), LEVEL_RESIDUAL),
        tols.check("ratio_identity", ratio_dev, RATIO_IDENTITY),
    ];

    let named: Vec<(&str, String)> = vec![
        ("index", level.index.to_string()),
        ("energy", format_float(level.energy)),
        ("k", format_float(level.k)),
        ("kappa", format_float(level.kappa)),
        ("dwell_right", format_float(timing.dwell_right)),
        ("dwell_left", format_float(timing.dwell_left)),
        ("libration", format_float(timing.libration)),
        ("fraction_forbidden", format_float(timing.fraction_forbidden)),
    ];
    let table = CsvTable {
        header: vec!["name", "value"],
        rows: named.into_iter().map(|(n, v)| vec![n.to_string(), v]).collect(),
    };
    let data = ReportData::Timing {
        level: level_block(&level),
        dwell_right: timing.dwell_right,
        dwell_left: timing.dwell_left,
        libration: timing.libration,
        fraction_forbidden: timing.fraction_forbidden,
    };
    Ok((data, checks, table))
}

/// Correspondence-limit sweep, fanned out to a worker pool; grid order is
/// preserved so the output is independent of the thread count.
fn sweep_task(
    name: &str,
    scenario: &Scenario,
    r: &Resolved,
    tols: &mut Tolerances,
    inv: &Invocation,
) -> Result<(ReportData, Vec<Check>, CsvTable)> {
    let SweepSpec { axis, min, max, n } = scenario
        .sweep
        .ok_or_else(|| anyhow!("{name}: a sweep needs the sweep.* section"))?;
    let mut grid = geometric_grid(min, max, n)?;
    if axis == SweepAxis::Hbar {
        // hbar sweeps run toward the classical limit.
        grid.reverse();
    }
    validate_sweep_grid(axis, &grid)?;

    let scen = SweepScenario {
        context: r.ctx,
        microstate: r.ms,
        well: match scenario.potential {
            Potential::SquareWell { height, half_width } => Some((height, half_width)),
            _ => None,
        },
    };
    let compute = || {
        grid.par_iter()
            .map(|&value| sweep_point(axis, value, &scen, Quadrature::default()))
            .collect::<floydlab_core::Result<Vec<_>>>()
    };
    let points = match inv.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building the sweep worker pool")?
            .install(compute),
        None => compute(),
    }?;
    let result = collect_sweep(axis, points);

    let checks = vec![
        tols.check("sweep_momentum", result.diagnostics.max_momentum_deviation, SWEEP_MOMENTUM),
        tols.check(
            "sweep_variance_spread",
            result.diagnostics.variance_ratio_spread,
            SWEEP_MOMENTUM,
        ),
    ];

    let rows: Vec<SweepRow> = result
        .points
        .iter()
        .map(|p| SweepRow {
            axis_value: p.axis_value,
            mean_wx: p.stats.mean_wx,
            mean_wx2: p.stats.mean_wx2,
            variance: p.stats.variance,
            mean_quantum_potential: p.stats.mean_quantum_potential,
            momentum_ratio: p.momentum_ratio,
            variance_ratio: p.variance_ratio,
            fraction_forbidden: p.fraction_forbidden,
        })
        .collect();
    let table = CsvTable {
        header: vec![
            "axis_value",
            "mean_wx",
            "mean_wx2",
            "variance",
            "mean_quantum_potential",
            "momentum_ratio",
            "variance_ratio",
            "fraction_forbidden",
        ],
        rows: rows
            .iter()
            .map(|row| {
                vec![
                    format_float(row.axis_value),
                    format_float(row.mean_wx),
                    format_float(row.mean_wx2),
                    format_float(row.variance),
                    format_float(row.mean_quantum_potential),
                    format_float(row.momentum_ratio),
                    format_float(row.variance_ratio),
                    optional_cell(row.fraction_forbidden),
                ]
            })
            .collect(),
    };
    let data = ReportData::Sweep {
        axis: match axis {
            SweepAxis::Energy => "energy",
            SweepAxis::Hbar => "hbar",
        },
        diagnostics: SweepSummary {
            max_momentum_deviation: result.diagnostics.max_momentum_deviation,
            variance_ratio_spread: result.diagnostics.variance_ratio_spread,
            fraction_monotone_decreasing: result.diagnostics.fraction_monotone_decreasing,
        },
        points: rows,
    };
    Ok((data, checks, table))
}

/// Full even spectrum of the well, with per-level timing.
fn levels_task(
    name: &str,
    r: &Resolved,
    tols: &mut Tolerances,
) -> Result<(ReportData, Vec<Check>, CsvTable)> {
    let spectrum = r
        .spectrum
        .as_ref()
        .ok_or_else(|| anyhow!("{name}: `levels` requires potential.kind = square_well"))?;

    let mut rows = Vec::with_capacity(spectrum.levels.len());
    let mut ratio_dev: f64 = 0.0;
    let mut detuning_max: f64 = 0.0;
    for level in &spectrum.levels {
        let timing = timing_report(&r.ctx, level, &r.ms);
        detuning_max = detuning_max.max(level_detuning(level));
        ratio_dev = ratio_dev.max(
            ((timing.dwell_right + timing.dwell_left) / timing.libration
                * (level.kappa * level.half_width + 1.0)
                - 1.0)
                .abs(),
        );
        rows.push(LevelRow {
            level: level_block(level),
            dwell_right: timing.dwell_right,
            dwell_left: timing.dwell_left,
            libration: timing.libration,
            fraction_forbidden: timing.fraction_forbidden,
        });
    }

    let checks = vec![
        tols.check("level_residual", detuning_max, LEVEL_RESIDUAL),
        tols.check("ratio_identity", ratio_dev, RATIO_IDENTITY),
    ];
    let table = CsvTable {
        header: vec![
            "index",
            "energy",
            "k",
            "kappa",
            "dwell_right",
            "dwell_left",
            "libration",
            "fraction_forbidden",
        ],
        rows: rows
            .iter()
            .map(|row| {
                vec![
                    row.level.index.to_string(),
                    format_float(row.level.energy),
                    format_float(row.level.k),
                    format_float(row.level.kappa),
                    format_float(row.dwell_right),
                    format_float(row.dwell_left),
                    format_float(row.libration),
                    format_float(row.fraction_forbidden),
                ]
            })
            .collect(),
    };
    let data = ReportData::Levels {
        height: spectrum.height,
        half_width: spectrum.half_width,
        levels: rows,
    };
    Ok((data, checks, table))
}

fn random_microstate(rng: &mut ChaCha12Rng) -> Microstate {
    loop {
        let a = rng.gen_range(0.2..3.0);
        let b = rng.gen_range(0.2..3.0);
        let c = rng.gen_range(-1.5..1.5);
        if let Ok(ms) = Microstate::new(a, b, c) {
            return ms;
        }
    }
}

/// Evaluation grid for the identity suite, spanning allowed and (where the
/// potential has one) forbidden territory.
fn identity_grid(potential: &Potential, ctx: &PhysicalContext) -> Vec<f64> {
    let linspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    match *potential {
        Potential::Free => linspace(-6.0, 6.0, 41),
        Potential::SquareWell { half_width, .. } => {
            linspace(-2.0 * half_width, 2.0 * half_width, 41)
        }
        Potential::Linear { force } => {
            let alpha = (2.0 * ctx.mass * force / (ctx.hbar * ctx.hbar)).cbrt();
            let x_turn = ctx.energy / force;
            linspace(x_turn - 10.0 / alpha, x_turn + 6.0 / alpha, 41)
        }
    }
}

/// The randomized identity suite: the scenario's microstate plus seeded
/// draws, pushed through every identity the potential supports.
fn check_task(
    scenario: &Scenario,
    r: &Resolved,
    tols: &mut Tolerances,
    inv: &Invocation,
) -> Result<(ReportData, Vec<Check>, CsvTable)> {
    let mut rng = ChaCha12Rng::seed_from_u64(inv.seed);
    let mut draws = vec![r.ms];
    draws.extend((0..IDENTITY_DRAWS).map(|_| random_microstate(&mut rng)));

    let xs = identity_grid(&scenario.potential, &r.ctx);
    let mut residual_max: f64 = 0.0;
    let mut drift_max: f64 = 0.0;
    for ms in &draws {
        let basis = build_basis(&r.ctx, ms, &scenario.potential)?;
        let target = basis.wronskian_target();
        for point in sample(&basis, xs[0], &xs)? {
            let scale = residual_scale(&scenario.potential, r.ctx.energy, point.x);
            residual_max = residual_max.max(point.residual.abs() / scale);
            drift_max = drift_max.max((basis.wronskian_at(point.x)? / target - 1.0).abs());
        }
    }
    let mut checks = vec![
        tols.check("qshje_residual", residual_max, residual_base(&scenario.potential)),
        tols.check("wronskian_drift", drift_max, WRONSKIAN_DRIFT),
    ];

    match scenario.potential {
        Potential::Free => {
            let two_me = 2.0 * r.ctx.mass * r.ctx.energy;
            let mut mean_dev: f64 = 0.0;
            let mut closed_dev: f64 = 0.0;
            for ms in draws.iter().take(8) {
                let basis = basis_free(&r.ctx, ms)?;
                let quadrature = cycle_stats(&basis, Quadrature::default())?;
                let closed = cycle_stats_closed(&r.ctx, ms);
                mean_dev = mean_dev.max((quadrature.mean_wx / two_me.sqrt() - 1.0).abs());
                let floor = 1e-6 * closed.mean_wx2;
                for (got, want) in [
                    (quadrature.mean_wx2, closed.mean_wx2),
                    (quadrature.variance, closed.variance),
                    (quadrature.mean_quantum_potential, closed.mean_quantum_potential),
                ] {
                    closed_dev = closed_dev.max((got - want).abs() / want.abs().max(floor));
                }
            }
            checks.push(tols.check("cycle_mean", mean_dev, CYCLE_MEAN));
            checks.push(tols.check("cycle_closed", closed_dev, CYCLE_CLOSED));
        }
        Potential::SquareWell { .. } => {
            let spectrum = r.spectrum.as_ref().expect("square well scenarios carry a spectrum");
            let mut ratio_dev: f64 = 0.0;
            for ms in &draws {
                for level in &spectrum.levels {
                    let timing = timing_report(&r.ctx, level, ms);
                    ratio_dev = ratio_dev.max(
                        ((timing.dwell_right + timing.dwell_left) / timing.libration
                            * (level.kappa * level.half_width + 1.0)
                            - 1.0)
                            .abs(),
                    );
                }
            }
            let detuning_max = spectrum
                .levels
                .iter()
                .map(level_detuning)
                .fold(0.0, f64::max);
            checks.push(tols.check("level_residual", detuning_max, LEVEL_RESIDUAL));
            checks.push(tols.check("ratio_identity", ratio_dev, RATIO_IDENTITY));
        }
        Potential::Linear { .. } => {}
    }

    let table = CsvTable {
        header: vec!["name", "passed", "measured", "tolerance"],
        rows: checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    c.passed.to_string(),
                    format_float(c.measured),
                    format_float(c.tolerance),
                ]
            })
            .collect(),
    };
    let data = ReportData::Identity {
        draws: draws.len(),
        microstates: draws
            .iter()
            .map(|ms| MicrostateRow { a: ms.a(), b: ms.b(), c: ms.c() })
            .collect(),
    };
    Ok((data, checks, table))
}

/// Write the selected formats under the output directory and announce the
/// paths on stdout.
fn emit(inv: &Invocation, report: &Report, table: &CsvTable) -> Result<()> {
    fs::create_dir_all(&inv.out_dir)
        .with_context(|| format!("creating output directory `{}`", inv.out_dir.display()))?;
    let base = format!("{}{}", file_stem(&inv.config), inv.verb.file_tag());
    if inv.format.wants_csv() {
        let path = inv.out_dir.join(format!("{base}.csv"));
        fs::write(&path, table.to_bytes()?)
            .with_context(|| format!("writing `{}`", path.display()))?;
        println!("wrote {}", path.display());
    }
    if inv.format.wants_json() {
        let path = inv.out_dir.join(format!("{base}.report.json"));
        fs::write(&path, to_json_bytes(report)?)
            .with_context(|| format!("writing `{}`", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
