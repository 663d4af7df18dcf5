//! Scenario files: flat dotted `key = value` text (with `#` comments) or an
//! equivalent flat JSON object, sniffed by the leading `{`.
//!
//! Parsing is strict: unknown or duplicate keys are rejected by name, values
//! are type-checked per key, and cross-field rules (exactly one way to give
//! the microstate, potential-specific keys, grid/sweep completeness) are
//! enforced before any numerics run. Text-format diagnostics carry line
//! numbers.

use anyhow::{anyhow, bail, Context, Result};
use floydlab_core::{InitialValues, Microstate, Potential, SweepAxis};

/// How the scenario pins the energy: an explicit value, or the index of an
/// even bound level of the square well (solved at run time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergySpec {
    Value(f64),
    Level(usize),
}

/// The microstate, either as the coefficient triple or as initial data of
/// the momentum field (converted once the basis pair exists).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MicrostateSpec {
    Fixed(Microstate),
    Initial(InitialValues),
}

/// Evaluation grid for trajectory tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridSpec {
    /// The n equally spaced points from min to max inclusive.
    pub fn points(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.min + step * i as f64).collect()
    }
}

/// Geometric sweep request; `min`/`max` bound the swept quantity and the
/// grid direction (increasing energies, decreasing hbar) is imposed later.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// What `run` should compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputKind {
    Trajectory,
    CycleStats,
    Timing,
    Sweep,
}

/// A fully parsed and cross-validated scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub potential: Potential,
    pub mass: f64,
    pub hbar: f64,
    pub energy: EnergySpec,
    pub microstate: MicrostateSpec,
    pub grid: Option<GridSpec>,
    pub sweep: Option<SweepSpec>,
    pub output: Option<OutputKind>,
}

/// One raw value before type checking.
enum Raw<'a> {
    Text(&'a str),
    Json(&'a serde_json::Value),
}

impl Raw<'_> {
    fn number(&self, key: &str, at: &str) -> Result<f64> {
        match self {
            Raw::Text(s) => s
                .parse::<f64>()
                .map_err(|_| anyhow!("{at}: value for `{key}` must be a number, got `{s}`")),
            Raw::Json(v) => v
                .as_f64()
                .ok_or_else(|| anyhow!("{at}: value for `{key}` must be a number, got {v}")),
        }
    }

    fn index(&self, key: &str, at: &str) -> Result<usize> {
        match self {
            Raw::Text(s) => s
                .parse::<usize>()
                .map_err(|_| anyhow!("{at}: value for `{key}` must be a non-negative integer, got `{s}`")),
            Raw::Json(v) => v
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| anyhow!("{at}: value for `{key}` must be a non-negative integer, got {v}")),
        }
    }

    fn keyword(&self, key: &str, at: &str) -> Result<String> {
        match self {
            Raw::Text(s) => Ok(s.to_string()),
            Raw::Json(v) => v
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| anyhow!("{at}: value for `{key}` must be a string, got {v}")),
        }
    }
}

/// Option per key; `finish` turns the completed draft into a [`Scenario`].
#[derive(Default)]
struct Draft {
    potential_kind: Option<String>,
    height: Option<f64>,
    half_width: Option<f64>,
    force: Option<f64>,
    mass: Option<f64>,
    hbar: Option<f64>,
    energy: Option<f64>,
    level: Option<usize>,
    ms_a: Option<f64>,
    ms_b: Option<f64>,
    ms_c: Option<f64>,
    x0: Option<f64>,
    wx0: Option<f64>,
    wxx0: Option<f64>,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    grid_n: Option<usize>,
    sweep_axis: Option<String>,
    sweep_min: Option<f64>,
    sweep_max: Option<f64>,
    sweep_n: Option<usize>,
    output_kind: Option<String>,
}

fn put<T>(slot: &mut Option<T>, value: T, key: &str, at: &str) -> Result<()> {
    if slot.is_some() {
        bail!("{at}: duplicate key `{key}`");
    }
    *slot = Some(value);
    Ok(())
}

impl Draft {
    fn assign(&mut self, key: &str, value: Raw<'_>, at: &str) -> Result<()> {
        match key {
            "potential.kind" => put(&mut self.potential_kind, value.keyword(key, at)?, key, at),
            "potential.height" => put(&mut self.height, value.number(key, at)?, key, at),
            "potential.half_width" => put(&mut self.half_width, value.number(key, at)?, key, at),
            "potential.force" => put(&mut self.force, value.number(key, at)?, key, at),
            "context.mass" => put(&mut self.mass, value.number(key, at)?, key, at),
            "context.hbar" => put(&mut self.hbar, value.number(key, at)?, key, at),
            "context.energy" => put(&mut self.energy, value.number(key, at)?, key, at),
            "context.level" => put(&mut self.level, value.index(key, at)?, key, at),
            "microstate.a" => put(&mut self.ms_a, value.number(key, at)?, key, at),
            "microstate.b" => put(&mut self.ms_b, value.number(key, at)?, key, at),
            "microstate.c" => put(&mut self.ms_c, value.number(key, at)?, key, at),
            "initial.x0" => put(&mut self.x0, value.number(key, at)?, key, at),
            "initial.wx0" => put(&mut self.wx0, value.number(key, at)?, key, at),
            "initial.wxx0" => put(&mut self.wxx0, value.number(key, at)?, key, at),
            "grid.min" => put(&mut self.grid_min, value.number(key, at)?, key, at),
            "grid.max" => put(&mut self.grid_max, value.number(key, at)?, key, at),
            "grid.n" => put(&mut self.grid_n, value.index(key, at)?, key, at),
            "sweep.axis" => put(&mut self.sweep_axis, value.keyword(key, at)?, key, at),
            "sweep.min" => put(&mut self.sweep_min, value.number(key, at)?, key, at),
            "sweep.max" => put(&mut self.sweep_max, value.number(key, at)?, key, at),
            "sweep.n" => put(&mut self.sweep_n, value.index(key, at)?, key, at),
            "output.kind" => put(&mut self.output_kind, value.keyword(key, at)?, key, at),
            _ => bail!("{at}: unknown key `{key}`"),
        }
    }

    fn finish(self, name: &str) -> Result<Scenario> {
        let potential = self.build_potential(name)?;
        let (mass, hbar) = self.build_context(name)?;
        let energy = self.build_energy(name, &potential)?;
        let microstate = self.build_microstate(name)?;
        let grid = self.build_grid(name)?;
        let sweep = self.build_sweep(name)?;
        let output = self.build_output(name, &potential, grid.is_some(), sweep.is_some())?;
        Ok(Scenario { potential, mass, hbar, energy, microstate, grid, sweep, output })
    }

    fn build_potential(&self, name: &str) -> Result<Potential> {
        let kind = self
            .potential_kind
            .as_deref()
            .ok_or_else(|| anyhow!("{name}: missing required key `potential.kind`"))?;
        let reject = |slot: &Option<f64>, key: &str| -> Result<()> {
            if slot.is_some() {
                bail!("{name}: `{key}` is not valid for potential.kind = {kind}");
            }
            Ok(())
        };
        let require = |slot: &Option<f64>, key: &str| -> Result<f64> {
            slot.ok_or_else(|| anyhow!("{name}: potential.kind = {kind} requires `{key}`"))
        };
        let potential = match kind {
            "free" => {
                reject(&self.height, "potential.height")?;
                reject(&self.half_width, "potential.half_width")?;
                reject(&self.force, "potential.force")?;
                Potential::Free
            }
            "square_well" => {
                reject(&self.force, "potential.force")?;
                Potential::SquareWell {
                    height: require(&self.height, "potential.height")?,
                    half_width: require(&self.half_width, "potential.half_width")?,
                }
            }
            "linear" => {
                reject(&self.height, "potential.height")?;
                reject(&self.half_width, "potential.half_width")?;
                Potential::Linear { force: require(&self.force, "potential.force")? }
            }
            other => bail!(
                "{name}: potential.kind must be free, square_well or linear, got `{other}`"
            ),
        };
        potential.validate().with_context(|| format!("{name}: invalid potential"))?;
        Ok(potential)
    }

    fn build_context(&self, name: &str) -> Result<(f64, f64)> {
        let mass = self.mass.ok_or_else(|| anyhow!("{name}: missing required key `context.mass`"))?;
        let hbar = self.hbar.ok_or_else(|| anyhow!("{name}: missing required key `context.hbar`"))?;
        for (key, v) in [("context.mass", mass), ("context.hbar", hbar)] {
            if !(v > 0.0) || !v.is_finite() {
                bail!("{name}: `{key}` must be positive and finite, got {v}");
            }
        }
        Ok((mass, hbar))
    }

    fn build_energy(&self, name: &str, potential: &Potential) -> Result<EnergySpec> {
        match (self.energy, self.level) {
            (Some(_), Some(_)) => {
                bail!("{name}: give `context.energy` or `context.level`, not both")
            }
            (None, None) => {
                bail!("{name}: one of `context.energy` or `context.level` is required")
            }
            (Some(e), None) => {
                if !(e > 0.0) || !e.is_finite() {
                    bail!("{name}: `context.energy` must be positive and finite, got {e}");
                }
                Ok(EnergySpec::Value(e))
            }
            (None, Some(i)) => {
                if !matches!(potential, Potential::SquareWell { .. }) {
                    bail!("{name}: `context.level` is only valid for potential.kind = square_well");
                }
                Ok(EnergySpec::Level(i))
            }
        }
    }

    fn build_microstate(&self, name: &str) -> Result<MicrostateSpec> {
        let coef = [self.ms_a, self.ms_b, self.ms_c];
        let init = [self.x0, self.wx0, self.wxx0];
        let coef_given = coef.iter().filter(|v| v.is_some()).count();
        let init_given = init.iter().filter(|v| v.is_some()).count();
        if coef_given > 0 && init_given > 0 {
            bail!("{name}: give the microstate as microstate.a/b/c or as initial.x0/wx0/wxx0, not both");
        }
        if coef_given > 0 {
            if coef_given < 3 {
                bail!("{name}: microstate.a, microstate.b and microstate.c must all be given");
            }
            let ms = Microstate::new(self.ms_a.unwrap(), self.ms_b.unwrap(), self.ms_c.unwrap())
                .map_err(|e| anyhow!("{name}: invalid microstate: {e}"))?;
            return Ok(MicrostateSpec::Fixed(ms));
        }
        if init_given > 0 {
            if init_given < 3 {
                bail!("{name}: initial.x0, initial.wx0 and initial.wxx0 must all be given");
            }
            let iv = InitialValues::new(self.x0.unwrap(), self.wx0.unwrap(), self.wxx0.unwrap())
                .map_err(|e| anyhow!("{name}: invalid initial values: {e}"))?;
            return Ok(MicrostateSpec::Initial(iv));
        }
        bail!("{name}: a microstate is required (microstate.a/b/c or initial.x0/wx0/wxx0)");
    }

    fn build_grid(&self, name: &str) -> Result<Option<GridSpec>> {
        match (self.grid_min, self.grid_max, self.grid_n) {
            (None, None, None) => Ok(None),
            (Some(min), Some(max), Some(n)) => {
                if !min.is_finite() || !max.is_finite() || !(min < max) {
                    bail!("{name}: grid needs finite grid.min < grid.max, got [{min}, {max}]");
                }
                if n < 2 {
                    bail!("{name}: grid.n must be at least 2, got {n}");
                }
                Ok(Some(GridSpec { min, max, n }))
            }
            _ => bail!("{name}: grid.min, grid.max and grid.n must all be given"),
        }
    }

    fn build_sweep(&self, name: &str) -> Result<Option<SweepSpec>> {
        match (&self.sweep_axis, self.sweep_min, self.sweep_max, self.sweep_n) {
            (None, None, None, None) => Ok(None),
            (Some(axis), Some(min), Some(max), Some(n)) => {
                let axis = match axis.as_str() {
                    "energy" => SweepAxis::Energy,
                    "hbar" => SweepAxis::Hbar,
                    other => bail!("{name}: sweep.axis must be energy or hbar, got `{other}`"),
                };
                if !(min > 0.0) || !min.is_finite() || !max.is_finite() || !(min < max) {
                    bail!("{name}: sweep needs finite 0 < sweep.min < sweep.max, got [{min}, {max}]");
                }
                Ok(Some(SweepSpec { axis, min, max, n }))
            }
            _ => bail!("{name}: sweep.axis, sweep.min, sweep.max and sweep.n must all be given"),
        }
    }

    fn build_output(
        &self,
        name: &str,
        potential: &Potential,
        has_grid: bool,
        has_sweep: bool,
    ) -> Result<Option<OutputKind>> {
        let Some(kind) = self.output_kind.as_deref() else { return Ok(None) };
        let kind = match kind {
            "trajectory" => OutputKind::Trajectory,
            "cycle_stats" => OutputKind::CycleStats,
            "timing" => OutputKind::Timing,
            "sweep" => OutputKind::Sweep,
            other => bail!(
                "{name}: output.kind must be trajectory, cycle_stats, timing or sweep, got `{other}`"
            ),
        };
        match kind {
            OutputKind::Trajectory if !has_grid => {
                bail!("{name}: output.kind = trajectory requires a grid.* section");
            }
            OutputKind::Sweep if !has_sweep => {
                bail!("{name}: output.kind = sweep requires a sweep.* section");
            }
            OutputKind::CycleStats if !matches!(potential, Potential::Free) => {
                bail!("{name}: output.kind = cycle_stats requires potential.kind = free");
            }
            OutputKind::Timing if !matches!(potential, Potential::SquareWell { .. }) => {
                bail!("{name}: output.kind = timing requires potential.kind = square_well");
            }
            _ => {}
        }
        Ok(Some(kind))
    }
}

/// Parse a scenario from file contents; `name` (the file's base name)
/// prefixes every diagnostic.
pub fn parse_scenario(text: &str, name: &str) -> Result<Scenario> {
    let mut draft = Draft::default();
    if text.trim_start().starts_with('{') {
        let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text)
            .with_context(|| format!("{name}: expected a flat JSON object"))?;
        for (key, value) in &map {
            draft.assign(key, Raw::Json(value), &format!("{name}: key `{key}`"))?;
        }
    } else {
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let at = format!("{name} line {}", i + 1);
            let Some((key, value)) = content.split_once('=') else {
                bail!("{at}: expected `key = value`, got `{content}`");
            };
            draft.assign(key.trim(), Raw::Text(value.trim()), &at)?;
        }
    }
    draft.finish(name)
}
