//! Report assembly and bit-stable emission.
//!
//! Every floating value in the JSON report and the CSV tables is written as
//! a 17-significant-digit scientific decimal, which round-trips any f64
//! exactly and never depends on locale or platform. JSON objects come from
//! structs (declaration order) or `BTreeMap` (sorted), so two runs of the
//! same scenario produce byte-identical files.

use std::collections::BTreeMap;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// One floating value as a fixed-width scientific decimal with 17
/// significant digits, e.g. `5.0000000000000000e-1`. Negative zero is
/// canonicalized to positive zero.
pub fn format_float(v: f64) -> String {
    debug_assert!(v.is_finite(), "report values must be finite, got {v}");
    if v == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

/// 64-bit FNV-1a of the raw scenario bytes, as 16 lowercase hex digits;
/// ties a report to the exact file contents that produced it.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &byte in bytes {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// Provenance block: what ran, on which scenario bytes, under which knobs.
#[derive(Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub verb: &'static str,
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub rng: &'static str,
    pub tol_scale: f64,
    pub threads: Option<usize>,
    /// Effective (scaled) tolerance per identity check performed.
    pub tolerances: BTreeMap<String, f64>,
}

/// One built-in identity check: pass iff `measured <= tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        Check { name: name.to_string(), passed: measured <= tolerance, measured, tolerance }
    }
}

/// One row of a trajectory table; field names match the CSV header.
#[derive(Debug, Serialize)]
pub struct TrajectoryRow {
    pub x: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "W_x")]
    pub w_x: f64,
    pub schwarzian: f64,
    pub residual: f64,
    pub t_minus_t0: f64,
}

/// Cycle statistics, one source (quadrature or closed form).
#[derive(Debug, Serialize)]
pub struct StatsBlock {
    pub mean_wx: f64,
    pub mean_wx2: f64,
    pub variance: f64,
    pub mean_quantum_potential: f64,
}

/// Momentum-field envelope over one cycle.
#[derive(Debug, Serialize)]
pub struct EnvelopeBlock {
    pub wx_min: f64,
    pub wx_max: f64,
    pub amplitude: f64,
}

/// One sweep row; `fraction_forbidden` is present only on hbar sweeps of a
/// tracked well.
#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub mean_wx: f64,
    pub mean_wx2: f64,
    pub variance: f64,
    pub mean_quantum_potential: f64,
    pub momentum_ratio: f64,
    pub variance_ratio: f64,
    pub fraction_forbidden: Option<f64>,
}

/// Whole-sweep summary mirrored from the core diagnostics.
#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub max_momentum_deviation: f64,
    pub variance_ratio_spread: f64,
    pub fraction_monotone_decreasing: Option<bool>,
}

/// One bound level of the symmetric well.
#[derive(Debug, Serialize)]
pub struct LevelBlock {
    pub index: usize,
    pub energy: f64,
    pub k: f64,
    pub kappa: f64,
}

/// Level plus its trajectory timing.
#[derive(Debug, Serialize)]
pub struct LevelRow {
    #[serde(flatten)]
    pub level: LevelBlock,
    pub dwell_right: f64,
    pub dwell_left: f64,
    pub libration: f64,
    pub fraction_forbidden: f64,
}

/// A microstate triple drawn for the identity suite.
#[derive(Debug, Serialize)]
pub struct MicrostateRow {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// The computation payload, tagged by kind.
#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportData {
    Trajectory {
        potential: &'static str,
        anchor: f64,
        rows: Vec<TrajectoryRow>,
    },
    CycleStats {
        convention: &'static str,
        quadrature: StatsBlock,
        closed: StatsBlock,
        envelope: EnvelopeBlock,
    },
    Sweep {
        axis: &'static str,
        diagnostics: SweepSummary,
        points: Vec<SweepRow>,
    },
    Timing {
        level: LevelBlock,
        dwell_right: f64,
        dwell_left: f64,
        libration: f64,
        fraction_forbidden: f64,
    },
    Levels {
        height: f64,
        half_width: f64,
        levels: Vec<LevelRow>,
    },
    Identity {
        draws: usize,
        microstates: Vec<MicrostateRow>,
    },
}

/// Top-level report: `{meta, data, checks}`.
#[derive(Debug, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub data: ReportData,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Pretty JSON with the fixed 17-significant-digit float encoding; a plain
/// [`PrettyFormatter`] handles everything except `f64`.
struct ReportFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for ReportFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serialize the report as pretty JSON with a trailing newline.
pub fn to_json_bytes(report: &Report) -> anyhow::Result<Vec<u8>> {
    let mut bytes = Vec::new();
    let formatter = ReportFormatter { inner: PrettyFormatter::new() };
    let mut ser = serde_json::Serializer::with_formatter(&mut bytes, formatter);
    report.serialize(&mut ser)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// A CSV table with pre-formatted cells (floats through [`format_float`],
/// absent optionals as empty cells).
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn to_bytes(&self) -> anyhow::Result<Vec<u8>> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        Ok(writer.into_inner()?)
    }
}

/// Optional float as a CSV cell: empty when absent.
pub fn optional_cell(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}
