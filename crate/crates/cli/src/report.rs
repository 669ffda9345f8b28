//! JSON report schema (version 1) and plain-text rendering.
//!
//! Bitstring labels are MSB-first: row bits, column bits, then intensity bits.

use std::fmt::Write as _;

use qpix_core::{Gate, GateKind, GrayImage, PixelPosition, QuantumCircuit};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub side: usize,
    pub bit_depth: u32,
    pub rows: Vec<Vec<u32>>,
}

impl From<&GrayImage> for ImageRecord {
    fn from(img: &GrayImage) -> Self {
        Self {
            side: img.side(),
            bit_depth: img.bit_depth(),
            rows: img.rows().map(<[u32]>::to_vec).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlRecord {
    pub qubit: usize,
    /// Basis value the control must hold, 0 or 1.
    pub value: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRecord {
    pub kind: String,
    pub target: usize,
    pub controls: Vec<ControlRecord>,
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        Self {
            kind: g.kind.to_string(),
            target: g.target,
            controls: g
                .controls
                .iter()
                .map(|c| ControlRecord {
                    qubit: c.qubit,
                    value: u8::from(c.on_one),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitRecord {
    pub num_qubits: usize,
    pub hadamards: usize,
    pub controlled_x: usize,
    pub gates: Vec<GateRecord>,
}

impl From<&QuantumCircuit> for CircuitRecord {
    fn from(c: &QuantumCircuit) -> Self {
        let count = |k: GateKind| c.gates().iter().filter(|g| g.kind == k).count();
        Self {
            num_qubits: c.num_qubits(),
            hadamards: count(GateKind::H),
            controlled_x: count(GateKind::X),
            gates: c.gates().iter().map(GateRecord::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeRecord {
    pub index: usize,
    pub label: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramRecord {
    pub label: String,
    pub probability: f64,
    pub count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionRecord {
    pub y: usize,
    pub x: usize,
}

impl From<PixelPosition> for PositionRecord {
    fn from(p: PixelPosition) -> Self {
        Self { y: p.y, x: p.x }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionHistogramRecord {
    pub y: usize,
    pub x: usize,
    pub label: String,
    pub probability: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeReport {
    pub schema: u32,
    pub command: String,
    pub image: ImageRecord,
    pub num_qubits: usize,
    pub shots: u64,
    pub seed: u64,
    pub circuit: CircuitRecord,
    pub amplitudes: Vec<AmplitudeRecord>,
    pub histogram: Vec<HistogramRecord>,
    /// Image recovered from the sampled counts, when every position was seen.
    pub decoded: Option<Vec<Vec<u32>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRecord {
    /// "darkest", "intensity" or "index".
    pub kind: String,
    /// "color-equals" or "index-equals".
    pub oracle: String,
    pub target_intensity: Option<u32>,
    pub target_position: Option<PositionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRecord {
    pub search_space: usize,
    pub marked: usize,
    pub iterations: usize,
    pub predicted_success: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchReportRecord {
    pub schema: u32,
    pub command: String,
    pub image: ImageRecord,
    pub mode: ModeRecord,
    pub shots: u64,
    pub seed: u64,
    pub marked_positions: Vec<PositionRecord>,
    pub plan: PlanRecord,
    pub success_probability: f64,
    pub found: PositionRecord,
    pub found_intensity: u32,
    pub retries_used: u32,
    pub histogram: Vec<PositionHistogramRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailingCase {
    pub trial: usize,
    pub image: ImageRecord,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub failing_case: Option<FailingCase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub schema: u32,
    pub command: String,
    pub n_max: u32,
    pub q_max: u32,
    pub trials: usize,
    pub seed: u64,
    pub inject_fault: bool,
    /// True when no trials ran, so every property passed vacuously.
    pub vacuous: bool,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report types serialize");
    s.push('\n');
    s
}

fn rows_text(rows: &[Vec<u32>]) -> String {
    rows.iter()
        .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(" / ")
}

pub fn encode_text(r: &EncodeReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "image      {}x{} q={} [{}]",
        r.image.side,
        r.image.side,
        r.image.bit_depth,
        rows_text(&r.image.rows)
    );
    let _ = writeln!(
        out,
        "circuit    {} qubits, {} H, {} controlled-X",
        r.num_qubits, r.circuit.hadamards, r.circuit.controlled_x
    );
    let _ = writeln!(out, "shots      {} (seed {})", r.shots, r.seed);
    for h in &r.histogram {
        let _ = writeln!(
            out,
            "  {}  p={:.6}  count={}",
            h.label, h.probability, h.count
        );
    }
    match &r.decoded {
        Some(rows) => {
            let _ = writeln!(out, "decoded    [{}]", rows_text(rows));
        }
        None => {
            let _ = writeln!(out, "decoded    incomplete readout");
        }
    }
    out
}

pub fn search_text(r: &SearchReportRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "image      {}x{} q={} [{}]",
        r.image.side,
        r.image.side,
        r.image.bit_depth,
        rows_text(&r.image.rows)
    );
    let target = match (r.mode.target_intensity, r.mode.target_position) {
        (Some(v), _) => format!("intensity {v}"),
        (None, Some(p)) => format!("position ({},{})", p.y, p.x),
        _ => String::new(),
    };
    let _ = writeln!(
        out,
        "search     {} ({}), {}",
        r.mode.kind, r.mode.oracle, target
    );
    let _ = writeln!(
        out,
        "plan       N={} M={} iterations={} predicted={:.6}",
        r.plan.search_space, r.plan.marked, r.plan.iterations, r.plan.predicted_success
    );
    let _ = writeln!(
        out,
        "simulated  success probability {:.6}",
        r.success_probability
    );
    for h in &r.histogram {
        let _ = writeln!(
            out,
            "  ({},{}) {}  p={:.6}  count={}",
            h.y, h.x, h.label, h.probability, h.count
        );
    }
    let _ = writeln!(
        out,
        "found      ({},{}) intensity {} after {} retries",
        r.found.y, r.found.x, r.found_intensity, r.retries_used
    );
    out
}

pub fn verify_text(r: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "verify     n<={} q<={} trials={} seed={}{}",
        r.n_max,
        r.q_max,
        r.trials,
        r.seed,
        if r.inject_fault {
            " (fault injected)"
        } else {
            ""
        }
    );
    if r.vacuous {
        let _ = writeln!(out, "no trials run: all properties pass vacuously");
    }
    for p in &r.properties {
        let _ = writeln!(
            out,
            "{} {:<22} cases={} max_dev={:.3e} tol={:.0e}",
            if p.passed { "PASS" } else { "FAIL" },
            p.name,
            p.cases,
            p.max_deviation,
            p.tolerance
        );
        if let Some(f) = &p.failing_case {
            let _ = writeln!(
                out,
                "     trial {} [{}]: {}",
                f.trial,
                rows_text(&f.image.rows),
                f.detail
            );
        }
    }
    out
}
