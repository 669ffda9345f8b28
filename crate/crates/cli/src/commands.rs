use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use qpix_core::{
    amplify, analytic_neqr_state, build_neqr_circuit, build_phase_oracle, decode_from_counts,
    plan_iterations, run_search, GrayImage, ImageError, MeasurementCounts, OracleSpec,
    PixelPosition, SearchError, SimError, Statevector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::image_io::FormatError;
use crate::report::*;

pub const DEFAULT_SHOTS: u64 = 1024;
pub const DEFAULT_SEED: u64 = 0;

const EQUIVALENCE_TOL: f64 = 1e-10;
const SUCCESS_LAW_TOL: f64 = 1e-9;
const INVOLUTION_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("{0}")]
    Bounds(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    /// 1: I/O, parse or validation; 3: nothing matched the target;
    /// 4: search never verified; 5: a verified property failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Search(SearchError::NoMarkedItems) => 3,
            CliError::Search(SearchError::SearchFailure { .. }) => 4,
            CliError::VerifyFailed(_) => 5,
            _ => 1,
        }
    }
}

pub fn read_image_file(path: &Path, csv_bits: u32) -> Result<GrayImage, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    crate::image_io::read_image(&bytes, csv_bits).map_err(|source| CliError::Format {
        path: path.to_owned(),
        source,
    })
}

/// Writes through a temporary file in the target directory, then renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Uniformly random image from ChaCha8 seeded with `seed`, pixels drawn in
/// row-major order.
pub fn generate_image(n: u32, q: u32, seed: u64) -> Result<GrayImage, CliError> {
    if n == 0 || n > 12 {
        return Err(CliError::Bounds(format!(
            "side exponent {n} outside 1..=12"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = 1u32.checked_shl(q).unwrap_or(u32::MAX);
    let count = 1usize << (2 * n);
    // GrayImage::new rejects bad depths and sizes before we touch the pixels.
    GrayImage::new(n, q, vec![0; count])?;
    let pixels = (0..count).map(|_| rng.gen_range(0..max)).collect();
    Ok(GrayImage::new(n, q, pixels)?)
}

pub fn encode(image: &GrayImage, shots: u64, seed: u64) -> Result<EncodeReport, CliError> {
    let layout = image.layout();
    let circuit = build_neqr_circuit(image)?;
    let analytic = analytic_neqr_state(image)?;
    let mut simulated = Statevector::new(circuit.num_qubits())?;
    simulated.apply_circuit(&circuit)?;
    let circuit_deviation = analytic
        .amplitudes()
        .iter()
        .zip(simulated.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if circuit_deviation > EQUIVALENCE_TOL {
        return Err(CliError::VerifyFailed(format!(
            "circuit and analytic states differ by {circuit_deviation:e}"
        )));
    }

    let probs = analytic.probabilities();
    let counts = analytic.sample(shots, seed)?;

    let amplitudes = (0..analytic.dimension())
        .filter(|&k| probs[k] > 0.0)
        .map(|k| AmplitudeRecord {
            index: k,
            label: layout.bitstring(k),
            re: analytic.amplitude(k).re,
            im: analytic.amplitude(k).im,
        })
        .collect();

    let keys: BTreeSet<usize> = (0..probs.len())
        .filter(|&k| probs[k] > 0.0)
        .chain(counts.iter().map(|(k, _)| k))
        .collect();
    let histogram = keys
        .into_iter()
        .map(|k| HistogramRecord {
            label: layout.bitstring(k),
            probability: probs[k],
            count: counts.get(k),
        })
        .collect();

    let decoded = decode_from_counts(&counts, layout)
        .ok()
        .map(|img| img.rows().map(<[u32]>::to_vec).collect());

    Ok(EncodeReport {
        schema: SCHEMA_VERSION,
        command: "encode".into(),
        image: image.into(),
        num_qubits: layout.total_qubits(),
        shots,
        seed,
        circuit: (&circuit).into(),
        amplitudes,
        histogram,
        decoded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Darkest,
    Intensity(u32),
    Index(PixelPosition),
}

pub fn search(
    image: &GrayImage,
    mode: SearchMode,
    shots: u64,
    seed: u64,
    max_retries: u32,
) -> Result<SearchReportRecord, CliError> {
    let spec = match mode {
        SearchMode::Darkest => OracleSpec::ColorEquals(image.min_intensity()),
        SearchMode::Intensity(v) => OracleSpec::ColorEquals(v),
        SearchMode::Index(p) => OracleSpec::IndexEquals(p),
    };
    let report = run_search(image, spec, shots, seed, max_retries)?;
    let layout = image.layout();

    let (kind, oracle, target_intensity, target_position) = match (mode, spec) {
        (SearchMode::Darkest, OracleSpec::ColorEquals(v)) => {
            ("darkest", "color-equals", Some(v), None)
        }
        (_, OracleSpec::ColorEquals(v)) => ("intensity", "color-equals", Some(v), None),
        (_, OracleSpec::IndexEquals(p)) => ("index", "index-equals", None, Some(p.into())),
    };

    let histogram = report
        .position_probabilities
        .iter()
        .enumerate()
        .map(|(linear, &probability)| {
            let p = layout.position_at(linear);
            PositionHistogramRecord {
                y: p.y,
                x: p.x,
                label: layout.position_bitstring(linear),
                probability,
                count: report.sampled.get(linear),
            }
        })
        .collect();

    Ok(SearchReportRecord {
        schema: SCHEMA_VERSION,
        command: "search".into(),
        image: image.into(),
        mode: ModeRecord {
            kind: kind.into(),
            oracle: oracle.into(),
            target_intensity,
            target_position,
        },
        shots,
        seed,
        marked_positions: report.marked_positions.iter().map(|&p| p.into()).collect(),
        plan: PlanRecord {
            search_space: report.plan.search_space,
            marked: report.plan.marked,
            iterations: report.plan.iterations,
            predicted_success: report.plan.predicted_success,
        },
        success_probability: report.success_probability,
        found: report.found.into(),
        found_intensity: image.get(report.found),
        retries_used: report.retries_used,
        histogram,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub n_max: u32,
    pub q_max: u32,
    pub trials: usize,
    pub seed: u64,
    /// Drop the first controlled-X from every preparation circuit, to check
    /// that the harness notices.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_max: 2,
            q_max: 8,
            trials: 100,
            seed: DEFAULT_SEED,
            inject_fault: false,
        }
    }
}

struct Tracker {
    result: PropertyResult,
}

impl Tracker {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            result: PropertyResult {
                name: name.into(),
                passed: true,
                cases: 0,
                tolerance,
                max_deviation: 0.0,
                failing_case: None,
            },
        }
    }

    fn record(
        &mut self,
        trial: usize,
        image: &GrayImage,
        deviation: f64,
        detail: impl FnOnce() -> String,
    ) {
        let r = &mut self.result;
        r.cases += 1;
        r.max_deviation = r.max_deviation.max(deviation);
        // NaN deviations fail too
        let within = deviation <= r.tolerance;
        if !within && r.failing_case.is_none() {
            r.passed = false;
            r.failing_case = Some(FailingCase {
                trial,
                image: image.into(),
                detail: detail(),
            });
        }
    }
}

fn max_diff(a: &Statevector, b: &Statevector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Runs the cross-module property checks over `trials` random images and
/// returns the report. A failing property is reported, not returned as an
/// error; callers decide the exit status from `passed`.
pub fn verify(opts: VerifyOptions) -> Result<VerifyReport, CliError> {
    if !(1..=2).contains(&opts.n_max) || !(1..=8).contains(&opts.q_max) {
        return Err(CliError::Bounds(format!(
            "verify bounds n_max={} q_max={} outside n<=2, q<=8",
            opts.n_max, opts.q_max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut equivalence = Tracker::new("neqr_equivalence", EQUIVALENCE_TOL);
    let mut success_law = Tracker::new("grover_success_law", SUCCESS_LAW_TOL);
    let mut involution = Tracker::new("oracle_involution", INVOLUTION_TOL);
    let mut roundtrip = Tracker::new("decode_roundtrip", 0.0);

    for trial in 0..opts.trials {
        let n = rng.gen_range(1..=opts.n_max);
        let q = rng.gen_range(1..=opts.q_max.min(12 - 2 * n));
        let max = 1u32 << q;
        let pixels = (0..1usize << (2 * n))
            .map(|_| rng.gen_range(0..max))
            .collect();
        let image = GrayImage::new(n, q, pixels)?;
        let layout = image.layout();

        let mut prep = build_neqr_circuit(&image)?;
        if opts.inject_fault {
            if let Some(i) = prep.gates().iter().position(|g| !g.controls.is_empty()) {
                prep.remove(i);
            }
        }
        let analytic = analytic_neqr_state(&image)?;
        let mut simulated = Statevector::new(prep.num_qubits())?;
        simulated.apply_circuit(&prep)?;
        let dev = max_diff(&analytic, &simulated);
        equivalence.record(trial, &image, dev, || {
            format!("circuit differs from analytic state by {dev:e}")
        });

        let target = image.min_intensity();
        let spec = OracleSpec::ColorEquals(target);
        let oracle = build_phase_oracle(layout, spec)?;
        let marked = image.positions_with(target);
        let plan = plan_iterations(layout.num_pixels(), marked.len())?;
        let amplified = amplify(&prep, &oracle, plan.iterations)?;
        let probs = amplified.probabilities();
        let mass: f64 = probs
            .iter()
            .enumerate()
            .filter(|&(k, _)| layout.split(k).1 == target)
            .map(|(_, p)| p)
            .sum();
        let dev = (mass - plan.predicted_success).abs();
        success_law.record(trial, &image, dev, || {
            format!(
                "N={} M={} r={}: simulated {mass} vs predicted {}",
                plan.search_space, plan.marked, plan.iterations, plan.predicted_success
            )
        });

        let mut twice = simulated.clone();
        twice.apply_circuit(&oracle)?;
        twice.apply_circuit(&oracle)?;
        let dev = max_diff(&twice, &simulated);
        involution.record(trial, &image, dev, || {
            format!("oracle twice moved the state by {dev:e}")
        });

        let exact = MeasurementCounts::from_counts(
            layout.total_qubits(),
            analytic
                .probabilities()
                .iter()
                .enumerate()
                .map(|(k, p)| (k, (p * layout.num_pixels() as f64).round() as u64)),
        )?;
        let decoded = decode_from_counts(&exact, layout);
        let ok = decoded.as_ref() == Ok(&image);
        roundtrip.record(trial, &image, if ok { 0.0 } else { 1.0 }, || {
            format!("decoded {decoded:?}")
        });
    }

    let properties: Vec<PropertyResult> = [equivalence, success_law, involution, roundtrip]
        .into_iter()
        .map(|t| t.result)
        .collect();
    Ok(VerifyReport {
        schema: SCHEMA_VERSION,
        command: "verify".into(),
        n_max: opts.n_max,
        q_max: opts.q_max,
        trials: opts.trials,
        seed: opts.seed,
        inject_fault: opts.inject_fault,
        vacuous: opts.trials == 0,
        passed: properties.iter().all(|p| p.passed),
        properties,
    })
}
