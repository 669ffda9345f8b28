//! Phase oracles, reflections and the Grover pixel-search pipelines.
//!
//! Two pipelines share the same machinery. Color search prepares the NEQR
//! state of the image and amplifies the pixels whose intensity register holds
//! the target value. Index search works on a bare `2n`-qubit position register
//! prepared by Hadamards and amplifies one known position.

use std::f64::consts::FRAC_PI_4;

use crate::error::{ImageError, SearchError};
use crate::neqr::{build_neqr_circuit, validate_image, GrayImage, NeqrLayout, PixelPosition};
use crate::sim::{
    marginal_probabilities, Control, Gate, MeasurementCounts, QuantumCircuit, Statevector,
};

/// Retry budget used by [`find_darkest`].
pub const DEFAULT_MAX_RETRIES: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleSpec {
    /// Mark basis states whose color register equals this intensity.
    ColorEquals(u32),
    /// Mark basis states whose position register equals this pixel.
    IndexEquals(PixelPosition),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationPlan {
    /// Number of pixels, `2^(2n)`.
    pub search_space: usize,
    pub marked: usize,
    pub iterations: usize,
    pub predicted_success: f64,
}

/// Iteration count and predicted success for `marked` items out of
/// `search_space`.
///
/// `r = floor(pi/4 * sqrt(N/M))`, except that more than half the space being
/// marked gives `r = 0` (measuring the prepared state directly is already the
/// best bet). Success is `sin^2((2r + 1) * asin(sqrt(M/N)))`.
pub fn plan_iterations(search_space: usize, marked: usize) -> Result<IterationPlan, SearchError> {
    if marked == 0 {
        return Err(SearchError::NoMarkedItems);
    }
    if marked > search_space {
        return Err(SearchError::TooManyMarked {
            marked,
            space: search_space,
        });
    }
    let ratio = marked as f64 / search_space as f64;
    let iterations = if 2 * marked > search_space {
        0
    } else {
        (FRAC_PI_4 * (search_space as f64 / marked as f64).sqrt()).floor() as usize
    };
    let theta = ratio.sqrt().asin();
    let predicted_success = ((2 * iterations + 1) as f64 * theta).sin().powi(2);
    Ok(IterationPlan {
        search_space,
        marked,
        iterations,
        predicted_success,
    })
}

/// Circuit that negates every basis amplitude whose `qubits` (listed from
/// least significant) hold `pattern`, and nothing else.
fn phase_flip_on_pattern(num_qubits: usize, qubits: &[usize], pattern: usize) -> QuantumCircuit {
    let bit = |i: usize| (pattern >> i) & 1 == 1;
    // Put the Z on a qubit that must read 1; if there is none, X-wrap one.
    let (pivot, wrap) = match (0..qubits.len()).rev().find(|&i| bit(i)) {
        Some(i) => (i, false),
        None => (qubits.len() - 1, true),
    };
    let controls: Vec<Control> = qubits
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pivot)
        .map(|(i, &qubit)| Control {
            qubit,
            on_one: bit(i),
        })
        .collect();

    let target = qubits[pivot];
    let mut c = QuantumCircuit::new(num_qubits);
    let mut push = |g: Gate| c.push(g).expect("register qubits are in range");
    if wrap {
        push(Gate::x(target));
    }
    push(Gate::z(target).controlled(controls));
    if wrap {
        push(Gate::x(target));
    }
    c
}

/// Phase oracle over the full register described by `layout`.
pub fn build_phase_oracle(
    layout: NeqrLayout,
    spec: OracleSpec,
) -> Result<QuantumCircuit, SearchError> {
    let (qubits, pattern): (Vec<usize>, usize) = match spec {
        OracleSpec::ColorEquals(target) => {
            if layout.bit_depth() == 0 {
                return Err(SearchError::NoColorRegister);
            }
            let max = (1u32 << layout.bit_depth()) - 1;
            if target > max {
                return Err(SearchError::TargetOutOfRange { target, max });
            }
            (layout.color_qubits().collect(), target as usize)
        }
        OracleSpec::IndexEquals(pos) => {
            if !layout.contains(pos) {
                return Err(ImageError::PositionOutOfRange {
                    y: pos.y,
                    x: pos.x,
                    side: layout.side(),
                }
                .into());
            }
            (
                layout.position_qubits().collect(),
                layout.position_index(pos),
            )
        }
    };
    Ok(phase_flip_on_pattern(
        layout.total_qubits(),
        &qubits,
        pattern,
    ))
}

/// Reflection about `prep|0⟩`: `prep · (2|0⟩⟨0| − I) · prep†`.
///
/// The middle reflection is a multi-controlled Z on the all-zeros pattern
/// (which realizes `I − 2|0⟩⟨0|`) followed by `(XZ)^2 = −I` on qubit 0 to fix
/// the sign exactly.
pub fn build_diffuser(prep: &QuantumCircuit) -> QuantumCircuit {
    let n = prep.num_qubits();
    let mut c = prep.inverse();
    let all: Vec<usize> = (0..n).collect();
    c.extend(&phase_flip_on_pattern(n, &all, 0))
        .expect("same width");
    for g in [Gate::x(0), Gate::z(0), Gate::x(0), Gate::z(0)] {
        c.push(g).expect("qubit 0 exists");
    }
    c.extend(prep).expect("same width");
    c
}

/// `prep|0⟩` followed by `iterations` rounds of oracle then diffuser.
pub fn amplify(
    prep: &QuantumCircuit,
    oracle: &QuantumCircuit,
    iterations: usize,
) -> Result<Statevector, SearchError> {
    let diffuser = build_diffuser(prep);
    let mut state = Statevector::new(prep.num_qubits())?;
    state.apply_circuit(prep)?;
    for _ in 0..iterations {
        state.apply_circuit(oracle)?;
        state.apply_circuit(&diffuser)?;
    }
    Ok(state)
}

/// Hadamard on every qubit of a `2n`-qubit position register.
pub fn position_superposition(n: u32) -> QuantumCircuit {
    let width = 2 * n as usize;
    let mut c = QuantumCircuit::new(width);
    for q in 0..width {
        c.push(Gate::h(q)).expect("qubit in range");
    }
    c
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub spec: OracleSpec,
    pub marked_positions: Vec<PixelPosition>,
    pub plan: IterationPlan,
    /// Position-register distribution of the amplified state, indexed by
    /// linear position.
    pub position_probabilities: Vec<f64>,
    /// Total simulated probability on the marked positions.
    pub success_probability: f64,
    /// Counts of the verified attempt, restricted to the position register.
    pub sampled: MeasurementCounts,
    pub found: PixelPosition,
    pub retries_used: u32,
}

/// Amplifies the marked pixels of `image`, samples the position register and
/// returns the modal position once it passes the classical check. Each failed
/// check re-samples with the next seed, up to `max_retries` times.
pub fn run_search(
    image: &GrayImage,
    spec: OracleSpec,
    shots: u64,
    seed: u64,
    max_retries: u32,
) -> Result<SearchReport, SearchError> {
    validate_image(image)?;
    let image_layout = image.layout();

    let (layout, prep, marked_positions) = match spec {
        OracleSpec::ColorEquals(target) => {
            let max = image.max_intensity();
            if target > max {
                return Err(SearchError::TargetOutOfRange { target, max });
            }
            (
                image_layout,
                build_neqr_circuit(image)?,
                image.positions_with(target),
            )
        }
        OracleSpec::IndexEquals(pos) => {
            if !image_layout.contains(pos) {
                return Err(ImageError::PositionOutOfRange {
                    y: pos.y,
                    x: pos.x,
                    side: image_layout.side(),
                }
                .into());
            }
            let n = image.side_exp();
            (
                NeqrLayout::position_only(n),
                position_superposition(n),
                vec![pos],
            )
        }
    };

    let plan = plan_iterations(layout.num_pixels(), marked_positions.len())?;
    let oracle = build_phase_oracle(layout, spec)?;
    let state = amplify(&prep, &oracle, plan.iterations)?;

    let offset = layout.position_offset();
    let width = 2 * layout.side_exp() as usize;
    let position_probabilities = marginal_probabilities(&state.probabilities(), offset, width);
    let success_probability = marked_positions
        .iter()
        .map(|&p| position_probabilities[layout.position_index(p)])
        .sum();

    let verified = |pos: PixelPosition| match spec {
        OracleSpec::ColorEquals(target) => image.get(pos) == target,
        OracleSpec::IndexEquals(want) => pos == want,
    };

    for attempt in 0..=max_retries {
        let sampled = state
            .sample(shots, seed.wrapping_add(attempt as u64))?
            .marginal(offset, width)?;
        let found = layout.position_at(sampled.mode().expect("at least one shot"));
        if verified(found) {
            return Ok(SearchReport {
                spec,
                marked_positions,
                plan,
                position_probabilities,
                success_probability,
                sampled,
                found,
                retries_used: attempt,
            });
        }
    }
    Err(SearchError::SearchFailure {
        attempts: max_retries + 1,
    })
}

/// Finds the minimum intensity classically, then locates a pixel holding it
/// with a color-equals search.
pub fn find_darkest(image: &GrayImage, shots: u64, seed: u64) -> Result<SearchReport, SearchError> {
    run_search(
        image,
        OracleSpec::ColorEquals(image.min_intensity()),
        shots,
        seed,
        DEFAULT_MAX_RETRIES,
    )
}
