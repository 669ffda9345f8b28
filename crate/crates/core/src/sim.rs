//! Dense statevector simulation.
//!
//! Basis index `k` is read with qubit 0 as the least-significant bit. Gates
//! act on the amplitude vector in place; multi-controlled gates are applied
//! natively by masking the index space rather than by decomposition.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SimError;

/// Largest register the simulator will allocate (2^24 amplitudes).
pub const MAX_QUBITS: usize = 24;

/// Tolerance used when checking that a state is normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Z,
    I,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::I => "I",
        };
        f.write_str(s)
    }
}

/// A control qubit together with the value it must hold for the gate to fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    /// `true` fires on |1⟩, `false` fires on |0⟩.
    pub on_one: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Self {
            qubit,
            on_one: true,
        }
    }

    pub fn zero(qubit: usize) -> Self {
        Self {
            qubit,
            on_one: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, target)
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, target)
    }

    pub fn z(target: usize) -> Self {
        Self::new(GateKind::Z, target)
    }

    pub fn id(target: usize) -> Self {
        Self::new(GateKind::I, target)
    }

    pub fn controlled(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    /// Checks the gate against a register of `num_qubits` qubits.
    pub fn validate(&self, num_qubits: usize) -> Result<(), SimError> {
        if self.target >= num_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit: self.target,
                num_qubits,
            });
        }
        let mut seen = 0usize;
        for c in &self.controls {
            if c.qubit >= num_qubits {
                return Err(SimError::QubitOutOfRange {
                    qubit: c.qubit,
                    num_qubits,
                });
            }
            if c.qubit == self.target {
                return Err(SimError::TargetIsControl { qubit: c.qubit });
            }
            let bit = 1usize << c.qubit;
            if seen & bit != 0 {
                return Err(SimError::DuplicateControl { qubit: c.qubit });
            }
            seen |= bit;
        }
        Ok(())
    }

    /// Returns `(mask, value)` such that the gate fires on index `k` iff
    /// `k & mask == value`.
    fn control_mask(&self) -> (usize, usize) {
        self.controls.iter().fold((0, 0), |(mask, value), c| {
            let bit = 1usize << c.qubit;
            (mask | bit, if c.on_one { value | bit } else { value })
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.target)?;
        if !self.controls.is_empty() {
            f.write_str(" ctrl[")?;
            for (i, c) in self.controls.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}{}", if c.on_one { "" } else { "!" }, c.qubit)?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// An ordered gate list over a fixed number of qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumCircuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl QuantumCircuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), SimError> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &QuantumCircuit) -> Result<(), SimError> {
        if other.num_qubits != self.num_qubits {
            return Err(SimError::QubitCountMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Gate-wise inverse. Every gate kind in scope is self-inverse, so this is
    /// the reversed gate list.
    pub fn inverse(&self) -> QuantumCircuit {
        QuantumCircuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().cloned().collect(),
        }
    }

    /// Removes the gate at `index`. Used by the verification harness to
    /// inject faults.
    pub fn remove(&mut self, index: usize) -> Gate {
        self.gates.remove(index)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// |0…0⟩ on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<Self, SimError> {
        check_capacity(num_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state |index⟩.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        let mut state = Self::new(num_qubits)?;
        if index >= state.amplitudes.len() {
            return Err(SimError::IndexOutOfRange {
                index,
                dimension: state.amplitudes.len(),
            });
        }
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Wraps an existing amplitude vector. The length must be a power of two
    /// and the vector must be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::BadLength { len });
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_capacity(num_qubits)?;
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NotNormalized { norm });
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(self.num_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &QuantumCircuit) -> Result<(), SimError> {
        if circuit.num_qubits != self.num_qubits {
            return Err(SimError::QubitCountMismatch {
                expected: self.num_qubits,
                found: circuit.num_qubits,
            });
        }
        // Gates were validated on push.
        for gate in &circuit.gates {
            self.apply_unchecked(gate);
        }
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        let tbit = 1usize << gate.target;
        let (mask, value) = gate.control_mask();
        let amps = &mut self.amplitudes;
        match gate.kind {
            GateKind::I => {}
            GateKind::X => {
                for k in 0..amps.len() {
                    if k & tbit == 0 && k & mask == value {
                        amps.swap(k, k | tbit);
                    }
                }
            }
            GateKind::Z => {
                for (k, a) in amps.iter_mut().enumerate() {
                    if k & tbit != 0 && k & mask == value {
                        *a = -*a;
                    }
                }
            }
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for k in 0..amps.len() {
                    if k & tbit == 0 && k & mask == value {
                        let a0 = amps[k];
                        let a1 = amps[k | tbit];
                        amps[k] = (a0 + a1) * s;
                        amps[k | tbit] = (a0 - a1) * s;
                    }
                }
            }
        }
    }

    /// Born-rule probabilities, one per basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws `shots` basis indices from [`probabilities`](Self::probabilities).
    ///
    /// The generator is ChaCha8 seeded with `seed_from_u64(seed)`. Each shot
    /// consumes exactly one `f64` in `[0, 1)`, which is located in the
    /// cumulative distribution by binary search. Both steps are
    /// platform-independent, so a seed reproduces the same counts everywhere.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<MeasurementCounts, SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let probs = self.probabilities();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        // Rounding can leave the total slightly below 1; anything past it
        // falls on the last index that carries weight.
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let r: f64 = rng.gen();
            let idx = cdf.partition_point(|&c| c <= r).min(last);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(MeasurementCounts {
            num_qubits: self.num_qubits,
            counts,
            total_shots: shots,
        })
    }
}

fn check_capacity(num_qubits: usize) -> Result<(), SimError> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(SimError::Capacity {
            requested: num_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Shot counts keyed by basis index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementCounts {
    num_qubits: usize,
    counts: BTreeMap<usize, u64>,
    total_shots: u64,
}

impl MeasurementCounts {
    /// Builds counts from a map, dropping zero entries. The total is the sum
    /// of the map.
    pub fn from_counts(
        num_qubits: usize,
        counts: impl IntoIterator<Item = (usize, u64)>,
    ) -> Result<Self, SimError> {
        check_capacity(num_qubits)?;
        let dimension = 1usize << num_qubits;
        let mut map = BTreeMap::new();
        let mut total = 0u64;
        for (index, count) in counts {
            if index >= dimension {
                return Err(SimError::IndexOutOfRange { index, dimension });
            }
            if count > 0 {
                *map.entry(index).or_insert(0) += count;
                total += count;
            }
        }
        Ok(Self {
            num_qubits,
            counts: map,
            total_shots: total,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn get(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn frequency(&self, index: usize) -> f64 {
        self.get(index) as f64 / self.total_shots as f64
    }

    /// Index with the highest count; ties go to the lowest index.
    pub fn mode(&self) -> Option<usize> {
        self.counts
            .iter()
            .fold(None, |best: Option<(usize, u64)>, (&k, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((k, v)),
            })
            .map(|(k, _)| k)
    }

    /// Marginal counts over the contiguous qubit range
    /// `offset..offset + width`, re-indexed from zero.
    pub fn marginal(&self, offset: usize, width: usize) -> Result<MeasurementCounts, SimError> {
        if width == 0 || offset + width > self.num_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit: offset + width,
                num_qubits: self.num_qubits,
            });
        }
        let mask = (1usize << width) - 1;
        let mut counts = BTreeMap::new();
        for (&k, &v) in &self.counts {
            *counts.entry((k >> offset) & mask).or_insert(0) += v;
        }
        Ok(MeasurementCounts {
            num_qubits: width,
            counts,
            total_shots: self.total_shots,
        })
    }
}

/// Sums `probs` over everything outside the qubit range
/// `offset..offset + width`.
pub fn marginal_probabilities(probs: &[f64], offset: usize, width: usize) -> Vec<f64> {
    let mask = (1usize << width) - 1;
    let mut out = vec![0.0; 1 << width];
    for (k, p) in probs.iter().enumerate() {
        out[(k >> offset) & mask] += p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn new_state_is_ground() {
        let s = Statevector::new(1).unwrap();
        assert_eq!(
            s.amplitudes(),
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
        let s = Statevector::new(2).unwrap();
        assert_eq!(s.dimension(), 4);
        assert_eq!(s.amplitude(0), Complex64::new(1.0, 0.0));
        let s = Statevector::new(10).unwrap();
        assert_eq!(s.dimension(), 1024);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(
            Statevector::new(0),
            Err(SimError::Capacity { .. })
        ));
        assert!(matches!(
            Statevector::new(25),
            Err(SimError::Capacity { .. })
        ));
    }

    #[test]
    fn hadamard_on_ground() {
        let mut s = Statevector::new(1).unwrap();
        s.apply_gate(&Gate::h(0)).unwrap();
        assert!(close(s.amplitude(0), Complex64::new(S, 0.0), 1e-15));
        assert!(close(s.amplitude(1), Complex64::new(S, 0.0), 1e-15));
        s.apply_gate(&Gate::z(0)).unwrap();
        assert!(close(s.amplitude(1), Complex64::new(-S, 0.0), 1e-15));
    }

    #[test]
    fn toffoli_on_110() {
        let mut s = Statevector::basis(3, 0b110).unwrap();
        let ccx = Gate::x(0).controlled([Control::one(1), Control::one(2)]);
        s.apply_gate(&ccx).unwrap();
        assert_eq!(s.amplitude(0b111), Complex64::new(1.0, 0.0));
        assert_eq!(s.probabilities()[0b110], 0.0);
    }

    #[test]
    fn negative_controls_match_x_wrapping() {
        let mut a = Statevector::new(3).unwrap();
        let mut b = a.clone();
        for q in 0..3 {
            a.apply_gate(&Gate::h(q)).unwrap();
            b.apply_gate(&Gate::h(q)).unwrap();
        }
        a.apply_gate(&Gate::z(0).controlled([Control::zero(1), Control::one(2)]))
            .unwrap();
        b.apply_gate(&Gate::x(1)).unwrap();
        b.apply_gate(&Gate::z(0).controlled([Control::one(1), Control::one(2)]))
            .unwrap();
        b.apply_gate(&Gate::x(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_gates_rejected() {
        let mut s = Statevector::new(2).unwrap();
        assert!(matches!(
            s.apply_gate(&Gate::x(2)),
            Err(SimError::QubitOutOfRange { qubit: 2, .. })
        ));
        assert!(matches!(
            s.apply_gate(&Gate::x(0).controlled([Control::one(0)])),
            Err(SimError::TargetIsControl { .. })
        ));
        assert!(matches!(
            s.apply_gate(&Gate::x(0).controlled([Control::one(1), Control::zero(1)])),
            Err(SimError::DuplicateControl { .. })
        ));
        assert!(matches!(
            s.apply_circuit(&QuantumCircuit::new(3)),
            Err(SimError::QubitCountMismatch { .. })
        ));
    }

    #[test]
    fn empty_circuit_and_hh() {
        let mut s = Statevector::new(2).unwrap();
        let before = s.clone();
        s.apply_circuit(&QuantumCircuit::new(2)).unwrap();
        assert_eq!(s, before);

        let mut c = QuantumCircuit::new(2);
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::h(0)).unwrap();
        s.apply_circuit(&c).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn identity_is_noop() {
        let mut s = Statevector::new(2).unwrap();
        s.apply_gate(&Gate::h(1)).unwrap();
        let before = s.clone();
        s.apply_gate(&Gate::id(0).controlled([Control::one(1)]))
            .unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn probabilities_of_plus() {
        let mut s = Statevector::new(1).unwrap();
        s.apply_gate(&Gate::h(0)).unwrap();
        let p = s.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert_eq!(Statevector::new(1).unwrap().probabilities(), vec![1.0, 0.0]);
    }

    #[test]
    fn sampling_basis_state_is_deterministic() {
        let s = Statevector::basis(4, 11).unwrap();
        for seed in [0, 1, 99] {
            let c = s.sample(500, seed).unwrap();
            assert_eq!(c.get(11), 500);
            assert_eq!(c.total_shots(), 500);
        }
        assert!(matches!(s.sample(0, 0), Err(SimError::ZeroShots)));
    }

    #[test]
    fn sampling_same_seed_same_counts() {
        let mut s = Statevector::new(3).unwrap();
        for q in 0..3 {
            s.apply_gate(&Gate::h(q)).unwrap();
        }
        assert_eq!(s.sample(1000, 42).unwrap(), s.sample(1000, 42).unwrap());
        assert_ne!(s.sample(1000, 42).unwrap(), s.sample(1000, 43).unwrap());
    }

    #[test]
    fn sampling_never_hits_zero_probability() {
        let mut s = Statevector::new(3).unwrap();
        s.apply_gate(&Gate::h(1)).unwrap();
        let c = s.sample(10_000, 3).unwrap();
        for (k, _) in c.iter() {
            assert!(k == 0 || k == 2, "unexpected outcome {k}");
        }
    }

    #[test]
    fn counts_mode_and_marginal() {
        let c = MeasurementCounts::from_counts(3, [(0b101, 5), (0b001, 5), (0b110, 2)]).unwrap();
        assert_eq!(c.total_shots(), 12);
        assert_eq!(c.mode(), Some(0b001));
        let m = c.marginal(1, 2).unwrap();
        assert_eq!(m.get(0b10), 5);
        assert_eq!(m.get(0b00), 5);
        assert_eq!(m.get(0b11), 2);
        assert!(MeasurementCounts::from_counts(2, [(4, 1)]).is_err());
    }

    #[test]
    fn from_amplitudes_checks() {
        assert!(matches!(
            Statevector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]),
            Err(SimError::BadLength { len: 3 })
        ));
        assert!(matches!(
            Statevector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 2]),
            Err(SimError::NotNormalized { .. })
        ));
    }

    #[test]
    fn marginal_probability_sums() {
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let m = marginal_probabilities(&p, 1, 1);
        assert!((m[0] - 0.3).abs() < 1e-15);
        assert!((m[1] - 0.7).abs() < 1e-15);
    }
}
