//! NEQR encoding of grayscale images.
//!
//! Color qubits occupy indices `0..q` (intensity bit `b` on qubit `b`), and
//! position qubits occupy `q..q + 2n` with the column bits below the row
//! bits. The basis index of pixel `(y, x)` carrying intensity `c` is therefore
//! `(y * 2^n + x) * 2^q + c`, and its MSB-first bitstring reads position bits
//! first, then the intensity bits most-significant first.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::ImageError;
use crate::sim::{Control, Gate, MeasurementCounts, QuantumCircuit, Statevector, MAX_QUBITS};

/// Largest intensity bit depth.
pub const MAX_BIT_DEPTH: u32 = 8;
/// Largest side exponent accepted by the quantum pipelines.
pub const DESK_MAX_SIDE_EXP: u32 = 2;
/// Largest register (q + 2n) accepted by the quantum pipelines.
pub const DESK_MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PixelPosition {
    pub y: usize,
    pub x: usize,
}

impl PixelPosition {
    pub fn new(y: usize, x: usize) -> Self {
        Self { y, x }
    }
}

impl fmt::Display for PixelPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.y, self.x)
    }
}

/// A `2^n x 2^n` grid of `q`-bit intensities, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    n: u32,
    q: u32,
    pixels: Vec<u32>,
}

impl GrayImage {
    /// Builds an image from a row-major pixel list. Enforces the structural
    /// invariants only; the tighter desk-scale cap is checked by
    /// [`validate_image`].
    pub fn new(n: u32, q: u32, pixels: Vec<u32>) -> Result<Self, ImageError> {
        if !(1..=MAX_BIT_DEPTH).contains(&q) {
            return Err(ImageError::BitDepth { q });
        }
        if n == 0 {
            return Err(ImageError::SideNotPowerOfTwo { side: 1 });
        }
        let qubits = q as usize + 2 * n as usize;
        if qubits > MAX_QUBITS {
            return Err(ImageError::TooLarge {
                n,
                q,
                qubits,
                cap: MAX_QUBITS,
            });
        }
        let side = 1usize << n;
        if pixels.len() != side * side {
            return Err(ImageError::PixelCount {
                expected: side * side,
                found: pixels.len(),
            });
        }
        let max = (1u32 << q) - 1;
        if let Some((i, &value)) = pixels.iter().enumerate().find(|(_, &v)| v > max) {
            return Err(ImageError::IntensityOverflow {
                y: i / side,
                x: i % side,
                value,
                max,
            });
        }
        Ok(Self { n, q, pixels })
    }

    /// Builds an image from rows. The grid must be square with a power-of-two
    /// side of at least 2; nothing is padded or truncated.
    pub fn from_rows<R: AsRef<[u32]>>(q: u32, rows: &[R]) -> Result<Self, ImageError> {
        let side = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.as_ref().len() != side {
                return Err(ImageError::NotSquare {
                    rows: side,
                    row,
                    len: r.as_ref().len(),
                });
            }
        }
        if side < 2 || !side.is_power_of_two() {
            return Err(ImageError::SideNotPowerOfTwo { side });
        }
        let n = side.trailing_zeros();
        let pixels = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(n, q, pixels)
    }

    pub fn side_exp(&self) -> u32 {
        self.n
    }

    pub fn bit_depth(&self) -> u32 {
        self.q
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn max_intensity(&self) -> u32 {
        (1 << self.q) - 1
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn get(&self, pos: PixelPosition) -> u32 {
        self.pixels[pos.y * self.side() + pos.x]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.pixels.chunks(self.side())
    }

    pub fn layout(&self) -> NeqrLayout {
        NeqrLayout::new(self.n, self.q)
    }

    /// Row-major positions paired with their intensities.
    pub fn iter(&self) -> impl Iterator<Item = (PixelPosition, u32)> + '_ {
        let side = self.side();
        self.pixels
            .iter()
            .enumerate()
            .map(move |(i, &v)| (PixelPosition::new(i / side, i % side), v))
    }

    pub fn min_intensity(&self) -> u32 {
        self.pixels.iter().copied().min().unwrap_or(0)
    }

    pub fn positions_with(&self, intensity: u32) -> Vec<PixelPosition> {
        self.iter()
            .filter(|&(_, v)| v == intensity)
            .map(|(p, _)| p)
            .collect()
    }
}

/// Checks that an image is small enough for the quantum pipelines:
/// `n <= 2` and `q + 2n <= 12`.
pub fn validate_image(image: &GrayImage) -> Result<(), ImageError> {
    let layout = image.layout();
    if image.n > DESK_MAX_SIDE_EXP || layout.total_qubits() > DESK_MAX_QUBITS {
        return Err(ImageError::TooLarge {
            n: image.n,
            q: image.q,
            qubits: layout.total_qubits(),
            cap: DESK_MAX_QUBITS,
        });
    }
    Ok(())
}

/// Qubit layout for an image of side `2^n` with `q` intensity bits.
///
/// `q` may be zero, which describes a bare position register used for plain
/// index search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NeqrLayout {
    n: u32,
    q: u32,
}

impl NeqrLayout {
    pub fn new(n: u32, q: u32) -> Self {
        Self { n, q }
    }

    pub fn position_only(n: u32) -> Self {
        Self { n, q: 0 }
    }

    pub fn side_exp(&self) -> u32 {
        self.n
    }

    pub fn bit_depth(&self) -> u32 {
        self.q
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn num_pixels(&self) -> usize {
        1 << (2 * self.n)
    }

    pub fn total_qubits(&self) -> usize {
        self.q as usize + 2 * self.n as usize
    }

    pub fn color_qubits(&self) -> std::ops::Range<usize> {
        0..self.q as usize
    }

    pub fn position_offset(&self) -> usize {
        self.q as usize
    }

    pub fn position_qubits(&self) -> std::ops::Range<usize> {
        self.q as usize..self.total_qubits()
    }

    pub fn contains(&self, pos: PixelPosition) -> bool {
        pos.y < self.side() && pos.x < self.side()
    }

    /// Linear position `y * 2^n + x`.
    pub fn position_index(&self, pos: PixelPosition) -> usize {
        pos.y * self.side() + pos.x
    }

    pub fn position_at(&self, linear: usize) -> PixelPosition {
        PixelPosition::new(linear / self.side(), linear % self.side())
    }

    pub fn basis_index(&self, pos: PixelPosition, color: u32) -> usize {
        (self.position_index(pos) << self.q) | color as usize
    }

    pub fn split(&self, index: usize) -> (PixelPosition, u32) {
        let color = (index & ((1usize << self.q) - 1)) as u32;
        (self.position_at(index >> self.q), color)
    }

    /// MSB-first rendering of a full basis index: position bits, then color.
    pub fn bitstring(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.total_qubits())
    }

    /// MSB-first rendering of a linear position (row bits, then column bits).
    pub fn position_bitstring(&self, linear: usize) -> String {
        format!("{:0width$b}", linear, width = 2 * self.n as usize)
    }
}

/// Preparation circuit for the NEQR state of `image`.
///
/// A Hadamard on each position qubit, then for every pixel in row-major order
/// and every set intensity bit (ascending), an X on that color qubit
/// controlled on the full position register. Position bits equal to zero use
/// negative-polarity controls. Zero bits get no gate.
pub fn build_neqr_circuit(image: &GrayImage) -> Result<QuantumCircuit, ImageError> {
    validate_image(image)?;
    let layout = image.layout();
    let mut circuit = QuantumCircuit::new(layout.total_qubits());
    let push = |c: &mut QuantumCircuit, g: Gate| c.push(g).expect("gate indices follow the layout");

    for qubit in layout.position_qubits() {
        push(&mut circuit, Gate::h(qubit));
    }
    for (pos, value) in image.iter() {
        let linear = layout.position_index(pos);
        let controls: Vec<Control> = layout
            .position_qubits()
            .enumerate()
            .map(|(bit, qubit)| Control {
                qubit,
                on_one: (linear >> bit) & 1 == 1,
            })
            .collect();
        for bit in layout.color_qubits() {
            if (value >> bit) & 1 == 1 {
                push(
                    &mut circuit,
                    Gate::x(bit).controlled(controls.iter().copied()),
                );
            }
        }
    }
    Ok(circuit)
}

/// The normalized NEQR state written down directly: amplitude `1/2^n` on the
/// basis index of every pixel, zero elsewhere.
pub fn analytic_neqr_state(image: &GrayImage) -> Result<Statevector, ImageError> {
    validate_image(image)?;
    let layout = image.layout();
    let amp = 1.0 / layout.side() as f64;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << layout.total_qubits()];
    for (pos, value) in image.iter() {
        amplitudes[layout.basis_index(pos, value)] = Complex64::new(amp, 0.0);
    }
    Ok(Statevector::from_amplitudes(amplitudes).expect("NEQR amplitudes are normalized"))
}

/// Recovers an image from full-register measurement counts by taking, for
/// every position, the intensity observed most often there (ties go to the
/// lower intensity).
pub fn decode_from_counts(
    counts: &MeasurementCounts,
    layout: NeqrLayout,
) -> Result<GrayImage, ImageError> {
    if counts.num_qubits() != layout.total_qubits() {
        return Err(ImageError::LayoutMismatch {
            expected: layout.total_qubits(),
            found: counts.num_qubits(),
        });
    }
    // linear position -> (best count, intensity)
    let mut best: BTreeMap<usize, (u64, u32)> = BTreeMap::new();
    for (index, count) in counts.iter() {
        let (pos, color) = layout.split(index);
        let entry = best.entry(layout.position_index(pos)).or_insert((0, color));
        if count > entry.0 || (count == entry.0 && color < entry.1) {
            *entry = (count, color);
        }
    }
    let missing: Vec<PixelPosition> = (0..layout.num_pixels())
        .filter(|p| !best.contains_key(p))
        .map(|p| layout.position_at(p))
        .collect();
    if !missing.is_empty() {
        return Err(ImageError::IncompleteReadout { missing });
    }
    GrayImage::new(
        layout.side_exp(),
        layout.bit_depth(),
        best.values().map(|&(_, c)| c).collect(),
    )
}
