//! Order reduction for stochastic tensors.
//!
//! A positive order-N tensor determines a unique stationary law on length-N
//! words (the left Perron eigenvector of its flattening). Renormalizing that
//! vector along last-symbol slices yields the order-(N−1) tensor of the same
//! process; iterating walks a tensor down to order 0. The full chain
//! (κ_0, …, κ_N) is the finite description of the stationary process and is
//! what the sampler and the cylinder calculus consume.
//!
//! For binary order-3 tensors the same reduction has an explicit algebraic
//! solution; [`closed_form_binary_order3`] evaluates it literally and serves
//! as an independent cross-check of the eigenvector pipeline.

use crate::error::{Error, Result};
use crate::tensor::{flatten, make_tensor, Alphabet, FlattenedMatrix, StochasticTensor};

/// Residual bound every accepted stationary vector satisfies.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Dimension at or below which the dense solve is used instead of power
/// iteration.
const DENSE_DIM_LIMIT: usize = 1024;

/// Relative-change stopping threshold for power iteration.
const POWER_STOP: f64 = 1e-14;

/// Iteration cap for power iteration.
const POWER_CAP: usize = 1_000_000;

/// Polish cap: cheap fixed-point sweeps applied after the dense solve to
/// restore relative accuracy on small components, which elimination can
/// contaminate with absolute error from large ones.
const POLISH_CAP: usize = 64;

/// Entries below this are treated as non-positive; denormals this small
/// collapse the renormalization denominators.
const MIN_POSITIVE_ENTRY: f64 = 1e-300;

/// Stationary law on length-N words: the unique probability row vector with
/// vP = v for the flattened matrix P it was derived from.
#[derive(Debug, Clone)]
pub struct StationaryVector {
    alphabet: Alphabet,
    order: usize,
    weights: Vec<f64>,
    residual: f64,
}

impl StationaryVector {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ‖vP − v‖_∞ measured at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn check_positive(matrix: &FlattenedMatrix) -> Result<()> {
    if matrix.min_entry() < MIN_POSITIVE_ENTRY {
        return Err(Error::NonPositiveTensor {
            min: matrix.min_entry(),
        });
    }
    Ok(())
}

/// Normalizes, checks positivity, and enforces the residual bound.
fn finalize(matrix: &FlattenedMatrix, mut v: Vec<f64>) -> Result<StationaryVector> {
    let sum: f64 = v.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::DegenerateStationaryVector);
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::DegenerateStationaryVector);
    }
    let image = matrix.multiply_left(&v);
    let residual = v
        .iter()
        .zip(image.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual >= RESIDUAL_TOLERANCE {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(StationaryVector {
        alphabet: matrix.alphabet(),
        order: matrix.order(),
        weights: v,
        residual,
    })
}

/// Fixed-point sweeps v ← normalize(vP) until the iterate stops moving at
/// machine precision.
fn polish(matrix: &FlattenedMatrix, mut v: Vec<f64>, cap: usize) -> Vec<f64> {
    for _ in 0..cap {
        let mut next = matrix.multiply_left(&v);
        let sum: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= sum;
        }
        let vmax = next.iter().cloned().fold(0.0, f64::max);
        let delta = v
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta <= f64::EPSILON * vmax {
            break;
        }
    }
    v
}

/// Unique stationary vector of a flattened positive tensor. Dispatches to the
/// dense solve for dimension ≤ 1024 and to power iteration above.
pub fn stationary_vector(matrix: &FlattenedMatrix) -> Result<StationaryVector> {
    if matrix.dim() <= DENSE_DIM_LIMIT {
        stationary_vector_dense(matrix)
    } else {
        stationary_vector_power(matrix)
    }
}

/// Dense path: solves (Pᵀ − I)v = 0 with the last equation replaced by the
/// all-ones normalization, then polishes the small components.
pub fn stationary_vector_dense(matrix: &FlattenedMatrix) -> Result<StationaryVector> {
    check_positive(matrix)?;
    let dim = matrix.dim();
    let dense = matrix.to_dense();
    let mut a = vec![vec![0.0; dim]; dim];
    for (i, row) in a.iter_mut().enumerate().take(dim - 1) {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = dense[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[dim - 1] = vec![1.0; dim];
    let mut b = vec![0.0; dim];
    b[dim - 1] = 1.0;
    let v = solve_linear(a, b)?;
    let v = polish(matrix, v, POLISH_CAP);
    finalize(matrix, v)
}

/// Iterative path: power iteration from the uniform vector with a
/// relative-change stop of 1e−14 and a hard cap of 10^6 sweeps.
pub fn stationary_vector_power(matrix: &FlattenedMatrix) -> Result<StationaryVector> {
    check_positive(matrix)?;
    let dim = matrix.dim();
    let mut v = vec![1.0 / dim as f64; dim];
    for _ in 0..POWER_CAP {
        let mut next = matrix.multiply_left(&v);
        let sum: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= sum;
        }
        let vmax = next.iter().cloned().fold(0.0, f64::max);
        let delta = v
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta <= POWER_STOP * vmax {
            return finalize(matrix, v);
        }
    }
    Err(Error::NonConvergence(POWER_CAP))
}

/// Gaussian elimination with partial pivoting. Consumes its inputs.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        if a[pivot_row][col] == 0.0 {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot_row = a[col].clone();
        for row in col + 1..n {
            let factor = a[row][col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (k, &p) in pivot_row.iter().enumerate().skip(col) {
                a[row][k] -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Renormalizes a stationary law on length-N words into the order-(N−1)
/// tensor: entry (t_1…t_{N−1} → t_N) is v_t divided by Σ_j v_{(j,t_1…t_{N−1})}.
pub fn renormalize_stationary(v: &StationaryVector) -> Result<StochasticTensor> {
    if v.order() == 0 {
        return Err(Error::OrderZero);
    }
    if v.weights().iter().any(|&x| x <= 0.0) {
        return Err(Error::DegenerateStationaryVector);
    }
    let s = v.alphabet().size();
    let m = v.weights().len() / s;
    let weights = v.weights();
    let mut rows = Vec::with_capacity(m);
    for c in 0..m {
        let den: f64 = (0..s).map(|j| weights[j * m + c]).sum();
        if den <= 0.0 {
            return Err(Error::ZeroDenominator);
        }
        rows.push((0..s).map(|x| weights[c * s + x] / den).collect());
    }
    make_tensor(v.order() - 1, rows, v.alphabet())
}

/// One projection step: order N to order N−1 through the stationary vector.
pub fn project_down(tensor: &StochasticTensor) -> Result<StochasticTensor> {
    let matrix = flatten(tensor)?;
    let v = stationary_vector(&matrix)?;
    renormalize_stationary(&v)
}

/// Composed projection from the tensor's order down to `target_order`.
/// Equal orders return the tensor unchanged.
pub fn project_chain(tensor: &StochasticTensor, target_order: usize) -> Result<StochasticTensor> {
    if target_order > tensor.order() {
        return Err(Error::TargetAboveSource {
            target: target_order,
            available: tensor.order(),
        });
    }
    let mut current = tensor.clone();
    while current.order() > target_order {
        current = project_down(&current)?;
    }
    Ok(current)
}

/// Chain (κ_0, …, κ_N) of tensors, one per order, with κ_N on top.
///
/// Construction validates shape only; sequences produced by
/// [`kernel_sequence`] are projection-consistent by construction, and
/// [`KernelSequence::consistency_residual`] measures how far an arbitrary
/// sequence is from that. Deliberately inconsistent sequences are
/// constructible because the stationarity checker must be able to see them.
#[derive(Debug, Clone)]
pub struct KernelSequence {
    alphabet: Alphabet,
    kernels: Vec<StochasticTensor>,
}

impl KernelSequence {
    pub fn new(kernels: Vec<StochasticTensor>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::EmptyKernelSequence);
        }
        let alphabet = kernels[0].alphabet();
        for (position, kernel) in kernels.iter().enumerate() {
            if kernel.order() != position {
                return Err(Error::KernelOrderMismatch {
                    position,
                    got: kernel.order(),
                });
            }
            if kernel.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch {
                    got: kernel.alphabet().size(),
                    expected: alphabet.size(),
                });
            }
        }
        Ok(KernelSequence { alphabet, kernels })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn top_order(&self) -> usize {
        self.kernels.len() - 1
    }

    pub fn top(&self) -> &StochasticTensor {
        self.kernels.last().unwrap()
    }

    pub fn kernel(&self, order: usize) -> &StochasticTensor {
        &self.kernels[order]
    }

    pub fn kernels(&self) -> &[StochasticTensor] {
        &self.kernels
    }

    /// Max entrywise distance between each kernel and the projection of the
    /// next one up; zero-order sequences are trivially consistent.
    pub fn consistency_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for m in 0..self.top_order() {
            let projected = project_down(&self.kernels[m + 1])?;
            for (row_p, row_k) in projected.rows().iter().zip(self.kernels[m].rows()) {
                for (a, b) in row_p.iter().zip(row_k) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        Ok(worst)
    }
}

/// Full projection chain of a positive tensor, top order included.
pub fn kernel_sequence(tensor: &StochasticTensor) -> Result<KernelSequence> {
    let mut kernels = vec![tensor.clone()];
    while kernels.last().unwrap().order() > 0 {
        let next = project_down(kernels.last().unwrap())?;
        kernels.push(next);
    }
    kernels.reverse();
    KernelSequence::new(kernels)
}

/// Direct algebraic solution of the order-3 → 0 reduction for s = 2.
///
/// The stationarity equations for a binary order-3 tensor admit closed-form
/// solutions for κ_2, κ_1, κ_0; this evaluates them literally, including the
/// two positive constants C_1, C_2 that parametrize κ_1 and κ_0 (exposed via
/// [`closed_form_constants`]). Kept free of the eigenvector machinery so the
/// two routes stay independent checks of each other.
pub fn closed_form_binary_order3(
    tensor: &StochasticTensor,
) -> Result<(StochasticTensor, StochasticTensor, StochasticTensor)> {
    let (kappa2, c1, c2) = closed_form_kappa2(tensor)?;
    let alphabet = tensor.alphabet();
    let kappa1 = make_tensor(
        1,
        vec![
            vec![c1 / (1.0 + c1), 1.0 / (1.0 + c1)],
            vec![1.0 / (1.0 + c2), c2 / (1.0 + c2)],
        ],
        alphabet,
    )?;
    let kappa0 = make_tensor(
        0,
        vec![vec![
            1.0 / (1.0 + (1.0 + c2) / (1.0 + c1)),
            1.0 / (1.0 + (1.0 + c1) / (1.0 + c2)),
        ]],
        alphabet,
    )?;
    Ok((kappa2, kappa1, kappa0))
}

/// The constants C_1, C_2 of the binary order-3 closed form.
pub fn closed_form_constants(tensor: &StochasticTensor) -> Result<(f64, f64)> {
    let (_, c1, c2) = closed_form_kappa2(tensor)?;
    Ok((c1, c2))
}

fn closed_form_kappa2(tensor: &StochasticTensor) -> Result<(StochasticTensor, f64, f64)> {
    if tensor.alphabet_size() != 2 {
        return Err(Error::AlphabetMismatch {
            got: tensor.alphabet_size(),
            expected: 2,
        });
    }
    if tensor.order() != 3 {
        return Err(Error::WordLengthMismatch {
            got: tensor.order(),
            expected: 3,
        });
    }
    if !tensor.is_positive() {
        return Err(Error::NonPositiveTensor {
            min: tensor.min_entry(),
        });
    }
    // Transition probabilities indexed by context word; q(c, j) is the
    // probability of symbol j after the three-symbol context c.
    let q = |context: usize, j: usize| tensor.row(context as u64)[j];
    // Contexts in encoded order: 000=0, 001=1, 010=2, 011=3, 100=4, 101=5,
    // 110=6, 111=7.
    let d = 1.0 + (q(5, 0) - q(1, 0)) * (q(2, 0) - q(6, 0));

    let den00 = q(4, 0) + q(0, 1);
    let row00 = vec![q(4, 0) / den00, q(0, 1) / den00];
    let row01 = vec![
        (q(5, 0) + q(6, 0) * (q(1, 0) - q(5, 0))) / d,
        (q(5, 1) - q(2, 0) * (q(1, 0) - q(5, 0))) / d,
    ];
    let row10 = vec![
        (q(6, 0) + q(5, 0) * (q(2, 0) - q(6, 0))) / d,
        (q(6, 1) - q(1, 0) * (q(2, 0) - q(6, 0))) / d,
    ];
    let den11 = q(7, 0) + q(3, 1);
    let row11 = vec![q(7, 0) / den11, q(3, 1) / den11];

    let c1 = (den00 / d) * ((q(6, 0) + q(5, 0) * (q(2, 0) - q(6, 0))) / q(0, 1));
    let c2 = (den11 / d) * ((q(5, 1) - q(2, 0) * (q(1, 0) - q(5, 0))) / q(7, 0));

    let kappa2 = make_tensor(2, vec![row00, row01, row10, row11], tensor.alphabet())?;
    Ok((kappa2, c1, c2))
}
