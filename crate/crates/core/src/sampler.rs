//! Seeded sampling: orders from a finite weight vector, tensors from
//! Dirichlet priors, trajectories from kernel sequences.
//!
//! Everything is driven by ChaCha12 streams derived from a single seed, so a
//! whole simulation is reproducible from one integer. Stage streams keep the
//! three draws independent: changing the trajectory length never perturbs the
//! sampled tensor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::projection::{kernel_sequence, KernelSequence};
use crate::tensor::{encode_context, make_tensor, Alphabet, StochasticTensor, Symbol};

/// Stream ids for the stages of a full simulation.
pub const ORDER_STREAM: u64 = 0;
pub const TENSOR_STREAM: u64 = 1;
pub const TRAJECTORY_STREAM: u64 = 2;

/// Generator for one stage: same seed, distinct stream per stage.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Finite measure on orders 0..=max_order. Weights are kept as given; the
/// normalized view is what sampling and posterior mixing consume.
#[derive(Debug, Clone)]
pub struct OrderDistribution {
    weights: Vec<f64>,
}

impl OrderDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::ZeroMass);
        }
        let mut total = 0.0;
        for (order, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight { order, value: w });
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(OrderDistribution { weights })
    }

    /// Mass 1 split evenly over orders 0..=max_order.
    pub fn uniform(max_order: usize) -> Self {
        let w = 1.0 / (max_order + 1) as f64;
        OrderDistribution {
            weights: vec![w; max_order + 1],
        }
    }

    pub fn max_order(&self) -> usize {
        self.weights.len() - 1
    }

    /// Raw weight of an order; zero beyond the truncation point.
    pub fn mass(&self, order: usize) -> f64 {
        self.weights.get(order).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Probability vector proportional to the weights.
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.total_mass();
        self.weights.iter().map(|w| w / total).collect()
    }
}

/// Independent Dirichlet priors on the rows of a stochastic tensor, one row
/// of concentration parameters per context.
#[derive(Debug, Clone)]
pub struct DirichletTensorPrior {
    alphabet: Alphabet,
    order: usize,
    alphas: Vec<Vec<f64>>,
}

impl DirichletTensorPrior {
    pub fn new(order: usize, alphas: Vec<Vec<f64>>, alphabet: Alphabet) -> Result<Self> {
        let contexts = alphabet.num_contexts(order)?;
        if alphas.len() != contexts {
            return Err(Error::RowCountMismatch {
                order,
                got: alphas.len(),
                expected: contexts,
            });
        }
        for (context, row) in alphas.iter().enumerate() {
            if row.len() != alphabet.size() {
                return Err(Error::RowLengthMismatch {
                    context: context as u64,
                    got: row.len(),
                    expected: alphabet.size(),
                });
            }
            for &a in row {
                if !a.is_finite() || a <= 0.0 {
                    return Err(Error::InvalidAlpha {
                        context: context as u64,
                        value: a,
                    });
                }
            }
        }
        Ok(DirichletTensorPrior {
            alphabet,
            order,
            alphas,
        })
    }

    /// Same concentration in every cell.
    pub fn symmetric(order: usize, alpha: f64, alphabet: Alphabet) -> Result<Self> {
        let contexts = alphabet.num_contexts(order)?;
        let rows = vec![vec![alpha; alphabet.size()]; contexts];
        DirichletTensorPrior::new(order, rows, alphabet)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphas(&self) -> &[Vec<f64>] {
        &self.alphas
    }

    pub fn alpha_row(&self, context: u64) -> &[f64] {
        &self.alphas[context as usize]
    }

    /// Tensor of row means alpha / sum(alpha).
    pub fn mean_tensor(&self) -> Result<StochasticTensor> {
        let rows = self
            .alphas
            .iter()
            .map(|row| {
                let total: f64 = row.iter().sum();
                row.iter().map(|a| a / total).collect()
            })
            .collect();
        make_tensor(self.order, rows, self.alphabet)
    }
}

/// Symbol sequence over a fixed alphabet. Construction validates every
/// symbol, so downstream counting never re-checks.
#[derive(Debug, Clone)]
pub struct Trajectory {
    alphabet: Alphabet,
    symbols: Vec<Symbol>,
}

impl Trajectory {
    pub fn new(symbols: Vec<Symbol>, alphabet: Alphabet) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        for &x in &symbols {
            alphabet.check_symbol(x)?;
        }
        Ok(Trajectory { alphabet, symbols })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// First m symbols as a new trajectory.
    pub fn prefix(&self, m: usize) -> Result<Trajectory> {
        if m == 0 || m > self.len() {
            return Err(Error::TrajectoryTooShort {
                n: self.len(),
                order: m,
            });
        }
        Ok(Trajectory {
            alphabet: self.alphabet,
            symbols: self.symbols[..m].to_vec(),
        })
    }
}

/// Draws an order by inversion on the normalized weights.
pub fn sample_order(nu: &OrderDistribution, rng: &mut ChaCha12Rng) -> usize {
    let probs = nu.normalized();
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (order, p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return order;
        }
    }
    nu.max_order()
}

/// Draws one tensor row per context: gamma variates normalized to sum one.
/// Context rows are drawn in code order, so the stream position after k rows
/// is independent of later rows.
pub fn sample_tensor(prior: &DirichletTensorPrior, rng: &mut ChaCha12Rng) -> Result<StochasticTensor> {
    let s = prior.alphabet().size();
    let mut rows = Vec::with_capacity(prior.alphas().len());
    for alpha_row in prior.alphas() {
        let mut row = vec![0.0; s];
        loop {
            let mut total = 0.0;
            for (cell, &a) in row.iter_mut().zip(alpha_row) {
                let gamma = Gamma::new(a, 1.0).expect("positive shape");
                *cell = gamma.sample(rng);
                total += *cell;
            }
            // Total underflows to zero only for tiny concentrations; redraw
            // rather than emit a non-row.
            if total > 0.0 {
                for cell in row.iter_mut() {
                    *cell /= total;
                }
                break;
            }
        }
        rows.push(row);
    }
    make_tensor(prior.order(), rows, prior.alphabet())
}

/// Draws one symbol from a probability row by inversion.
fn sample_row(row: &[f64], rng: &mut ChaCha12Rng) -> Symbol {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (symbol, p) in row.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return symbol;
        }
    }
    row.len() - 1
}

/// Generates n symbols: the k-th from the kernel of order min(k−1, N)
/// conditioned on the previous symbols, so the first N symbols burn in
/// through the lower-order kernels.
pub fn sample_trajectory(seq: &KernelSequence, n: usize, rng: &mut ChaCha12Rng) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let alphabet = seq.alphabet();
    let mut symbols: Vec<Symbol> = Vec::with_capacity(n);
    for k in 0..n {
        let order = k.min(seq.top_order());
        let context = &symbols[k - order..k];
        let code = encode_context(context, alphabet)?;
        let symbol = sample_row(seq.kernel(order).row(code), rng);
        symbols.push(symbol);
    }
    Trajectory::new(symbols, alphabet)
}

/// Model drawn by the hierarchical scheme: an order, a tensor of that order,
/// and its induced kernel sequence.
#[derive(Debug, Clone)]
pub struct SampledModel {
    pub order: usize,
    pub tensor: StochasticTensor,
    pub sequence: KernelSequence,
}

/// Full simulation from one seed: order from `nu` (stream 0), tensor from
/// the matching prior (stream 1), trajectory of length n (stream 2).
pub fn sample_scheme(
    nu: &OrderDistribution,
    priors: &[DirichletTensorPrior],
    n: usize,
    seed: u64,
) -> Result<(SampledModel, Trajectory)> {
    let order = sample_order(nu, &mut stream_rng(seed, ORDER_STREAM));
    let prior = priors.get(order).ok_or(Error::MissingPrior { order })?;
    if prior.order() != order {
        return Err(Error::MissingPrior { order });
    }
    let tensor = sample_tensor(prior, &mut stream_rng(seed, TENSOR_STREAM))?;
    let sequence = if order == 0 {
        KernelSequence::new(vec![tensor.clone()])?
    } else {
        kernel_sequence(&tensor)?
    };
    let trajectory = sample_trajectory(&sequence, n, &mut stream_rng(seed, TRAJECTORY_STREAM))?;
    Ok((
        SampledModel {
            order,
            tensor,
            sequence,
        },
        trajectory,
    ))
}
