//! Finite alphabets, context encoding, and stochastic tensors.
//!
//! An order-N stochastic tensor assigns one next-symbol distribution to each
//! of the s^N length-N contexts. Only transitions of the form
//! (r_1,…,r_N) → (r_2,…,r_N, j) exist for such a model; that support
//! constraint is structural here, because a tensor stores nothing but the
//! per-context rows. [`flatten`] exposes the same data as a row-stochastic
//! s^N × s^N matrix over encoded contexts, whose sparsity pattern is the
//! de Bruijn adjacency of order N.

use crate::error::{Error, Result};

pub type Symbol = usize;

/// Row sums may deviate from 1 by at most this much on construction.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Row sums within this of 1 are treated as exact and not renormalized, so
/// that already-normalized rows survive a write/read cycle bit for bit.
const ROW_SUM_EXACT: f64 = 1e-14;

/// The finite state space {0, …, s−1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::AlphabetTooSmall(size));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn check_symbol(&self, symbol: Symbol) -> Result<()> {
        if symbol >= self.size {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size: self.size,
            });
        }
        Ok(())
    }

    /// s^order, guarded against exceeding addressable row storage.
    pub fn num_contexts(&self, order: usize) -> Result<usize> {
        let mut n: usize = 1;
        for _ in 0..order {
            n = n
                .checked_mul(self.size)
                .filter(|&m| m <= 1 << 32)
                .ok_or(Error::DimensionTooLarge {
                    alphabet_size: self.size,
                    order,
                })?;
        }
        Ok(n)
    }
}

/// Big-endian radix-s code of a context word: Σ_i word_i · s^(N−i).
/// Bijective on words of a fixed length.
pub fn encode_context(word: &[Symbol], alphabet: Alphabet) -> Result<u64> {
    let mut code: u64 = 0;
    for &symbol in word {
        alphabet.check_symbol(symbol)?;
        code = code * alphabet.size() as u64 + symbol as u64;
    }
    Ok(code)
}

/// Inverse of [`encode_context`] for words of length `order`.
pub fn decode_context(code: u64, order: usize, alphabet: Alphabet) -> Result<Vec<Symbol>> {
    let expected = alphabet.num_contexts(order)? as u64;
    if code >= expected {
        return Err(Error::ContextOutOfRange { code, expected });
    }
    let s = alphabet.size() as u64;
    let mut word = vec![0; order];
    let mut rest = code;
    for slot in word.iter_mut().rev() {
        *slot = (rest % s) as Symbol;
        rest /= s;
    }
    Ok(word)
}

/// Order-N conditional transition law: one probability row over next symbols
/// per length-N context, rows indexed by encoded context. Order 0 is a single
/// row keyed by the empty context.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticTensor {
    alphabet: Alphabet,
    order: usize,
    rows: Vec<Vec<f64>>,
    positive: bool,
    min_entry: f64,
}

/// Validates and constructs a tensor from one row per encoded context.
///
/// Rows must be nonnegative, finite, and sum to 1 within [`ROW_SUM_TOLERANCE`];
/// a row inside tolerance but not exact is renormalized once here, so that
/// downstream arithmetic sees sums accurate to a few ulps no matter how many
/// projection steps produced the input.
pub fn make_tensor(order: usize, rows: Vec<Vec<f64>>, alphabet: Alphabet) -> Result<StochasticTensor> {
    let expected = alphabet.num_contexts(order)?;
    if rows.len() != expected {
        return Err(Error::RowCountMismatch {
            order,
            expected,
            got: rows.len(),
        });
    }
    let s = alphabet.size();
    let mut rows = rows;
    let mut positive = true;
    let mut min_entry = f64::INFINITY;
    for (context, row) in rows.iter_mut().enumerate() {
        let context = context as u64;
        if row.len() != s {
            return Err(Error::RowLengthMismatch {
                context,
                got: row.len(),
                expected: s,
            });
        }
        for &value in row.iter() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidEntry { context, value });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::RowSumOutOfTolerance { context, sum });
        }
        if (sum - 1.0).abs() > ROW_SUM_EXACT {
            for value in row.iter_mut() {
                *value /= sum;
            }
        }
        for &value in row.iter() {
            positive &= value > 0.0;
            min_entry = min_entry.min(value);
        }
    }
    Ok(StochasticTensor {
        alphabet,
        order,
        rows,
        positive,
        min_entry,
    })
}

impl StochasticTensor {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.size()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_contexts(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, context: u64) -> &[f64] {
        &self.rows[context as usize]
    }

    /// Transition probability for a context given as a word.
    pub fn prob(&self, context: &[Symbol], next: Symbol) -> Result<f64> {
        if context.len() != self.order {
            return Err(Error::WordLengthMismatch {
                got: context.len(),
                expected: self.order,
            });
        }
        self.alphabet.check_symbol(next)?;
        let code = encode_context(context, self.alphabet)?;
        Ok(self.rows[code as usize][next])
    }

    /// True iff every entry is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn min_entry(&self) -> f64 {
        self.min_entry
    }

    /// Applies a permutation of the alphabet to contexts and next symbols.
    pub fn relabel(&self, perm: &[Symbol]) -> Result<StochasticTensor> {
        let s = self.alphabet.size();
        if perm.len() != s {
            return Err(Error::AlphabetMismatch {
                got: perm.len(),
                expected: s,
            });
        }
        let mut seen = vec![false; s];
        for &p in perm {
            self.alphabet.check_symbol(p)?;
            seen[p] = true;
        }
        if seen.iter().any(|&b| !b) {
            return Err(Error::AlphabetMismatch {
                got: perm.len(),
                expected: s,
            });
        }
        let mut rows = vec![vec![0.0; s]; self.rows.len()];
        for (code, row) in self.rows.iter().enumerate() {
            let word = decode_context(code as u64, self.order, self.alphabet)?;
            let image: Vec<Symbol> = word.iter().map(|&x| perm[x]).collect();
            let target = encode_context(&image, self.alphabet)? as usize;
            for (j, &value) in row.iter().enumerate() {
                rows[target][perm[j]] = value;
            }
        }
        make_tensor(self.order, rows, self.alphabet)
    }
}

/// Row-stochastic matrix over encoded length-N contexts. Row u has exactly s
/// structurally-nonzero entries, at the columns (u mod s^(N−1))·s + j.
#[derive(Debug, Clone)]
pub struct FlattenedMatrix {
    alphabet: Alphabet,
    order: usize,
    dim: usize,
    tail_modulus: usize,
    rows: Vec<Vec<f64>>,
    min_entry: f64,
}

/// Arranges an order-N tensor (N ≥ 1) as its transition matrix on length-N
/// words. Entry (u, w) is row_u(j) when w = (u mod s^(N−1))·s + j and zero
/// otherwise.
pub fn flatten(tensor: &StochasticTensor) -> Result<FlattenedMatrix> {
    if tensor.order() == 0 {
        return Err(Error::OrderZero);
    }
    let alphabet = tensor.alphabet();
    let dim = alphabet.num_contexts(tensor.order())?;
    Ok(FlattenedMatrix {
        alphabet,
        order: tensor.order(),
        dim,
        tail_modulus: dim / alphabet.size(),
        rows: tensor.rows().to_vec(),
        min_entry: tensor.min_entry(),
    })
}

impl FlattenedMatrix {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn min_entry(&self) -> f64 {
        self.min_entry
    }

    /// The context reached from `u` on symbol `j`.
    pub fn successor(&self, u: usize, j: Symbol) -> usize {
        (u % self.tail_modulus) * self.alphabet.size() + j
    }

    pub fn entry(&self, u: usize, w: usize) -> f64 {
        let s = self.alphabet.size();
        if u % self.tail_modulus == w / s {
            self.rows[u][w % s]
        } else {
            0.0
        }
    }

    /// Left product v ↦ vP using only the structural nonzeros, O(dim · s).
    pub fn multiply_left(&self, v: &[f64]) -> Vec<f64> {
        let s = self.alphabet.size();
        let mut out = vec![0.0; self.dim];
        for (w, slot) in out.iter_mut().enumerate() {
            let tail = w / s;
            let j = w % s;
            let mut acc = 0.0;
            for a in 0..s {
                let u = a * self.tail_modulus + tail;
                acc += v[u] * self.rows[u][j];
            }
            *slot = acc;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.dim]; self.dim];
        for u in 0..self.dim {
            for (j, &value) in self.rows[u].iter().enumerate() {
                dense[u][self.successor(u, j)] = value;
            }
        }
        dense
    }
}
