//! Gram counting, empirical estimators, and the symmetry defect statistics
//! that power order inference.
//!
//! Counts are exact integers over an explicit window span. The defect of
//! order N compares, for every ordered symbol pair (i, j) and every tail word
//! s of length N, the cross products c_N(i s_<) c_{N+1}(j s) against
//! c_N(j s_<) c_{N+1}(i s), where s_< drops the last letter of s; under a
//! stationary law of order at most N the two products estimate the same
//! quantity. Each term contributes |difference|^N and the total is carried in
//! log space. Only tails that actually occur as suffixes of observed
//! (N+1)-grams can produce a nonzero difference, so enumeration stays
//! proportional to the data size rather than s^N.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, LogValue};
use crate::sampler::Trajectory;
use crate::tensor::{encode_context, Alphabet, StochasticTensor};

/// Exact counts of fixed-length grams over a window span.
#[derive(Debug, Clone)]
pub struct GramTable {
    alphabet: Alphabet,
    gram_length: usize,
    span: usize,
    counts: BTreeMap<u64, u64>,
}

impl GramTable {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn gram_length(&self) -> usize {
        self.gram_length
    }

    /// Number of windows counted; equals the sum of all counts.
    pub fn span(&self) -> usize {
        self.span
    }

    pub fn get(&self, code: u64) -> u64 {
        self.counts.get(&code).copied().unwrap_or(0)
    }

    /// Observed grams in code order.
    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }
}

/// Counts grams of the given length over the first `span` windows of x:
/// window k covers x[k..k+gram_length] for k < span. A span of zero yields an
/// empty table; otherwise the last window must fit inside the trajectory.
pub fn count_grams(x: &Trajectory, gram_length: usize, span: usize) -> Result<GramTable> {
    if gram_length == 0 {
        return Err(Error::GramLengthZero);
    }
    let alphabet = x.alphabet();
    alphabet.num_contexts(gram_length)?;
    let n = x.len();
    let max_span = (n + 1).saturating_sub(gram_length);
    if span > max_span {
        return Err(Error::SpanTooLarge {
            span,
            gram_length,
            max: max_span,
        });
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    if span == 0 {
        return Ok(GramTable {
            alphabet,
            gram_length,
            span,
            counts,
        });
    }
    let s = alphabet.size() as u64;
    let modulus = alphabet.num_contexts(gram_length - 1)? as u64;
    let symbols = x.symbols();
    let mut code = encode_context(&symbols[..gram_length], alphabet)?;
    *counts.entry(code).or_insert(0) += 1;
    for k in 1..span {
        code = (code % modulus) * s + symbols[k + gram_length - 1] as u64;
        *counts.entry(code).or_insert(0) += 1;
    }
    Ok(GramTable {
        alphabet,
        gram_length,
        span,
        counts,
    })
}

/// Relative frequencies of grams over every available window.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    alphabet: Alphabet,
    gram_length: usize,
    probs: BTreeMap<u64, f64>,
}

impl EmpiricalMeasure {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn gram_length(&self) -> usize {
        self.gram_length
    }

    pub fn mass(&self, code: u64) -> f64 {
        self.probs.get(&code).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &BTreeMap<u64, f64> {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }
}

/// Empirical distribution of grams of the given length, using all
/// n − gram_length + 1 windows.
pub fn empirical_measure(x: &Trajectory, gram_length: usize) -> Result<EmpiricalMeasure> {
    let n = x.len();
    if gram_length == 0 {
        return Err(Error::GramLengthZero);
    }
    if gram_length > n {
        return Err(Error::TrajectoryTooShort {
            n,
            order: gram_length,
        });
    }
    let span = n + 1 - gram_length;
    let table = count_grams(x, gram_length, span)?;
    let probs = table
        .counts()
        .iter()
        .map(|(&code, &c)| (code, c as f64 / span as f64))
        .collect();
    Ok(EmpiricalMeasure {
        alphabet: x.alphabet(),
        gram_length,
        probs,
    })
}

/// Transition estimate defined only on contexts that occur in the data.
#[derive(Debug, Clone)]
pub struct PartialTensor {
    alphabet: Alphabet,
    order: usize,
    rows: BTreeMap<u64, Vec<f64>>,
}

impl PartialTensor {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn row(&self, context: u64) -> Option<&[f64]> {
        self.rows.get(&context).map(|r| r.as_slice())
    }

    /// Observed contexts and their estimated rows, in code order.
    pub fn rows(&self) -> &BTreeMap<u64, Vec<f64>> {
        &self.rows
    }

    /// Largest entrywise deviation from a reference tensor, over the
    /// contexts this estimate covers.
    pub fn sup_error(&self, reference: &StochasticTensor) -> Result<f64> {
        if reference.alphabet().size() != self.alphabet.size() {
            return Err(Error::AlphabetMismatch {
                got: reference.alphabet().size(),
                expected: self.alphabet.size(),
            });
        }
        if reference.order() != self.order {
            return Err(Error::KernelOrderMismatch {
                position: self.order,
                got: reference.order(),
            });
        }
        let mut worst = 0.0f64;
        for (&context, row) in &self.rows {
            let target = reference.row(context);
            for (a, b) in row.iter().zip(target) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

/// Maximum likelihood transition estimate of the given order: counts of
/// (order+1)-grams divided by counts of their contexts, both over the span
/// n − order so every counted context has a counted continuation and present
/// rows sum to one.
pub fn estimate_tensor(x: &Trajectory, order: usize) -> Result<PartialTensor> {
    let n = x.len();
    if n <= order {
        return Err(Error::TrajectoryTooShort { n, order });
    }
    let alphabet = x.alphabet();
    let s = alphabet.size() as u64;
    let span = n - order;
    let mut rows: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    if order == 0 {
        let ones = count_grams(x, 1, span)?;
        let mut row = vec![0.0; alphabet.size()];
        for (&code, &c) in ones.counts() {
            row[code as usize] = c as f64 / span as f64;
        }
        rows.insert(0, row);
    } else {
        let extended = count_grams(x, order + 1, span)?;
        let contexts = count_grams(x, order, span)?;
        for (&context, &total) in contexts.counts() {
            let mut row = vec![0.0; alphabet.size()];
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = extended.get(context * s + j as u64) as f64 / total as f64;
            }
            rows.insert(context, row);
        }
    }
    Ok(PartialTensor {
        alphabet,
        order,
        rows,
    })
}

/// One defect summand in log space.
#[derive(Debug, Clone)]
pub struct SymmetryDefect {
    order: usize,
    total: LogValue,
}

impl SymmetryDefect {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn total(&self) -> LogValue {
        self.total
    }

    pub fn ln(&self) -> f64 {
        self.total.ln()
    }

    pub fn is_zero(&self) -> bool {
        self.total.is_zero()
    }

    /// Linear value; overflows to infinity for large data, use [`ln`].
    pub fn value(&self) -> f64 {
        self.total.value()
    }
}

fn defect_delta(
    n_table: &GramTable,
    extended: &GramTable,
    prefix_pow: u64,
    full_pow: u64,
    i: usize,
    j: usize,
    tail: u64,
) -> i128 {
    let a = n_table.get(i as u64 * prefix_pow + tail / (full_pow / prefix_pow)) as i128;
    let b = n_table.get(j as u64 * prefix_pow + tail / (full_pow / prefix_pow)) as i128;
    let a_ext = extended.get(i as u64 * full_pow + tail) as i128;
    let b_ext = extended.get(j as u64 * full_pow + tail) as i128;
    a * b_ext - b * a_ext
}

/// |c_N(i s_<) c_{N+1}(j s) − c_N(j s_<) c_{N+1}(i s)|^N for one tail word s,
/// with counts over the span n − N. Exactly zero differences come back as the
/// zero log value.
pub fn symmetry_defect_term(
    x: &Trajectory,
    order: usize,
    i: usize,
    j: usize,
    tail: &[usize],
) -> Result<LogValue> {
    if order == 0 {
        return Err(Error::OrderZero);
    }
    let n = x.len();
    if n <= order {
        return Err(Error::TrajectoryTooShort { n, order });
    }
    let alphabet = x.alphabet();
    alphabet.check_symbol(i)?;
    alphabet.check_symbol(j)?;
    if tail.len() != order {
        return Err(Error::WordLengthMismatch {
            got: tail.len(),
            expected: order,
        });
    }
    let tail_code = encode_context(tail, alphabet)?;
    let span = n - order;
    let n_table = count_grams(x, order, span)?;
    let extended = count_grams(x, order + 1, span)?;
    let prefix_pow = alphabet.num_contexts(order - 1)? as u64;
    let full_pow = alphabet.num_contexts(order)? as u64;
    let delta = defect_delta(&n_table, &extended, prefix_pow, full_pow, i, j, tail_code);
    Ok(term_log(delta, order))
}

fn term_log(delta: i128, order: usize) -> LogValue {
    if delta == 0 {
        LogValue::zero()
    } else {
        LogValue::from_ln(order as f64 * (delta.unsigned_abs() as f64).ln())
    }
}

/// Total defect of the given order: the sum of [`symmetry_defect_term`] over
/// all ordered pairs i ≠ j and all tails, accumulated in log space. Order 0
/// is defined as the data length; orders at or beyond the data length have
/// no windows and are exactly zero. Tails are enumerated as the sorted
/// suffixes of observed (order+1)-grams, which covers every nonzero term.
pub fn symmetry_defect_total(x: &Trajectory, order: usize) -> Result<SymmetryDefect> {
    let n = x.len();
    if order == 0 {
        return Ok(SymmetryDefect {
            order,
            total: LogValue::from_value(n as f64),
        });
    }
    if order >= n {
        return Ok(SymmetryDefect {
            order,
            total: LogValue::zero(),
        });
    }
    let alphabet = x.alphabet();
    let s = alphabet.size();
    let span = n - order;
    let n_table = count_grams(x, order, span)?;
    let extended = count_grams(x, order + 1, span)?;
    let prefix_pow = alphabet.num_contexts(order - 1)? as u64;
    let full_pow = alphabet.num_contexts(order)? as u64;
    let tails: BTreeSet<u64> = extended.counts().keys().map(|&g| g % full_pow).collect();
    let mut lns = Vec::new();
    for &tail in &tails {
        for i in 0..s {
            for j in 0..s {
                if i == j {
                    continue;
                }
                let delta =
                    defect_delta(&n_table, &extended, prefix_pow, full_pow, i, j, tail);
                if delta != 0 {
                    lns.push(order as f64 * (delta.unsigned_abs() as f64).ln());
                }
            }
        }
    }
    let total = if lns.is_empty() {
        LogValue::zero()
    } else {
        LogValue::from_ln(log_sum_exp(&lns))
    };
    Ok(SymmetryDefect { order, total })
}
