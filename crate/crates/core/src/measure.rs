//! Cylinder probabilities and the stationarity symmetry check.
//!
//! A kernel sequence determines a measure on infinite sequences through
//! products of its kernels: the k-th symbol is governed by the kernel of
//! order min(k−1, N) applied to the preceding symbols. Stationarity of that
//! measure is equivalent to a symmetry of cylinder masses — summing out a
//! prepended coordinate and summing out an appended one must both reproduce
//! the shorter cylinder — and [`stationarity_report`] measures the worst
//! violation over all short words, which is how inconsistent kernel chains
//! are detected behaviorally.

use crate::error::{Error, Result};
use crate::projection::KernelSequence;
use crate::tensor::{decode_context, encode_context, Symbol};

/// Word length above which the probability product is accumulated in log
/// space to dodge underflow.
const LOG_SPACE_CUTOFF: usize = 64;

/// Enumeration cap for the stationarity check; the word count is s^depth.
pub const MAX_STATIONARITY_DEPTH: usize = 12;

fn check_word(seq: &KernelSequence, word: &[Symbol]) -> Result<()> {
    for &symbol in word {
        seq.alphabet().check_symbol(symbol)?;
    }
    Ok(())
}

/// Probability of the k-th symbol (0-based) given the preceding ones.
fn factor(seq: &KernelSequence, word: &[Symbol], k: usize) -> f64 {
    let order = k.min(seq.top_order());
    let context = &word[k - order..k];
    let code = encode_context(context, seq.alphabet()).expect("validated word");
    seq.kernel(order).row(code)[word[k]]
}

/// Mass of the cylinder set of all sequences starting with `word`.
/// The empty word has mass 1.
pub fn cylinder_probability(seq: &KernelSequence, word: &[Symbol]) -> Result<f64> {
    check_word(seq, word)?;
    if word.len() > LOG_SPACE_CUTOFF {
        let mut log_p = 0.0;
        for k in 0..word.len() {
            log_p += factor(seq, word, k).ln();
        }
        Ok(log_p.exp())
    } else {
        let mut p = 1.0;
        for k in 0..word.len() {
            p *= factor(seq, word, k);
        }
        Ok(p)
    }
}

/// Log of the cylinder mass; minus infinity for mass zero.
pub fn log_cylinder_probability(seq: &KernelSequence, word: &[Symbol]) -> Result<f64> {
    check_word(seq, word)?;
    let mut log_p = 0.0;
    for k in 0..word.len() {
        log_p += factor(seq, word, k).ln();
    }
    Ok(log_p)
}

/// Worst stationarity violation found, together with a word attaining it.
#[derive(Debug, Clone)]
pub struct StationarityReport {
    pub max_residual: f64,
    pub worst_word: Vec<Symbol>,
}

/// Checks both shift identities on every word up to the given length: the
/// mass of [t] must match the summed masses of [j,t] and of [t,j]. Returns
/// the largest absolute deviation and where it occurred. Depth 0 is trivially
/// clean.
pub fn stationarity_report(seq: &KernelSequence, depth: usize) -> Result<StationarityReport> {
    if depth > MAX_STATIONARITY_DEPTH {
        return Err(Error::DepthTooLarge {
            depth,
            cap: MAX_STATIONARITY_DEPTH,
        });
    }
    let alphabet = seq.alphabet();
    let s = alphabet.size();
    // Guards the s^(depth+1) cylinder evaluations behind the same size check
    // used for context enumeration.
    alphabet.num_contexts(depth)?;
    let mut report = StationarityReport {
        max_residual: 0.0,
        worst_word: Vec::new(),
    };
    for len in 1..=depth {
        let words = alphabet.num_contexts(len)? as u64;
        for code in 0..words {
            let word = decode_context(code, len, alphabet)?;
            let base = cylinder_probability(seq, &word)?;
            let mut prepended = 0.0;
            let mut appended = 0.0;
            let mut extended = vec![0; len + 1];
            extended[1..].copy_from_slice(&word);
            for j in 0..s {
                extended[0] = j;
                prepended += cylinder_probability(seq, &extended)?;
            }
            extended[..len].copy_from_slice(&word);
            for j in 0..s {
                extended[len] = j;
                appended += cylinder_probability(seq, &extended)?;
            }
            let residual = (prepended - base).abs().max((appended - base).abs());
            if residual > report.max_residual {
                report.max_residual = residual;
                report.worst_word = word;
            }
        }
    }
    Ok(report)
}

/// Just the residual of [`stationarity_report`].
pub fn stationarity_residual(seq: &KernelSequence, depth: usize) -> Result<f64> {
    Ok(stationarity_report(seq, depth)?.max_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::kernel_sequence;
    use crate::tensor::{make_tensor, Alphabet};

    fn binary() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn order_two_sequence() -> KernelSequence {
        let rows = vec![
            vec![0.3, 0.7],
            vec![0.6, 0.4],
            vec![0.2, 0.8],
            vec![0.5, 0.5],
        ];
        kernel_sequence(&make_tensor(2, rows, binary()).unwrap()).unwrap()
    }

    #[test]
    fn empty_word_has_mass_one() {
        let seq = order_two_sequence();
        assert_eq!(cylinder_probability(&seq, &[]).unwrap(), 1.0);
    }

    #[test]
    fn single_symbol_mass_is_the_initial_law() {
        let seq = order_two_sequence();
        let p0 = cylinder_probability(&seq, &[0]).unwrap();
        assert!((p0 - seq.kernel(0).row(0)[0]).abs() < 1e-15);
    }

    #[test]
    fn masses_of_fixed_length_words_sum_to_one() {
        let seq = order_two_sequence();
        for len in 1..=6 {
            let mut total = 0.0;
            for code in 0..(1u64 << len) {
                let word = decode_context(code, len, binary()).unwrap();
                total += cylinder_probability(&seq, &word).unwrap();
            }
            assert!((total - 1.0).abs() < 1e-12, "length {len}: {total}");
        }
    }

    #[test]
    fn long_words_use_the_log_path_consistently() {
        let seq = order_two_sequence();
        let word = vec![0; 80];
        let direct: f64 = log_cylinder_probability(&seq, &word).unwrap().exp();
        let p = cylinder_probability(&seq, &word).unwrap();
        assert!((p - direct).abs() <= 1e-15 * direct.max(1e-300));
    }

    #[test]
    fn consistent_sequence_has_tiny_residual() {
        let seq = order_two_sequence();
        assert!(stationarity_residual(&seq, 6).unwrap() < 1e-10);
    }

    #[test]
    fn corrupted_initial_law_is_detected() {
        let seq = order_two_sequence();
        let mut kernels = seq.kernels().to_vec();
        kernels[0] = make_tensor(0, vec![vec![0.5, 0.5]], binary()).unwrap();
        let broken = KernelSequence::new(kernels).unwrap();
        assert!(stationarity_residual(&broken, 4).unwrap() > 1e-3);
    }

    #[test]
    fn iid_sequence_is_stationary_to_machine_precision() {
        let q = vec![0.3, 0.7];
        let k0 = make_tensor(0, vec![q.clone()], binary()).unwrap();
        let k1 = make_tensor(1, vec![q.clone(), q.clone()], binary()).unwrap();
        let seq = KernelSequence::new(vec![k0, k1]).unwrap();
        assert!(stationarity_residual(&seq, 6).unwrap() < 1e-12);
    }

    #[test]
    fn depth_zero_is_trivially_clean() {
        let seq = order_two_sequence();
        let report = stationarity_report(&seq, 0).unwrap();
        assert_eq!(report.max_residual, 0.0);
        assert!(report.worst_word.is_empty());
    }

    #[test]
    fn depth_beyond_cap_is_rejected() {
        let seq = order_two_sequence();
        assert!(matches!(
            stationarity_residual(&seq, 13),
            Err(Error::DepthTooLarge { .. })
        ));
    }

    #[test]
    fn additivity_holds_as_computed() {
        let seq = order_two_sequence();
        for code in 0..32u64 {
            let word = decode_context(code, 5, binary()).unwrap();
            let base = cylinder_probability(&seq, &word).unwrap();
            let mut extended_sum = 0.0;
            for j in 0..2 {
                let mut w = word.clone();
                w.push(j);
                extended_sum += cylinder_probability(&seq, &w).unwrap();
            }
            assert!((base - extended_sum).abs() < 1e-15);
            // Monotone: extending a cylinder cannot gain mass.
            for j in 0..2 {
                let mut w = word.clone();
                w.push(j);
                assert!(cylinder_probability(&seq, &w).unwrap() <= base);
            }
        }
    }
}
