//! Log-domain accumulation with exact-zero tracking.
//!
//! Defect statistics reach magnitudes like n^(2N) and must be accumulated
//! without overflow, while exact zeros (empty products, structurally absent
//! terms) must stay distinguishable from merely tiny values. [`LogValue`]
//! carries both pieces of state; sums are formed by log-sum-exp in the
//! caller's iteration order so results are reproducible bit for bit.

/// log(sum(exp(x_i))) with the shift-by-max guard. Empty input and all
/// minus-infinity inputs yield minus infinity.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// A nonnegative quantity stored as its natural logarithm plus a flag for
/// exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    ln: f64,
    zero: bool,
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue {
            ln: f64::NEG_INFINITY,
            zero: true,
        }
    }

    /// Wraps a plain nonnegative value. Zero input becomes the exact zero.
    pub fn from_value(v: f64) -> Self {
        debug_assert!(v >= 0.0, "LogValue requires a nonnegative value");
        if v == 0.0 {
            LogValue::zero()
        } else {
            LogValue {
                ln: v.ln(),
                zero: false,
            }
        }
    }

    pub fn from_ln(ln: f64) -> Self {
        LogValue { ln, zero: false }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Natural log of the value; minus infinity for the exact zero.
    pub fn ln(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.ln
        }
    }

    /// The value itself; overflows to infinity past the f64 range, which is
    /// why downstream arithmetic stays on `ln()`.
    pub fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.ln.exp()
        }
    }

    /// Log-sum-exp over the given terms, in order. Zero terms contribute
    /// nothing; the result is zero iff every term is zero.
    pub fn sum(terms: &[LogValue]) -> LogValue {
        let lns: Vec<f64> = terms.iter().filter(|t| !t.zero).map(|t| t.ln).collect();
        if lns.is_empty() {
            LogValue::zero()
        } else {
            LogValue::from_ln(log_sum_exp(&lns))
        }
    }
}
