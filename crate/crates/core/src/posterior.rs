//! Bayesian updating: order weights from symmetry defects, Dirichlet
//! conjugacy for transition rows, and the posterior predictive mixture.
//!
//! The order update multiplies nothing and integrates nothing: the posterior
//! weight of order N is proportional to the prior weight plus the total
//! symmetry defect of that order, carried in log space so large data cannot
//! overflow. Transition rows update by exact integer count increments, one
//! independent Dirichlet per context.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::logspace::LogValue;
use crate::sampler::{DirichletTensorPrior, OrderDistribution, Trajectory};
use crate::stats::{count_grams, symmetry_defect_total, GramTable};
use crate::tensor::encode_context;

/// Adds the observed (order+1)-gram counts over the span n − order to the
/// concentration parameters, context by context. Data no longer than the
/// order carries no transitions and leaves the prior untouched.
pub fn update_dirichlet(prior: &DirichletTensorPrior, x: &Trajectory) -> Result<DirichletTensorPrior> {
    if x.alphabet().size() != prior.alphabet().size() {
        return Err(Error::AlphabetMismatch {
            got: x.alphabet().size(),
            expected: prior.alphabet().size(),
        });
    }
    let order = prior.order();
    let n = x.len();
    if n <= order {
        return Ok(prior.clone());
    }
    let s = prior.alphabet().size() as u64;
    let table = count_grams(x, order + 1, n - order)?;
    let mut alphas = prior.alphas().to_vec();
    for (&code, &c) in table.counts() {
        let context = (code / s) as usize;
        let symbol = (code % s) as usize;
        alphas[context][symbol] += c as f64;
    }
    DirichletTensorPrior::new(order, alphas, prior.alphabet())
}

/// Posterior order weights: prior mass plus total symmetry defect, per
/// order, normalized. The defect of order 0 is the data length, so the
/// result always has positive total mass.
pub fn update_order(beta: &OrderDistribution, x: &Trajectory) -> Result<OrderDistribution> {
    let max_order = beta.max_order();
    let mut weights = Vec::with_capacity(max_order + 1);
    for order in 0..=max_order {
        let defect = symmetry_defect_total(x, order)?;
        let w = LogValue::sum(&[LogValue::from_value(beta.mass(order)), defect.total()]);
        weights.push(w);
    }
    let total = LogValue::sum(&weights);
    let masses = weights
        .iter()
        .map(|w| {
            if w.is_zero() {
                0.0
            } else {
                (w.ln() - total.ln()).exp()
            }
        })
        .collect();
    OrderDistribution::new(masses)
}

/// Joint posterior over the order and the per-order transition tensors.
#[derive(Debug, Clone)]
pub struct PosteriorState {
    order_posterior: OrderDistribution,
    tensor_posteriors: Vec<DirichletTensorPrior>,
    transition_counts: Vec<GramTable>,
}

impl PosteriorState {
    pub fn order_posterior(&self) -> &OrderDistribution {
        &self.order_posterior
    }

    pub fn max_order(&self) -> usize {
        self.order_posterior.max_order()
    }

    /// Updated Dirichlet parameters, indexed by order.
    pub fn tensor_posteriors(&self) -> &[DirichletTensorPrior] {
        &self.tensor_posteriors
    }

    /// Observed (order+1)-gram counts that produced each update.
    pub fn transition_counts(&self) -> &[GramTable] {
        &self.transition_counts
    }
}

/// Runs both updates for every order up to the prior's truncation point.
/// Each order needs its own tensor prior; alphabets must agree with the data.
pub fn full_posterior(
    order_prior: &OrderDistribution,
    tensor_priors: &[DirichletTensorPrior],
    x: &Trajectory,
) -> Result<PosteriorState> {
    let max_order = order_prior.max_order();
    for order in 0..=max_order {
        let prior = tensor_priors.get(order).ok_or(Error::MissingPrior { order })?;
        if prior.order() != order {
            return Err(Error::MissingPrior { order });
        }
        if prior.alphabet().size() != x.alphabet().size() {
            return Err(Error::AlphabetMismatch {
                got: prior.alphabet().size(),
                expected: x.alphabet().size(),
            });
        }
    }
    let order_posterior = update_order(order_prior, x)?;
    let mut tensor_posteriors = Vec::with_capacity(max_order + 1);
    let mut transition_counts = Vec::with_capacity(max_order + 1);
    for (order, prior) in tensor_priors.iter().enumerate().take(max_order + 1) {
        tensor_posteriors.push(update_dirichlet(prior, x)?);
        let span = x.len().saturating_sub(order);
        transition_counts.push(count_grams(x, order + 1, span)?);
    }
    Ok(PosteriorState {
        order_posterior,
        tensor_posteriors,
        transition_counts,
    })
}

/// Predictive law of the next symbol after the given window: the posterior
/// mean row of each order, evaluated on the window's suffix of that length,
/// mixed by the posterior order weights. The window must reach back at least
/// to the truncation order.
pub fn posterior_predictive(state: &PosteriorState, window: &[usize]) -> Result<Vec<f64>> {
    let max_order = state.max_order();
    if window.len() < max_order {
        return Err(Error::WindowTooShort {
            got: window.len(),
            need: max_order,
        });
    }
    let alphabet = state.tensor_posteriors[0].alphabet();
    for &x in window {
        alphabet.check_symbol(x)?;
    }
    let nu = state.order_posterior.normalized();
    let mut out = vec![0.0; alphabet.size()];
    for (order, posterior) in state.tensor_posteriors.iter().enumerate() {
        let weight = nu[order];
        if weight == 0.0 {
            continue;
        }
        let context = &window[window.len() - order..];
        let code = encode_context(context, alphabet)?;
        let alpha_row = posterior.alpha_row(code);
        let total: f64 = alpha_row.iter().sum();
        for (cell, &a) in out.iter_mut().zip(alpha_row) {
            *cell += weight * a / total;
        }
    }
    Ok(out)
}

/// Log marginal likelihood of the transitions given the first `order`
/// symbols, with the rows integrated out against the prior: a ratio of
/// multivariate beta functions per context.
pub fn conditional_log_marginal(prior: &DirichletTensorPrior, x: &Trajectory) -> Result<f64> {
    if x.alphabet().size() != prior.alphabet().size() {
        return Err(Error::AlphabetMismatch {
            got: x.alphabet().size(),
            expected: prior.alphabet().size(),
        });
    }
    let order = prior.order();
    let n = x.len();
    if n <= order {
        return Err(Error::TrajectoryTooShort { n, order });
    }
    let s = prior.alphabet().size() as u64;
    let table = count_grams(x, order + 1, n - order)?;
    let mut grouped: std::collections::BTreeMap<u64, Vec<u64>> = std::collections::BTreeMap::new();
    for (&code, &c) in table.counts() {
        let context = code / s;
        let row = grouped
            .entry(context)
            .or_insert_with(|| vec![0; s as usize]);
        row[(code % s) as usize] = c;
    }
    let mut total = 0.0;
    for (&context, counts) in &grouped {
        let alpha = prior.alpha_row(context);
        total += ln_beta_shifted(alpha, counts) - ln_beta_shifted(alpha, &vec![0; s as usize]);
    }
    Ok(total)
}

/// ln B(alpha + counts) with B the multivariate beta function.
fn ln_beta_shifted(alpha: &[f64], counts: &[u64]) -> f64 {
    let mut sum = 0.0;
    let mut total_param = 0.0;
    for (&a, &c) in alpha.iter().zip(counts) {
        let v = a + c as f64;
        sum += ln_gamma(v);
        total_param += v;
    }
    sum - ln_gamma(total_param)
}
