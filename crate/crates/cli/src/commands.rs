//! The five subcommands. Each writes files with a config-hash header and
//! keeps stdout deterministic for a fixed input.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use ergodikit::{
    conditional_log_marginal, full_posterior, kernel_sequence, project_chain, sample_trajectory,
    sample_scheme, stationarity_report, stream_rng, symmetry_defect_total, update_order, Alphabet,
    DirichletTensorPrior, KernelSequence, OrderDistribution, StochasticTensor, SymmetryDefect,
    Trajectory, TRAJECTORY_STREAM,
};

use crate::config::{auto_grid, RunConfig};
use crate::error::{CliError, Result};
use crate::formats;
use crate::svg;

/// Residual above which `check` reports the model as not stationary.
pub const CHECK_TOLERANCE: f64 = 1e-8;

fn out_path(config: &RunConfig, name: &str) -> PathBuf {
    Path::new(&config.out_dir).join(name)
}

fn tensor_priors(config: &RunConfig, alphabet: Alphabet) -> Result<Vec<DirichletTensorPrior>> {
    (0..=config.n_max)
        .map(|order| {
            DirichletTensorPrior::symmetric(order, config.alpha[order], alphabet)
                .map_err(CliError::Core)
        })
        .collect()
}

fn order_prior(config: &RunConfig) -> Result<OrderDistribution> {
    Ok(OrderDistribution::new(config.beta.clone())?)
}

fn sequence_for(tensor: &StochasticTensor) -> Result<KernelSequence> {
    if tensor.order() == 0 {
        Ok(KernelSequence::new(vec![tensor.clone()])?)
    } else {
        Ok(kernel_sequence(tensor)?)
    }
}

fn read_trajectory(config: &RunConfig, path: &Path) -> Result<Trajectory> {
    let text = formats::read_file(path)?;
    formats::trajectory_from_text(path, &text, Some(config.alphabet_size))
}

/// Hash for commands that run without a config file: over the command name,
/// its parameters, and the input document.
fn param_hash(parts: &[String], input: &str) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part.as_bytes());
        hasher.update(b"\n");
    }
    hasher.update(input.as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

/// Draws a model and a trajectory from the configured scheme and writes
/// `model.json` and `trajectory.txt`.
pub fn cmd_simulate(config: &RunConfig) -> Result<()> {
    let alphabet = Alphabet::new(config.alphabet_size)?;
    let n = config.sample_size;
    let (order, sequence, trajectory) = match &config.model_tensor {
        Some(path) => {
            let path = Path::new(path);
            let text = formats::read_file(path)?;
            let tensor = formats::tensor_from_text(path, &text)?;
            if tensor.alphabet_size() != config.alphabet_size {
                return Err(CliError::Core(ergodikit::Error::AlphabetMismatch {
                    got: tensor.alphabet_size(),
                    expected: config.alphabet_size,
                }));
            }
            if let Some(order) = config.model_order {
                if order != tensor.order() {
                    return Err(CliError::Config(format!(
                        "model_order: {} conflicts with the tensor file order {}",
                        order,
                        tensor.order()
                    )));
                }
            }
            let sequence = sequence_for(&tensor)?;
            let trajectory =
                sample_trajectory(&sequence, n, &mut stream_rng(config.seed, TRAJECTORY_STREAM))?;
            (tensor.order(), sequence, trajectory)
        }
        None => {
            let nu = match config.model_order {
                Some(order) => {
                    let mut weights = vec![0.0; config.n_max + 1];
                    weights[order] = 1.0;
                    OrderDistribution::new(weights)?
                }
                None => order_prior(config)?,
            };
            let priors: Vec<DirichletTensorPrior> = (0..=config.n_max)
                .map(|order| DirichletTensorPrior::symmetric(order, config.model_alpha, alphabet))
                .collect::<ergodikit::Result<_>>()?;
            let (model, trajectory) = sample_scheme(&nu, &priors, n, config.seed)?;
            (model.order, model.sequence, trajectory)
        }
    };
    let header = formats::config_header(&config.hash());
    let model_path = out_path(config, "model.json");
    formats::write_file(
        &model_path,
        &format!("{header}{}", formats::model_to_json(order, &sequence)),
    )?;
    let trajectory_path = out_path(config, "trajectory.txt");
    formats::write_file(
        &trajectory_path,
        &format!("{header}{}", formats::trajectory_to_text(&trajectory)),
    )?;
    println!("order={order}");
    println!("wrote {}", model_path.display());
    println!("wrote {}", trajectory_path.display());
    Ok(())
}

fn defect_cell(d: &SymmetryDefect) -> String {
    if d.is_zero() {
        "zero".into()
    } else {
        format!("{:.6e}", d.ln())
    }
}

/// Runs both posterior updates on a trajectory, writes `posterior.json`, and
/// prints a per-order report.
pub fn cmd_infer(config: &RunConfig, trajectory_path: &Path) -> Result<()> {
    let x = read_trajectory(config, trajectory_path)?;
    let alphabet = x.alphabet();
    let beta = order_prior(config)?;
    let priors = tensor_priors(config, alphabet)?;
    let state = full_posterior(&beta, &priors, &x)?;
    let mut defects = Vec::with_capacity(config.n_max + 1);
    let mut marginals = Vec::with_capacity(config.n_max + 1);
    for (order, prior) in priors.iter().enumerate() {
        defects.push(symmetry_defect_total(&x, order)?);
        marginals.push(Some(conditional_log_marginal(prior, &x)?));
    }
    let header = formats::config_header(&config.hash());
    let posterior_path = out_path(config, "posterior.json");
    formats::write_file(
        &posterior_path,
        &format!(
            "{header}{}",
            formats::posterior_to_json(&state, &defects, &marginals, x.len())
        ),
    )?;

    let masses = state.order_posterior().normalized();
    let ln_n = (x.len() as f64).ln();
    println!(
        "n={} alphabet={} n_max={}",
        x.len(),
        alphabet.size(),
        config.n_max
    );
    println!("order  mass          defect_ln      defect_ln/ln_n  log_marginal");
    for order in 0..=config.n_max {
        let ratio = if defects[order].is_zero() || ln_n <= 0.0 {
            "-".into()
        } else {
            format!("{:.6e}", defects[order].ln() / ln_n)
        };
        println!(
            "{order:<6} {:<13.6e} {:<14} {ratio:<15} {:.6e}",
            masses[order],
            defect_cell(&defects[order]),
            marginals[order].unwrap_or(f64::NAN)
        );
    }
    let map_order = masses
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite masses"))
        .map(|(order, _)| order)
        .expect("nonempty");
    println!("map_order={map_order}");
    let mean = state.tensor_posteriors()[map_order].mean_tensor()?;
    if mean.rows().len() <= 32 {
        println!("posterior mean rows (order {map_order}):");
        for (context, row) in mean.rows().iter().enumerate() {
            let label = formats::word_label(context as u64, map_order, alphabet);
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.6}")).collect();
            let label = if label.is_empty() { "-".into() } else { label };
            println!("  {label}: {}", cells.join(" "));
        }
    }
    println!("wrote {}", posterior_path.display());
    Ok(())
}

fn thread_count(points: usize) -> Result<usize> {
    let requested = match std::env::var("ERGODIKIT_THREADS") {
        Ok(text) => {
            let t: usize = text.trim().parse().map_err(|e| {
                CliError::Config(format!("ERGODIKIT_THREADS: bad value {text:?}: {e}"))
            })?;
            if t == 0 {
                return Err(CliError::Config(
                    "ERGODIKIT_THREADS: must be positive".into(),
                ));
            }
            t
        }
        Err(_) => std::thread::available_parallelism().map_or(1, |p| p.get()),
    };
    Ok(requested.min(points).max(1))
}

fn prefix_masses(x: &Trajectory, beta: &OrderDistribution, m: usize) -> Result<Vec<f64>> {
    let prefix = x.prefix(m)?;
    Ok(update_order(beta, &prefix)?.normalized())
}

/// Recomputes the order posterior on growing prefixes of a trajectory and
/// writes `sweep.csv` (and `sweep.svg` unless disabled). Grid points are
/// independent, so they are distributed over worker threads; the output
/// order never depends on the thread count.
pub fn cmd_sweep(config: &RunConfig, trajectory_path: &Path) -> Result<()> {
    let x = read_trajectory(config, trajectory_path)?;
    let grid = match &config.grid {
        Some(grid) => grid.clone(),
        None => auto_grid(x.len()),
    };
    for &m in &grid {
        if m > x.len() {
            return Err(CliError::Config(format!(
                "grid: point {m} exceeds the trajectory length {}",
                x.len()
            )));
        }
    }
    let beta = order_prior(config)?;
    let threads = thread_count(grid.len())?;
    let masses: Vec<Vec<f64>> = if threads <= 1 {
        grid.iter()
            .map(|&m| prefix_masses(&x, &beta, m))
            .collect::<Result<_>>()?
    } else {
        let grid_ref = &grid;
        let x_ref = &x;
        let beta_ref = &beta;
        std::thread::scope(|scope| -> Result<Vec<Vec<f64>>> {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    scope.spawn(move || -> Result<Vec<(usize, Vec<f64>)>> {
                        grid_ref
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| i % threads == t)
                            .map(|(i, &m)| Ok((i, prefix_masses(x_ref, beta_ref, m)?)))
                            .collect()
                    })
                })
                .collect();
            let mut slots: Vec<Option<Vec<f64>>> = vec![None; grid_ref.len()];
            for handle in handles {
                for (i, row) in handle.join().expect("sweep worker panicked")? {
                    slots[i] = Some(row);
                }
            }
            Ok(slots
                .into_iter()
                .map(|slot| slot.expect("every grid point computed"))
                .collect())
        })?
    };
    let hash = config.hash();
    let csv_path = out_path(config, "sweep.csv");
    formats::write_file(
        &csv_path,
        &format!(
            "{}{}",
            formats::config_header(&hash),
            formats::sweep_to_csv(&grid, &masses)
        ),
    )?;
    println!("wrote {}", csv_path.display());
    if config.svg {
        let svg_path = out_path(config, "sweep.svg");
        formats::write_file(
            &svg_path,
            &format!(
                "<!-- ergodikit config={hash} -->\n{}",
                svg::sweep_to_svg(&grid, &masses)
            ),
        )?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

/// Projects a tensor file down to the target order and writes the result.
pub fn cmd_project(tensor_path: &Path, target_order: usize, out_file: &Path) -> Result<()> {
    let text = formats::read_file(tensor_path)?;
    let tensor = formats::tensor_from_text(tensor_path, &text)?;
    let projected = project_chain(&tensor, target_order)?;
    let hash = param_hash(
        &["project".into(), format!("order={target_order}")],
        &text,
    );
    formats::write_file(
        out_file,
        &format!(
            "{}{}\n",
            formats::config_header(&hash),
            formats::tensor_to_json(&projected, 0)
        ),
    )?;
    println!(
        "projected order {} down to {target_order}",
        tensor.order()
    );
    println!("wrote {}", out_file.display());
    Ok(())
}

/// Verifies that a tensor or model file describes a stationary family:
/// prints the worst shift-consistency residual over all words up to the
/// given depth and fails when it exceeds the tolerance.
pub fn cmd_check(path: &Path, depth: usize) -> Result<()> {
    let text = formats::read_file(path)?;
    let sequence = match formats::check_target_from_text(path, &text)? {
        formats::CheckTarget::Sequence(seq) => seq,
        formats::CheckTarget::Tensor(tensor) => sequence_for(&tensor)?,
    };
    let report = stationarity_report(&sequence, depth)?;
    let alphabet = sequence.alphabet();
    let word = if report.worst_word.is_empty() {
        "-".into()
    } else if alphabet.size() <= 10 {
        report
            .worst_word
            .iter()
            .map(|&v| char::from_digit(v as u32, 10).expect("digit"))
            .collect::<String>()
    } else {
        let cells: Vec<String> = report.worst_word.iter().map(|v| v.to_string()).collect();
        cells.join(",")
    };
    println!("orders 0..={}", sequence.top_order());
    println!("depth={depth}");
    println!("max_residual={:.6e}", report.max_residual);
    println!("worst_word={word}");
    if report.max_residual > CHECK_TOLERANCE {
        return Err(CliError::CheckFailed {
            residual: report.max_residual,
            word: report.worst_word,
        });
    }
    println!("ok");
    Ok(())
}
