//! File formats.
//!
//! Tensors, models, and posteriors are JSON documents; trajectories are
//! digit strings. Every file begins with comment lines starting with `#`
//! (carrying the config hash), which readers skip regardless of format.
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces the original bits.

use std::path::Path;

use serde::Deserialize;

use ergodikit::{
    decode_context, make_tensor, Alphabet, KernelSequence, PosteriorState, StochasticTensor,
    SymmetryDefect, Trajectory,
};

use crate::error::{io_err, parse_err, CliError, Result};

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn config_header(hash: &str) -> String {
    format!("# ergodikit config={hash}\n")
}

/// Splits leading `#` comment lines from the document body.
pub fn split_comments(text: &str) -> (Vec<&str>, &str) {
    let mut comments = Vec::new();
    let mut rest = text;
    loop {
        let (line, tail) = match rest.find('\n') {
            Some(i) => (&rest[..i], &rest[i + 1..]),
            None => (rest, ""),
        };
        if line.starts_with('#') {
            comments.push(line);
            rest = tail;
        } else {
            return (comments, rest);
        }
    }
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
    }
    std::fs::write(path, content).map_err(|e| io_err(path, e))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn float_row(row: &[f64]) -> String {
    let cells: Vec<String> = row.iter().map(|x| fmt_float(*x)).collect();
    format!("[{}]", cells.join(", "))
}

/// Tensor document body at the given indent depth.
pub fn tensor_to_json(t: &StochasticTensor, indent: usize) -> String {
    let pad = " ".repeat(indent);
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("{pad}  \"alphabet_size\": {},\n", t.alphabet_size()));
    out.push_str(&format!("{pad}  \"order\": {},\n", t.order()));
    out.push_str(&format!("{pad}  \"rows\": [\n"));
    let last = t.rows().len() - 1;
    for (k, row) in t.rows().iter().enumerate() {
        let comma = if k == last { "" } else { "," };
        out.push_str(&format!("{pad}    {}{comma}\n", float_row(row)));
    }
    out.push_str(&format!("{pad}  ]\n"));
    out.push_str(&format!("{pad}}}"));
    out
}

#[derive(Deserialize)]
struct TensorDoc {
    alphabet_size: usize,
    order: usize,
    rows: Vec<Vec<f64>>,
}

fn tensor_from_doc(doc: TensorDoc) -> Result<StochasticTensor> {
    let alphabet = Alphabet::new(doc.alphabet_size)?;
    Ok(make_tensor(doc.order, doc.rows, alphabet)?)
}

pub fn tensor_from_text(path: &Path, text: &str) -> Result<StochasticTensor> {
    let (_, body) = split_comments(text);
    let doc: TensorDoc =
        serde_json::from_str(body).map_err(|e| parse_err(path, e.to_string()))?;
    tensor_from_doc(doc)
}

/// Ground-truth model document: the generating order, its tensor, and the
/// complete kernel sequence.
pub fn model_to_json(order: usize, seq: &KernelSequence) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str("  \"format\": \"ergodikit-model/1\",\n");
    out.push_str(&format!(
        "  \"alphabet_size\": {},\n",
        seq.alphabet().size()
    ));
    out.push_str(&format!("  \"order\": {order},\n"));
    out.push_str(&format!("  \"tensor\": {},\n", tensor_to_json(seq.top(), 2)));
    out.push_str("  \"kernels\": [\n");
    let last = seq.kernels().len() - 1;
    for (k, kernel) in seq.kernels().iter().enumerate() {
        let comma = if k == last { "" } else { "," };
        out.push_str(&format!("    {}{comma}\n", tensor_to_json(kernel, 4)));
    }
    out.push_str("  ]\n}\n");
    out
}

/// What `check` was pointed at: a bare tensor or a full kernel sequence.
pub enum CheckTarget {
    Tensor(StochasticTensor),
    Sequence(KernelSequence),
}

pub fn check_target_from_text(path: &Path, text: &str) -> Result<CheckTarget> {
    let (_, body) = split_comments(text);
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| parse_err(path, e.to_string()))?;
    if value.get("kernels").is_some() {
        #[derive(Deserialize)]
        struct ModelDoc {
            kernels: Vec<TensorDoc>,
        }
        let doc: ModelDoc =
            serde_json::from_value(value).map_err(|e| parse_err(path, e.to_string()))?;
        let kernels: Result<Vec<StochasticTensor>> =
            doc.kernels.into_iter().map(tensor_from_doc).collect();
        Ok(CheckTarget::Sequence(KernelSequence::new(kernels?)?))
    } else if value.get("rows").is_some() {
        let doc: TensorDoc =
            serde_json::from_value(value).map_err(|e| parse_err(path, e.to_string()))?;
        Ok(CheckTarget::Tensor(tensor_from_doc(doc)?))
    } else {
        Err(parse_err(
            path,
            "expected a tensor document (rows) or a model document (kernels)",
        ))
    }
}

/// Symbols as one line: base-s digits when the alphabet fits in decimal
/// digits, comma-separated integers otherwise.
pub fn trajectory_to_text(x: &Trajectory) -> String {
    let s = x.alphabet().size();
    let mut out = format!("#alphabet={s}\n");
    if s <= 10 {
        for &v in x.symbols() {
            out.push(char::from_digit(v as u32, 10).expect("digit"));
        }
    } else {
        let cells: Vec<String> = x.symbols().iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
    }
    out.push('\n');
    out
}

/// Reads a trajectory. An `#alphabet=s` header wins; otherwise the caller's
/// expected size applies; otherwise the smallest alphabet covering the data.
/// A header contradicting the expectation is an alphabet mismatch.
pub fn trajectory_from_text(
    path: &Path,
    text: &str,
    expected_size: Option<usize>,
) -> Result<Trajectory> {
    let (comments, body) = split_comments(text);
    let mut header_size = None;
    for line in comments {
        if let Some(rest) = line.strip_prefix("#alphabet=") {
            let s: usize = rest
                .trim()
                .parse()
                .map_err(|e| parse_err(path, format!("bad alphabet header: {e}")))?;
            header_size = Some(s);
        }
    }
    if let (Some(h), Some(e)) = (header_size, expected_size) {
        if h != e {
            return Err(CliError::Core(ergodikit::Error::AlphabetMismatch {
                got: h,
                expected: e,
            }));
        }
    }
    let body = body.trim();
    if body.is_empty() {
        return Err(CliError::Core(ergodikit::Error::EmptyTrajectory));
    }
    let symbols: Vec<usize> = if body.contains(',') {
        body.split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(path, format!("bad symbol {part:?}: {e}")))
            })
            .collect::<Result<_>>()?
    } else {
        body.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| parse_err(path, format!("bad symbol character {c:?}")))
            })
            .collect::<Result<_>>()?
    };
    let size = header_size
        .or(expected_size)
        .unwrap_or_else(|| symbols.iter().max().map_or(2, |&m| (m + 1).max(2)));
    let alphabet = Alphabet::new(size)?;
    Ok(Trajectory::new(symbols, alphabet)?)
}

/// Word rendered like trajectory bodies: digits for small alphabets.
pub fn word_label(code: u64, len: usize, alphabet: Alphabet) -> String {
    let word = decode_context(code, len, alphabet).expect("valid code");
    if alphabet.size() <= 10 {
        word.iter()
            .map(|&v| char::from_digit(v as u32, 10).expect("digit"))
            .collect()
    } else {
        let cells: Vec<String> = word.iter().map(|v| v.to_string()).collect();
        cells.join(",")
    }
}

fn json_null_or_float(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_float(x),
        None => "null".into(),
    }
}

/// Versioned posterior document: order weights, defect diagnostics, the
/// benchmark log marginals, updated concentration tables, and the raw
/// transition counts.
pub fn posterior_to_json(
    state: &PosteriorState,
    defects: &[SymmetryDefect],
    log_marginals: &[Option<f64>],
    n: usize,
) -> String {
    let alphabet = state.tensor_posteriors()[0].alphabet();
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str("  \"format\": \"ergodikit-posterior/1\",\n");
    out.push_str(&format!("  \"alphabet_size\": {},\n", alphabet.size()));
    out.push_str(&format!("  \"n_max\": {},\n", state.max_order()));
    out.push_str(&format!("  \"n\": {n},\n"));
    let masses: Vec<String> = state
        .order_posterior()
        .normalized()
        .iter()
        .map(|w| fmt_float(*w))
        .collect();
    out.push_str(&format!("  \"order_posterior\": [{}],\n", masses.join(", ")));
    let defect_lns: Vec<String> = defects
        .iter()
        .map(|d| json_null_or_float(if d.is_zero() { None } else { Some(d.ln()) }))
        .collect();
    out.push_str(&format!("  \"defect_ln\": [{}],\n", defect_lns.join(", ")));
    let marginals: Vec<String> = log_marginals
        .iter()
        .map(|m| json_null_or_float(*m))
        .collect();
    out.push_str(&format!(
        "  \"conditional_log_marginal\": [{}],\n",
        marginals.join(", ")
    ));
    out.push_str("  \"alphas\": [\n");
    let last_order = state.tensor_posteriors().len() - 1;
    for (order, posterior) in state.tensor_posteriors().iter().enumerate() {
        let rows: Vec<String> = posterior.alphas().iter().map(|r| float_row(r)).collect();
        let comma = if order == last_order { "" } else { "," };
        out.push_str(&format!("    [{}]{comma}\n", rows.join(", ")));
    }
    out.push_str("  ],\n");
    out.push_str("  \"transition_counts\": [\n");
    for (order, table) in state.transition_counts().iter().enumerate() {
        let cells: Vec<String> = table
            .counts()
            .iter()
            .map(|(&code, &c)| {
                format!(
                    "\"{}\": {c}",
                    word_label(code, table.gram_length(), alphabet)
                )
            })
            .collect();
        let comma = if order == last_order { "" } else { "," };
        out.push_str(&format!("    {{{}}}{comma}\n", cells.join(", ")));
    }
    out.push_str("  ]\n}\n");
    out
}

/// Long-format sweep table, one row per (prefix length, order).
pub fn sweep_to_csv(grid: &[usize], masses: &[Vec<f64>]) -> String {
    let mut out = String::from("m,order,mass\n");
    for (m, row) in grid.iter().zip(masses) {
        for (order, mass) in row.iter().enumerate() {
            out.push_str(&format!("{m},{order},{}\n", fmt_float(*mass)));
        }
    }
    out
}
