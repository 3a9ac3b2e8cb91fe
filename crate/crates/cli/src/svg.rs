//! Deterministic SVG line plot for sweep output.
//!
//! One polyline per order, posterior mass on the y axis against prefix
//! length on the x axis (evenly spaced grid points). Coordinates are written
//! with two decimals so reruns produce identical bytes.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#17becf",
];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn x_at(index: usize, points: usize) -> f64 {
    let span = WIDTH - 2.0 * MARGIN;
    if points <= 1 {
        MARGIN + span / 2.0
    } else {
        MARGIN + span * index as f64 / (points - 1) as f64
    }
}

fn y_at(mass: f64) -> f64 {
    let span = HEIGHT - 2.0 * MARGIN;
    HEIGHT - MARGIN - span * mass.clamp(0.0, 1.0)
}

/// Renders posterior mass curves; `masses[i][order]` belongs to `grid[i]`.
pub fn sweep_to_svg(grid: &[usize], masses: &[Vec<f64>]) -> String {
    let points = grid.len();
    let orders = masses.first().map_or(0, Vec::len);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let left = fmt(MARGIN);
    let right = fmt(WIDTH - MARGIN);
    let top = fmt(MARGIN);
    let bottom = fmt(HEIGHT - MARGIN);
    out.push_str(&format!(
        "  <line x1=\"{left}\" y1=\"{bottom}\" x2=\"{right}\" y2=\"{bottom}\" \
         stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    out.push_str(&format!(
        "  <line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{bottom}\" \
         stroke=\"black\" stroke-width=\"1\"/>\n"
    ));

    for tick in 0..=4 {
        let mass = tick as f64 / 4.0;
        let y = fmt(y_at(mass));
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{y}\" x2=\"{left}\" y2=\"{y}\" stroke=\"black\" \
             stroke-width=\"1\"/>\n",
            fmt(MARGIN - 5.0)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{y}\" font-size=\"12\" text-anchor=\"end\" \
             dominant-baseline=\"middle\">{}</text>\n",
            fmt(MARGIN - 10.0),
            fmt(mass)
        ));
    }

    for (i, m) in grid.iter().enumerate() {
        let x = fmt(x_at(i, points));
        out.push_str(&format!(
            "  <line x1=\"{x}\" y1=\"{bottom}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\" \
             stroke-width=\"1\"/>\n",
            fmt(HEIGHT - MARGIN + 5.0)
        ));
        out.push_str(&format!(
            "  <text x=\"{x}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{m}</text>\n",
            fmt(HEIGHT - MARGIN + 20.0)
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">prefix length</text>\n",
        fmt(WIDTH / 2.0),
        fmt(HEIGHT - MARGIN + 40.0)
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 {} {})\">posterior mass</text>\n",
        fmt(MARGIN - 40.0),
        fmt(HEIGHT / 2.0),
        fmt(MARGIN - 40.0),
        fmt(HEIGHT / 2.0)
    ));

    for order in 0..orders {
        let color = PALETTE[order % PALETTE.len()];
        let coords: Vec<String> = masses
            .iter()
            .enumerate()
            .map(|(i, row)| format!("{},{}", fmt(x_at(i, points)), fmt(y_at(row[order]))))
            .collect();
        out.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            coords.join(" ")
        ));
        let legend_y = MARGIN + 18.0 * order as f64;
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            fmt(WIDTH - MARGIN - 110.0),
            fmt(legend_y),
            fmt(WIDTH - MARGIN - 85.0),
            fmt(legend_y)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" dominant-baseline=\"middle\">order \
             {order}</text>\n",
            fmt(WIDTH - MARGIN - 78.0),
            fmt(legend_y)
        ));
    }

    out.push_str("</svg>\n");
    out
}
