//! Hand-rolled SVG line charts of benchmark sweeps.
//!
//! The default chart draws three series — for, load, and ingest rate —
//! against worker count, averaging each worker's rows over every trial
//! and entry count. A grouped variant keeps entry counts apart, yielding
//! three series per entry count. Output is plain SVG 1.1: linear axes,
//! round-number ticks, per-point circle markers, and a legend. No
//! external renderer or template is involved, so the structure is easy to
//! assert on in tests.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::bench::BenchResultRow;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no rows to plot")]
    NoRows,
    #[error("rows contain no finite rate values")]
    NoFiniteRates,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 86.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 62.0;

/// Matplotlib's default cycle: familiar, high-contrast on white.
const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22",
];

type PhaseExtract = fn(&BenchResultRow) -> f64;

struct Series {
    name: String,
    /// (workers, mean rate), ascending by workers.
    points: Vec<(usize, f64)>,
}

/// Mean of each phase rate per worker count, across trials and entry
/// counts. Non-finite rates (unmeasurably fast phases) are excluded from
/// means rather than poisoning them.
fn combined_series(rows: &[BenchResultRow]) -> Vec<Series> {
    let phases: [(&str, PhaseExtract); 3] = [
        ("for rate", |r| r.for_rate),
        ("load rate", |r| r.load_rate),
        ("ingest rate", |r| r.ingest_rate),
    ];
    phases
        .iter()
        .map(|(name, extract)| Series {
            name: (*name).to_owned(),
            points: mean_by_workers(rows.iter(), extract),
        })
        .collect()
}

/// Like [`combined_series`] but one trio of series per entry count.
fn per_entry_series(rows: &[BenchResultRow]) -> Vec<Series> {
    let mut entry_counts: Vec<u64> = rows.iter().map(|r| r.entries).collect();
    entry_counts.sort_unstable();
    entry_counts.dedup();

    let phases: [(&str, PhaseExtract); 3] = [
        ("for", |r| r.for_rate),
        ("load", |r| r.load_rate),
        ("ingest", |r| r.ingest_rate),
    ];
    let mut series = Vec::new();
    for &entries in &entry_counts {
        for (name, extract) in &phases {
            series.push(Series {
                name: format!("{name} {}", humanize(entries)),
                points: mean_by_workers(rows.iter().filter(|r| r.entries == entries), extract),
            });
        }
    }
    series
}

fn mean_by_workers<'a>(
    rows: impl Iterator<Item = &'a BenchResultRow>,
    extract: &PhaseExtract,
) -> Vec<(usize, f64)> {
    let mut sums: BTreeMap<usize, (f64, u32)> = BTreeMap::new();
    for row in rows {
        let value = extract(row);
        if value.is_finite() {
            let slot = sums.entry(row.workers).or_insert((0.0, 0));
            slot.0 += value;
            slot.1 += 1;
        } else {
            // Keep the worker count on the axis even if every sample at it
            // was unmeasurable.
            sums.entry(row.workers).or_insert((0.0, 0));
        }
    }
    sums.into_iter()
        .map(|(workers, (sum, n))| (workers, if n == 0 { 0.0 } else { sum / f64::from(n) }))
        .collect()
}

/// 500000 -> "500k", 5000000 -> "5M", 1500 -> "1500".
fn humanize(n: u64) -> String {
    for (divisor, suffix) in [(1_000_000_000, "G"), (1_000_000, "M"), (1_000, "k")] {
        if n >= divisor && n.is_multiple_of(divisor) {
            return format!("{}{suffix}", n / divisor);
        }
    }
    n.to_string()
}

/// Round-number tick step (1, 2, or 5 times a power of ten) giving about
/// `target` intervals over `span`.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let magnitude = 10f64.powf(raw.log10().floor());
    let residual = raw / magnitude;
    let factor = if residual <= 1.5 {
        1.0
    } else if residual <= 3.5 {
        2.0
    } else if residual <= 7.5 {
        5.0
    } else {
        10.0
    };
    factor * magnitude
}

fn tick_label(value: f64) -> String {
    if value == 0.0 {
        return "0".to_owned();
    }
    let abs = value.abs();
    if abs >= 1_000_000.0 {
        format!("{}M", trim_zeros(value / 1_000_000.0))
    } else if abs >= 1_000.0 {
        format!("{}k", trim_zeros(value / 1_000.0))
    } else {
        trim_zeros(value)
    }
}

fn trim_zeros(value: f64) -> String {
    let text = format!("{value:.2}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    text.to_owned()
}

/// Headline chart: three mean series against worker count.
pub fn emit_plot(rows: &[BenchResultRow]) -> Result<String, PlotError> {
    render(rows, combined_series(rows))
}

/// Grouped variant: three series per entry count, colors cycling.
pub fn emit_plot_by_entries(rows: &[BenchResultRow]) -> Result<String, PlotError> {
    render(rows, per_entry_series(rows))
}

fn render(rows: &[BenchResultRow], series: Vec<Series>) -> Result<String, PlotError> {
    if rows.is_empty() {
        return Err(PlotError::NoRows);
    }
    let max_rate = series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(_, rate)| rate))
        .fold(0.0_f64, f64::max);
    if !max_rate.is_finite() {
        return Err(PlotError::NoFiniteRates);
    }
    let y_max = if max_rate > 0.0 { max_rate * 1.05 } else { 1.0 };

    let mut worker_counts: Vec<usize> = rows.iter().map(|r| r.workers).collect();
    worker_counts.sort_unstable();
    worker_counts.dedup();
    let x_min = *worker_counts.first().expect("rows checked non-empty") as f64;
    let x_max = *worker_counts.last().expect("rows checked non-empty") as f64;
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };

    let plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_height = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |workers: f64| MARGIN_LEFT + (workers - x_min) / x_span * plot_width;
    let y_of = |rate: f64| MARGIN_TOP + (1.0 - rate / y_max) * plot_height;

    let mut svg = String::with_capacity(8 * 1024);
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">Mean phase rates by worker count</text>"#,
        MARGIN_LEFT + plot_width / 2.0
    );

    // Axes.
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_height;
    let _ = write!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        x0 + plot_width
    );
    let _ = write!(
        svg,
        r#"<line x1="{x0}" y1="{}" x2="{x0}" y2="{y0}" stroke="black"/>"#,
        MARGIN_TOP
    );

    // X ticks at each worker count present.
    for &workers in &worker_counts {
        let x = x_of(workers as f64);
        let _ = write!(
            svg,
            r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = write!(
            svg,
            r#"<text x="{x}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{workers}</text>"#,
            y0 + 18.0
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">workers</text>"#,
        MARGIN_LEFT + plot_width / 2.0,
        HEIGHT - 14.0
    );

    // Y ticks on a round-number grid.
    let step = nice_step(y_max, 5.0);
    let mut tick = 0.0;
    while tick <= y_max {
        let y = y_of(tick);
        let _ = write!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = write!(
            svg,
            r##"<line x1="{x0}" y1="{y}" x2="{}" y2="{y}" stroke="#dddddd"/>"##,
            x0 + plot_width
        );
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 9.0,
            y + 4.0,
            tick_label(tick)
        );
        tick += step;
    }
    let _ = write!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 {})">entries per second</text>"#,
        MARGIN_TOP + plot_height / 2.0,
        MARGIN_TOP + plot_height / 2.0
    );

    // Series: polyline plus circle markers, one palette color each.
    for (index, series) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let mut points = String::new();
        for &(workers, rate) in &series.points {
            let _ = write!(points, "{},{} ", x_of(workers as f64), y_of(rate));
        }
        let _ = write!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        for &(workers, rate) in &series.points {
            let _ = write!(
                svg,
                r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                x_of(workers as f64),
                y_of(rate)
            );
        }

        // Legend entry.
        let legend_x = WIDTH - MARGIN_RIGHT + 16.0;
        let legend_y = MARGIN_TOP + 8.0 + index as f64 * 20.0;
        let _ = write!(
            svg,
            r#"<line x1="{legend_x}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{color}" stroke-width="1.5"/>"#,
            legend_x + 22.0
        );
        let _ = write!(
            svg,
            r#"<circle cx="{}" cy="{legend_y}" r="3" fill="{color}"/>"#,
            legend_x + 11.0
        );
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            legend_x + 28.0,
            legend_y + 4.0,
            series.name
        );
    }

    svg.push_str("</svg>");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(entries: u64, workers: usize, trial: u32, rates: [f64; 3]) -> BenchResultRow {
        BenchResultRow {
            entries,
            workers,
            trial,
            for_rate: rates[0],
            load_rate: rates[1],
            ingest_rate: rates[2],
            total_seconds: 1.0,
        }
    }

    #[test]
    fn three_series_with_one_point_per_worker_count() {
        let rows = vec![
            row(1_000, 1, 1, [100.0, 80.0, 40.0]),
            row(1_000, 2, 1, [190.0, 150.0, 75.0]),
        ];
        let svg = emit_plot(&rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        for fragment in svg.split("<polyline").skip(1) {
            let points = fragment.split("points=\"").nth(1).unwrap();
            let points = points.split('"').next().unwrap();
            assert_eq!(points.split_whitespace().count(), 2, "two worker counts");
        }
        assert!(svg.contains("for rate"));
        assert!(svg.contains("load rate"));
        assert!(svg.contains("ingest rate"));
        assert!(svg.contains("workers"));
        assert!(svg.contains("entries per second"));
    }

    #[test]
    fn means_average_trials_and_entry_counts() {
        let rows = vec![
            row(1_000, 4, 1, [0.0, 0.0, 100.0]),
            row(1_000, 4, 2, [0.0, 0.0, 200.0]),
        ];
        let series = combined_series(&rows);
        let ingest = &series[2];
        assert_eq!(ingest.points, vec![(4, 150.0)]);
    }

    #[test]
    fn per_entry_variant_splits_series() {
        let rows = vec![
            row(1_000, 1, 1, [1.0, 2.0, 3.0]),
            row(2_000, 1, 1, [4.0, 5.0, 6.0]),
        ];
        let svg = emit_plot_by_entries(&rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 6);
        assert!(svg.contains("ingest 1k"));
        assert!(svg.contains("ingest 2k"));
    }

    #[test]
    fn empty_rows_are_an_error() {
        assert!(matches!(emit_plot(&[]), Err(PlotError::NoRows)));
    }

    #[test]
    fn infinite_rates_are_left_out_of_means() {
        let rows = vec![
            row(1_000, 1, 1, [f64::INFINITY, 10.0, 10.0]),
            row(1_000, 1, 2, [30.0, 10.0, 10.0]),
        ];
        let series = combined_series(&rows);
        assert_eq!(series[0].points, vec![(1, 30.0)]);
        emit_plot(&rows).unwrap();
    }

    #[test]
    fn humanize_compacts_round_counts() {
        assert_eq!(humanize(500_000), "500k");
        assert_eq!(humanize(5_000_000), "5M");
        assert_eq!(humanize(1_500), "1500");
        assert_eq!(humanize(999), "999");
    }

    #[test]
    fn nice_steps_are_round() {
        for span in [3.0, 47.0, 1_000.0, 123_456.0] {
            let step = nice_step(span, 5.0);
            let mantissa = step / 10f64.powf(step.log10().floor());
            assert!(
                [1.0, 2.0, 5.0, 10.0]
                    .iter()
                    .any(|m| (mantissa - m).abs() < 1e-9),
                "step {step} for span {span}"
            );
        }
    }
}
