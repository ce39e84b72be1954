//! Report emission: plain tables, CSV files, and SVG charts.
//!
//! CSV numbers use Rust's shortest-roundtrip float formatting, so a
//! re-parsed report compares exactly equal to the in-memory values and
//! identical scenarios produce byte-identical files.

use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::run::{DetReport, FleetReport, ProbReport, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Svg,
}

/// Renders the human-readable table for any report.
pub fn table(report: &RunReport) -> String {
    match report {
        RunReport::Deterministic(det) => det_table(det),
        RunReport::Probabilistic(prob) => prob_table(prob),
        RunReport::Fleet(fleet) => fleet_table(fleet),
    }
}

/// Writes the CSV file set for the report into `out`; returns the paths.
pub fn write_csv(report: &RunReport, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    let mut files = Vec::new();
    let mut put = |name: &str, content: String| -> Result<()> {
        let path = out.join(name);
        std::fs::write(&path, content)
            .with_context(|| format!("cannot write {}", path.display()))?;
        files.push(path);
        Ok(())
    };
    match report {
        RunReport::Deterministic(det) => {
            put("allocation.csv", det_allocation_csv(det))?;
            put("metrics.csv", det_metrics_csv(det))?;
        }
        RunReport::Probabilistic(prob) => {
            put("directions.csv", prob_directions_csv(prob))?;
            put("direction_fits.csv", prob_fits_csv(prob))?;
            put("metrics.csv", prob_metrics_csv(prob))?;
        }
        RunReport::Fleet(fleet) => {
            put(
                "tau_ms.csv",
                matrix_csv(&fleet.sensor_names, &fleet.target_names, &fleet.tau_ms),
            )?;
            put(
                "step1_times.csv",
                matrix_csv(
                    &fleet.sensor_names,
                    &fleet.target_names,
                    &fleet.step1.times_ms,
                ),
            )?;
            put(
                "step1_probabilities.csv",
                matrix_csv(
                    &fleet.sensor_names,
                    &fleet.target_names,
                    &fleet.step1.probabilities,
                ),
            )?;
            put("pseudo_sensors.csv", pseudo_csv(fleet))?;
            put("assignment.csv", assignment_csv(fleet))?;
            put("candidates.csv", candidates_csv(fleet))?;
            put("timeline.csv", timeline_csv(fleet))?;
            put("plan_summary.csv", plan_summary_csv(fleet))?;
            put("metrics.csv", fleet_metrics_csv(fleet))?;
        }
    }
    Ok(files)
}

/// Writes the SVG chart for the report; returns its path.
pub fn write_svg(report: &RunReport, out: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    let (name, content) = match report {
        RunReport::Deterministic(det) => (
            "allocation.svg",
            bar_chart(
                "Observation time per target (ms)",
                &det.target_names,
                &det.times_ms,
            ),
        ),
        RunReport::Probabilistic(prob) => {
            let labels: Vec<String> = (1..=prob.allocation.times_ms.len())
                .map(|j| format!("dir {j}"))
                .collect();
            (
                "allocation.svg",
                bar_chart(
                    "Observation time per direction (ms)",
                    &labels,
                    &prob.allocation.times_ms,
                ),
            )
        }
        RunReport::Fleet(fleet) => ("timeline.svg", gantt(fleet)),
    };
    let path = out.join(name);
    std::fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

// ---------------------------------------------------------------- tables

fn det_table(det: &DetReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Optimal observation-time allocation (horizon split across targets)"
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<10} {:>8} {:>12} {:>10} {:>12} {:>10}",
        "target", "weight", "tau_ms", "t_ms", "p_detect", "looks"
    );
    for i in 0..det.target_names.len() {
        let looks = det
            .look_counts
            .as_ref()
            .map(|n| format!("{:.3}", n[i]))
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            s,
            "{:<10} {:>8.3} {:>12.4} {:>10.4} {:>12.4} {:>10}",
            det.target_names[i],
            det.weights[i],
            det.taus_ms[i],
            det.times_ms[i],
            det.probabilities[i],
            looks
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "lambda    {:.6}", det.lambda);
    let _ = writeln!(s, "criterion {:.4}", det.criterion);
    if let Some(k) = det.scale_used {
        let _ = writeln!(s, "scale     {k:.6e} ms/km^4");
    }
    s
}

fn prob_table(prob: &ProbReport) -> String {
    // Paper-style layout: one column per direction, rows for index,
    // weight, time, look count and probability.
    let a = &prob.allocation;
    let nd = a.times_ms.len();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Optimal temporal allocation over {nd} directions (horizon {} ms)",
        prob.horizon_ms
    );
    let _ = writeln!(s, "priors: {}", prob.prior_names.join(", "));
    let _ = writeln!(s);
    let mut rows = vec![
        ("dir".to_string(), Vec::with_capacity(nd)),
        ("eps".to_string(), Vec::with_capacity(nd)),
        ("t_ms".to_string(), Vec::with_capacity(nd)),
        ("m".to_string(), Vec::with_capacity(nd)),
        ("P".to_string(), Vec::with_capacity(nd)),
    ];
    for j in 0..nd {
        rows[0].1.push(format!("{}", j + 1));
        rows[1].1.push(trim_num(prob.direction_weights[j], 2));
        rows[2].1.push(trim_num(a.times_ms[j], 2));
        rows[3].1.push(trim_num(a.counts[j], 2));
        rows[4].1.push(trim_num(a.probabilities[j], 2));
    }
    let width = rows
        .iter()
        .flat_map(|(_, cells)| cells.iter().map(|c| c.len()))
        .max()
        .unwrap_or(1)
        .max(4);
    for (label, cells) in rows {
        let _ = write!(s, "{label:<5}|");
        for c in cells {
            let _ = write!(s, " {c:>width$}");
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "active directions: {:?}",
        a.active.iter().map(|j| j + 1).collect::<Vec<_>>()
    );
    let _ = writeln!(s, "lambda    {:.6}", a.lambda);
    let _ = writeln!(s, "criterion {:.4}", a.criterion);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<5} {:>12} {:>8} {:>10} {:>12} {:>12} {:>10}",
        "dir", "omega", "n", "gamma_s", "tau_ms", "fit_error", "mass"
    );
    for m in a.models.iter().flatten() {
        let _ = writeln!(
            s,
            "{:<5} {:>12.4} {:>8.4} {:>10.6} {:>12.4} {:>12.3e} {:>10.6}",
            m.direction + 1,
            m.omega,
            m.exponent,
            m.gamma_s,
            m.tau_ms,
            m.fit_error,
            m.mass
        );
    }
    s
}

fn trim_num(x: f64, decimals: usize) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.decimals$}")
    }
}

fn fleet_table(fleet: &FleetReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Fleet plan over {} ms", fleet.horizon_ms);
    if let Some(k) = fleet.scale_used {
        let _ = writeln!(s, "scale {k:.6e} ms/km^4");
    }
    let _ = writeln!(s);
    if let Some(d) = &fleet.distances_km {
        let _ = writeln!(s, "Sensor-target distances (km)");
        matrix_table(&mut s, &fleet.sensor_names, &fleet.target_names, d, 2);
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "Step 1: per-sensor optimal durations (ms)");
    matrix_table(
        &mut s,
        &fleet.sensor_names,
        &fleet.target_names,
        &fleet.step1.times_ms,
        4,
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "Step 1: detection probabilities");
    matrix_table(
        &mut s,
        &fleet.sensor_names,
        &fleet.target_names,
        &fleet.step1.probabilities,
        4,
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Step 2: pseudo-sensor probabilities (shortest shared duration)"
    );
    let name_w = fleet
        .pseudo
        .iter()
        .map(|(n, _)| n.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let _ = write!(s, "{:<name_w$}", "group");
    for t in &fleet.target_names {
        let _ = write!(s, " {t:>8}");
    }
    let _ = writeln!(s);
    for (label, row) in &fleet.pseudo {
        let _ = write!(s, "{label:<name_w$}");
        for v in row {
            let _ = write!(s, " {v:>8.3}");
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Step 3: assignment (criterion {:.4})",
        fleet.assignment.criterion
    );
    for (c, group) in fleet.assignment.groups.iter().enumerate() {
        match group {
            Some(g) => {
                let label = g
                    .members()
                    .iter()
                    .map(|m| fleet.sensor_names[*m].as_str())
                    .collect::<Vec<_>>()
                    .join("-");
                let _ = writeln!(
                    s,
                    "  {} <- {:<12} p = {:.4}",
                    fleet.target_names[c], label, fleet.assignment.fused[c]
                );
            }
            None => {
                let _ = writeln!(s, "  {} <- (unobserved)", fleet.target_names[c]);
            }
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Leading candidates");
    for cand in &fleet.candidates {
        let _ = writeln!(s, "  {:<40} {:.4}", cand.description, cand.criterion);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Timeline");
    for seg in &fleet.timeline.segments {
        let _ = writeln!(
            s,
            "  {:<6} {:<6} {:>9.4} -> {:>9.4} ms",
            fleet.sensor_names[seg.sensor],
            fleet.target_names[seg.target],
            seg.start_ms,
            seg.end_ms
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<8} {:>14} {:>14}", "target", "observed_ms", "p_final");
    for c in 0..fleet.target_names.len() {
        let _ = writeln!(
            s,
            "{:<8} {:>14.4} {:>14.4}",
            fleet.target_names[c],
            fleet.timeline.observed_ms[c],
            fleet.timeline.final_probabilities[c]
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "criterion        {:.4}", fleet.timeline.criterion);
    let _ = writeln!(s, "static criterion {:.4}", fleet.timeline.static_criterion);
    s
}

fn matrix_table(s: &mut String, rows: &[String], cols: &[String], m: &[Vec<f64>], decimals: usize) {
    let name_w = rows.iter().map(|r| r.len()).max().unwrap_or(4).max(4);
    let _ = write!(s, "{:<name_w$}", "");
    for c in cols {
        let _ = write!(s, " {c:>10}");
    }
    let _ = writeln!(s);
    for (r, row) in m.iter().enumerate() {
        let _ = write!(s, "{:<name_w$}", rows[r]);
        for v in row {
            let _ = write!(s, " {v:>10.decimals$}");
        }
        let _ = writeln!(s);
    }
}

// ------------------------------------------------------------------ CSVs

fn det_allocation_csv(det: &DetReport) -> String {
    let mut s = String::from("target,weight,tau_ms,time_ms,probability,look_count\n");
    for i in 0..det.target_names.len() {
        let looks = det
            .look_counts
            .as_ref()
            .map(|n| n[i].to_string())
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            det.target_names[i],
            det.weights[i],
            det.taus_ms[i],
            det.times_ms[i],
            det.probabilities[i],
            looks
        );
    }
    s
}

fn det_metrics_csv(det: &DetReport) -> String {
    let mut s = String::from("key,value\n");
    let _ = writeln!(s, "lambda,{}", det.lambda);
    let _ = writeln!(s, "criterion,{}", det.criterion);
    if let Some(k) = det.scale_used {
        let _ = writeln!(s, "scale_ms_per_km4,{k}");
    }
    s
}

fn prob_directions_csv(prob: &ProbReport) -> String {
    let a = &prob.allocation;
    let mut s = String::from("direction,epsilon,time_ms,look_count,probability\n");
    for j in 0..a.times_ms.len() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            j + 1,
            prob.direction_weights[j],
            a.times_ms[j],
            a.counts[j],
            a.probabilities[j]
        );
    }
    s
}

fn prob_fits_csv(prob: &ProbReport) -> String {
    let mut s = String::from("direction,omega,exponent,gamma_s,tau_ms,fit_error,mass\n");
    for m in prob.allocation.models.iter().flatten() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            m.direction + 1,
            m.omega,
            m.exponent,
            m.gamma_s,
            m.tau_ms,
            m.fit_error,
            m.mass
        );
    }
    s
}

fn prob_metrics_csv(prob: &ProbReport) -> String {
    let mut s = String::from("key,value\n");
    let _ = writeln!(s, "lambda,{}", prob.allocation.lambda);
    let _ = writeln!(s, "criterion,{}", prob.allocation.criterion);
    let _ = writeln!(s, "horizon_ms,{}", prob.horizon_ms);
    s
}

fn matrix_csv(rows: &[String], cols: &[String], m: &[Vec<f64>]) -> String {
    let mut s = String::from("sensor");
    for c in cols {
        let _ = write!(s, ",{c}");
    }
    let _ = writeln!(s);
    for (r, row) in m.iter().enumerate() {
        let _ = write!(s, "{}", rows[r]);
        for v in row {
            let _ = write!(s, ",{v}");
        }
        let _ = writeln!(s);
    }
    s
}

fn pseudo_csv(fleet: &FleetReport) -> String {
    let mut s = String::from("group");
    for c in &fleet.target_names {
        let _ = write!(s, ",{c}");
    }
    let _ = writeln!(s);
    for (label, row) in &fleet.pseudo {
        let _ = write!(s, "{label}");
        for v in row {
            let _ = write!(s, ",{v}");
        }
        let _ = writeln!(s);
    }
    s
}

fn assignment_csv(fleet: &FleetReport) -> String {
    let mut s = String::from("target,group,probability\n");
    for (c, group) in fleet.assignment.groups.iter().enumerate() {
        let label = group
            .as_ref()
            .map(|g| {
                g.members()
                    .iter()
                    .map(|m| fleet.sensor_names[*m].as_str())
                    .collect::<Vec<_>>()
                    .join("-")
            })
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{}",
            fleet.target_names[c], label, fleet.assignment.fused[c]
        );
    }
    s
}

fn candidates_csv(fleet: &FleetReport) -> String {
    let mut s = String::from("rank,assignment,criterion\n");
    for (i, cand) in fleet.candidates.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", i + 1, cand.description, cand.criterion);
    }
    s
}

fn timeline_csv(fleet: &FleetReport) -> String {
    let mut s = String::from("sensor,target,start_ms,end_ms\n");
    for seg in &fleet.timeline.segments {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fleet.sensor_names[seg.sensor],
            fleet.target_names[seg.target],
            seg.start_ms,
            seg.end_ms
        );
    }
    s
}

fn plan_summary_csv(fleet: &FleetReport) -> String {
    let mut s = String::from("target,observed_ms,final_probability\n");
    for c in 0..fleet.target_names.len() {
        let _ = writeln!(
            s,
            "{},{},{}",
            fleet.target_names[c],
            fleet.timeline.observed_ms[c],
            fleet.timeline.final_probabilities[c]
        );
    }
    s
}

fn fleet_metrics_csv(fleet: &FleetReport) -> String {
    let mut s = String::from("key,value\n");
    let _ = writeln!(s, "assignment_criterion,{}", fleet.assignment.criterion);
    let _ = writeln!(s, "plan_criterion,{}", fleet.timeline.criterion);
    let _ = writeln!(s, "static_criterion,{}", fleet.timeline.static_criterion);
    let _ = writeln!(s, "horizon_ms,{}", fleet.horizon_ms);
    if let Some(k) = fleet.scale_used {
        let _ = writeln!(s, "scale_ms_per_km4,{k}");
    }
    s
}

// ------------------------------------------------------------------- SVG

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#9c755f",
];

fn svg_header(width: f64, height: f64, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n\
         <text x=\"16\" y=\"24\" font-size=\"15\" font-weight=\"bold\">{title}</text>\n"
    )
}

/// Horizontal bar chart of per-item durations; zero bars are skipped.
fn bar_chart(title: &str, labels: &[String], values: &[f64]) -> String {
    let rows: Vec<(usize, f64)> = values
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, v)| *v > 0.0)
        .collect();
    let row_h = 26.0;
    let left = 90.0;
    let width = 720.0;
    let height = 60.0 + row_h * rows.len().max(1) as f64;
    let max = rows.iter().map(|(_, v)| *v).fold(1e-12, f64::max);
    let mut s = svg_header(width, height, title);
    for (slot, (i, v)) in rows.iter().enumerate() {
        let y = 44.0 + slot as f64 * row_h;
        let w = (width - left - 80.0) * v / max;
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n\
             <rect x=\"{left}\" y=\"{:.1}\" width=\"{w:.2}\" height=\"{h}\" fill=\"{color}\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\">{v:.3} ms</text>\n",
            left - 8.0,
            y + 14.0,
            labels[*i],
            y,
            left + w + 6.0,
            y + 14.0,
            h = row_h - 8.0,
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Per-sensor Gantt chart of the fleet timeline.
fn gantt(fleet: &FleetReport) -> String {
    let p = fleet.sensor_names.len();
    let row_h = 42.0;
    let left = 70.0;
    let right = 40.0;
    let width = 900.0;
    let height = 90.0 + row_h * p as f64;
    let span = fleet.horizon_ms;
    let scale = (width - left - right) / span;
    let title = format!(
        "Sensor timeline over {} ms (criterion {:.4})",
        fleet.horizon_ms, fleet.timeline.criterion
    );
    let mut s = svg_header(width, height, &title);

    // time axis
    let axis_y = 50.0 + row_h * p as f64;
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{axis_y:.1}\" x2=\"{:.1}\" y2=\"{axis_y:.1}\" stroke=\"#333\"/>",
        left + span * scale
    );
    let ticks = 10usize;
    for k in 0..=ticks {
        let t = span * k as f64 / ticks as f64;
        let x = left + t * scale;
        let _ = write!(
            s,
            "<line x1=\"{x:.1}\" y1=\"{axis_y:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n\
             <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{t:.1}</text>\n",
            axis_y + 5.0,
            axis_y + 18.0
        );
    }

    for (s_idx, name) in fleet.sensor_names.iter().enumerate() {
        let y = 44.0 + s_idx as f64 * row_h;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-weight=\"bold\">{name}</text>",
            left - 10.0,
            y + row_h / 2.0
        );
        for seg in fleet
            .timeline
            .segments
            .iter()
            .filter(|seg| seg.sensor == s_idx)
        {
            let x = left + seg.start_ms * scale;
            let w = (seg.end_ms - seg.start_ms) * scale;
            let color = PALETTE[seg.target % PALETTE.len()];
            let label = &fleet.target_names[seg.target];
            let _ = writeln!(
                s,
                "<rect x=\"{x:.2}\" y=\"{y:.1}\" width=\"{w:.2}\" height=\"{:.1}\" \
                 fill=\"{color}\" stroke=\"white\"/>",
                row_h - 12.0
            );
            if w > 26.0 {
                let _ = writeln!(
                    s,
                    "<text x=\"{:.2}\" y=\"{:.1}\" fill=\"white\" text-anchor=\"middle\">{label}</text>",
                    x + w / 2.0,
                    y + row_h / 2.0 + 2.0
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
