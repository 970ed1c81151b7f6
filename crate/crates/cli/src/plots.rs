//! Plot-script emission: self-contained gnuplot scripts referencing the data
//! files of a completed run. Scripts are plain text and deterministic given
//! the run directory contents.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

struct PlotSpec {
    script: &'static str,
    data: &'static str,
    body: fn(&str, bool, &Value) -> String,
}

fn data_rows(dir: &Path, name: &str) -> usize {
    std::fs::read_to_string(dir.join(name))
        .map(|s| s.lines().count().saturating_sub(1))
        .unwrap_or(0)
}

fn preamble(title: &str, empty: bool) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script emitted by `anderson emit-plots`\n");
    if empty {
        s.push_str("# WARNING: the referenced data file has no data rows\n");
    }
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str("set key left top\n");
    s
}

fn renorm_body(data: &str, empty: bool, summary: &Value) -> String {
    let slope = summary.get("c_eps_slope").and_then(Value::as_f64).unwrap_or(0.0);
    let mut s = preamble("renormalization constant vs log(1/eps)", empty);
    s.push_str("set xlabel 'log(1/eps)'\nset ylabel 'c_eps'\n");
    s.push_str(&format!(
        "plot '{data}' using (log(1.0/$1)):2 skip 1 with linespoints title 'c_eps', \\\n     {slope:.9}*x + 0.0 title 'fitted slope {slope:.4} (shifted)'\n"
    ));
    s
}

fn weyl_body(data: &str, empty: bool, summary: &Value) -> String {
    let target = summary
        .get("target")
        .and_then(Value::as_f64)
        .unwrap_or(std::f64::consts::PI);
    let mut s = preamble("eigenvalue counting function", empty);
    s.push_str("set xlabel 'lambda'\nset ylabel 'N(lambda)'\n");
    s.push_str(&format!(
        "plot '{data}' using 4:5 skip 1 with points title 'per-seed counts', \\\n     {target:.9}*x title 'slope pi'\n"
    ));
    s
}

fn sandwich_body(data: &str, empty: bool, _summary: &Value) -> String {
    let mut s = preamble("eigenvalue sandwich constants vs K", empty);
    s.push_str("set xlabel 'K'\nset ylabel 'fitted constant'\n");
    s.push_str(&format!(
        "plot '{data}' using 4:5 skip 1 with points title 'm1', \\\n     '{data}' using 4:6 skip 1 with points title 'm2'\n"
    ));
    s
}

fn strichartz_body(data: &str, empty: bool, summary: &Value) -> String {
    let (slope, intercept) = summary
        .get("fit")
        .map(|f| {
            (
                f.get("sigma_star").and_then(Value::as_f64).unwrap_or(0.0),
                f.get("intercept").and_then(Value::as_f64).unwrap_or(0.0),
            )
        })
        .unwrap_or((0.0, 0.0));
    let mut s = preamble("space-time norm vs frequency scale", empty);
    s.push_str("set xlabel 'j*log(2)'\nset ylabel 'log norm'\n");
    s.push_str(&format!(
        "plot '{data}' using ($3*log(2)):(log($7)) skip 1 with points title 'samples', \\\n     {slope:.9}*x + {intercept:.9} title 'fit: loss {slope:.4}'\n"
    ));
    s
}

fn conservation_body(data: &str, empty: bool, _summary: &Value) -> String {
    let mut s = preamble("conservation traces", empty);
    s.push_str("set xlabel 't'\nset ylabel 'mass / energy'\n");
    s.push_str(&format!(
        "plot '{data}' using 4:5 skip 1 with lines title 'mass', \\\n     '{data}' using 4:6 skip 1 with lines title 'energy'\n"
    ));
    s
}

fn gamma_body(data: &str, empty: bool, summary: &Value) -> String {
    let slope = summary
        .get("mean_decay_slope")
        .and_then(Value::as_f64)
        .unwrap_or(0.0);
    let mut s = preamble("remainder-map deviation vs truncation scale", empty);
    s.push_str("set logscale xy\nset xlabel 's'\nset ylabel 'mean H^{1/2} deviation'\n");
    s.push_str(&format!(
        "# fitted log-log slope: {slope:.4}\nplot '{data}' using 3:4 skip 1 with points title 'per-seed means'\n"
    ));
    s
}

pub fn emit_plots(run_dir: &Path) -> Result<Vec<String>> {
    let summary_text = std::fs::read_to_string(run_dir.join("summary.json"))
        .with_context(|| format!("no summary.json in {}", run_dir.display()))?;
    let summary: Value = serde_json::from_str(&summary_text).context("summary.json is not valid JSON")?;
    let experiment = summary
        .get("experiment")
        .and_then(Value::as_str)
        .context("summary.json lacks an experiment name")?
        .to_string();

    let specs: Vec<PlotSpec> = match experiment.as_str() {
        "renorm" => vec![PlotSpec {
            script: "plots/renorm.gp",
            data: "renorm_constants.csv",
            body: renorm_body,
        }],
        "weyl" => vec![PlotSpec {
            script: "plots/weyl.gp",
            data: "weyl_counts.csv",
            body: weyl_body,
        }],
        "sandwich" => vec![PlotSpec {
            script: "plots/sandwich.gp",
            data: "sandwich.csv",
            body: sandwich_body,
        }],
        "strichartz-schrodinger" => vec![PlotSpec {
            script: "plots/strichartz.gp",
            data: "strichartz_samples.csv",
            body: strichartz_body,
        }],
        "strichartz-wave" => vec![PlotSpec {
            script: "plots/strichartz_wave.gp",
            data: "strichartz_wave_samples.csv",
            body: strichartz_body,
        }],
        "nls" => vec![PlotSpec {
            script: "plots/nls_conservation.gp",
            data: "nls_trajectory.csv",
            body: conservation_body,
        }],
        "wave" => vec![PlotSpec {
            script: "plots/wave_conservation.gp",
            data: "wave_trajectory.csv",
            body: conservation_body,
        }],
        "gamma-diagnostics" => vec![PlotSpec {
            script: "plots/gamma_decay.gp",
            data: "phi_decay.csv",
            body: gamma_body,
        }],
        "noise-stats" | "eigen" | "lq-slopes" => vec![],
        other => bail!("summary.json names unknown experiment {other:?}"),
    };

    std::fs::create_dir_all(run_dir.join("plots"))?;
    let mut written = Vec::new();
    for spec in specs {
        if !run_dir.join(spec.data).exists() {
            bail!("missing data file {} for plot {}", spec.data, spec.script);
        }
        let empty = data_rows(run_dir, spec.data) == 0;
        let rel_data = format!("../{}", spec.data);
        let content = (spec.body)(&rel_data, empty, &summary);
        std::fs::write(run_dir.join(spec.script), content)?;
        written.push(spec.script.to_string());
    }
    Ok(written)
}
