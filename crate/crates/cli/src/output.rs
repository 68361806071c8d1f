//! JSON reports, CSV tables and gnuplot scripts.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use wigent_core::{Region, Transform2};

use crate::run::{Outcome, Quantity, RunConfig, State};

/// Identifies the report layout; bumped on any incompatible change.
pub const SCHEMA_ID: &str = "wigent-report/1";

#[derive(Serialize)]
struct TransformJson {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    x0: f64,
    p0: f64,
}

impl From<&Transform2> for TransformJson {
    fn from(t: &Transform2) -> Self {
        Self { a: t.a, b: t.b, c: t.c, d: t.d, x0: t.x0, p0: t.p0 }
    }
}

#[derive(Serialize)]
struct DiskJson {
    x: f64,
    p: f64,
    radius: f64,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum RegionJson {
    FullPlane,
    Rectangle { x_min: f64, x_max: f64, p_min: f64, p_max: f64 },
    DiskUnion { disks: Vec<DiskJson> },
}

impl From<&Region> for RegionJson {
    fn from(r: &Region) -> Self {
        match r {
            Region::FullPlane => RegionJson::FullPlane,
            Region::Rectangle(r) => RegionJson::Rectangle { x_min: r.x_min, x_max: r.x_max, p_min: r.p_min, p_max: r.p_max },
            Region::DiskUnion(d) => RegionJson::DiskUnion {
                disks: d.iter().map(|d| DiskJson { x: d.center.x, p: d.center.p, radius: d.radius }).collect(),
            },
        }
    }
}

#[derive(Serialize)]
struct StateJson {
    family: &'static str,
    #[serde(flatten)]
    params: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff: Option<usize>,
}

impl From<&State> for StateJson {
    fn from(s: &State) -> Self {
        Self { family: s.family.name(), params: s.params.clone(), cutoff: s.effective_cutoff() }
    }
}

#[derive(Serialize)]
struct ReportJson {
    criterion: String,
    value: f64,
    bound: f64,
    violated: bool,
    transform: Option<TransformJson>,
    theta: Option<f64>,
    region: Option<RegionJson>,
    error_estimate: f64,
    state: StateJson,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    details: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<f64>,
}

#[derive(Serialize)]
struct Document {
    schema: &'static str,
    reports: Vec<ReportJson>,
}

pub fn json(state: &State, outcomes: &[Outcome]) -> String {
    let doc = Document {
        schema: SCHEMA_ID,
        reports: outcomes
            .iter()
            .map(|o| ReportJson {
                criterion: o.name.clone(),
                value: o.value,
                bound: o.bound,
                violated: o.violated,
                transform: o.transform.as_ref().map(TransformJson::from),
                theta: o.theta,
                region: o.region.as_ref().map(RegionJson::from),
                error_estimate: o.error_estimate,
                state: StateJson::from(state),
                details: o.details.clone(),
                runtime_ms: o.runtime_ms,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// Compact text form of a region for CSV cells.
pub fn region_text(r: &Region) -> String {
    match r {
        Region::FullPlane => "full".into(),
        Region::Rectangle(r) => format!("rect:{:?},{:?},{:?},{:?}", r.x_min, r.x_max, r.p_min, r.p_max),
        Region::DiskUnion(d) => {
            let items: Vec<String> = d.iter().map(|d| format!("{:?},{:?},{:?}", d.center.x, d.center.p, d.radius)).collect();
            format!("disks:{}", items.join(";"))
        }
    }
}

/// Shortest round-trip text, with exponents for very small or large values.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_bytes(rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory CSV");
    }
    w.into_inner().expect("in-memory CSV")
}

/// One row per report, for `evaluate` and `oracle`.
pub fn report_csv(outcomes: &[Outcome], timing: bool) -> Vec<u8> {
    let mut header: Vec<String> = [
        "criterion", "value", "bound", "violated", "error_estimate", "theta", "a", "b", "c", "d", "x0", "p0", "region",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if timing {
        header.push("runtime_ms".into());
    }
    let mut rows = vec![header];
    for o in outcomes {
        let t = o.transform.as_ref();
        let mut row = vec![
            o.name.clone(),
            num(o.value),
            num(o.bound),
            o.violated.to_string(),
            num(o.error_estimate),
            opt(o.theta),
            opt(t.map(|t| t.a)),
            opt(t.map(|t| t.b)),
            opt(t.map(|t| t.c)),
            opt(t.map(|t| t.d)),
            opt(t.map(|t| t.x0)),
            opt(t.map(|t| t.p0)),
            o.region.as_ref().map(region_text).unwrap_or_default(),
        ];
        if timing {
            row.push(opt(o.runtime_ms));
        }
        rows.push(row);
    }
    csv_bytes(rows)
}

/// Column names of a sweep table.
pub fn sweep_header(cfg: &RunConfig) -> Vec<String> {
    let mut h: Vec<String> = cfg.axes.iter().map(|a| a.param.to_string()).collect();
    for q in &cfg.quantities {
        let stem = q.column();
        match q {
            Quantity::Criterion(_) => {
                for suffix in ["value", "bound", "violated", "error"] {
                    h.push(format!("{stem}_{suffix}"));
                }
            }
            Quantity::EpsilonMin(_) => h.push(stem),
        }
    }
    h
}

pub fn sweep_csv(cfg: &RunConfig, points: &[Vec<f64>], results: &[Vec<Outcome>]) -> Vec<u8> {
    let mut rows = vec![sweep_header(cfg)];
    for (point, outs) in points.iter().zip(results) {
        let mut row: Vec<String> = point.iter().map(|&v| num(v)).collect();
        for (q, o) in cfg.quantities.iter().zip(outs) {
            match q {
                Quantity::Criterion(_) => {
                    row.push(num(o.value));
                    row.push(num(o.bound));
                    row.push(o.violated.to_string());
                    row.push(num(o.error_estimate));
                }
                Quantity::EpsilonMin(_) => row.push(num(o.value)),
            }
        }
        rows.push(row);
    }
    csv_bytes(rows)
}

/// gnuplot script rendering one PNG per swept quantity next to the CSV.
pub fn gnuplot_script(cfg: &RunConfig, csv_path: &Path) -> String {
    let header = sweep_header(cfg);
    let csv_name = csv_path.display().to_string();
    let stem = csv_path.with_extension("").display().to_string();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 800,600\n");
    s.push_str(&format!("set xlabel '{}'\n", cfg.axes[0].param));
    let value_cols: Vec<(usize, &String)> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.ends_with("_value") || h.starts_with("epsilon_min_"))
        .collect();
    for (idx, name) in value_cols {
        let col = idx + 1;
        s.push_str(&format!("set output '{stem}_{name}.png'\n"));
        if cfg.axes.len() == 2 {
            s.push_str(&format!("set ylabel '{}'\n", cfg.axes[1].param));
            s.push_str("set view map\n");
            s.push_str(&format!("splot '{csv_name}' every ::1 using 1:2:{col} with points palette pointtype 5 title '{name}'\n"));
        } else {
            s.push_str(&format!("plot '{csv_name}' every ::1 using 1:{col} with linespoints title '{name}'\n"));
        }
    }
    s
}
