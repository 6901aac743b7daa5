//! The machine-readable run report and its human summary.

use std::fmt::Write as _;

use boxsize::eval::EvalReport;
use boxsize::pipeline::TuneOutcome;
use boxsize::{Dims, KCurve, StageRecord};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Echo of everything that determined the run. Absent fields did not apply.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shipments: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxes: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_tilde: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub candidates: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<usize>,
    pub canonicalize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forward_only: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reassign: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversize_box: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    /// Cluster count at which the forward pass ran out of splits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhausted_at: Option<usize>,
    /// Fewer boxes were produced than requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxes_short: Option<usize>,
}

/// One comparison method's test curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: String,
    pub points: Vec<MethodPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodPoint {
    pub k: usize,
    /// Backward-pass start, where the method has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    /// Boxes actually produced (can be below `k` on degenerate catalogs).
    pub num_boxes: usize,
    pub box_volume: f64,
    pub xi: f64,
    pub boxes: Vec<Dims>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub units: String,
    pub config: ConfigEcho,
    /// Box suite, ascending by volume.
    #[serde(default)]
    pub boxes: Vec<Dims>,
    /// Shipped box volume `V` of the evaluation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_volume: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    /// Training objective (velocity-weighted tight-box volume).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training_volume: Option<f64>,
    /// One-dimensional baseline objective.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_curve: Option<KCurve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elbow: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuning: Option<Vec<TuneOutcome>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<MethodCurve>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub stage_log: Vec<StageRecord>,
    #[serde(default)]
    pub flags: Flags,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            units: "cm".to_string(),
            config,
            boxes: Vec::new(),
            total_volume: None,
            xi: None,
            training_volume: None,
            v_tilde: None,
            evaluation: None,
            k_curve: None,
            elbow: None,
            tuning: None,
            comparison: None,
            stage_log: Vec::new(),
            flags: Flags::default(),
        }
    }

    /// Attach an evaluation, mirroring its `V` and `xi` at the top level.
    pub fn with_evaluation(mut self, r: EvalReport) -> Self {
        self.total_volume = Some(r.box_volume);
        self.xi = Some(r.xi);
        self.evaluation = Some(r);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plot-ready CSV of whichever curve the report carries.
    pub fn curve_csv(&self) -> Option<String> {
        let mut out = String::new();
        if let Some(curves) = &self.comparison {
            out.push_str("method,k,num_boxes,box_volume,xi\n");
            for c in curves {
                for p in &c.points {
                    writeln!(out, "{},{},{},{},{}", c.method, p.k, p.num_boxes, p.box_volume, p.xi).unwrap();
                }
            }
        } else if let Some(tuning) = &self.tuning {
            out.push_str("k,start,box_volume,xi,best\n");
            for t in tuning {
                for p in &t.curve {
                    writeln!(out, "{},{},{},{},{}", t.k, p.start, p.box_volume, p.xi, p.start == t.best_start).unwrap();
                }
            }
        } else if let Some(curve) = &self.k_curve {
            out.push_str("k,total_volume,xi\n");
            for p in &curve.entries {
                writeln!(out, "{},{},{}", p.k, p.total_volume, p.xi).unwrap();
            }
        } else if let Some(ev) = &self.evaluation {
            out.push_str("index,length,width,height,volume,shipments,shipment_share,volume_share\n");
            for b in &ev.per_box {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    b.index,
                    b.dims.length,
                    b.dims.width,
                    b.dims.height,
                    b.dims.volume(),
                    b.shipments,
                    b.shipment_share,
                    b.volume_share
                )
                .unwrap();
            }
        } else {
            return None;
        }
        Some(out)
    }

    /// Short human-readable summary; air-in-box to 0.1 percentage points.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", self.command).unwrap();
        if !self.boxes.is_empty() {
            writeln!(s, "  boxes ({}):", self.boxes.len()).unwrap();
            for (i, b) in self.boxes.iter().enumerate() {
                writeln!(s, "    {:>3}  {} cm", i + 1, b).unwrap();
            }
        }
        if let Some(v) = self.training_volume {
            writeln!(s, "  training volume: {v:.1}").unwrap();
        }
        if let Some(v) = self.v_tilde {
            writeln!(s, "  1D objective: {v:.1}").unwrap();
        }
        if let (Some(v), Some(xi)) = (self.total_volume, self.xi) {
            writeln!(s, "  shipped volume: {v:.1}   air in box: {xi:.1}%").unwrap();
        }
        if let Some(ev) = &self.evaluation {
            if !ev.unfittable.is_empty() {
                let n: f64 = ev.unfittable.iter().map(|u| u.shipments).sum();
                writeln!(s, "  unfittable: {} products, {n} shipments", ev.unfittable.len()).unwrap();
            }
        }
        if let Some(c) = &self.k_curve {
            for p in &c.entries {
                writeln!(s, "  K={:<3} V={:.1}  air in box {:.1}%", p.k, p.total_volume, p.xi).unwrap();
            }
        }
        if let Some(k) = self.elbow {
            writeln!(s, "  elbow at K={k}").unwrap();
        }
        if let Some(t) = &self.tuning {
            for o in t {
                let xi = o.curve.iter().find(|p| p.start == o.best_start).map_or(f64::NAN, |p| p.xi);
                writeln!(s, "  K={:<3} best start {:<4} validation air in box {:.1}%", o.k, o.best_start, xi).unwrap();
            }
        }
        if let Some(curves) = &self.comparison {
            for c in curves {
                let xs: Vec<String> = c.points.iter().map(|p| format!("{}:{:.1}", p.k, p.xi)).collect();
                writeln!(s, "  {:<14} {}", c.method, xs.join(" ")).unwrap();
            }
        }
        if let Some(c) = self.flags.exhausted_at {
            writeln!(s, "  note: no further splits possible at {c} clusters").unwrap();
        }
        s
    }
}
