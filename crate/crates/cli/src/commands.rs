//! Command surface. Every command is a pure function of its input files and
//! flags; the caller decides where the report goes.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use boxsize::eval::evaluate_velocity;
use boxsize::pipeline::{forward_ladder, start_ladders, suite_for, tune_with_ladders, StartLadder};
use boxsize::{
    dp_1d, dp_1d_upto, elbow, evaluate_with, solve, Catalog, Dims, EvalOptions, KCurve, KPoint, PassOptions,
    ShipmentRecord, Solution, SolverConfig,
};
use clap::{Args, Parser, Subcommand};

use crate::io::{load_boxes, load_catalog, load_shipments, load_suites, write_catalog, write_shipments};
use crate::report::{ConfigEcho, Flags, MethodCurve, MethodPoint, Report};
use crate::synth::{gen_synthetic, Profile};

#[derive(Debug, Parser)]
#[command(name = "boxsize", version, about = "Choose shipping box sizes and measure air in box")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a K-box suite for a catalog.
    Optimize(OptimizeArgs),
    /// Measure a box suite on a shipment history.
    Evaluate(EvaluateArgs),
    /// Pick the backward-pass start by validation air in box.
    Tune(TuneArgs),
    /// Air in box across a range of K from one backward pass, with elbow.
    Sweep(SweepArgs),
    /// Full method, ablations, 1D baseline and external suites on one test set.
    Compare(CompareArgs),
    /// One-dimensional dynamic-programming baseline.
    Baseline(BaselineArgs),
    /// Write a synthetic catalog with validation and test shipments.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    /// Refinement move cap per polishing step.
    #[arg(long = "t-max", default_value_t = 50)]
    pub t_max: usize,
    /// Skip iterative refinement.
    #[arg(long = "no-refine")]
    pub no_refine: bool,
    /// Skip product reassignment.
    #[arg(long = "no-reassign")]
    pub no_reassign: bool,
    /// Let products rotate into boxes.
    #[arg(long = "canonicalize-dims")]
    pub canonicalize_dims: bool,
}

impl SolverFlags {
    fn pass_options(&self) -> PassOptions {
        PassOptions { t_max: self.t_max, reassign: !self.no_reassign, refine: !self.no_refine }
    }

    fn echo(&self, c: &mut ConfigEcho) {
        c.t_max = Some(self.t_max);
        c.canonicalize = self.canonicalize_dims;
        c.reassign = Some(!self.no_reassign);
        c.refine = Some(!self.no_refine);
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputFlags {
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write plot-ready CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub catalog: PathBuf,
    /// Evaluate the suite on these shipments instead of catalog velocities.
    #[arg(long)]
    pub shipments: Option<PathBuf>,
    #[arg(long)]
    pub k: usize,
    /// Backward-pass start (default 3K).
    #[arg(long = "k-tilde")]
    pub k_tilde: Option<usize>,
    /// Forward pass straight to K, no backward pass.
    #[arg(long = "forward-only")]
    pub forward_only: bool,
    /// Echoed only; the solver is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Box CSV (`length,width,height`) or a JSON report.
    #[arg(long)]
    pub boxes: PathBuf,
    #[arg(long)]
    pub shipments: PathBuf,
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long = "canonicalize-dims")]
    pub canonicalize_dims: bool,
    /// Report unfittable shipments as a virtual oversize box.
    #[arg(long = "oversize-box")]
    pub oversize_box: bool,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub validation: PathBuf,
    /// Target K (or lower end with --k-max).
    #[arg(long)]
    pub k: usize,
    #[arg(long = "k-max")]
    pub k_max: Option<usize>,
    /// Candidate starts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub candidates: Vec<usize>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long = "k-min")]
    pub k_min: usize,
    #[arg(long = "k-max")]
    pub k_max: usize,
    /// Backward-pass start (default 3 * k-max).
    #[arg(long = "k-tilde")]
    pub k_tilde: Option<usize>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Validation shipments for tuning the start per K (needs --candidates).
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[arg(long = "k-min")]
    pub k_min: usize,
    #[arg(long = "k-max")]
    pub k_max: usize,
    /// Fixed backward-pass start (default 3 * k-max) when not tuning.
    #[arg(long = "k-tilde")]
    pub k_tilde: Option<usize>,
    /// Candidate starts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub candidates: Vec<usize>,
    /// Extra suites to score, as NAME=PATH to a `k,length,width,height` CSV.
    #[arg(long = "external")]
    pub external: Vec<String>,
    #[arg(long = "t-max", default_value_t = 50)]
    pub t_max: usize,
    #[arg(long = "canonicalize-dims")]
    pub canonicalize_dims: bool,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long)]
    pub shipments: Option<PathBuf>,
    #[arg(long)]
    pub k: usize,
    #[arg(long = "canonicalize-dims")]
    pub canonicalize_dims: bool,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Number of products.
    #[arg(long)]
    pub n: usize,
    /// Expected shipments per period.
    #[arg(long, default_value_t = 10_000.0)]
    pub shipments: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "skewed")]
    pub profile: Profile,
    /// Output directory for catalog.csv, validation.csv and test.csv.
    #[arg(long)]
    pub out: PathBuf,
}

/// What a command produced. Files are written by [`Output::write`].
#[derive(Debug, Clone)]
pub struct Output {
    pub report: Option<Report>,
    pub summary: String,
    /// Generated data files (path, contents).
    pub files: Vec<(PathBuf, Vec<u8>)>,
}

impl Output {
    fn from_report(report: Report, output: &OutputFlags) -> Self {
        let mut files = Vec::new();
        if let Some(p) = &output.out {
            files.push((p.clone(), report.to_json().into_bytes()));
        }
        if let (Some(p), Some(csv)) = (&output.csv, report.curve_csv()) {
            files.push((p.clone(), csv.into_bytes()));
        }
        Output { summary: report.summary(), report: Some(report), files }
    }

    pub fn write(&self) -> Result<()> {
        for (path, bytes) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn run(command: &Command) -> Result<Output> {
    match command {
        Command::Optimize(a) => cmd_optimize(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Gen(a) => cmd_gen(a),
    }
}

fn show(p: &Path) -> Option<String> {
    Some(p.display().to_string())
}

/// Boxes ascending by volume, original order among equal volumes.
pub fn sorted_boxes(boxes: &[Dims]) -> Vec<Dims> {
    let mut b = boxes.to_vec();
    b.sort_by(|x, y| x.volume().total_cmp(&y.volume()));
    b
}

fn prepare(catalog: Catalog, canonicalize: bool) -> Catalog {
    if canonicalize {
        catalog.canonicalized()
    } else {
        catalog
    }
}

/// Evaluate on explicit shipments, or on catalog velocities when none are given.
fn score(boxes: &[Dims], shipments: Option<&[ShipmentRecord]>, catalog: &Catalog, opts: EvalOptions) -> Result<boxsize::EvalReport> {
    Ok(match shipments {
        Some(s) => evaluate_with(boxes, s, catalog, opts)?,
        None => evaluate_velocity(boxes, catalog, opts)?,
    })
}

pub fn cmd_optimize(a: &OptimizeArgs) -> Result<Output> {
    let catalog = load_catalog(&a.catalog)?;
    let shipments = a.shipments.as_deref().map(load_shipments).transpose()?;
    let k_tilde = if a.forward_only { a.k } else { a.k_tilde.unwrap_or(3 * a.k) };
    let config = SolverConfig {
        k: a.k,
        k_tilde,
        t_max: a.solver.t_max,
        canonicalize: a.solver.canonicalize_dims,
        seed: a.seed,
        reassign: !a.solver.no_reassign,
        refine: !a.solver.no_refine,
    };
    let out = solve(&catalog, &config).context("optimizing")?;

    let mut echo = ConfigEcho {
        catalog: show(&a.catalog),
        shipments: a.shipments.as_deref().and_then(show),
        k: Some(a.k),
        k_tilde: Some(k_tilde),
        forward_only: Some(a.forward_only),
        seed: Some(a.seed),
        ..Default::default()
    };
    a.solver.echo(&mut echo);

    let boxes = sorted_boxes(&out.boxes);
    let opts = EvalOptions { canonicalize: a.solver.canonicalize_dims, oversize_box: false };
    let eval = score(&boxes, shipments.as_deref(), &catalog, opts)?;
    let mut report = Report::new("optimize", echo).with_evaluation(eval);
    report.boxes = boxes;
    report.training_volume = Some(out.solution.total_volume());
    report.stage_log = out.log;
    report.flags = Flags {
        exhausted_at: out.forward_exhausted_at,
        boxes_short: (out.boxes.len() < a.k).then_some(out.boxes.len()),
    };
    Ok(Output::from_report(report, &a.output))
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<Output> {
    let catalog = load_catalog(&a.catalog)?;
    let shipments = load_shipments(&a.shipments)?;
    let boxes = sorted_boxes(&load_boxes(&a.boxes)?);
    let opts = EvalOptions { canonicalize: a.canonicalize_dims, oversize_box: a.oversize_box };
    let eval = evaluate_with(&boxes, &shipments, &catalog, opts).context("evaluating")?;
    let echo = ConfigEcho {
        catalog: show(&a.catalog),
        shipments: show(&a.shipments),
        boxes: show(&a.boxes),
        canonicalize: a.canonicalize_dims,
        oversize_box: Some(a.oversize_box),
        ..Default::default()
    };
    let mut report = Report::new("evaluate", echo).with_evaluation(eval);
    report.boxes = boxes;
    Ok(Output::from_report(report, &a.output))
}

pub fn cmd_tune(a: &TuneArgs) -> Result<Output> {
    let train = prepare(load_catalog(&a.train)?, a.solver.canonicalize_dims);
    let validation = load_shipments(&a.validation)?;
    let k_hi = a.k_max.unwrap_or(a.k);
    if k_hi < a.k {
        bail!("--k-max ({k_hi}) is below --k ({})", a.k);
    }
    if let Some(&lo) = a.candidates.iter().min() {
        if lo < k_hi {
            bail!("candidate start {lo} is below K={k_hi}");
        }
    }
    let ladders = start_ladders(&train, a.k, &a.candidates, a.solver.pass_options())?;
    let tuning = tune_with_ladders(&ladders, &train, &validation, a.k..=k_hi)?;

    let mut echo = ConfigEcho {
        catalog: show(&a.train),
        validation: show(&a.validation),
        k_min: Some(a.k),
        k_max: Some(k_hi),
        candidates: a.candidates.clone(),
        ..Default::default()
    };
    a.solver.echo(&mut echo);
    let mut report = Report::new("tune", echo);
    // the suite for the lower K at its chosen start
    if let Some(first) = tuning.first() {
        let sl = ladders.iter().find(|l| l.start == first.best_start).expect("tuned start has a ladder");
        let sol = suite_for(&sl.ladder, first.k).expect("tuned K has a suite");
        report.boxes = sorted_boxes(&sol.boxes());
        report.config.k_tilde = Some(first.best_start);
    }
    report.tuning = Some(tuning);
    Ok(Output::from_report(report, &a.output))
}

/// Test curve for every K in range from one ladder.
fn ladder_curve(
    ladder: &boxsize::SolutionLadder,
    ks: std::ops::RangeInclusive<usize>,
    test: &[ShipmentRecord],
    catalog: &Catalog,
    opts: EvalOptions,
) -> Result<KCurve> {
    let mut entries = Vec::new();
    for k in ks {
        let Some(sol) = suite_for(ladder, k) else { continue };
        let r = evaluate_with(&sol.boxes(), test, catalog, opts)?;
        entries.push(KPoint { k, total_volume: r.box_volume, xi: r.xi });
    }
    Ok(KCurve { entries })
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Output> {
    if a.k_min < 1 || a.k_max < a.k_min {
        bail!("invalid K range {}..={}", a.k_min, a.k_max);
    }
    let train = prepare(load_catalog(&a.train)?, a.solver.canonicalize_dims);
    let test = load_shipments(&a.test)?;
    let k_tilde = a.k_tilde.unwrap_or(3 * a.k_max);
    if k_tilde < a.k_max {
        bail!("--k-tilde ({k_tilde}) is below --k-max ({})", a.k_max);
    }
    let ladders = start_ladders(&train, a.k_min, &[k_tilde], a.solver.pass_options())?;
    let opts = EvalOptions { canonicalize: a.solver.canonicalize_dims, oversize_box: false };
    let curve = ladder_curve(&ladders[0].ladder, a.k_min..=a.k_max, &test, &train, opts)?;

    let mut echo = ConfigEcho {
        catalog: show(&a.train),
        shipments: show(&a.test),
        k_min: Some(a.k_min),
        k_max: Some(a.k_max),
        k_tilde: Some(k_tilde),
        ..Default::default()
    };
    a.solver.echo(&mut echo);
    let mut report = Report::new("sweep", echo);
    report.elbow = elbow(&curve).ok();
    report.k_curve = Some(curve);
    Ok(Output::from_report(report, &a.output))
}

fn method_point(
    k: usize,
    start: Option<usize>,
    boxes: Vec<Dims>,
    test: &[ShipmentRecord],
    catalog: &Catalog,
    opts: EvalOptions,
) -> Result<MethodPoint> {
    let boxes = sorted_boxes(&boxes);
    let r = evaluate_with(&boxes, test, catalog, opts)?;
    Ok(MethodPoint { k, start, num_boxes: boxes.len(), box_volume: r.box_volume, xi: r.xi, boxes })
}

/// Suites per K for one solver variant. `chosen` pairs each K with the
/// backward-pass start to use.
fn variant_suites(train: &Catalog, chosen: &[(usize, usize)], opts: PassOptions) -> Result<Vec<(usize, usize, Solution)>> {
    let Some(k_min) = chosen.iter().map(|&(k, _)| k).min() else { return Ok(Vec::new()) };
    let starts: Vec<usize> = chosen.iter().map(|&(_, s)| s).collect();
    let ladders: Vec<StartLadder> = start_ladders(train, k_min, &starts, opts)?;
    let mut out = Vec::new();
    for &(k, start) in chosen {
        let sl = ladders.iter().find(|l| l.start == start).expect("start has a ladder");
        if let Some(sol) = suite_for(&sl.ladder, k) {
            out.push((k, start, sol.clone()));
        }
    }
    Ok(out)
}

pub fn cmd_compare(a: &CompareArgs) -> Result<Output> {
    if a.k_min < 1 || a.k_max < a.k_min {
        bail!("invalid K range {}..={}", a.k_min, a.k_max);
    }
    let train = prepare(load_catalog(&a.train)?, a.canonicalize_dims);
    let test = load_shipments(&a.test)?;
    let validation = a.validation.as_deref().map(load_shipments).transpose()?;
    let starts: Vec<usize> = if a.candidates.is_empty() {
        vec![a.k_tilde.unwrap_or(3 * a.k_max)]
    } else {
        a.candidates.clone()
    };
    if let Some(&lo) = starts.iter().min() {
        if lo < a.k_max {
            bail!("start {lo} is below --k-max ({})", a.k_max);
        }
    }
    if starts.len() > 1 && validation.is_none() {
        bail!("several candidate starts need --validation");
    }
    let opts = EvalOptions { canonicalize: a.canonicalize_dims, oversize_box: false };
    let ks = a.k_min..=a.k_max;
    let full = PassOptions::new(a.t_max);
    let mut curves = Vec::new();

    // the start per K is tuned for the full method only; each ablation runs
    // the same configuration with one step switched off
    let chosen: Vec<(usize, usize)> = match validation.as_deref() {
        Some(v) if starts.len() > 1 => {
            let ladders = start_ladders(&train, a.k_min, &starts, full)?;
            tune_with_ladders(&ladders, &train, v, ks.clone())?.into_iter().map(|t| (t.k, t.best_start)).collect()
        }
        _ => ks.clone().map(|k| (k, starts[0])).collect(),
    };
    let variants = [
        ("full", full),
        ("no-reassign", PassOptions { reassign: false, ..full }),
        ("no-refine", PassOptions { refine: false, ..full }),
    ];
    for (name, p) in variants {
        let mut points = Vec::new();
        for (k, start, sol) in variant_suites(&train, &chosen, p)? {
            points.push(method_point(k, Some(start), sol.boxes(), &test, &train, opts)?);
        }
        curves.push(MethodCurve { method: name.into(), points });
    }

    let fwd = forward_ladder(&train, a.k_max, full)?;
    let mut points = Vec::new();
    for k in ks.clone() {
        if let Some(sol) = suite_for(&fwd.ladder, k) {
            points.push(method_point(k, None, sol.boxes(), &test, &train, opts)?);
        }
    }
    curves.push(MethodCurve { method: "forward-only".into(), points });

    let dp = dp_1d_upto(&train, a.k_max.min(train.len()))?;
    let mut points = Vec::new();
    for k in ks.clone() {
        if let Some(b) = dp.get(k - 1) {
            points.push(method_point(k, None, b.boxes.clone(), &test, &train, opts)?);
        }
    }
    curves.push(MethodCurve { method: "baseline".into(), points });

    for arg in &a.external {
        let (name, path) = arg.split_once('=').with_context(|| format!("--external expects NAME=PATH, got `{arg}`"))?;
        let mut points = Vec::new();
        for (k, boxes) in load_suites(Path::new(path))? {
            if ks.contains(&k) {
                points.push(method_point(k, None, boxes, &test, &train, opts)?);
            }
        }
        curves.push(MethodCurve { method: name.to_string(), points });
    }

    let echo = ConfigEcho {
        catalog: show(&a.train),
        shipments: show(&a.test),
        validation: a.validation.as_deref().and_then(show),
        k_min: Some(a.k_min),
        k_max: Some(a.k_max),
        k_tilde: (starts.len() == 1).then_some(starts[0]),
        candidates: if starts.len() > 1 { starts.clone() } else { Vec::new() },
        t_max: Some(a.t_max),
        canonicalize: a.canonicalize_dims,
        ..Default::default()
    };
    let mut report = Report::new("compare", echo);
    report.comparison = Some(curves);
    Ok(Output::from_report(report, &a.output))
}

pub fn cmd_baseline(a: &BaselineArgs) -> Result<Output> {
    let catalog = prepare(load_catalog(&a.catalog)?, a.canonicalize_dims);
    let shipments = a.shipments.as_deref().map(load_shipments).transpose()?;
    let out = dp_1d(&catalog, a.k).context("baseline")?;
    let boxes = sorted_boxes(&out.boxes);
    let opts = EvalOptions { canonicalize: a.canonicalize_dims, oversize_box: false };
    let eval = score(&boxes, shipments.as_deref(), &catalog, opts)?;
    let echo = ConfigEcho {
        catalog: show(&a.catalog),
        shipments: a.shipments.as_deref().and_then(show),
        k: Some(a.k),
        canonicalize: a.canonicalize_dims,
        ..Default::default()
    };
    let mut report = Report::new("baseline", echo).with_evaluation(eval);
    report.boxes = boxes;
    report.v_tilde = Some(out.v_tilde);
    report.training_volume = Some(out.solution.total_volume());
    Ok(Output::from_report(report, &a.output))
}

pub fn cmd_gen(a: &GenArgs) -> Result<Output> {
    if a.n < 1 {
        bail!("--n must be at least 1");
    }
    if !(a.shipments.is_finite() && a.shipments > 0.0) {
        bail!("--shipments must be positive");
    }
    let s = gen_synthetic(a.n, a.seed, a.profile, a.shipments);
    let mut cat = Vec::new();
    write_catalog(&mut cat, &s.catalog)?;
    let mut val = Vec::new();
    write_shipments(&mut val, &s.validation)?;
    let mut test = Vec::new();
    write_shipments(&mut test, &s.test)?;
    let total: u64 = s.test.iter().map(|r| r.count).sum();
    let summary = format!(
        "gen\n  {} products, profile {}, seed {}\n  test shipments: {total} ({:.1}% in the smaller half of products)\n",
        a.n,
        a.profile,
        a.seed,
        100.0 * crate::synth::small_share(&s.catalog, &s.test),
    );
    Ok(Output {
        report: None,
        summary,
        files: vec![
            (a.out.join("catalog.csv"), cat),
            (a.out.join("validation.csv"), val),
            (a.out.join("test.csv"), test),
        ],
    })
}
