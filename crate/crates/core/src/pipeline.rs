//! Forward (divisive) and backward (agglomerative) passes, start-point
//! tuning and elbow selection.
//!
//! Every split or merge is followed by reassignment, refinement and a second
//! reassignment. A backward pass records the solution at every cluster count
//! it visits, so one pass from `C` clusters yields all suites for `K <= C`.

use std::borrow::Cow;
use std::collections::BTreeMap;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{evaluate, ShipmentRecord};
use crate::merge::combine_clusters;
use crate::model::{Catalog, Dims, Solution, SolverConfig};
use crate::refine::{iterative_refinement, reassign_products};
use crate::split::apply_best_split;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Start,
    Split,
    Reassign,
    Refine,
    Merge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub clusters: usize,
    pub total_volume: f64,
}

/// Which improvement steps run after each split or merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassOptions {
    pub t_max: usize,
    pub reassign: bool,
    pub refine: bool,
}

impl PassOptions {
    pub fn new(t_max: usize) -> Self {
        PassOptions { t_max, reassign: true, refine: true }
    }
}

impl From<&SolverConfig> for PassOptions {
    fn from(c: &SolverConfig) -> Self {
        PassOptions { t_max: c.t_max, reassign: c.reassign, refine: c.refine }
    }
}

/// Solutions keyed by cluster count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionLadder {
    entries: BTreeMap<usize, Solution>,
}

impl SolutionLadder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps the first solution seen for a given cluster count.
    pub fn record(&mut self, solution: &Solution) {
        self.entries.entry(solution.num_clusters()).or_insert_with(|| solution.clone());
    }

    pub fn get(&self, k: usize) -> Option<&Solution> {
        self.entries.get(&k)
    }

    /// Box suite for `k`, if recorded.
    pub fn boxes(&self, k: usize) -> Option<Vec<Dims>> {
        self.get(k).map(Solution::boxes)
    }

    /// The recorded solution with the most clusters not exceeding `k`.
    pub fn at_most(&self, k: usize) -> Option<&Solution> {
        self.entries.range(..=k).next_back().map(|(_, s)| s)
    }

    pub fn ks(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Solution)> + '_ {
        self.entries.iter().map(|(&k, s)| (k, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One point of a volume-versus-K curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    pub k: usize,
    pub total_volume: f64,
    pub xi: f64,
}

/// Points sorted by ascending, distinct K.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KCurve {
    pub entries: Vec<KPoint>,
}

#[derive(Debug, Clone)]
pub struct ForwardOutcome {
    pub solution: Solution,
    /// Cluster count at which no cluster could be split any further.
    pub exhausted_at: Option<usize>,
    pub log: Vec<StageRecord>,
    /// Solution at each cluster count, only filled by [`forward_ladder`].
    pub ladder: SolutionLadder,
}

#[derive(Debug, Clone)]
pub struct BackwardOutcome {
    pub ladder: SolutionLadder,
    pub log: Vec<StageRecord>,
}

fn push(log: &mut Vec<StageRecord>, stage: Stage, s: &Solution) {
    log.push(StageRecord { stage, clusters: s.num_clusters(), total_volume: s.total_volume() });
}

/// reassign, refine, reassign
fn polish(mut s: Solution, catalog: &Catalog, opts: PassOptions, log: &mut Vec<StageRecord>) -> Result<Solution> {
    if opts.reassign {
        s = reassign_products(&s, catalog);
        push(log, Stage::Reassign, &s);
    }
    if opts.refine && s.num_clusters() >= 2 {
        s = iterative_refinement(&s, catalog, opts.t_max)?.solution;
        push(log, Stage::Refine, &s);
    }
    if opts.reassign {
        s = reassign_products(&s, catalog);
        push(log, Stage::Reassign, &s);
    }
    Ok(s)
}

fn forward_impl(catalog: &Catalog, k_tilde: usize, opts: PassOptions, record: bool) -> Result<ForwardOutcome> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    if k_tilde < 1 {
        return Err(Error::InvalidConfig("K-tilde must be >= 1".into()));
    }
    let mut log = Vec::new();
    let mut ladder = SolutionLadder::new();
    let mut s = Solution::single(catalog);
    push(&mut log, Stage::Start, &s);
    if record {
        ladder.record(&s);
    }
    let mut exhausted_at = None;
    // reassignment may drop clusters, so bound the number of rounds
    let max_rounds = 4 * k_tilde + 16;
    let mut rounds = 0;
    while s.num_clusters() < k_tilde {
        if rounds == max_rounds {
            warn!("forward pass stalled at {} clusters after {rounds} rounds", s.num_clusters());
            break;
        }
        rounds += 1;
        let (next, plan) = match apply_best_split(&s, catalog) {
            Ok(r) => r,
            Err(Error::NoSplittableCluster) => {
                exhausted_at = Some(s.num_clusters());
                debug!("splits exhausted at C={}", s.num_clusters());
                break;
            }
            Err(e) => return Err(e),
        };
        debug!("split cluster {} on {} at {} (gain {})", plan.cluster_index, plan.axis, plan.cut, plan.gain);
        push(&mut log, Stage::Split, &next);
        s = polish(next, catalog, opts, &mut log)?;
        if record {
            ladder.record(&s);
        }
    }
    Ok(ForwardOutcome { solution: s, exhausted_at, log, ladder })
}

/// Grow from one cluster to `k_tilde` clusters, or fewer if no cluster can
/// be split any more.
pub fn forward_pass(catalog: &Catalog, k_tilde: usize, opts: PassOptions) -> Result<ForwardOutcome> {
    forward_impl(catalog, k_tilde, opts, false)
}

/// [`forward_pass`] that also keeps the first solution reached at every
/// cluster count. The entry for `c` equals `forward_pass(catalog, c, ..)`.
pub fn forward_ladder(catalog: &Catalog, k_tilde: usize, opts: PassOptions) -> Result<ForwardOutcome> {
    forward_impl(catalog, k_tilde, opts, true)
}

/// Merge down to `k_min` clusters, recording every cluster count visited.
/// The input itself is recorded unmodified at its own cluster count.
pub fn backward_pass(solution: &Solution, catalog: &Catalog, k_min: usize, opts: PassOptions) -> Result<BackwardOutcome> {
    if k_min < 1 {
        return Err(Error::InvalidConfig("K must be >= 1".into()));
    }
    let mut log = Vec::new();
    let mut ladder = SolutionLadder::new();
    let mut s = solution.clone();
    push(&mut log, Stage::Start, &s);
    ladder.record(&s);
    while s.num_clusters() > k_min {
        let (merged, pair) = combine_clusters(&s, catalog)?;
        debug!("merged clusters {} and {} (delta {})", pair.first, pair.second, pair.delta);
        push(&mut log, Stage::Merge, &merged);
        s = polish(merged, catalog, opts, &mut log)?;
        ladder.record(&s);
    }
    Ok(BackwardOutcome { ladder, log })
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Tight boxes of the final clusters, in cluster order.
    pub boxes: Vec<Dims>,
    pub solution: Solution,
    pub forward_exhausted_at: Option<usize>,
    /// Forward log followed by backward log.
    pub log: Vec<StageRecord>,
    /// Every suite visited by the backward pass.
    pub ladder: SolutionLadder,
}

/// Forward pass to `k_tilde`, then backward pass to `k`. Products are
/// rotated to canonical orientation first when `config.canonicalize` is set.
///
/// If the forward pass runs out of splits below `k`, the result has fewer
/// than `k` boxes; [`SolveOutcome::forward_exhausted_at`] says so.
pub fn solve(catalog: &Catalog, config: &SolverConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let catalog: Cow<'_, Catalog> =
        if config.canonicalize { Cow::Owned(catalog.canonicalized()) } else { Cow::Borrowed(catalog) };
    let opts = PassOptions::from(config);
    let fwd = forward_pass(&catalog, config.k_tilde, opts)?;
    let back = backward_pass(&fwd.solution, &catalog, config.k, opts)?;
    let solution = back
        .ladder
        .get(config.k)
        .or_else(|| back.ladder.at_most(config.k))
        .or_else(|| back.ladder.iter().next().map(|(_, s)| s))
        .expect("ladder is never empty")
        .clone();
    let mut log = fwd.log;
    log.extend(back.log);
    Ok(SolveOutcome {
        boxes: solution.boxes(),
        solution,
        forward_exhausted_at: fwd.exhausted_at,
        log,
        ladder: back.ladder,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunePoint {
    /// Backward-pass start.
    pub start: usize,
    pub xi: f64,
    pub box_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub k: usize,
    pub best_start: usize,
    /// Validation air-in-box per start, ascending by start.
    pub curve: Vec<TunePoint>,
}

/// Choose the backward-pass start for target `k` by validation air-in-box.
pub fn tune_start(
    train: &Catalog,
    validation: &[ShipmentRecord],
    k: usize,
    candidates: &[usize],
    opts: PassOptions,
) -> Result<usize> {
    Ok(tune_starts(train, validation, k..=k, candidates, opts)?.remove(0).best_start)
}

/// Backward ladder grown from one start.
#[derive(Debug, Clone)]
pub struct StartLadder {
    pub start: usize,
    pub ladder: SolutionLadder,
}

/// One forward pass to the largest start, then one backward pass down to
/// `k_min` from each start's forward snapshot. Starts come back ascending
/// and deduplicated. A start beyond the forward pass's reach begins from the
/// largest solution it did reach.
pub fn start_ladders(train: &Catalog, k_min: usize, candidates: &[usize], opts: PassOptions) -> Result<Vec<StartLadder>> {
    let mut starts: Vec<usize> = candidates.to_vec();
    starts.sort_unstable();
    starts.dedup();
    match starts.first() {
        None => return Err(Error::InvalidConfig("no candidate starts".into())),
        Some(&lo) if lo < k_min => {
            return Err(Error::InvalidConfig(format!("candidate start {lo} is below K={k_min}")))
        }
        _ => {}
    }
    let fwd = forward_ladder(train, *starts.last().unwrap(), opts)?;
    starts
        .into_iter()
        .map(|start| {
            let from = fwd.ladder.at_most(start).expect("forward ladder starts at one cluster");
            let back = backward_pass(from, train, k_min, opts)?;
            Ok(StartLadder { start, ladder: back.ladder })
        })
        .collect()
}

/// Suite for `k` from a ladder, falling back to the largest suite below `k`
/// when the ladder skipped `k`.
pub fn suite_for(ladder: &SolutionLadder, k: usize) -> Option<&Solution> {
    ladder.get(k).or_else(|| ladder.at_most(k))
}

/// Tune the start for every target in `ks` with one shared forward pass and
/// one backward pass per candidate start. Ties go to the smaller start.
pub fn tune_starts(
    train: &Catalog,
    validation: &[ShipmentRecord],
    ks: std::ops::RangeInclusive<usize>,
    candidates: &[usize],
    opts: PassOptions,
) -> Result<Vec<TuneOutcome>> {
    if validation.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let (k_lo, k_hi) = (*ks.start(), *ks.end());
    if k_lo < 1 || k_lo > k_hi {
        return Err(Error::InvalidConfig(format!("invalid K range {k_lo}..={k_hi}")));
    }
    if let Some(&lo) = candidates.iter().min() {
        if lo < k_hi {
            return Err(Error::InvalidConfig(format!("candidate start {lo} is below K={k_hi}")));
        }
    }
    let ladders = start_ladders(train, k_lo, candidates, opts)?;
    tune_with_ladders(&ladders, train, validation, ks)
}

/// Pick, for every K in `ks`, the ladder whose suite has the lowest
/// validation air-in-box. Ties go to the smaller start.
pub fn tune_with_ladders(
    ladders: &[StartLadder],
    train: &Catalog,
    validation: &[ShipmentRecord],
    ks: std::ops::RangeInclusive<usize>,
) -> Result<Vec<TuneOutcome>> {
    if validation.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let mut out = Vec::new();
    for k in ks {
        let mut curve = Vec::with_capacity(ladders.len());
        for sl in ladders {
            let Some(sol) = suite_for(&sl.ladder, k) else { continue };
            let r = evaluate(&sol.boxes(), validation, train)?;
            curve.push(TunePoint { start: sl.start, xi: r.xi, box_volume: r.box_volume });
        }
        if curve.is_empty() {
            continue;
        }
        curve.sort_by_key(|p| p.start);
        let mut best = curve[0];
        for p in &curve[1..] {
            if p.xi < best.xi {
                best = *p;
            }
        }
        out.push(TuneOutcome { k, best_start: best.start, curve });
    }
    Ok(out)
}

/// The interior K with the largest discrete second difference
/// `[V(K-1) - V(K)] - [V(K) - V(K+1)]`; ties go to the smaller K.
pub fn elbow(curve: &KCurve) -> Result<usize> {
    let e = &curve.entries;
    if e.len() < 3 {
        return Err(Error::CurveTooShort { needed: 3, got: e.len() });
    }
    if e.windows(2).any(|w| w[1].k != w[0].k + 1) {
        return Err(Error::CurveNotConsecutive);
    }
    let mut best: Option<(usize, f64)> = None;
    for w in e.windows(3) {
        let d2 = (w[0].total_volume - w[1].total_volume) - (w[1].total_volume - w[2].total_volume);
        if best.is_none_or(|(_, b)| d2 > b) {
            best = Some((w[1].k, d2));
        }
    }
    Ok(best.unwrap().0)
}
