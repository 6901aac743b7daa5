//! Product reassignment and one-product-move iterative refinement.
//!
//! Refinement only ever moves a product that attains its cluster's maximum
//! length, width or height, since no other move can shrink the source box.
//! Each cluster keeps, per axis, the arg-max member and the largest value
//! among the remaining members, so the source box after a move is known in
//! O(1). Both statistics are rebuilt by a linear scan whenever a cluster
//! changes.
//!
//! The best move for every ordered (source, destination) pair is cached. A
//! move only changes its two clusters, so after the first full evaluation
//! only pairs touching those two are recomputed.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{summarize, Axis, Catalog, Cluster, Dims, Solution};

/// Move `product` (catalog index) from one cluster to another.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveCandidate {
    pub product: usize,
    pub from: usize,
    pub to: usize,
    /// The axis on which `product` is the source cluster's maximum.
    pub axis: Axis,
    /// Volume before minus volume after.
    pub gain: f64,
}

/// How refinement re-scores candidates after each applied move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rescoring {
    /// Only pairs involving the two touched clusters.
    #[default]
    Incremental,
    /// Every pair, every iteration.
    Full,
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub solution: Solution,
    pub moves: Vec<MoveCandidate>,
    /// Clusters emptied by a move and dropped.
    pub dropped: usize,
}

/// Send every product to the smallest-volume box (among the current cluster
/// boxes) that contains it, then recompute tight boxes. Equal volumes prefer
/// the product's current cluster, then the lowest index. Clusters left empty
/// are dropped.
pub fn reassign_products(solution: &Solution, catalog: &Catalog) -> Solution {
    let boxes = solution.boxes();
    let volumes: Vec<f64> = boxes.iter().map(Dims::volume).collect();
    let mut by_volume: Vec<usize> = (0..boxes.len()).collect();
    by_volume.sort_by(|&a, &b| volumes[a].total_cmp(&volumes[b]).then(a.cmp(&b)));

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); boxes.len()];
    let mut changed = vec![false; boxes.len()];
    for (j, &current) in solution.assignment().iter().enumerate() {
        let d = catalog.dims(j);
        // the product always fits its own tight box, so the scan terminates
        let first = by_volume.iter().copied().find(|&k| d.fits_in(&boxes[k])).unwrap_or(current);
        let target = if volumes[first] == volumes[current] { current } else { first };
        if target != current {
            changed[target] = true;
            changed[current] = true;
        }
        groups[target].push(j);
    }
    if !changed.iter().any(|&c| c) {
        return solution.clone();
    }

    let mut clusters = Vec::with_capacity(groups.len());
    for (k, members) in groups.into_iter().enumerate() {
        if members.is_empty() {
            debug!("reassignment emptied cluster {k} (box {}); dropping it", boxes[k]);
            continue;
        }
        if changed[k] {
            clusters.push(Cluster::from_sorted(catalog, members));
        } else {
            clusters.push(solution.cluster(k).clone());
        }
    }
    Solution::from_parts(catalog.len(), clusters)
}

#[derive(Debug, Clone, Copy)]
struct AxisTop {
    arg: usize,
    max: f64,
    /// Largest value among members other than `arg`.
    second: f64,
}

#[derive(Debug, Clone)]
struct WorkCluster {
    members: Vec<usize>,
    bounding: Dims,
    velocity: f64,
    volume: f64,
    top: [AxisTop; 3],
    touched: bool,
}

impl WorkCluster {
    fn build(catalog: &Catalog, members: Vec<usize>, touched: bool) -> Self {
        let (bounding, velocity) = summarize(catalog, &members);
        let mut top = [AxisTop { arg: usize::MAX, max: f64::NEG_INFINITY, second: f64::NEG_INFINITY }; 3];
        for &m in &members {
            let d = catalog.dims(m);
            for axis in Axis::ALL {
                let t = &mut top[axis.index()];
                let v = d.get(axis);
                if v > t.max {
                    t.second = t.max;
                    t.max = v;
                    t.arg = m;
                } else if v > t.second {
                    t.second = v;
                }
            }
        }
        WorkCluster { volume: bounding.volume() * velocity, members, bounding, velocity, top, touched }
    }

    /// Distinct per-axis maximisers in axis order.
    fn movers(&self) -> impl Iterator<Item = (Axis, usize)> + '_ {
        Axis::ALL.into_iter().enumerate().filter_map(move |(i, axis)| {
            let p = self.top[i].arg;
            let repeated = self.top[..i].iter().any(|t| t.arg == p);
            (!repeated).then_some((axis, p))
        })
    }
}

fn move_gain(src: &WorkCluster, dst: &WorkCluster, product: usize, catalog: &Catalog) -> f64 {
    let s = catalog.velocity(product);
    let src_after = if src.members.len() == 1 {
        0.0
    } else {
        let mut b = src.bounding;
        for axis in Axis::ALL {
            let t = &src.top[axis.index()];
            if t.arg == product {
                b.set(axis, t.second);
            }
        }
        b.volume() * (src.velocity - s)
    };
    let dst_after = dst.bounding.max(catalog.dims(product)).volume() * (dst.velocity + s);
    (src.volume + dst.volume) - (src_after + dst_after)
}

fn pair_candidates<'a>(
    work: &'a [WorkCluster],
    from: usize,
    to: usize,
    catalog: &'a Catalog,
) -> impl Iterator<Item = MoveCandidate> + 'a {
    work[from].movers().map(move |(axis, product)| MoveCandidate {
        product,
        from,
        to,
        axis,
        gain: move_gain(&work[from], &work[to], product, catalog),
    })
}

fn best_for_pair(work: &[WorkCluster], from: usize, to: usize, catalog: &Catalog) -> Option<MoveCandidate> {
    let mut best: Option<MoveCandidate> = None;
    for c in pair_candidates(work, from, to, catalog) {
        if best.is_none_or(|b| c.gain > b.gain) {
            best = Some(c);
        }
    }
    best
}

fn work_from(solution: &Solution, catalog: &Catalog) -> Vec<WorkCluster> {
    solution
        .clusters()
        .iter()
        .map(|c| WorkCluster::build(catalog, c.members().to_vec(), false))
        .collect()
}

/// Every candidate move with its gain, ordered by (source, destination, axis).
/// At most 3(C-1)C entries.
pub fn evaluate_moves(solution: &Solution, catalog: &Catalog) -> Result<Vec<MoveCandidate>> {
    let c = solution.num_clusters();
    if c < 2 {
        return Err(Error::TooFewClusters(c));
    }
    let work = work_from(solution, catalog);
    let mut out = Vec::new();
    for from in 0..c {
        for to in 0..c {
            if from != to {
                out.extend(pair_candidates(&work, from, to, catalog));
            }
        }
    }
    Ok(out)
}

struct MoveTable {
    c: usize,
    best: Vec<Option<MoveCandidate>>,
}

impl MoveTable {
    fn full(work: &[WorkCluster], catalog: &Catalog) -> Self {
        let c = work.len();
        let mut t = MoveTable { c, best: vec![None; c * c] };
        for from in 0..c {
            for to in 0..c {
                if from != to {
                    t.best[from * c + to] = best_for_pair(work, from, to, catalog);
                }
            }
        }
        t
    }

    fn refresh_touching(&mut self, work: &[WorkCluster], a: usize, b: usize, catalog: &Catalog) {
        let c = self.c;
        for x in 0..c {
            for k in [a, b] {
                if x != k {
                    self.best[k * c + x] = best_for_pair(work, k, x, catalog);
                    self.best[x * c + k] = best_for_pair(work, x, k, catalog);
                }
            }
        }
    }

    /// First maximum in (source, destination, axis) order.
    fn argmax(&self) -> Option<MoveCandidate> {
        let mut best: Option<MoveCandidate> = None;
        for m in self.best.iter().flatten() {
            if best.is_none_or(|b| m.gain > b.gain) {
                best = Some(*m);
            }
        }
        best
    }
}

/// Greedy single-product moves while the best move strictly reduces volume,
/// for at most `t_max` moves.
pub fn iterative_refinement(solution: &Solution, catalog: &Catalog, t_max: usize) -> Result<RefineOutcome> {
    iterative_refinement_with(solution, catalog, t_max, Rescoring::Incremental)
}

pub fn iterative_refinement_with(
    solution: &Solution,
    catalog: &Catalog,
    t_max: usize,
    rescoring: Rescoring,
) -> Result<RefineOutcome> {
    let c = solution.num_clusters();
    if c < 2 {
        return Err(Error::TooFewClusters(c));
    }
    let mut work = work_from(solution, catalog);
    let mut origin: Vec<Option<usize>> = (0..c).map(Some).collect();
    let mut table = MoveTable::full(&work, catalog);
    let mut moves = Vec::new();
    let mut dropped = 0;

    for _ in 0..t_max {
        if work.len() < 2 {
            break;
        }
        let Some(mv) = table.argmax() else { break };
        if mv.gain <= 0.0 {
            break;
        }
        moves.push(mv);

        let mut src = std::mem::take(&mut work[mv.from].members);
        src.retain(|&m| m != mv.product);
        let mut dst = std::mem::take(&mut work[mv.to].members);
        let at = dst.binary_search(&mv.product).unwrap_err();
        dst.insert(at, mv.product);
        work[mv.to] = WorkCluster::build(catalog, dst, true);

        if src.is_empty() {
            debug!("refinement emptied cluster {}; dropping it", mv.from);
            work.remove(mv.from);
            origin.remove(mv.from);
            dropped += 1;
            table = MoveTable::full(&work, catalog);
            continue;
        }
        work[mv.from] = WorkCluster::build(catalog, src, true);
        origin[mv.from] = None;
        origin[mv.to] = None;
        match rescoring {
            Rescoring::Incremental => table.refresh_touching(&work, mv.from, mv.to, catalog),
            Rescoring::Full => table = MoveTable::full(&work, catalog),
        }
    }

    let clusters = work
        .into_iter()
        .zip(origin)
        .map(|(w, o)| match o {
            Some(k) if !w.touched => solution.cluster(k).clone(),
            _ => Cluster::from_sorted(catalog, w.members),
        })
        .collect();
    Ok(RefineOutcome { solution: Solution::from_parts(catalog.len(), clusters), moves, dropped })
}
