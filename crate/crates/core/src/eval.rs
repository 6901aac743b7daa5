//! Shipment simulation: every shipment goes into its snuggest box, and the
//! air-in-box percentage `xi = 100 * (1 - P / V)` is reported alongside
//! per-box shipment and volume shares.
//!
//! Counts are aggregated per product before any floating-point work and then
//! accumulated in catalog order, so the result does not depend on how the
//! shipment rows are ordered or split.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Catalog, Dims};
use crate::pipeline::{KCurve, KPoint, SolutionLadder};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShipmentRecord {
    pub product_id: String,
    pub count: u64,
}

impl ShipmentRecord {
    pub fn new(product_id: impl Into<String>, count: u64) -> Self {
        ShipmentRecord { product_id: product_id.into(), count }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Allow products to be rotated into boxes.
    pub canonicalize: bool,
    /// Collect unfittable shipments into a virtual oversize box, reported
    /// separately and excluded from `xi`.
    pub oversize_box: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxUsage {
    /// Position in the box list passed to [`evaluate`].
    pub index: usize,
    pub dims: Dims,
    pub shipments: f64,
    /// Percent of fitted shipments sent in this box.
    pub shipment_share: f64,
    /// Percent of total shipped box volume sent in this box.
    pub volume_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unfittable {
    pub product_id: String,
    pub shipments: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversizeSummary {
    pub shipments: f64,
    pub product_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Total product volume `P` over fitted shipments.
    pub product_volume: f64,
    /// Total box volume `V` over fitted shipments.
    pub box_volume: f64,
    /// Percent air in box.
    pub xi: f64,
    pub fitted_shipments: f64,
    pub per_box: Vec<BoxUsage>,
    pub unfittable: Vec<Unfittable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversize: Option<OversizeSummary>,
}

/// Evaluate `boxes` on a shipment history with default options.
pub fn evaluate(boxes: &[Dims], shipments: &[ShipmentRecord], catalog: &Catalog) -> Result<EvalReport> {
    evaluate_with(boxes, shipments, catalog, EvalOptions::default())
}

pub fn evaluate_with(
    boxes: &[Dims],
    shipments: &[ShipmentRecord],
    catalog: &Catalog,
    opts: EvalOptions,
) -> Result<EvalReport> {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for rec in shipments {
        let j = catalog.index_of(&rec.product_id).ok_or_else(|| Error::UnknownProduct(rec.product_id.clone()))?;
        if rec.count == 0 {
            return Err(Error::ZeroCount(rec.product_id.clone()));
        }
        *counts.entry(j).or_default() += rec.count;
    }
    let weights: Vec<(usize, f64)> = counts.into_iter().map(|(j, c)| (j, c as f64)).collect();
    tally(boxes, catalog, &weights, opts)
}

/// Evaluate using catalog velocities as shipment weights (the training objective).
pub fn evaluate_velocity(boxes: &[Dims], catalog: &Catalog, opts: EvalOptions) -> Result<EvalReport> {
    let weights: Vec<(usize, f64)> = (0..catalog.len())
        .map(|j| (j, catalog.velocity(j)))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    tally(boxes, catalog, &weights, opts)
}

/// Index of the smallest-volume box containing `d` (lowest index on ties).
pub fn snug_box(d: &Dims, boxes: &[Dims], canonicalize: bool) -> Option<usize> {
    SnugIndex::new(boxes, canonicalize).find(d)
}

struct SnugIndex {
    boxes: Vec<Dims>,
    order: Vec<usize>,
    canonicalize: bool,
}

impl SnugIndex {
    fn new(boxes: &[Dims], canonicalize: bool) -> Self {
        let boxes: Vec<Dims> = if canonicalize { boxes.iter().map(Dims::canonical).collect() } else { boxes.to_vec() };
        let mut order: Vec<usize> = (0..boxes.len()).collect();
        order.sort_by(|&a, &b| boxes[a].volume().total_cmp(&boxes[b].volume()).then(a.cmp(&b)));
        SnugIndex { boxes, order, canonicalize }
    }

    fn find(&self, d: &Dims) -> Option<usize> {
        let d = if self.canonicalize { d.canonical() } else { *d };
        self.order.iter().copied().find(|&k| d.fits_in(&self.boxes[k]))
    }
}

fn tally(boxes: &[Dims], catalog: &Catalog, weights: &[(usize, f64)], opts: EvalOptions) -> Result<EvalReport> {
    if boxes.is_empty() {
        return Err(Error::NoBoxes);
    }
    let index = SnugIndex::new(boxes, opts.canonicalize);
    let mut per_box_ship = vec![0.0; boxes.len()];
    let mut per_box_vol = vec![0.0; boxes.len()];
    let (mut p, mut v, mut fitted) = (0.0, 0.0, 0.0);
    let mut unfittable = Vec::new();
    let (mut over_ship, mut over_vol) = (0.0, 0.0);

    for &(j, w) in weights {
        let d = catalog.dims(j);
        match index.find(d) {
            Some(k) => {
                let bv = boxes[k].volume() * w;
                p += d.volume() * w;
                v += bv;
                fitted += w;
                per_box_ship[k] += w;
                per_box_vol[k] += bv;
            }
            None => {
                unfittable.push(Unfittable { product_id: catalog.get(j).id.clone(), shipments: w });
                over_ship += w;
                over_vol += d.volume() * w;
            }
        }
    }
    if fitted <= 0.0 || v <= 0.0 {
        return Err(Error::NoFittedShipments);
    }
    let per_box = boxes
        .iter()
        .enumerate()
        .map(|(k, d)| BoxUsage {
            index: k,
            dims: *d,
            shipments: per_box_ship[k],
            shipment_share: 100.0 * per_box_ship[k] / fitted,
            volume_share: 100.0 * per_box_vol[k] / v,
        })
        .collect();
    Ok(EvalReport {
        product_volume: p,
        box_volume: v,
        xi: 100.0 * (1.0 - p / v),
        fitted_shipments: fitted,
        per_box,
        unfittable,
        oversize: opts.oversize_box.then_some(OversizeSummary { shipments: over_ship, product_volume: over_vol }),
    })
}

/// Evaluate every rung of a ladder on one shipment set.
pub fn k_sweep(ladder: &SolutionLadder, shipments: &[ShipmentRecord], catalog: &Catalog) -> Result<KCurve> {
    k_sweep_with(ladder, shipments, catalog, EvalOptions::default())
}

pub fn k_sweep_with(
    ladder: &SolutionLadder,
    shipments: &[ShipmentRecord],
    catalog: &Catalog,
    opts: EvalOptions,
) -> Result<KCurve> {
    if ladder.is_empty() {
        return Err(Error::InvalidConfig("empty ladder".into()));
    }
    let mut entries = Vec::with_capacity(ladder.len());
    for (k, sol) in ladder.iter() {
        let r = evaluate_with(&sol.boxes(), shipments, catalog, opts)?;
        entries.push(KPoint { k, total_volume: r.box_volume, xi: r.xi });
    }
    Ok(KCurve { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::{catalog, dims};
    use crate::model::Solution;
    use crate::refine::reassign_products;
    use proptest::prelude::*;

    #[test]
    fn air_in_box_hand_check() {
        let cat = catalog(&[(1., 1., 1., 1.)]);
        let r = evaluate(&[dims(2., 2., 2.)], &[ShipmentRecord::new("p00", 1)], &cat).unwrap();
        assert_eq!((r.product_volume, r.box_volume, r.xi), (1.0, 8.0, 87.5));
        assert_eq!(r.per_box[0].shipment_share, 100.0);
    }

    #[test]
    fn exact_box_has_no_air() {
        let cat = catalog(&[(3., 2., 1., 1.)]);
        let r = evaluate(&[dims(3., 2., 1.)], &[ShipmentRecord::new("p00", 5)], &cat).unwrap();
        assert_eq!(r.xi, 0.0);
    }

    #[test]
    fn unfittable_reported_and_nothing_fitted_errors() {
        let cat = catalog(&[(2., 1., 1., 1.), (1., 1., 1., 1.)]);
        let err = evaluate(&[dims(1., 1., 1.)], &[ShipmentRecord::new("p00", 1)], &cat).unwrap_err();
        assert_eq!(err, Error::NoFittedShipments);

        let r = evaluate(
            &[dims(1., 1., 1.)],
            &[ShipmentRecord::new("p00", 1), ShipmentRecord::new("p01", 2)],
            &cat,
        )
        .unwrap();
        assert_eq!(r.unfittable, vec![Unfittable { product_id: "p00".into(), shipments: 1.0 }]);
        assert_eq!(r.xi, 0.0);
        assert!(r.oversize.is_none());

        let opts = EvalOptions { oversize_box: true, ..Default::default() };
        let r = evaluate_with(
            &[dims(1., 1., 1.)],
            &[ShipmentRecord::new("p00", 1), ShipmentRecord::new("p01", 2)],
            &cat,
            opts,
        )
        .unwrap();
        assert_eq!(r.oversize, Some(OversizeSummary { shipments: 1.0, product_volume: 2.0 }));
        assert_eq!(r.xi, 0.0);
    }

    #[test]
    fn unknown_product_names_the_id() {
        let cat = catalog(&[(1., 1., 1., 1.)]);
        let err = evaluate(&[dims(1., 1., 1.)], &[ShipmentRecord::new("nope", 1)], &cat).unwrap_err();
        assert_eq!(err, Error::UnknownProduct("nope".into()));
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn rotation_allowed_only_when_canonicalizing() {
        let cat = catalog(&[(3., 1., 1., 1.)]);
        let ship = [ShipmentRecord::new("p00", 1)];
        assert!(evaluate(&[dims(1., 1., 3.)], &ship, &cat).is_err());
        let opts = EvalOptions { canonicalize: true, ..Default::default() };
        assert_eq!(evaluate_with(&[dims(1., 1., 3.)], &ship, &cat, opts).unwrap().xi, 0.0);
    }

    #[test]
    fn snug_tie_goes_to_lower_index() {
        let boxes = [dims(4., 1., 1.), dims(2., 2., 1.), dims(1., 1., 1.)];
        assert_eq!(snug_box(&dims(1., 1., 1.), &boxes, false), Some(2));
        assert_eq!(snug_box(&dims(0.5, 0.5, 0.5), &boxes[..2], false), Some(0));
    }

    #[test]
    fn snug_choice_agrees_with_reassignment() {
        let cat = catalog(&[(1., 1., 1., 1.), (3., 3., 3., 1.), (2., 2., 2., 1.), (2., 1., 3., 2.)]);
        let s = Solution::from_labels(&cat, &[0, 0, 1, 2]).unwrap();
        let r = reassign_products(&s, &cat);
        let boxes = s.boxes();
        let expected: Vec<usize> = (0..cat.len())
            .map(|j| {
                let snug = snug_box(cat.dims(j), &boxes, false).unwrap();
                let cur = s.assignment()[j];
                if boxes[snug].volume() == boxes[cur].volume() { cur } else { snug }
            })
            .collect();
        for a in 0..cat.len() {
            for b in 0..cat.len() {
                assert_eq!(expected[a] == expected[b], r.assignment()[a] == r.assignment()[b]);
            }
        }
    }

    proptest! {
        #[test]
        fn splitting_records_is_invariant(counts in prop::collection::vec(1u64..6, 1..8)) {
            let items: Vec<_> = (0..counts.len()).map(|i| (1.0 + i as f64 * 0.3, 2.0, 0.7 + i as f64 * 0.1, 1.0)).collect();
            let cat = catalog(&items);
            let boxes = [dims(2., 2., 1.), dims(5., 3., 2.)];
            let grouped: Vec<_> = counts.iter().enumerate().map(|(i, &c)| ShipmentRecord::new(format!("p{i:02}"), c)).collect();
            let singles: Vec<_> = counts
                .iter()
                .enumerate()
                .rev()
                .flat_map(|(i, &c)| (0..c).map(move |_| ShipmentRecord::new(format!("p{i:02}"), 1)))
                .collect();
            let a = evaluate(&boxes, &grouped, &cat).unwrap();
            let b = evaluate(&boxes, &singles, &cat).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn shares_sum_to_hundred(
            items in prop::collection::vec((1u32..30, 1u32..30, 1u32..30, 1u32..9), 1..40),
            boxes in prop::collection::vec((1u32..40, 1u32..40, 1u32..40), 1..6),
        ) {
            let items: Vec<_> = items.into_iter().map(|(l, w, h, s)| (l as f64, w as f64, h as f64, s as f64)).collect();
            let cat = catalog(&items);
            let mut boxes: Vec<Dims> = boxes.into_iter().map(|(l, w, h)| dims(l as f64, w as f64, h as f64)).collect();
            boxes.push(dims(30., 30., 30.));
            let r = evaluate_velocity(&boxes, &cat, EvalOptions::default()).unwrap();
            let ship: f64 = r.per_box.iter().map(|b| b.shipment_share).sum();
            let vol: f64 = r.per_box.iter().map(|b| b.volume_share).sum();
            prop_assert!((ship - 100.0).abs() <= 1e-6);
            prop_assert!((vol - 100.0).abs() <= 1e-6);
            prop_assert!(r.xi >= 0.0 && r.xi < 100.0);
        }
    }
}
