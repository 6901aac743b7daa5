//! Box-size selection by forward-backward decision-tree clustering.
//!
//! Products are grouped into `K` clusters, each shipped in its tight box, so
//! as to minimise the velocity-weighted shipped volume. The forward pass
//! grows clusters by the best axis-aligned split; the backward pass merges
//! them back down, and every step is followed by reassignment and
//! single-product moves. [`eval`] scores any box suite on a shipment history
//! by percent air in box.
//!
//! ```
//! use boxsize::{solve, Catalog, Dims, Product, SolverConfig};
//!
//! let products = vec![
//!     Product::new("a", Dims::new(1.0, 1.0, 1.0)?, 1.0)?,
//!     Product::new("b", Dims::new(2.0, 1.0, 1.0)?, 1.0)?,
//!     Product::new("c", Dims::new(10.0, 1.0, 1.0)?, 1.0)?,
//! ];
//! let catalog = Catalog::new(products)?;
//! let out = solve(&catalog, &SolverConfig::new(2, 3, 50))?;
//! assert_eq!(out.solution.total_volume(), 14.0);
//! # Ok::<(), boxsize::Error>(())
//! ```

pub mod baseline;
pub mod error;
pub mod eval;
pub mod merge;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod refine;
pub mod split;

pub use baseline::{dp_1d, dp_1d_upto, BaselineOutcome};
pub use error::{Error, Result};
pub use eval::{evaluate, evaluate_with, EvalOptions, EvalReport, ShipmentRecord};
pub use model::{fits, tight_box, Axis, Catalog, Cluster, Dims, Product, Solution, SolverConfig};
pub use pipeline::{elbow, solve, KCurve, KPoint, PassOptions, SolutionLadder, SolveOutcome, Stage, StageRecord};
