//! Lifted and super-lifted Euler characteristic transforms of
//! piecewise-linear scalar fields.
//!
//! A [`PlField`] is a simplicial complex in `R^2` or `R^3` carrying one value
//! per vertex, interpolated linearly on every simplex. For a direction `v`,
//! a height `h` and a threshold `t`, the transforms record
//!
//! * SELECT: `χ({x . v ≤ h, f(x) ≥ t})`
//! * LECT: `χ({x . v ≤ h, f(x) = t})`
//!
//! sampled on a (direction, height, threshold) grid. All Euler
//! characteristics are computed exactly from simplex counts: superlevel and
//! level sets are cut out of the complex combinatorially ([`clip`]) and the
//! height scans use the lower-star rule ([`transform`]).
//!
//! ```
//! use lect::{make_directions, select_transform, PlField, ScanRequest};
//!
//! // a segment from (0,0) to (1,0) with values rising from 0 to 1
//! let f = PlField::from_parts(
//!     2,
//!     vec![0.0, 0.0, 1.0, 0.0],
//!     vec![0.0, 1.0],
//!     [vec![0u32], vec![1], vec![0, 1]],
//! )?;
//! let req = ScanRequest::select(make_directions(2, 4)?, vec![-2.0, 0.0, 0.75, 2.0], vec![0.5, 1.0])?;
//! let grid = select_transform(&f, &req)?;
//! // direction (1,0): {f >= 0.5} is the segment [0.5, 1] along x
//! assert_eq!(grid.curve(0, 0), vec![0, 0, 1, 1]);
//! # Ok::<(), lect::Error>(())
//! ```

pub mod analysis;
pub mod cf;
pub mod clip;
pub mod complex;
pub mod directions;
mod error;
pub mod field;
pub mod generators;
pub mod grid;
pub mod io;
pub mod moduli;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod transform;

pub use analysis::{
    align_2d, marginal_curves, marginal_distance, rotate_field, select_distance, select_distance_with, weighted_euler_curve,
    Alignment, DistanceOptions, MarginalCurveSet, ThresholdRule, WeightedComplex,
};
pub use clip::{halfspace_clip, level_restrict, superlevel_restrict, ClippedComplex, VertexOrigin};
pub use complex::{euler_characteristic, euler_integral, Complex};
pub use directions::{make_directions, DirectionSet, Scheme};
pub use error::{Error, Result};
pub use field::{global_range, normalize_field, rescale_geometry_of, voxel_to_pl, Normalization, Normalized, PlField, VoxelGrid};
pub use grid::{TransformGrid, TransformKind};
pub use transform::{
    default_thresholds, ect_curve, ect_transform, euler_scan, lect_transform, select_transform, uniform_heights, EulerCurve,
    ScanRequest,
};
