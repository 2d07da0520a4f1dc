//! Metric completions of bounded derived categories of representation-finite
//! hereditary path algebras (simply laced Dynkin quivers).
//!
//! The crate models `D^b(mod KQ)` combinatorially — indecomposables are
//! pairs (positive root, shift) with Hom/Ext dimension tables computed by
//! exact rational linear algebra on explicit quiver representations — and on
//! top of that provides metrics (non-increasing chains of extension-closed
//! balls), their completions via the closed perpendicular formula, metric
//! transport along functors, improvements, and enumeration of all thick
//! subcategories.

pub mod cauchy;
pub mod cli;
pub mod complete;
pub mod dercat;
pub mod functor;
pub mod metric;
pub mod quiver;
pub mod replin;
pub mod subcat;

pub use dercat::{DerIndec, DerObject, HomTable};
pub use metric::{CompareVerdict, Metric, MetricVerdict};
pub use quiver::{DynkinType, Quiver};
pub use subcat::{ShiftSet, Subcategory};
