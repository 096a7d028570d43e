//! Continuous surrogates for piecewise-constant coefficient fields.
//!
//! Cellwise data (typically permeability) is approximated by a
//! Shepard-normalized expansion of Gaussian radial basis functions fitted in
//! log space with Elastic Net regression. The dictionary is refined
//! adaptively where the cellwise residual is largest, and the domain can be
//! split into half-open boxes that are fitted independently in parallel. The
//! resulting surrogate is a closed-form function that can be evaluated on
//! any mesh, e.g. as the coefficient of the bundled Darcy pressure solver.

pub mod adaptive;
pub mod darcy;
pub mod dictionary;
pub mod error;
pub mod field;
pub mod geometry;
pub mod io;
pub mod partition;
pub mod solver;
pub mod theory;

pub use adaptive::{fit_adaptive, AdaptiveConfig, AdaptiveFit, LocalSurrogate, RoundReport, StopReason, SubdomainField};
pub use dictionary::{RbfDictionary, RbfEntry};
pub use error::{Error, ErrorKind, Result};
pub use field::FieldData;
pub use geometry::{Aabb, Mesh, Point};
pub use partition::{fit_parallel, make_partition, GlobalSurrogate, InitialDictionary, Partition, SubdomainConfig};
pub use solver::{ElasticNetConfig, FitResult, Transform};
