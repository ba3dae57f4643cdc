pub mod charfn;
pub mod distance;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod models;
pub mod quad;
pub mod report;
pub mod rng;
pub mod special;
pub mod sphere;
pub mod stats;

pub use error::{Error, Result};
pub use rng::RandomStream;
pub use models::{make_model, ModelKind, ModelSpec};
pub use sphere::UnitVector;
pub use charfn::{LinearPartEstimate, SphereKernel};
pub use distance::{DistanceEstimate, Method};
pub use experiments::{ExperimentConfig, ExperimentKind, ResultsFile};
pub use report::Record;
pub use stats::Estimate;
