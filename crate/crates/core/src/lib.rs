//! Posted-price selling of locally public goods on networks.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod distkit;
pub mod eqcore;
pub mod error;
pub mod netmodel;
pub mod numeric;
pub mod priceguide;
pub mod scalar;
pub mod seqprice;
pub mod simkit;
pub mod worstcase;

pub use error::{Error, Result};
pub use netmodel::{CnfFormula, Graph, GraphKind, ReductionSpec, Role};
pub use scalar::Scalar;

pub type Distribution = distkit::ValueDistribution<f64>;
pub type Threshold = eqcore::Threshold<f64>;
pub type Thresholds = eqcore::ThresholdVector<f64>;
pub type Prices = eqcore::PriceVector<f64>;
pub type Report = eqcore::RevenueReport<f64>;
pub type Recommendation = priceguide::PriceRecommendation<f64>;
pub type WorstCase = worstcase::WorstCaseResult<f64>;
pub type Summary = simkit::SimulationSummary<f64>;
