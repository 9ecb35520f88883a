//! Fractional-order RC ladder networks: impedance, time-domain simulation and
//! identification of the apparent order with the Mittag-Leffler function.

pub mod freqresp;
pub mod mlf;
pub mod mlfit;
pub mod network;
mod scalar;
pub mod timesim;
pub mod varorder;

pub use scalar::{LinalgReal, Real};

pub type LadderSpec64 = network::LadderSpec<f64>;
pub type MlParams64 = mlf::MlParams<f64>;
pub type TimeSeries64 = timesim::TimeSeries<f64>;
pub type StateSpace64 = timesim::StateSpace<f64>;
pub type FrequencyResponse64 = freqresp::FrequencyResponse<f64>;
pub type MlFitResult64 = mlfit::MlFitResult<f64>;
pub type VarOrderProfile64 = varorder::VarOrderProfile<f64>;
