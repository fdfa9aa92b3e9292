pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod mc_oracle;
pub mod model;
