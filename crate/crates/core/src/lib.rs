pub mod bayesian;
pub mod generators;
pub mod instances;
pub mod market;
pub mod pricing;
pub mod rational;
pub mod simulator;
pub mod suites;
pub mod valuations;
