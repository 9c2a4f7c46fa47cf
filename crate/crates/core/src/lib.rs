pub mod elliptope;
pub mod error;
pub mod matcore;
pub mod point;
pub mod record;
pub mod rng;
pub mod slices;
pub mod realize;
pub mod oracle;
pub mod cli;
