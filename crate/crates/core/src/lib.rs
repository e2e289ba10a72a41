pub mod calib;
pub mod cg;
pub mod chain;
pub mod error;
pub mod game;
pub mod optim;
pub mod qla;
pub mod report;
pub mod strategy;

pub use error::{Error, Result};
