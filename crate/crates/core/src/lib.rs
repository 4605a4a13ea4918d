pub mod averages;
pub mod cli;
pub mod config;
pub mod darboux;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod oracle;
pub mod report;
pub mod transforms;
pub mod verify;

pub use num_complex::Complex64 as C64;
