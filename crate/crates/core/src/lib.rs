pub mod aic;
pub mod cli;
pub mod clock;
pub mod machine;
pub mod spectra;
