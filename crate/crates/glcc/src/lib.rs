pub mod config;
pub mod dataset;
pub mod demo;
pub mod mltrain;
pub mod quant;
pub mod sim;
pub mod transcript;
pub mod verify;
