pub mod cli;
pub mod cycles;
pub mod error;
pub mod maps;
pub mod parity;
pub mod stats;
pub mod trajectory;
