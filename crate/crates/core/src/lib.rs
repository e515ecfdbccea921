//! Multi-task LSTM laboratory for syntactic evaluation.
//!
//! A single shared encoder (word embedding followed by one LSTM layer) is
//! trained on subject-verb number prediction, alone or together with CCG
//! supertagging, number-stripped POS tagging or language modeling. The
//! crate covers data ingestion and synthetic generation ([`corpus`]), the
//! model with hand-written backpropagation ([`model`]), losses, AdaGrad and
//! training regimes ([`train`]), measurement ([`eval`]) and config-driven
//! experiment commands with SVG output ([`experiment`]).
//!
//! Runnable walkthroughs live in the crate's `examples/` directory:
//!
//! ```bash
//! cargo run --release --example gradient_check
//! cargo run --release --example synthetic_corpus
//! cargo run --release --example pretrain_supertag_agreement
//! ```

pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod model;
pub mod numeric;
pub mod train;

pub use error::{Error, Result};
