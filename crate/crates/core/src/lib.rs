//! Adaptive boxplots.
//!
//! Outlier fences derived from multiple-testing procedures: each observation
//! gets a p-value against a robustly fitted reference model, a procedure
//! (PCER, Bonferroni, Holm, Benjamini–Hochberg, PFER) picks one significance
//! threshold, and the threshold is mapped back onto the data scale as fences.
//! Tukey's fixed 1.5 IQR rule and the BGL sample-size rule are provided for
//! comparison, along with a Monte Carlo harness, CSV/JSON/SVG I/O and a CLI.
//!
//! ```
//! use abox::{analyze, MethodConfig, Procedure, Sample};
//!
//! let x = Sample::from_slice(&[9., 16., 18., 20., 20., 22., 22., 24., 26., 36., 50.])?;
//! let bh = analyze(&x, MethodConfig::normal(Procedure::Bh(0.01)))?;
//! assert_eq!(bh.outlier_values, vec![36.0, 50.0]);
//! assert!((bh.fences.upper.unwrap() - 36.0).abs() < 1e-9);
//! # Ok::<(), abox::Error>(())
//! ```

pub mod cli;
pub mod distributions;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod fences;
pub mod io;
pub mod render;
mod roots;
pub mod simulation;
pub mod stats;
pub mod testing;

pub use distributions::{Family, ReferenceModel};
pub use engine::{analyze, BoxplotSummary, Method, MethodConfig};
pub use error::{Error, Result};
pub use fences::Fences;
pub use stats::{QuartileSummary, Sample};
pub use testing::{Procedure, Tail, TestOutcome};
