//! Online multiclass classification games under bandit and
//! full-information feedback.
//!
//! The crate is organised bottom-up:
//!
//! * [`classes`]: hypothesis classes and the budgeted version space,
//! * [`values`]: exact minimax values and matrix games,
//! * [`engine`]: the round protocol and Monte-Carlo estimation,
//! * [`learners`] and [`adversaries`]: strategies for both players,
//! * [`scenario`], [`verify`] and [`lemma`]: the configuration surface used by
//!   the command-line tool.

pub mod adversaries;
pub mod classes;
pub mod dist;
pub mod engine;
pub mod error;
pub mod learners;
pub mod lemma;
pub mod scenario;
pub mod values;
pub mod verify;

pub use dist::{Label, LabelDistribution};
pub use error::{Error, Result};
