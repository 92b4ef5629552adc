//! Interactive coding over a binary adversarial channel.
//!
//! The crate simulates a two-party scheme that compiles a noiseless
//! alternating protocol into one resilient to adversarial bit flips. The
//! pieces, bottom up:
//!
//! * [`graph`] — the virtual transcript graph: vertices are (transcript,
//!   layer) pairs, edges are update instructions `{0, 1, ←, •}`.
//! * [`code`] — seeded layered codes on that graph, suffix distance, the
//!   exact list/unique decoder, and an exhaustive sensitivity checker.
//! * [`ecc`] — the short binary code wrapping each wire message, with
//!   exhaustively verified pairwise distances.
//! * [`noiseless`] — noiseless protocol instances (`next_bit` oracles) and
//!   the update algebra (`op`, `op_target`, `⊗`).
//! * [`protocol`] — the per-party state machines: case dispatch on received
//!   messages, question/answer formatting, outputs with confidence.
//! * [`channel`] — adversaries, the session runner, Monte Carlo batches.
//! * [`analysis`] — update classification, potential traces, diagnostics,
//!   and scaling-scheme evaluation.
//! * [`boosting`] — chunked simulation of a long protocol through any
//!   scaling scheme, with tree intersection and confidence-weighted voting.
//!
//! Everything is deterministic given the seeds in the configuration; run
//! records can be replayed bit-exactly.

pub mod analysis;
pub mod bits;
pub mod boosting;
pub mod channel;
pub mod code;
pub mod ecc;
pub mod frac;
pub mod graph;
pub mod noiseless;
pub mod par;
pub mod protocol;

pub use frac::Frac;
