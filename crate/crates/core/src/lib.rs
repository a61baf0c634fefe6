//! Exact computation with even and odd sequences under the alternating
//! binomial transform.
//!
//! The crate is organized bottom-up:
//!
//! - [`exact`]: reduced rationals and binomial coefficients
//! - [`sequences`]: memoizing generators (Bernoulli, Euler, Lucas, ...)
//! - [`transforms`]: the transform itself, parity classification and the
//!   sequence operators built on it
//! - [`identities`]: exact residuals of the recurrence identities
//! - [`congruences`]: p-adic reduction and prime-modulus congruence checks
//! - [`cli`]: the `parityseq` command-line front end

pub mod cli;
pub mod congruences;
pub mod exact;
pub mod identities;
pub mod polynomial;
pub mod sequences;
pub mod transforms;

pub use exact::{gen_binomial, int_binomial, Rational};
pub use polynomial::Polynomial;
pub use sequences::SequenceHandle;
pub use transforms::{classify, ParityReport, Sign, Verdict};
