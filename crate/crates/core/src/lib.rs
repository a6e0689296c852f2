//! Secure rate-distortion toolkit.
//!
//! Building blocks for studying lossy source coding under equivocation
//! constraints on helper and Gray-Wyner networks:
//!
//! * [`pmf`] — exact joint pmfs over finite product alphabets, entropies,
//!   mutual informations and the standard binary source constructors.
//! * [`cond_rd`] — the conditional rate-distortion function with side
//!   information at encoder and decoder, plus its binary closed form.
//! * [`regions`] — evaluation and membership testing for the four
//!   rate-distortion-equivocation regions (two helper, two Gray-Wyner).
//! * [`fme`] — exact rational Fourier-Motzkin elimination over linear
//!   inequalities with symbolic nonnegative constants.
//! * [`typicality`] — robust strong typicality over short blocks.
//! * [`codec`] — finite-blocklength random-binning / superposition codes
//!   with exact equivocation accounting by enumeration.
//! * [`lemma1`] — hypergeometric law of the encoding-set cardinality and
//!   its concentration bounds.

pub mod codec;
pub mod cond_rd;
pub mod error;
pub mod fme;
pub mod lemma1;
pub mod pmf;
pub mod regions;
pub mod typicality;

pub use error::{Error, Result};
