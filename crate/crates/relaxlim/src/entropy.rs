//! Entropy pairs, relative entropies and relative fluxes for the three systems,
//! plus sampling checks of the lemma-level bounds.

pub mod euler;
pub mod lemmas;
pub mod psystem;
pub mod visco;

/// Bar states must stay this far from vacuum in relative evaluations.
pub const BAR_FLOOR: f64 = 1e-6;
