//! Executable couplings between growth processes and the estimators that
//! support them.

mod domination;
mod estimators;
mod sandpile;
mod tricolor;

pub use domination::{coupled_domination_run, DominationOutcome};
pub use estimators::{
    averaging_defect, averaging_defect_exact, estimate_harmonic_measure, exact_harmonic_measure, harnack_ratio_exact, harnack_ratio_scan,
    HarmonicMeasureEstimate, HarnackScan,
};
pub use sandpile::{sandpile_relax, SandpileState, DEFAULT_TOLERANCE as SANDPILE_TOLERANCE};
pub use tricolor::{tricolor_run, Color, TricolorOutcome, TricolorState};
