//! Shape statistics against the Euclidean ball, annulus-crossing probes and
//! fluctuation tables.

mod annulus;
mod fluctuation;
mod shape;

pub use annulus::{annulus_crossing_probe, random_annulus_fill, AnnulusSpec, CrossingReport};
pub use fluctuation::{fluctuation_scaling, write_fluctuation_csv, FluctuationRow};
pub use shape::{shape_report, ShapeReport, ShellOccupancy};
