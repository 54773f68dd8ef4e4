//! Genealogical forests of uIDLA runs, first-passage reaching times over
//! geometric edge weights, and the continuous-time Yule reference tree.

mod forest;
mod yule;

pub use forest::{GenealogyForest, GeomConvention};
pub use yule::{grow_yule, YuleStop, YuleTree};
