//! Paths, the importance-sampled Gibbs ensemble, the occupancy field and the
//! localization observables derived from it.

mod ensemble;
mod field;
mod observables;
mod path;

pub use ensemble::{build_ensemble, GibbsEnsemble};
pub use field::{occupancy_field, OccupancyField, SpatialGrid};
pub use observables::{
    delta_sets, favourite_overlap, favourite_path, replica_overlap, replica_overlap_pairwise,
    two_to_one_report, DeltaSets, FavouritePath, TwoToOneReport,
};
pub use path::{sample_paths, PolymerPath, TimeGrid};
