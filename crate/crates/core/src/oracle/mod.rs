//! Independent references the trajectory runs are checked against.

pub mod density;
pub mod envelope;
pub mod paraxial;
pub mod peaks;

pub use density::{bin_intensity, density_histogram, Density, Weighting};
pub use envelope::{gaussian_envelope, rayleigh_range};
pub use paraxial::{paraxial_propagate, FieldSlice, ParaxialGrid};
pub use peaks::{fringe_positions, DEFAULT_PROMINENCE};
