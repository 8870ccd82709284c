//! Target patterns and the two synthesis routes.

pub mod classical;
pub mod fourier;
pub mod objective;
pub mod quadrature;
pub mod target;

pub use classical::{classical_intensity, noon_resolution, phase_from_position, position_from_phase, rayleigh_resolution};
pub use fourier::{
    approximation_ok, distance_dn, fourier_coefficients, program_exposure, to_fourier_program, ApproximationReport,
    FourierCoefficients, FourierProgram, FourierTerm,
};
pub use objective::{objective_1d, objective_2d, Objective1D, Objective2D};
pub use quadrature::{PeriodicGrid, ProductGrid};
pub use target::{
    fourier_coefficients_2d, FnTarget1D, FnTarget2D, Fourier2DTerm, FourierSeries2D, SampledTarget1D, SampledTarget2D,
    SquareRegion, TargetDescriptor, TargetPattern1D, TargetPattern2D, Trench,
};
