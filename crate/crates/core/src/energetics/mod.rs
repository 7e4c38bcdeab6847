//! Kinetic energy in trace, velocity and canonical form, the Legendre maps
//! between velocities and momenta, and separable potentials.

mod kinetic;
mod potential;

pub use kinetic::{
    kinetic_energy_canonical, kinetic_energy_isotropic, kinetic_energy_trace, kinetic_energy_velocities,
    legendre_forward, legendre_inverse, legendre_inverse_isotropic, mass_matrix, placement_velocity, InertiaSpec,
    MomentumCoords, VelocityCoords,
};
pub use potential::{FlatPotential, Potential, PotentialSpec, ThicknessPotential};
