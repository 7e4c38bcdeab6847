//! Dynamics of a flat deformable body: a rigid rotation composed with a
//! stretch in the plane of the body and a change of thickness.
//!
//! Everything is generic over [`Scalar`] (`f32`, `f64`, or the
//! double-double [`DoubleF64`]); the `*F64` aliases below cover the usual
//! case.

pub mod energetics;
pub mod error;
pub mod hamiltonian;
pub mod integrate;
pub mod kinematics;
pub mod linalg;
pub mod scalar;
pub mod stationary;
pub mod tolerance;

pub use energetics::{
    FlatPotential, InertiaSpec, MomentumCoords, Potential, PotentialSpec, ThicknessPotential, VelocityCoords,
};
pub use error::{Error, Result};
pub use hamiltonian::{CanonicalState, StateDerivative};
pub use integrate::{ConservationReport, IntegratorConfig, Method, Termination, Trajectory, TrajectorySample};
pub use kinematics::{DeformationTensor, PlacementMatrix, Rotation3, ShapeCoords};
pub use linalg::Mat3;
pub use scalar::{DoubleF64, Scalar};
pub use stationary::{StationaryProblem, StationarySolution};

pub type ShapeCoordsF64 = ShapeCoords<f64>;
pub type Rotation3F64 = Rotation3<f64>;
pub type PlacementMatrixF64 = PlacementMatrix<f64>;
pub type InertiaSpecF64 = InertiaSpec<f64>;
pub type VelocityCoordsF64 = VelocityCoords<f64>;
pub type MomentumCoordsF64 = MomentumCoords<f64>;
pub type PotentialSpecF64 = PotentialSpec<f64>;
pub type CanonicalStateF64 = CanonicalState<f64>;
pub type StateDerivativeF64 = StateDerivative<f64>;
pub type Mat3F64 = Mat3<f64>;

pub type ShapeCoordsF32 = ShapeCoords<f32>;
pub type PlacementMatrixF32 = PlacementMatrix<f32>;
pub type CanonicalStateF32 = CanonicalState<f32>;
