//! Lyapunov and Weyl chamber structure of abelian Anosov actions by toral
//! automorphisms, bunching certificates for circle-diffeomorphism cocycles
//! over them, and numerical trivialization of such cocycles.
//!
//! Numeric kernels are generic over [`Real`] (`f32`, `f64`); exact lattice
//! work uses `i128` and rationals. The aliases below fix `f64`.

pub mod cocycle;
pub mod dense;
pub mod extension;
pub mod fixtures;
pub mod holonomy;
pub mod integer;
pub mod lattice_action;
pub mod poly;
pub mod scalar;
pub mod weyl;

pub use integer::IntMatrix;
pub use lattice_action::{ActionError, GeneratorSet};
pub use scalar::Real;

pub type LyapunovSpectrum = lattice_action::LyapunovSpectrum<f64>;
pub type ActionReport = lattice_action::ActionReport<f64>;
pub type WeylChamberDecomposition = weyl::WeylChamberDecomposition<f64>;
pub type CircleMap = cocycle::CircleMap<f64>;
pub type FourierField = cocycle::FourierField<f64>;
pub type CircleCocycle = cocycle::CircleCocycle<f64>;
pub type BunchingCertificate = cocycle::BunchingCertificate<f64>;
pub type PHRobustnessCertificate = cocycle::PHRobustnessCertificate<f64>;
pub type BlockDerivative = extension::BlockDerivative<f64>;
pub type ConeParams = extension::ConeParams<f64>;
pub type SectionGrid = extension::SectionGrid<f64>;
pub type DominatedSplittingReport = extension::DominatedSplittingReport<f64>;
pub type TransferMap = holonomy::TransferMap<f64>;

pub use cocycle::{CocycleError, ProductGrid};
pub use extension::ExtensionError;
pub use holonomy::{CoverLattice, HolonomyError};
pub use weyl::WeylError;
