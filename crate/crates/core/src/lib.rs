//! Spectral analysis of birth-death chains on the half-line and on the
//! integers: catalog models, orthogonal polynomials, spectral measures,
//! Karlin-McGregor transition probabilities, a truncated-generator oracle
//! and recurrence classification.

pub mod classify;
pub mod error;
pub mod km;
pub mod model;
pub mod oracle;
pub mod polynomials;
pub mod quadrature;
pub mod specialfns;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{build_model, CatalogModel, Domain, Family, FamilyKind, HalfLineFactor, Side};
pub use km::{QuadratureConfig, TransitionMethod, TransitionResult};
pub use spectral::{Mat2, SpectralMatrix, SpectralMeasure, SpectralObject};
