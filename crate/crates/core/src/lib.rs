//! Spectral workbench for zeroth Poisson homology and top-degree foliated
//! cohomology of regular Poisson manifolds on tori and on the hyperbolic
//! mapping torus.

pub mod diophantine;
pub mod error;
pub mod fourier;
pub mod homology;
pub mod leafwise;
pub mod mapping_torus;
pub mod models;
pub mod pipeline;
pub mod random;

pub use error::{Error, Result};
pub use fourier::{Mode, TrigPoly};
