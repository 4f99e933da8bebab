//! Level-set parametrization of surfaces in Monge form near singular
//! tangent-plane sections, plus pre-symmetry sets, symmetry sets and medial
//! axes of the resulting plane curves.

pub mod cli;
pub mod curve;
pub mod error;
pub mod geom;
pub mod io;
pub mod marching;
pub mod monge;
pub mod oracle;
pub mod pipeline;
pub mod roots;
pub mod scalar;
pub mod series;
pub mod svg;
pub mod symmetry;

pub use error::{Error, Result};
pub use monge::{classify, MongeSurface, PointClass, PointTag};
