//! Numerical core for eddy-diffusivity homogenization: periodic cell
//! problems, the multiscale renormalization map, exit-time problems and
//! Monte Carlo transport.

pub mod cell;
pub mod error;
pub mod exit_pde;
pub mod field;
pub mod fit;
pub mod krylov;
pub mod renorm;
pub mod spectral;
pub mod stencil;
pub mod tensor;
pub mod transport;

pub use error::{Error, Result};
pub use field::{Eddy, EddyKind, FieldView, FlowSpec, Scale, StreamField};
pub use tensor::{Mat2, SpdTensor};
