//! Spectral boundary-integral solver for 2D periodic water waves with surface
//! tension, posed either on the physical interface or on its image under the
//! desingularizing map `P(w) = tan(w/2)^{1/2}`.

pub mod birkhoff_rott;
pub mod conformal;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod initdata;
pub mod io;
pub mod spectral;

pub use birkhoff_rott::{Domain, InterfaceCurve, SheetState};
pub use error::{Error, Result};
pub use spectral::{PeriodicField, PeriodicGrid, C64};
