//! Classical diffusion and quantum probability transport confined to a thin
//! curved shell of thickness `ε` around a surface `Σ`.

pub mod cli;
pub mod evolve;
pub mod geometry;
pub mod quadrature;
pub mod ribbon;
pub mod thin_layer;
pub mod transverse;
