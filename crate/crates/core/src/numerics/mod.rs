//! Numerical kernels shared by the physics modules.

pub mod extrapolate;
pub mod grid;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod special;

pub use extrapolate::{aitken, richardson, Estimate};
pub use grid::{Grid, Spacing};
pub use ode::{integrate_stationary, wronskian, From, SolutionSamples};
pub use quad::simpson;
pub use roots::{bracket_roots, brent, Bracket};
pub use special::{digamma, f_tilde, EULER_GAMMA};
