//! Numerical laboratory for sharp `(l², L^q_t L^r_x)` decoupling on the
//! paraboloid `{(ξ, |ξ|²) : ξ ∈ [-1, 1]^d}`.
//!
//! * [`exponents`]: the closed-form sharp region, lower-bound exponents and
//!   their case analysis, in exact rational arithmetic.
//! * [`geometry`]: caps, shears, dual tubes, frequency nets and the tuned
//!   lattice, with exhaustive checks of the tube lemmas.
//! * [`envelope`]: the compactly Fourier-supported majorant `φ` and
//!   wavepackets.
//! * [`mixed_norm`]: quadrature of `L^q_t L^r_x` norms on grids.
//! * [`families`]: the four extremizer families and their decoupling ratios.
//! * [`expsum`]: torus exponential sums and their growth in `N`.

pub mod envelope;
pub mod error;
pub mod exponents;
pub mod expsum;
pub mod families;
pub mod fit;
pub mod geometry;
pub mod mixed_norm;
pub mod oracles;
pub mod reduce;

pub use error::{LabError, Result};
pub use mixed_norm::Exponent;
