//! Computational harmonic analysis on homogeneous trees.
//!
//! The crate works on the homogeneous tree of degree `q + 1` with root `o`,
//! its boundary of infinite rays, and the spectral torus of the tree
//! Laplacian. It provides exact finite-sum implementations of the Poisson
//! kernel and transform, spherical functions, the Helgason-Fourier
//! transform with Plancherel inversion, boundary martingale operators, and
//! discrete Lorentz norms, together with the residual checks that tie them
//! together.

pub mod boundary;
pub mod error;
pub mod lorentz;
pub mod poisson;
pub mod spectral;
pub mod transforms;
pub mod tree;
pub mod treefn;

pub use boundary::{cylinder_measure, CylinderFunction, Martingale};
pub use error::{Error, Result};
pub use lorentz::{lorentz_norm, lorentz_norm_of_moduli, lp_norm, weak_norm_growth, NormGrowthRow};
pub use poisson::{
    b_coeff, b_prime_sumsq, b_prime_sumsq_closed, poisson_kernel_power, poisson_of_diff_check,
    poisson_transform, poisson_transform_ball, recover_boundary_martingale, sector_average,
    sector_maximal, BallMaximal,
};
pub use spectral::{
    conjugate_exponent, delta_exponent, LatticeClass, PlancherelMeasure, SpectralGrid,
    SpectralParam, Strip,
};
pub use transforms::{
    hf_transform, invert, parseval, restriction_lhs, spherical_transform, symmetry_residual,
    vertex_pairing, HeightProfile, InversionReport, ParsevalReport, RECOMMENDED_MIN_GRID,
};
pub use tree::{ball, confluence, distance, lcp_len, sector, sphere, TreeParams, Vertex};
pub use treefn::TreeFunction;
