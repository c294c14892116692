//! Spectral theory for the Sturm–Liouville type pencil
//!
//! ```text
//! -f'' + ¼ f = z ω f + z² υ f
//! ```
//!
//! with measure coefficients: a real Borel measure ω and a non-negative Borel
//! measure υ, both restricted to finitely many point masses plus
//! piecewise-constant densities with compact support.  For this coefficient
//! class every solution is an explicit hyperbolic function between
//! breakpoints, so transfer matrices, Wronskians, Weyl–Titchmarsh functions,
//! eigenvalues, spectral measures, the generalized Fourier transform and the
//! associated reproducing-kernel identities are all evaluated in closed form.
//!
//! Modules follow the analytic pipeline:
//!
//! * [`measure`] — coefficient measures and oriented Stieltjes integration,
//! * [`propagate`] — exact propagation of solutions across cells and atoms,
//! * [`bounded`] — the boundary value problem on an interval `[a, b)`,
//! * [`pencil`] — an independent finite-matrix (Galerkin) oracle,
//! * [`line`] — semi-axis and whole-line Weyl theory, spectral measure and
//!   generalized Fourier transform,
//! * [`debranges`] — structure functions and reproducing kernels of the
//!   associated spaces of entire functions.
//!
//! All numerics are generic over the floating point scalar through the
//! [`Real`] trait; `f64` aliases are exported at the crate root.

pub mod bounded;
pub mod debranges;
pub mod entire;
pub mod error;
pub mod line;
pub mod measure;
pub mod pencil;
pub mod propagate;
pub mod scalar;
pub(crate) mod scan;

pub use bounded::BoundedProblem;
pub use debranges::{DeBranges, EVariant};
pub use error::{Error, Result};
pub use line::{HilbertElement, LineProblem, Side, SpectralDatum, WeylSolution};
pub use measure::{CoefficientMeasure, Coefficients, ComplexMeasure, Mesh};
pub use pencil::{PencilGeometry, PencilMatrices};
pub use propagate::{FundamentalPair, Propagator, SolutionFrame, TransferMatrix};
pub use scalar::Real;

/// Complex scalar used throughout.
pub type Complex<T> = num_complex::Complex<T>;

// Concrete double precision aliases.
pub type C64 = num_complex::Complex<f64>;
pub type Measure64 = CoefficientMeasure<f64>;
pub type Coefficients64 = Coefficients<f64>;
pub type BoundedProblem64 = BoundedProblem<f64>;
pub type LineProblem64 = LineProblem<f64>;
pub type HilbertElement64 = HilbertElement<f64>;
