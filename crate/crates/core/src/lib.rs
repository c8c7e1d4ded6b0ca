//! The saddle-point probability law on y-friable integers and its bias.
//!
//! Layers, from exact to asymptotic:
//!
//! - [`primes`], [`friable`]: prime tables, exact `Psi(x, y)`, `Psi_tau(x, y)`
//!   and the truncated sums `D(x, y, z)` by enumeration;
//! - [`saddle`]: `zeta(s, y)`, `phi_y` and its derivatives, the saddle point
//!   `alpha(x, y)` and the saddle-point approximation;
//! - [`special`], [`dickman`]: `xi`, `I`, `rho_hat`, the Dickman function `rho`,
//!   its convolution square `rho2`, and the integrals `lambda`, `kappa`, `nu`;
//! - [`bias`]: `P(x, y, z)` and the defect `Delta(x, y)`, exact and asymptotic;
//! - [`sampler`]: Monte Carlo draws from the law;
//! - [`verify`]: the acceptance suites.
//!
//! The analytic layers are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`.

// `!(a >= b)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bias;
pub mod chebyshev;
pub mod dickman;
pub mod error;
pub mod friable;
pub mod oracle;
pub mod primes;
pub mod quad;
pub mod real;
pub mod roots;
pub mod saddle;
pub mod sampler;
pub mod special;
pub mod verify;

pub use bias::{BiasConfig, BiasReport, DeltaReport, Magnitude};
pub use error::{Error, Result};
pub use friable::{Budget, FriableEnumeration, FriableInteger};
pub use primes::PrimeTable;
pub use real::Real;
pub use sampler::{FriableSample, SampleStats};

pub type XiValue = special::XiValue<f64>;
pub type SaddlePoint = saddle::SaddlePoint<f64>;
pub type ZetaEval = saddle::ZetaEval<f64>;
pub type DickmanGrid = dickman::DickmanGrid<f64>;
