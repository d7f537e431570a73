//! Subdivision of point sequences on the unit sphere, with certified
//! convergence.
//!
//! A linear binary subdivision scheme refines a sequence by placing each new
//! point at an affine combination of its neighbors. This crate carries such
//! schemes over to the unit sphere `Σⁿ ⊂ ℝⁿ⁺¹` by replacing every affine
//! combination with the weighted Karcher mean, the minimizer of the weighted
//! sum of squared geodesic distances. For dense enough input the refined
//! sequence contracts geometrically and the scheme converges to a continuous
//! limit curve; this crate computes machine-checkable certificates for that
//! statement.
//!
//! The pieces:
//!
//! * [`geometry`] is the sphere layer: points, tangent vectors, geodesic
//!   distance, exponential and logarithm maps, and the gradient and Hessian
//!   of the squared-distance objective in closed form.
//! * [`mean`] solves for weighted Karcher means (Newton or fixed-point
//!   iteration) and checks the well-definedness gate that keeps means with
//!   partly negative weights unique.
//! * [`schemes`] applies a subdivision mask to a spherical point sequence,
//!   open or closed, with the per-stencil gate applied before every solve.
//! * [`certify`] bounds the motion of the mean as the stencil weights slide
//!   from a trivial configuration to the actual rule, and composes the
//!   per-rule bounds into a scheme-level contraction factor `μ < 1` and a
//!   displacement coefficient. Certificates for the three built-in schemes
//!   reproduce published constants.
//! * [`validate`] cross-checks the closed forms against finite differences,
//!   grid search, and empirical refinement runs, all seeded.
//! * [`formats`] reads and writes point files, certificate specs, and the
//!   JSON reports used by the command line tool.
//!
//! Computations are generic over the floating-point scalar through
//! [`scalar::Real`]; the certificate layer and file formats are fixed to
//! `f64`. The aliases below name the `f64` instantiations most code wants.
//!
//! Certify a built-in scheme and refine a small closed polygon under its
//! certified mesh-size gate:
//!
//! ```
//! use sphere_subdiv::certify::{builtin_certificate_spec, certify_scheme};
//! use sphere_subdiv::mean::SolverSettings;
//! use sphere_subdiv::schemes::{builtin_mask, diagnostics, iterate, BoundaryRule};
//! use sphere_subdiv::{Point, Sequence};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let spec = builtin_certificate_spec("lane-riesenfeld-cubic")?;
//! let cert = certify_scheme(&spec)?;
//! assert!(cert.is_certified());
//! let mu = cert.mu.expect("certified schemes carry a contraction factor");
//!
//! // A closed hexagon around the north pole, mesh size well below the
//! // certified radius.
//! let rho = 0.3_f64;
//! let vertices = (0..6)
//!     .map(|k| {
//!         let t = std::f64::consts::PI / 3.0 * k as f64;
//!         Point::new(vec![rho.sin() * t.cos(), rho.sin() * t.sin(), rho.cos()])
//!     })
//!     .collect::<Result<Vec<_>, _>>()?;
//! let polygon = Sequence::new(vertices, BoundaryRule::Periodic)?;
//!
//! let mask = builtin_mask("lane-riesenfeld-cubic")?;
//! let levels = iterate(&mask, polygon, 3, &SolverSettings::default(), Some(cert.r0))?;
//! assert_eq!(levels.last().unwrap().len(), 48);
//!
//! // Every measured contraction ratio stays below the certified factor.
//! let diag = diagnostics(&levels)?;
//! assert!(diag.contraction_ratios.iter().all(|r| *r <= mu));
//! # Ok(())
//! # }
//! ```

pub mod certify;
pub mod formats;
pub mod geometry;
pub mod linalg;
pub mod mean;
pub mod scalar;
pub mod schemes;
pub mod tol;
pub mod validate;

pub use scalar::Real;

/// Default scalar type.
pub type Scalar = f64;
/// A point on the unit sphere, `f64` coordinates.
pub type Point = geometry::UnitPoint<f64>;
/// A tangent vector at a sphere point, `f64` coordinates.
pub type Tangent = geometry::TangentVector<f64>;
/// A weighted point configuration, `f64` weights.
pub type Configuration = geometry::WeightedConfiguration<f64>;
/// A subdivision mask over `f64`.
pub type MaskF64 = schemes::Mask<f64>;
/// A point sequence over `f64`.
pub type Sequence = schemes::PointSequence<f64>;
