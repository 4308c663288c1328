//! Path signatures in the truncated tensor algebra.
//!
//! * [`algebra`]: the truncated tensor algebra `T_{d,k}` with product,
//!   exponential, logarithm and group inverse, over exact rationals or `f64`.
//! * [`signatures`]: signatures of axis, piecewise-linear, polynomial and
//!   spline paths, via Chen's identity or matrix-tensor congruence.
//! * [`recovery`]: numeric recovery of path coefficients from a signature.
//! * [`bench`]: timing harness comparing the two piecewise-linear algorithms.
//! * [`io`]: JSON and CSV formats used by the `sigtensors` command-line tool.
//!
//! ```
//! use sigtensors::{core_axis, Rational, TensorAlgebraSpace};
//!
//! let space = TensorAlgebraSpace::of::<Rational>(2, 3).unwrap();
//! let axis = core_axis::<Rational>(space).unwrap();
//! assert_eq!(axis.get_entry(&[1, 2]).unwrap().to_string(), "1");
//! assert_eq!(axis.get_entry(&[1, 1, 2]).unwrap().to_string(), "1/2");
//! ```

pub mod algebra;
pub mod bench;
pub mod error;
pub mod field;
pub mod io;
pub mod matrix;
pub mod recovery;
pub mod signatures;

pub use algebra::{TensorAlgebraSpace, TensorSequence};
pub use error::{Error, Result};
pub use field::{Coefficient, FieldKind, Rational};
pub use io::AnySequence;
pub use matrix::CoefMatrix;
pub use recovery::{recover, CoreKind, RecoveryOptions, RecoveryProblem, RecoveryResult};
pub use signatures::{
    congruence, core_axis, core_monomial, sig, sig_linear, sig_poly, sig_pwln, sig_pwln_chen,
    sig_pwln_congruence, sig_quadrature_oracle, sig_spline, Algorithm, GeomType, PathSpec,
};
