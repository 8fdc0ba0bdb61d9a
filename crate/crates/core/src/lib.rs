//! Separable and non-separable 2-D discrete wavelet transform schemes.
//!
//! The crate builds every calculation scheme of a lifted wavelet from
//! polyphase matrices over exact Laurent polynomials:
//!
//! * separable convolution `N^V | N^H`,
//! * separable lifting `S^V | S^H | T^V | T^H` for each lifting pair,
//! * non-separable convolution `N`,
//! * non-separable polyconvolution `N[P, U]` per pair,
//! * non-separable lifting `S[U] | T[P]` per pair,
//!
//! and optionally pulls the constant part of each lifting polynomial into
//! cheap separable factors fused into the same step. Schemes report their
//! synchronization steps and arithmetic operations, and can be compiled into
//! barrier-synchronized stencil kernels that run on real images.
//!
//! ```
//! use nsdwt::{build_variant, get_wavelet, SchemeKind};
//!
//! let w = get_wavelet("cdf53").unwrap();
//! let s = build_variant(SchemeKind::NonSeparableLifting, &w, true).unwrap();
//! assert_eq!((s.count_steps(), s.count_operations()), (2, 18));
//! ```

pub mod bench;
pub mod error;
pub mod exec;
pub mod image;
pub mod laurent;
pub mod matrix;
pub mod pgm;
pub mod report;
pub mod rng;
pub mod scheme;
pub mod subband;
pub mod wavelet;

pub use error::{Error, Result};
pub use exec::{compile, inverse_lifting, relative_deviation, relative_deviation_within, ExecPlan};
pub use image::{
    extend_index, polyphase_merge, polyphase_split, Extension, ImagePlane, PolyphaseImage, Precision, Samples,
};
pub use laurent::{Axis, Coeff, LaurentPoly};
pub use matrix::{lifting_steps_2d, PolyMatrix};
pub use scheme::{
    all_variants, build, build_nonseparable_convolution, build_nonseparable_lifting,
    build_nonseparable_polyconvolution, build_separable_convolution, build_separable_lifting, build_variant,
    optimize_constant_split, FusedGroup, Scheme, SchemeKind,
};
pub use wavelet::{get_wavelet, resolve_wavelet, LiftingPair, WaveletSpec};
