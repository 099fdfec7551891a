//! Certified lattice-theoretic computation of families invariants for the
//! K3 intersection form.
//!
//! The library mechanizes one story: for each positive root `delta` of the
//! even unimodular form of signature (3,19) there is a two-sphere family of
//! period planes tilting towards `delta`, and the invariant attached to a
//! root class `alpha` over that family is the mapping degree of an explicit
//! wall section — equal to 1 when `alpha = delta` and 0 for every other
//! positive root.  Everything here computes that statement and its
//! consequences (conjugation antisymmetry, finiteness, reflection
//! vanishing, isometry equivariance) as checked, certificate-carrying
//! arithmetic.
//!
//! Pipeline, in module order:
//!
//! * [`lattice`] — the rank-22 form `U^3 + E8(-1)^2`, exact integer
//!   pairings, isometries.
//! * [`roots`] — enumeration of square `-2` classes inside a reference-norm
//!   ball, with exact resource accounting, and the `+-` splitting by a
//!   generic integral functional.
//! * [`period`] — certified generic base points: orthonormal positive
//!   3-planes orthogonal to a chosen root, built from exact dyadic
//!   perturbations.
//! * [`grid`] — icosahedral sphere triangulations shared by every
//!   verification sweep.
//! * [`family`] — the tilted frame family over the 2-sphere, dual frames,
//!   self-dual projections, wall sections, and the certified choice of the
//!   tilt parameter.
//! * [`degree`] — the mapping-degree engine: signed solid-angle sums and
//!   signed preimage counts, which must agree.
//! * [`sw`] — dimension/validity arithmetic and the assembled invariants:
//!   matrix, finiteness scan, reflection flip, equivariance.
//!
//! Determinism is load-bearing: all randomness is seeded, parallel results
//! are collected in index order and reduced sequentially, so every public
//! computation is byte-reproducible for a fixed configuration.  The `parallel`
//! feature (default on) fans work out with rayon; disabling it yields the
//! same results on one thread.

// Matrix and frame arithmetic here indexes several arrays with one shared
// subscript; explicit `for i in 0..n` keeps those formulas symmetric.
#![allow(clippy::needless_range_loop)]

pub mod degree;
pub mod error;
pub mod family;
pub mod grid;
pub mod lattice;
pub mod period;
pub mod roots;
pub mod sw;
pub mod tol;

mod exec;
mod linalg;

pub use degree::{
    degree, degree_kronecker, degree_kronecker_seq, degree_preimage, degree_preimage_seq,
    degree_seq, DegreeCertificate, DegreeOptions, DegreePair, Method, SphereMap,
};
pub use error::{Error, Result};
pub use family::{
    wall_margin_scan, wall_margin_scan_seq, FamilyCertificate, FamilyOptions, SphereFamily,
    WallScan, WallSection,
};
pub use grid::SphereGrid;
pub use lattice::{
    hyperbolic_root, parse_vector, Block, K3Lattice, LatticeVector, RealVector, DIM,
};
pub use period::{
    construct_base_point, genericity_margin, orthonormalize_in_subspace, BaseOptions, BasePoint,
    PeriodFrame,
};
pub use roots::{
    count_roots, default_splitting_vector, enumerate_and_split, enumerate_roots,
    enumerate_roots_seq, enumerate_roots_with_form, split_roots, EnumOptions, RootSet,
};
pub use sw::{
    chamber_independent, conjugation_sign, expected_dimension, finiteness_scan,
    finiteness_scan_seq, isometry_equivariance_check, kappa_flip_check, positive_side, sw_matrix,
    sw_of_family, validity_constant, EquivarianceVerdict, KappaFlip, Normalization, ScanReport,
    SpinCClass, SwEntry, SwMatrix, SwOptions,
};
