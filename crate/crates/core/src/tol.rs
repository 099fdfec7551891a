//! Central numeric tolerances.
//!
//! Everything numeric in this crate is double precision; the integer lattice
//! arithmetic is exact.  The constants below separate three regimes:
//!
//! * identities that hold to machine precision once the inputs are exact
//!   (frame Gram laws, duality) get tight bounds around `1e-10`..`1e-12`;
//! * constructed quantities that pass through one orthonormalization get a
//!   slightly looser default (`1e-9`);
//! * genuinely discrete decisions (degree rounding, genericity of a base
//!   point) get deliberately coarse thresholds so that a failure means the
//!   computation is wrong, not merely noisy.

/// Default orthonormality tolerance for period frames: `|<t_i,t_j>-d_ij|`.
pub const FRAME: f64 = 1e-9;

/// Orthonormality achieved by the two-pass Gram-Schmidt in practice; tests
/// assert against this tighter figure.
pub const FRAME_TIGHT: f64 = 1e-10;

/// Frame Gram law `<w_i,w_j> = d_ij - eps^2 x_i x_j / 2` on the sphere.
pub const GRAM_LAW: f64 = 1e-12;

/// Duality `<w_i, w*_j> = d_ij` between a sphere frame and its dual frame.
pub const DUALITY: f64 = 1e-10;

/// Self-dual decomposition residual: the remainder must pair to zero with
/// every frame vector.
pub const DECOMPOSITION: f64 = 1e-8;

/// A base point is generic when every enumerated root other than the defining
/// one pairs with some frame vector by more than this.
pub const GENERICITY: f64 = 1e-6;

/// Maximum accepted distance between a raw degree estimate and the nearest
/// integer.
pub const DEGREE_RESIDUAL: f64 = 0.25;

/// How far a point may sit from the unit sphere before it is rejected.
pub const UNIT_SPHERE: f64 = 1e-12;

/// Condition-number ceiling for subspace Gram matrices.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Absolute floor below which a wall section counts as vanishing on the
/// verification grid.
pub const WALL_FLOOR: f64 = 1e-9;

/// Newton convergence target for preimage refinement on the sphere.
pub const PREIMAGE_NEWTON: f64 = 1e-12;

/// Two preimage solutions closer than this are the same point.
pub const PREIMAGE_MERGE: f64 = 1e-7;

/// Two *distinct* preimage solutions closer than this are suspicious and
/// trigger a regular-value retry.
pub const PREIMAGE_SEPARATION: f64 = 1e-4;

/// Jacobian determinant floor for a transverse preimage.
pub const PREIMAGE_TRANSVERSE: f64 = 1e-6;
