//! Period frames: orthonormal bases of positive 3-planes orthogonal to a
//! root, generic with respect to every other enumerated root.
//!
//! # Construction
//!
//! For a root `d` the three hyperbolic sums `u_j = e_j + f_j` span a positive
//! 3-plane; projecting them into `d`-perp along `d` keeps the Gram matrix
//! positive definite (`2I + s s^T / 2` with `s_j = <u_j, d>`).  That plane is
//! *not* generic in general -- for a hyperbolic root it pairs to zero with
//! every root of both `E8(-1)` blocks -- so a small seeded integral
//! perturbation, projected into `d`-perp and scaled by `2^-k`, is mixed in
//! before orthonormalizing.  All candidate vectors are dyadic rationals, so
//! orthogonality to `d` and the genericity test are checked *exactly* in
//! integer arithmetic on the numerators; floating point enters only through
//! the square roots of the final Gram-Schmidt pass.

use serde::Serialize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::lattice::{K3Lattice, LatticeVector, RealVector, DIM};
use crate::linalg;
use crate::roots::RootSet;
use crate::tol;

/// An orthonormal frame for a positive 3-plane in the real span.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodFrame {
    pub theta: [RealVector; 3],
    /// Max deviation of the frame Gram matrix from the identity.
    pub residual: f64,
}

impl PeriodFrame {
    /// Projection coefficients `(<c, theta_i>)_i` of an integral class.
    pub fn project(&self, lattice: &K3Lattice, c: &LatticeVector) -> [f64; 3] {
        std::array::from_fn(|i| lattice.pairing_int_real(c, &self.theta[i]))
    }

    /// Projection coefficients of a real-span vector.
    pub fn project_real(&self, lattice: &K3Lattice, c: &RealVector) -> [f64; 3] {
        std::array::from_fn(|i| lattice.pairing_real(c, &self.theta[i]))
    }
}

/// Orthonormalize three real-span vectors under the intersection form.
///
/// The span must be positive definite and, when a constraint root is given,
/// each raw vector must already pair to zero with it (within `tolerance`);
/// the output spans the same subspace.  Deterministic: plain two-pass
/// modified Gram-Schmidt in input order, no pivoting.
pub fn orthonormalize_in_subspace(
    lattice: &K3Lattice,
    raw: &[RealVector; 3],
    constraint: Option<&LatticeVector>,
    tolerance: f64,
) -> Result<PeriodFrame> {
    if let Some(d) = constraint {
        for (j, v) in raw.iter().enumerate() {
            let p = lattice.pairing_int_real(d, v);
            if p.abs() > tolerance {
                return Err(Error::Precondition(format!(
                    "raw vector {j} pairs with the constraint root by {p:.3e}"
                )));
            }
        }
    }
    let gram: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| lattice.pairing_real(&raw[i], &raw[j]))
                .collect()
        })
        .collect();
    let eigs = linalg::symmetric_eigenvalues(&gram);
    if eigs[0] <= 0.0 {
        return Err(Error::Geometry(format!(
            "raw span is not positive definite (min eigenvalue {:.3e})",
            eigs[0]
        )));
    }
    let cond = eigs[2] / eigs[0];
    if cond > tol::CONDITION_LIMIT {
        return Err(Error::Conditioning {
            estimate: cond,
            limit: tol::CONDITION_LIMIT,
        });
    }
    let mut theta = *raw;
    // two passes flush the rounding of the first one
    for _ in 0..2 {
        for i in 0..3 {
            for j in 0..i {
                let c = lattice.pairing_real(&theta[i], &theta[j]);
                theta[i] = theta[i].axpy(-c, &theta[j]);
            }
            let n = lattice.pairing_real(&theta[i], &theta[i]);
            if n <= 0.0 {
                return Err(Error::Geometry(
                    "positivity lost during orthonormalization".into(),
                ));
            }
            theta[i] = theta[i].scale(1.0 / n.sqrt());
        }
    }
    let mut residual = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let target = f64::from(i == j);
            residual = residual.max((lattice.pairing_real(&theta[i], &theta[j]) - target).abs());
        }
    }
    if residual > tolerance {
        return Err(Error::Conditioning {
            estimate: residual,
            limit: tolerance,
        });
    }
    Ok(PeriodFrame { theta, residual })
}

/// Exact record of the dyadic raw vectors behind a constructed frame:
/// `raw_j = numerators_j / 2^den_pow2`.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationRecord {
    pub den_pow2: u32,
    pub numerators: [[i64; DIM]; 3],
}

/// A certified base point: a generic positive 3-plane orthogonal to `delta`.
#[derive(Debug, Clone, Serialize)]
pub struct BasePoint {
    pub delta: LatticeVector,
    pub frame: PeriodFrame,
    /// Radius of the root set the genericity certificate covers.
    pub verified_bound: f64,
    /// Smallest `max_j |<theta_j, r>|` over enumerated roots `r != +-delta`.
    pub genericity_margin: f64,
    /// The root attaining the margin.
    pub nearest_root: LatticeVector,
    pub seed: u64,
    /// Exact dyadic raw vectors, when the frame came from the seeded
    /// construction (absent for transported frames).
    pub perturbation: Option<PerturbationRecord>,
}

/// Tunables for base-point construction.
#[derive(Debug, Clone)]
pub struct BaseOptions {
    /// Orthonormality tolerance of the final frame.
    pub tolerance: f64,
    /// Minimum accepted genericity margin.
    pub genericity: f64,
    /// Fresh-perturbation attempts before giving up.
    pub retries: u32,
}

impl Default for BaseOptions {
    fn default() -> Self {
        BaseOptions {
            tolerance: tol::FRAME,
            genericity: tol::GENERICITY,
            retries: 16,
        }
    }
}

/// Smallest over roots (excluding `+-delta`) of the largest pairing with a
/// frame vector, together with the root attaining it.
pub fn genericity_margin(
    lattice: &K3Lattice,
    theta: &[RealVector; 3],
    delta: &LatticeVector,
    roots: &RootSet,
) -> (f64, LatticeVector) {
    let neg = delta.neg();
    let per_root: Vec<f64> = exec::map_indexed(roots.roots.len(), true, |i| {
        let r = &roots.roots[i];
        if r == delta || *r == neg {
            return f64::INFINITY;
        }
        let mut m = 0.0f64;
        for t in theta {
            m = m.max(lattice.pairing_int_real(r, t).abs());
        }
        m
    });
    let mut min = f64::INFINITY;
    let mut nearest = *delta;
    for (i, &m) in per_root.iter().enumerate() {
        if m < min {
            min = m;
            nearest = roots.roots[i];
        }
    }
    (min, nearest)
}

/// Build a base point for `delta`: a positive 3-plane orthogonal to `delta`
/// whose frame pairs visibly with every other enumerated root.
///
/// Deterministic for a fixed `(delta, roots, seed)`.
pub fn construct_base_point(
    lattice: &K3Lattice,
    delta: &LatticeVector,
    roots: &RootSet,
    seed: u64,
    opts: &BaseOptions,
) -> Result<BasePoint> {
    if lattice.norm_sq(delta) != -2 {
        return Err(Error::Precondition(format!(
            "{delta:?} has square {}, not -2",
            lattice.norm_sq(delta)
        )));
    }
    if !roots.contains(delta) {
        return Err(Error::Precondition(format!(
            "{delta:?} is not among the {} enumerated roots (bound {})",
            roots.len(),
            roots.bound
        )));
    }

    // positive seed plane: u_j = e_j + f_j, projected into delta-perp
    let u: [LatticeVector; 3] =
        std::array::from_fn(|j| LatticeVector::basis(2 * j).add(&LatticeVector::basis(2 * j + 1)));
    let s: [i64; 3] = std::array::from_fn(|j| lattice.pairing(&u[j], delta));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_margin = 0.0f64;
    let mut worst_root = *delta;

    for attempt in 0..opts.retries {
        // integral perturbations, projected into delta-perp (times two to
        // stay integral): xi_j = 2 r_j + <r_j, d> d
        let xi: [LatticeVector; 3] = std::array::from_fn(|_| {
            let r = LatticeVector(std::array::from_fn(|_| rng.gen_range(-4i64..=4)));
            r.scale(2).add(&delta.scale(lattice.pairing(&r, delta)))
        });
        // raw_j = u_j + (s_j/2) d + 2^{-k} (xi_j / 2), over denominator 2^{k+1}
        for k in 3u32..=8 {
            let den = 1i64 << (k + 1);
            let numerators: [LatticeVector; 3] = std::array::from_fn(|j| {
                u[j].scale(den)
                    .add(&delta.scale((1i64 << k) * s[j]))
                    .add(&xi[j])
            });
            // exact genericity on the numerators
            let neg = delta.neg();
            let exact_ok = roots.roots.iter().all(|r| {
                *r == *delta || *r == neg || numerators.iter().any(|n| lattice.pairing(n, r) != 0)
            });
            if !exact_ok {
                continue; // a larger k shifts the cancellation; else new attempt
            }
            let raw: [RealVector; 3] = std::array::from_fn(|j| {
                RealVector::from_int(&numerators[j]).scale(1.0 / den as f64)
            });
            let Ok(frame) = orthonormalize_in_subspace(lattice, &raw, Some(delta), opts.tolerance)
            else {
                continue;
            };
            let (margin, nearest) = genericity_margin(lattice, &frame.theta, delta, roots);
            if margin > worst_margin && margin.is_finite() {
                worst_margin = margin;
                worst_root = nearest;
            }
            if margin > opts.genericity {
                return Ok(BasePoint {
                    delta: *delta,
                    frame,
                    verified_bound: roots.bound,
                    genericity_margin: margin,
                    nearest_root: nearest,
                    seed,
                    perturbation: Some(PerturbationRecord {
                        den_pow2: k + 1,
                        numerators: [numerators[0].0, numerators[1].0, numerators[2].0],
                    }),
                });
            }
        }
        let _ = attempt;
    }
    Err(Error::Construction {
        attempts: opts.retries,
        root: Box::new(worst_root),
        margin: worst_margin,
    })
}

impl BasePoint {
    /// Wrap an externally supplied frame (for example one transported by an
    /// isometry) as a base point, re-verifying orthonormality, orthogonality
    /// to `delta` and genericity against `roots`.
    pub fn from_frame(
        lattice: &K3Lattice,
        theta: [RealVector; 3],
        delta: LatticeVector,
        roots: &RootSet,
        opts: &BaseOptions,
    ) -> Result<BasePoint> {
        if lattice.norm_sq(&delta) != -2 {
            return Err(Error::Precondition(format!(
                "{delta:?} has square {}, not -2",
                lattice.norm_sq(&delta)
            )));
        }
        let frame = orthonormalize_in_subspace(lattice, &theta, Some(&delta), opts.tolerance)?;
        let (margin, nearest) = genericity_margin(lattice, &frame.theta, &delta, roots);
        if margin <= opts.genericity {
            return Err(Error::Construction {
                attempts: 0,
                root: Box::new(nearest),
                margin,
            });
        }
        Ok(BasePoint {
            delta,
            frame,
            verified_bound: roots.bound,
            genericity_margin: margin,
            nearest_root: nearest,
            seed: 0,
            perturbation: None,
        })
    }

    /// Serialize with the exact dyadic raw data when available.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "delta": self.delta,
            "theta": self.frame.theta,
            "residual": self.frame.residual,
            "verified_bound": self.verified_bound,
            "genericity_margin": self.genericity_margin,
            "nearest_root": self.nearest_root,
            "seed": self.seed,
            "perturbation": self.perturbation.as_ref().map(|p| serde_json::json!({
                "den_pow2": p.den_pow2,
                "numerators": p.numerators.iter().map(|n| n.to_vec()).collect::<Vec<_>>(),
            })),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{hyperbolic_root, Block};
    use crate::roots::{enumerate_roots, EnumOptions};

    fn setup() -> (K3Lattice, RootSet, LatticeVector) {
        let lat = K3Lattice::new();
        let roots = enumerate_roots(&lat, &EnumOptions::default()).unwrap();
        let delta = hyperbolic_root(1);
        (lat, roots, delta)
    }

    #[test]
    fn base_point_is_orthonormal_and_orthogonal_to_delta() {
        let (lat, roots, delta) = setup();
        let bp = construct_base_point(&lat, &delta, &roots, 7, &BaseOptions::default()).unwrap();
        assert!(bp.frame.residual < tol::FRAME_TIGHT);
        for t in &bp.frame.theta {
            // exact-dyadic construction keeps these at the rounding floor
            assert!(lat.pairing_int_real(&delta, t).abs() < 1e-13);
        }
        assert!(bp.genericity_margin > tol::GENERICITY);
    }

    #[test]
    fn unperturbed_candidate_fails_genericity_for_a_hyperbolic_root() {
        // theta_j ~ (e_j + f_j)/sqrt(2) pairs to zero with every E8 root, so
        // the naive plane must be rejected by the margin check.
        let (lat, roots, delta) = setup();
        let raw: [RealVector; 3] = std::array::from_fn(|j| {
            RealVector::from_int(&LatticeVector::basis(2 * j).add(&LatticeVector::basis(2 * j + 1)))
                .scale(0.5f64.sqrt())
        });
        let frame = orthonormalize_in_subspace(&lat, &raw, Some(&delta), tol::FRAME).unwrap();
        let (margin, nearest) = genericity_margin(&lat, &frame.theta, &delta, &roots);
        assert!(margin < tol::GENERICITY);
        assert_ne!(nearest, delta);
        // the witness orthogonality, explicitly: an E8 root pairs to zero
        // with the whole naive plane (as do the e_k - f_k of other blocks)
        let e8 = roots
            .roots
            .iter()
            .find(|r| r.support() == vec![crate::lattice::Block::E8A])
            .unwrap();
        for t in &frame.theta {
            assert!(lat.pairing_int_real(e8, t).abs() < 1e-12);
        }
    }

    #[test]
    fn construction_is_deterministic_per_seed() {
        let (lat, roots, delta) = setup();
        let a = construct_base_point(&lat, &delta, &roots, 42, &BaseOptions::default()).unwrap();
        let b = construct_base_point(&lat, &delta, &roots, 42, &BaseOptions::default()).unwrap();
        for j in 0..3 {
            assert_eq!(a.frame.theta[j].0, b.frame.theta[j].0);
        }
        let c = construct_base_point(&lat, &delta, &roots, 43, &BaseOptions::default()).unwrap();
        assert_ne!(a.frame.theta[0].0, c.frame.theta[0].0);
    }

    #[test]
    fn base_point_works_for_an_e8_root() {
        let (lat, roots, _) = setup();
        let delta = *roots
            .roots
            .iter()
            .find(|r| r.support() == vec![Block::E8A])
            .unwrap();
        let bp = construct_base_point(&lat, &delta, &roots, 1, &BaseOptions::default()).unwrap();
        assert!(bp.genericity_margin > tol::GENERICITY);
        for t in &bp.frame.theta {
            assert!(lat.pairing_int_real(&delta, t).abs() < 1e-12);
        }
    }

    #[test]
    fn non_roots_are_rejected() {
        let (lat, roots, _) = setup();
        let e1 = LatticeVector::basis(0);
        assert!(matches!(
            construct_base_point(&lat, &e1, &roots, 0, &BaseOptions::default()),
            Err(Error::Precondition(_))
        ));
        // a genuine root outside the enumerated set is also rejected
        let far = LatticeVector::from_block(Block::U1, &[2, 0])
            .add(&LatticeVector::from_block(Block::U2, &[1, -1]));
        assert_eq!(lat.norm_sq(&far), -2);
        assert!(matches!(
            construct_base_point(&lat, &far, &roots, 0, &BaseOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn projection_examples() {
        let (lat, roots, delta) = setup();
        let bp = construct_base_point(&lat, &delta, &roots, 7, &BaseOptions::default()).unwrap();
        // delta projects to zero
        let p = bp.frame.project(&lat, &delta);
        assert!(p.iter().all(|c| c.abs() < 1e-12));
        // theta_2 + 5 delta projects to (0, 1, 0)
        let c = bp.frame.theta[1].axpy(5.0, &RealVector::from_int(&delta));
        let p = bp.frame.project_real(&lat, &c);
        assert!((p[0]).abs() < 1e-9 && (p[1] - 1.0).abs() < 1e-9 && (p[2]).abs() < 1e-9);
    }

    #[test]
    fn projection_of_nonnegative_classes_is_nonzero() {
        // a nonzero class with <c,c> >= 0 cannot lie in the negative-definite
        // complement of the period plane
        let (lat, roots, delta) = setup();
        let bp = construct_base_point(&lat, &delta, &roots, 3, &BaseOptions::default()).unwrap();
        let mut state = 0xfeedu64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(7);
            ((state >> 33) % 9) as i64 - 4
        };
        let mut checked = 0;
        while checked < 200 {
            let c = LatticeVector(std::array::from_fn(|_| next()));
            if c.is_zero() || lat.norm_sq(&c) < 0 {
                continue;
            }
            checked += 1;
            let p = bp.frame.project(&lat, &c);
            let norm2 = p.iter().map(|x| x * x).sum::<f64>();
            // |rho(c)|^2 >= <c,c> up to frame residual
            assert!(norm2 >= lat.norm_sq(&c) as f64 - 1e-6);
            assert!(norm2 > 1e-8);
        }
    }

    #[test]
    fn orthonormalize_rejects_bad_input() {
        let (lat, _, delta) = setup();
        // not orthogonal to the constraint
        let raw: [RealVector; 3] =
            std::array::from_fn(|j| RealVector::from_int(&LatticeVector::basis(2 * j)));
        assert!(matches!(
            orthonormalize_in_subspace(&lat, &raw, Some(&delta), tol::FRAME),
            Err(Error::Precondition(_))
        ));
        // degenerate span (repeated vector)
        let v = RealVector::from_int(&LatticeVector::basis(0).add(&LatticeVector::basis(1)));
        assert!(matches!(
            orthonormalize_in_subspace(&lat, &[v, v, v], None, tol::FRAME),
            Err(Error::Geometry(_) | Error::Conditioning { .. })
        ));
        // negative-definite span
        let raw: [RealVector; 3] =
            std::array::from_fn(|j| RealVector::from_int(&LatticeVector::basis(6 + j)));
        assert!(matches!(
            orthonormalize_in_subspace(&lat, &raw, None, tol::FRAME),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn orthonormalize_scaling_invariance() {
        // scaling the raw vectors changes nothing but rounding
        let (lat, _, _) = setup();
        let raw: [RealVector; 3] = std::array::from_fn(|j| {
            RealVector::from_int(&LatticeVector::basis(2 * j).add(&LatticeVector::basis(2 * j + 1)))
        });
        let scaled: [RealVector; 3] = std::array::from_fn(|j| raw[j].scale(3.5));
        let a = orthonormalize_in_subspace(&lat, &raw, None, tol::FRAME).unwrap();
        let b = orthonormalize_in_subspace(&lat, &scaled, None, tol::FRAME).unwrap();
        for j in 0..3 {
            for i in 0..DIM {
                assert!((a.theta[j].0[i] - b.theta[j].0[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn from_frame_transport_round_trip() {
        let (lat, roots, delta) = setup();
        let bp = construct_base_point(&lat, &delta, &roots, 7, &BaseOptions::default()).unwrap();
        let again =
            BasePoint::from_frame(&lat, bp.frame.theta, delta, &roots, &BaseOptions::default())
                .unwrap();
        assert!(again.genericity_margin > tol::GENERICITY);
        assert!(again.perturbation.is_none());
    }
}
