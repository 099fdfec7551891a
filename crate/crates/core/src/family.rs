//! The sphere of period frames attached to a base point, its dual frames,
//! self-dual projections and wall sections.
//!
//! For a base point with frame `t_1,t_2,t_3` orthogonal to the root `d`, the
//! family assigns to each `x` on the unit 2-sphere the frame
//!
//! ```text
//!     w_i(x) = t_i - (eps x_i / 2) d,        <w_i,w_j> = d_ij - eps^2 x_i x_j / 2,
//! ```
//!
//! positive definite exactly when `eps^2 < 2`.  The dual frame has the closed
//! form `w*_i = w_i + mu x_i (x_1 w_1 + x_2 w_2 + x_3 w_3)` with
//! `mu = (eps^2/2) / (1 - eps^2/2)`, because the frame Gram matrix is the
//! rank-one update `I - (eps^2/2) x x^T`.
//!
//! The wall section of a class `c` is the sphere map
//! `w(c)(x) = 4 pi (<c, w*_i(x)>)_i`; componentwise
//!
//! ```text
//!     w(c)(x)_i = 4 pi [ a_i - (eps b / 2) x_i + mu x_i (a.x - eps b / 2) ]
//! ```
//!
//! with `a_i = <c, t_i>` and `b = <c, d>`.  For `c = d` this collapses to
//! `4 pi eps (1 + mu) x`, a degree-one map; for any other enumerated root the
//! certified construction shrinks `eps` until the constant part dominates,
//! which both keeps the section away from zero and exhibits the straight-line
//! homotopy to a constant map (so its degree must come out zero).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{vec3, SphereGrid};
use crate::lattice::{K3Lattice, LatticeVector, RealVector};
use crate::period::BasePoint;
use crate::roots::RootSet;
use crate::tol;

/// The sphere family over a base point, with its metric parameter.
#[derive(Debug, Clone)]
pub struct SphereFamily {
    pub base: BasePoint,
    pub epsilon: f64,
    pub mu: f64,
}

/// Tunables for certified family construction.
#[derive(Debug, Clone)]
pub struct FamilyOptions {
    /// First `eps` to try; halved until the chamber certificate holds.
    pub epsilon_start: f64,
    /// Verification grid subdivision level.
    pub grid_level: u32,
    /// Halvings before giving up.
    pub max_halvings: u32,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            epsilon_start: 0.1,
            grid_level: 5,
            max_halvings: 40,
        }
    }
}

/// Evidence that the family avoids every wall except the defining one.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyCertificate {
    pub epsilon: f64,
    pub mu: f64,
    /// Halvings applied to the starting `eps`.
    pub halvings: u32,
    /// Every checked root satisfies the constant-domination inequality, so
    /// each wall section is homotopic to a constant through nonvanishing
    /// maps.
    pub analytic_contraction: bool,
    pub grid_level: u32,
    /// Smallest `min_x |w(r)(x)|` over checked roots.
    pub min_wall_margin: f64,
    pub worst_root: LatticeVector,
    pub roots_checked: usize,
}

fn mu_of(epsilon: f64) -> f64 {
    let h = epsilon * epsilon / 2.0;
    h / (1.0 - h)
}

impl SphereFamily {
    /// Family with an explicit metric parameter; `eps` must lie in
    /// `(0, sqrt(2))` but is *not* checked against any wall.
    pub fn new(base: BasePoint, epsilon: f64) -> Result<SphereFamily> {
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon * epsilon >= 2.0 {
            return Err(Error::DegenerateMetric { epsilon });
        }
        let mu = mu_of(epsilon);
        Ok(SphereFamily { base, epsilon, mu })
    }

    /// Family whose parameter has been shrunk until every enumerated root
    /// other than `+-delta` keeps its wall section away from zero, with the
    /// margins recorded.
    pub fn certified(
        lattice: &K3Lattice,
        base: BasePoint,
        roots: &RootSet,
        opts: &FamilyOptions,
    ) -> Result<(SphereFamily, FamilyCertificate)> {
        let delta = base.delta;
        let neg = delta.neg();
        // frame data per root is eps-independent
        let others: Vec<(LatticeVector, [f64; 3], f64)> = roots
            .roots
            .iter()
            .filter(|r| **r != delta && **r != neg)
            .map(|r| {
                let a = base.frame.project(lattice, r);
                let b = lattice.pairing(r, &delta) as f64;
                (*r, a, b)
            })
            .collect();
        let mut epsilon = opts.epsilon_start;
        let mut halvings = 0u32;
        let mut last_margin = f64::INFINITY;
        let mut last_worst = delta;
        loop {
            let family = SphereFamily::new(base.clone(), epsilon)?;
            let mu = family.mu;
            let contraction = others.iter().all(|(_, a, b)| {
                let a_norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
                (epsilon * b.abs() / 2.0) * (1.0 + mu) + mu * a_norm < a_norm
            });
            if contraction {
                let scan = wall_margin_scan(lattice, &family, roots, opts.grid_level);
                last_margin = scan.min;
                last_worst = scan.worst;
                if scan.min > tol::WALL_FLOOR {
                    let cert = FamilyCertificate {
                        epsilon,
                        mu,
                        halvings,
                        analytic_contraction: true,
                        grid_level: opts.grid_level,
                        min_wall_margin: scan.min,
                        worst_root: scan.worst,
                        roots_checked: others.len(),
                    };
                    return Ok((family, cert));
                }
            }
            halvings += 1;
            epsilon /= 2.0;
            if halvings > opts.max_halvings {
                return Err(Error::Wall {
                    alpha: Box::new(last_worst),
                    min: if last_margin.is_finite() {
                        last_margin
                    } else {
                        0.0
                    },
                });
            }
        }
    }

    pub fn delta(&self) -> &LatticeVector {
        &self.base.delta
    }

    fn check_unit(x: [f64; 3]) -> Result<()> {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if (r - 1.0).abs() > tol::UNIT_SPHERE {
            return Err(Error::Input(format!(
                "point {x:?} is off the unit sphere by {:.3e}",
                (r - 1.0).abs()
            )));
        }
        Ok(())
    }

    /// The frame `w_i(x) = t_i - (eps x_i / 2) d`.
    pub fn frame_at(&self, x: [f64; 3]) -> Result<[RealVector; 3]> {
        Self::check_unit(x)?;
        let d = RealVector::from_int(&self.base.delta);
        Ok(std::array::from_fn(|i| {
            self.base.frame.theta[i].axpy(-self.epsilon * x[i] / 2.0, &d)
        }))
    }

    /// The dual frame `w*_i(x) = w_i + mu x_i sum_j x_j w_j`.
    pub fn dual_frame_at(&self, x: [f64; 3]) -> Result<[RealVector; 3]> {
        let w = self.frame_at(x)?;
        let mix = w[0].scale(x[0]).axpy(x[1], &w[1]).axpy(x[2], &w[2]);
        Ok(std::array::from_fn(|i| w[i].axpy(self.mu * x[i], &mix)))
    }

    /// Component of `c` in the span of the frame at `x`:
    /// `c+ = sum_i <c, w*_i> w_i`.  The remainder pairs to zero with every
    /// frame vector.
    pub fn self_dual_projection(
        &self,
        lattice: &K3Lattice,
        x: [f64; 3],
        c: &RealVector,
    ) -> Result<RealVector> {
        let w = self.frame_at(x)?;
        let wd = self.dual_frame_at(x)?;
        let mut out = RealVector::zero();
        for i in 0..3 {
            out = out.axpy(lattice.pairing_real(c, &wd[i]), &w[i]);
        }
        Ok(out)
    }

    /// The wall section of `c` as explicit coefficient data.
    pub fn wall_section(&self, lattice: &K3Lattice, c: &LatticeVector) -> WallSection {
        WallSection {
            alpha: *c,
            a: self.base.frame.project(lattice, c),
            b: lattice.pairing(c, &self.base.delta) as f64,
            epsilon: self.epsilon,
            mu: self.mu,
        }
    }
}

/// A wall section in closed form: `x -> 4 pi (<c, w*_i(x)>)_i`, determined
/// by the frame coefficients `a` and the pairing `b` with the base root.
#[derive(Debug, Clone, Serialize)]
pub struct WallSection {
    pub alpha: LatticeVector,
    pub a: [f64; 3],
    pub b: f64,
    pub epsilon: f64,
    pub mu: f64,
}

impl WallSection {
    /// Evaluate at a point of the unit sphere.
    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let ax = self.a[0] * x[0] + self.a[1] * x[1] + self.a[2] * x[2];
        let eb2 = self.epsilon * self.b / 2.0;
        let t = self.mu * (ax - eb2);
        let four_pi = 4.0 * std::f64::consts::PI;
        std::array::from_fn(|i| four_pi * (self.a[i] - eb2 * x[i] + t * x[i]))
    }

    /// Smallest `|w|` over the vertices of a grid, with the attaining index.
    pub fn min_on_grid(&self, grid: &SphereGrid) -> (f64, usize) {
        let mut min = f64::INFINITY;
        let mut arg = 0;
        for (i, &v) in grid.vertices.iter().enumerate() {
            let n = vec3::norm(self.eval(v));
            if n < min {
                min = n;
                arg = i;
            }
        }
        (min, arg)
    }
}

/// Per-root wall margins of a family over a verification grid.
pub struct WallScan {
    /// Smallest margin over all checked roots.
    pub min: f64,
    pub worst: LatticeVector,
    /// Margin per root, in root-set order (`+-delta` reported as infinite).
    pub per_root: Vec<f64>,
}

/// Sweep `min_x |w(r)(x)|` for every enumerated root `r != +-delta`.
pub fn wall_margin_scan(
    lattice: &K3Lattice,
    family: &SphereFamily,
    roots: &RootSet,
    level: u32,
) -> WallScan {
    wall_margin_scan_impl(lattice, family, roots, level, true)
}

/// Sequential twin of [`wall_margin_scan`]; reference path for the benches.
pub fn wall_margin_scan_seq(
    lattice: &K3Lattice,
    family: &SphereFamily,
    roots: &RootSet,
    level: u32,
) -> WallScan {
    wall_margin_scan_impl(lattice, family, roots, level, false)
}

fn wall_margin_scan_impl(
    lattice: &K3Lattice,
    family: &SphereFamily,
    roots: &RootSet,
    level: u32,
    parallel: bool,
) -> WallScan {
    let grid = SphereGrid::new(level);
    let delta = family.base.delta;
    let neg = delta.neg();
    let per_root: Vec<f64> = exec::map_indexed(roots.roots.len(), parallel, |i| {
        let r = &roots.roots[i];
        if *r == delta || *r == neg {
            return f64::INFINITY;
        }
        let section = family.wall_section(lattice, r);
        section.min_on_grid(&grid).0
    });
    let mut min = f64::INFINITY;
    let mut worst = delta;
    for (i, &m) in per_root.iter().enumerate() {
        if m < min {
            min = m;
            worst = roots.roots[i];
        }
    }
    WallScan {
        min,
        worst,
        per_root,
    }
}
