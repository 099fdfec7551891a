//! Mapping degree of sphere-valued maps, computed by two independent
//! methods that must agree.
//!
//! The input is a map `w : S^2 -> R^3 \ {0}`; its degree is that of the
//! normalization `w/|w| : S^2 -> S^2`.
//!
//! * **Angle-sum route** ([`degree_kronecker`]): push an icosahedral
//!   triangulation through the map and sum the signed solid angles of the
//!   image triangles.  The signed solid angle of a spherical triangle
//!   `(a,b,c)` is `2 atan2(det[a,b,c], 1 + a.b + b.c + c.a)`; the grand
//!   total is `4 pi` times the degree up to a discretization error, so the
//!   sum is accepted only when it is close to an integer multiple and no
//!   image triangle was near the ambiguous half-sphere configuration.
//!
//! * **Counting route** ([`degree_preimage`]): pick a regular value `v`,
//!   locate every preimage of the ray through `v` by a triangle-candidate
//!   scan followed by Newton iteration in tangent charts, and add the signs
//!   of the 2x2 chart differentials (right-handed charts on both sides).
//!   Solutions must be well separated and transverse, otherwise the value
//!   is re-drawn; the count must be stable across two consecutive grid
//!   levels.
//!
//! [`degree`] runs both and fails loudly with both certificates if they
//! disagree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{vec3, SphereGrid};
use crate::tol;

/// A map from the unit 2-sphere into `R^3`, expected to avoid the origin.
pub struct SphereMap<F: Fn([f64; 3]) -> [f64; 3] + Sync> {
    eval: F,
    /// Believed lower bound for `|w|` on the sphere.  Evaluations below half
    /// of this (or an absolute floor) are treated as a vanishing witness.
    pub min_norm_estimate: f64,
}

impl<F: Fn([f64; 3]) -> [f64; 3] + Sync> SphereMap<F> {
    pub fn new(eval: F, min_norm_estimate: f64) -> Self {
        SphereMap {
            eval,
            min_norm_estimate,
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        (self.eval)(x)
    }

    fn guard(&self) -> f64 {
        (self.min_norm_estimate * 0.5).max(1e-14)
    }

    /// Normalized image, or the vanishing witness at `x`.
    fn eval_unit(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        let w = self.eval(x);
        let n = vec3::norm(w);
        if n < self.guard() {
            return Err(Error::Vanishing { point: x, norm: n });
        }
        Ok(vec3::scale(w, 1.0 / n))
    }

    /// Like [`Self::eval_unit`] but silently discards the probe; used for
    /// Newton steps at points that are not certification samples.
    fn probe_unit(&self, x: [f64; 3]) -> Option<[f64; 3]> {
        let w = self.eval(x);
        let n = vec3::norm(w);
        if n < self.guard() {
            return None;
        }
        Some(vec3::scale(w, 1.0 / n))
    }
}

/// Which of the two independent methods produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Signed solid-angle summation.
    Kronecker,
    /// Signed preimage counting at a regular value.
    Preimage,
}

/// Evidence trail for one degree computation.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeCertificate {
    pub degree: i64,
    pub method: Method,
    /// Angle-sum route: distance of the raw sum (in degree units) from the
    /// reported integer.  Counting route: 0 by construction.
    pub residual: f64,
    /// Grid level at which the answer was accepted.
    pub refinement_level: u32,
    /// Counting route only: the regular value used.
    pub regular_value: Option<[f64; 3]>,
    /// Counting route only: number of distinct preimages found.
    pub preimage_count: Option<usize>,
    /// Set once the twin method confirmed the same integer.
    pub agreement: bool,
}

/// Both certificates for one agreed degree.
#[derive(Debug, Clone, Serialize)]
pub struct DegreePair {
    pub degree: i64,
    pub kronecker: DegreeCertificate,
    pub preimage: DegreeCertificate,
}

/// Tunables for the degree engine.
#[derive(Debug, Clone)]
pub struct DegreeOptions {
    /// First triangulation level tried.
    pub level_start: u32,
    /// Refinement stops (and the computation fails) past this level.
    pub level_cap: u32,
    /// Seed for regular-value draws.
    pub seed: u64,
    /// Regular-value re-draws tolerated before giving up.
    pub retries: u32,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions {
            level_start: 4,
            level_cap: 8,
            seed: 0,
            retries: 8,
        }
    }
}

/// Signed solid angle of the spherical triangle on unit vectors, and
/// whether the formula was numerically unambiguous.  The ambiguous
/// configuration is `atan2` near `(0, 0)`, where the triangle covers close
/// to a half-sphere and the sign of nearly `+-2 pi` is unstable.
fn solid_angle(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> (f64, bool) {
    let d = vec3::det(a, b, c);
    let s = 1.0 + vec3::dot(a, b) + vec3::dot(b, c) + vec3::dot(c, a);
    let reliable = !(d.abs() < 1e-9 && s < 1e-9);
    (2.0 * d.atan2(s), reliable)
}

fn normalized_images<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    grid: &SphereGrid,
    parallel: bool,
) -> Result<Vec<[f64; 3]>> {
    exec::map_indexed(grid.vertices.len(), parallel, |i| {
        map.eval_unit(grid.vertices[i])
    })
    .into_iter()
    .collect()
}

/// Degree by signed solid-angle summation over a refined triangulation.
pub fn degree_kronecker<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    opts: &DegreeOptions,
) -> Result<DegreeCertificate> {
    degree_kronecker_impl(map, opts, true)
}

/// Sequential twin of [`degree_kronecker`]; reference path for the benches.
pub fn degree_kronecker_seq<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    opts: &DegreeOptions,
) -> Result<DegreeCertificate> {
    degree_kronecker_impl(map, opts, false)
}

fn degree_kronecker_impl<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    opts: &DegreeOptions,
    parallel: bool,
) -> Result<DegreeCertificate> {
    let mut level = opts.level_start;
    loop {
        let grid = SphereGrid::new(level);
        let u = normalized_images(map, &grid, parallel)?;
        let contributions = exec::map_indexed(grid.triangles.len(), parallel, |t| {
            let [i, j, k] = grid.triangles[t];
            solid_angle(u[i as usize], u[j as usize], u[k as usize])
        });
        let reliable = contributions.iter().all(|c| c.1);
        // deterministic sequential reduction
        let total: f64 = contributions.iter().map(|c| c.0).sum();
        let raw = total / (4.0 * std::f64::consts::PI);
        let rounded = raw.round();
        let residual = (raw - rounded).abs();
        if reliable && residual < tol::DEGREE_RESIDUAL {
            return Ok(DegreeCertificate {
                degree: rounded as i64,
                method: Method::Kronecker,
                residual,
                refinement_level: level,
                regular_value: None,
                preimage_count: None,
                agreement: false,
            });
        }
        if level >= opts.level_cap {
            return Err(Error::NonConvergence {
                raw,
                residual,
                level,
            });
        }
        level += 1;
    }
}

/// Right-handed orthonormal basis of the tangent plane at unit `x`:
/// `det[t1, t2, x] = +1`.
fn tangent_basis(x: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut axis = [0.0; 3];
    let mut best = usize::MAX;
    let mut small = f64::INFINITY;
    for (i, &c) in x.iter().enumerate() {
        if c.abs() < small {
            small = c.abs();
            best = i;
        }
    }
    axis[best] = 1.0;
    let t1 = vec3::normalize(vec3::sub(axis, vec3::scale(x, vec3::dot(axis, x))));
    let t2 = vec3::cross(x, t1);
    (t1, t2)
}

struct PreimagePoint {
    x: [f64; 3],
    sign: i64,
    jacobian_det: f64,
}

/// One Newton run from a candidate seed towards `{x : w(x)/|w(x)| = v}`.
/// Charts: `(t1, t2)` right-handed at the moving point, `(p1, p2)`
/// right-handed at `v`; the objective is the `v`-orthogonal part of the
/// normalized image expressed in `(p1, p2)`.
fn newton_from<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    start: [f64; 3],
    v: [f64; 3],
    p1: [f64; 3],
    p2: [f64; 3],
) -> Option<PreimagePoint> {
    let h = 1e-6;
    let objective = |x: [f64; 3]| -> Option<[f64; 2]> {
        let u = map.probe_unit(x)?;
        Some([vec3::dot(u, p1), vec3::dot(u, p2)])
    };
    let mut x = start;
    for _ in 0..60 {
        let (t1, t2) = tangent_basis(x);
        let chart = |s: f64, t: f64| {
            vec3::normalize(vec3::add(
                x,
                vec3::add(vec3::scale(t1, s), vec3::scale(t2, t)),
            ))
        };
        let f0 = objective(x)?;
        let fnorm = (f0[0] * f0[0] + f0[1] * f0[1]).sqrt();
        // central-difference Jacobian of the chart objective
        let fs_p = objective(chart(h, 0.0))?;
        let fs_m = objective(chart(-h, 0.0))?;
        let ft_p = objective(chart(0.0, h))?;
        let ft_m = objective(chart(0.0, -h))?;
        let j = [
            [
                (fs_p[0] - fs_m[0]) / (2.0 * h),
                (ft_p[0] - ft_m[0]) / (2.0 * h),
            ],
            [
                (fs_p[1] - fs_m[1]) / (2.0 * h),
                (ft_p[1] - ft_m[1]) / (2.0 * h),
            ],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if fnorm < tol::PREIMAGE_NEWTON {
            let u = map.probe_unit(x)?;
            if vec3::dot(u, v) <= 0.0 {
                // converged onto the antipodal ray; not a preimage of v
                return None;
            }
            return Some(PreimagePoint {
                x,
                sign: if det > 0.0 { 1 } else { -1 },
                jacobian_det: det,
            });
        }
        if det.abs() < 1e-18 {
            return None;
        }
        let mut ds = (-f0[0] * j[1][1] + f0[1] * j[0][1]) / det;
        let mut dt = (-f0[1] * j[0][0] + f0[0] * j[1][0]) / det;
        let step = (ds * ds + dt * dt).sqrt();
        if step > 0.5 {
            ds *= 0.5 / step;
            dt *= 0.5 / step;
        }
        if step < 1e-15 {
            return None; // stalled short of the tolerance
        }
        x = chart(ds, dt);
    }
    None
}

enum Once {
    Counted {
        degree: i64,
        count: usize,
    },
    /// The value looked non-regular (merged signs clashed, preimages nearly
    /// collided, or a differential was non-transverse); draw a fresh one.
    Retry,
}

fn preimage_once<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    v: [f64; 3],
    level: u32,
    parallel: bool,
) -> Result<Once> {
    let grid = SphereGrid::new(level);
    let u = normalized_images(map, &grid, parallel)?;
    let slack = 1e-9;
    // triangles whose image could contain the ray through v
    let candidates: Vec<usize> = exec::map_indexed(grid.triangles.len(), parallel, |t| {
        let [i, j, k] = grid.triangles[t];
        let (a, b, c) = (u[i as usize], u[j as usize], u[k as usize]);
        let d1 = vec3::det(a, b, v);
        let d2 = vec3::det(b, c, v);
        let d3 = vec3::det(c, a, v);
        let pos = d1 >= -slack && d2 >= -slack && d3 >= -slack;
        let neg = d1 <= slack && d2 <= slack && d3 <= slack;
        let hemi = vec3::dot(vec3::add(vec3::add(a, b), c), v) > 0.0;
        (pos || neg) && hemi
    })
    .into_iter()
    .enumerate()
    .filter_map(|(t, keep)| keep.then_some(t))
    .collect();
    let (p1, p2) = tangent_basis(v);
    let found: Vec<Option<PreimagePoint>> = exec::map_indexed(candidates.len(), parallel, |ci| {
        let [i, j, k] = grid.triangles[candidates[ci]];
        let centroid = vec3::normalize(vec3::add(
            vec3::add(grid.vertices[i as usize], grid.vertices[j as usize]),
            grid.vertices[k as usize],
        ));
        newton_from(map, centroid, v, p1, p2)
    });
    let mut solutions: Vec<PreimagePoint> = found.into_iter().flatten().collect();
    // deterministic clustering order
    solutions.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    let mut merged: Vec<PreimagePoint> = Vec::new();
    for s in solutions {
        if let Some(rep) = merged
            .iter()
            .find(|r| vec3::dist(r.x, s.x) < tol::PREIMAGE_MERGE)
        {
            if rep.sign != s.sign {
                return Ok(Once::Retry);
            }
            continue;
        }
        merged.push(s);
    }
    for i in 0..merged.len() {
        if merged[i].jacobian_det.abs() < tol::PREIMAGE_TRANSVERSE {
            return Ok(Once::Retry);
        }
        for j in i + 1..merged.len() {
            if vec3::dist(merged[i].x, merged[j].x) < tol::PREIMAGE_SEPARATION {
                return Ok(Once::Retry);
            }
        }
    }
    Ok(Once::Counted {
        degree: merged.iter().map(|p| p.sign).sum(),
        count: merged.len(),
    })
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = vec3::norm(v);
        if n > 0.1 && n <= 1.0 {
            return vec3::scale(v, 1.0 / n);
        }
    }
}

/// Degree by signed preimage counting over the ray through `value`,
/// validated by agreement across two consecutive grid levels.
pub fn degree_preimage<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    value: [f64; 3],
    opts: &DegreeOptions,
) -> Result<DegreeCertificate> {
    degree_preimage_impl(map, value, opts, true)
}

/// Sequential twin of [`degree_preimage`]; reference path for the benches.
pub fn degree_preimage_seq<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    value: [f64; 3],
    opts: &DegreeOptions,
) -> Result<DegreeCertificate> {
    degree_preimage_impl(map, value, opts, false)
}

fn degree_preimage_impl<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    value: [f64; 3],
    opts: &DegreeOptions,
    parallel: bool,
) -> Result<DegreeCertificate> {
    let n = vec3::norm(value);
    if n < 1e-9 {
        return Err(Error::Input(
            "regular value must be a nonzero direction".into(),
        ));
    }
    let mut v = vec3::scale(value, 1.0 / n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut level = opts.level_start;
    let mut redraws = 0u32;
    loop {
        let first = preimage_once(map, v, level, parallel)?;
        let (d1, _) = match first {
            Once::Counted { degree, count } => (degree, count),
            Once::Retry => {
                redraws += 1;
                if redraws > opts.retries {
                    return Err(Error::Degenerate { retries: redraws });
                }
                v = random_unit(&mut rng);
                continue;
            }
        };
        let second = preimage_once(map, v, level + 1, parallel)?;
        let (d2, c2) = match second {
            Once::Counted { degree, count } => (degree, count),
            Once::Retry => {
                redraws += 1;
                if redraws > opts.retries {
                    return Err(Error::Degenerate { retries: redraws });
                }
                v = random_unit(&mut rng);
                continue;
            }
        };
        if d1 == d2 {
            return Ok(DegreeCertificate {
                degree: d2,
                method: Method::Preimage,
                residual: 0.0,
                refinement_level: level + 1,
                regular_value: Some(v),
                preimage_count: Some(c2),
                agreement: false,
            });
        }
        // unstable under refinement: push both levels up
        level += 1;
        if level + 1 > opts.level_cap {
            return Err(Error::NonConvergence {
                raw: d1 as f64,
                residual: (d1 - d2).abs() as f64,
                level,
            });
        }
    }
}

/// Degree by both methods, which must agree.
pub fn degree<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    opts: &DegreeOptions,
) -> Result<DegreePair> {
    degree_impl(map, opts, true)
}

/// Sequential twin of [`degree`]; reference path for the benches.
pub fn degree_seq<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    opts: &DegreeOptions,
) -> Result<DegreePair> {
    degree_impl(map, opts, false)
}

fn degree_impl<F: Fn([f64; 3]) -> [f64; 3] + Sync>(
    map: &SphereMap<F>,
    opts: &DegreeOptions,
    parallel: bool,
) -> Result<DegreePair> {
    let mut kronecker = degree_kronecker_impl(map, opts, parallel)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let value = random_unit(&mut rng);
    let mut preimage = degree_preimage_impl(map, value, opts, parallel)?;
    if kronecker.degree != preimage.degree {
        return Err(Error::MethodDisagreement {
            kronecker: Box::new(kronecker),
            preimage: Box::new(preimage),
        });
    }
    kronecker.agreement = true;
    preimage.agreement = true;
    Ok(DegreePair {
        degree: kronecker.degree,
        kronecker,
        preimage,
    })
}
