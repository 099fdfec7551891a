//! Families invariants assembled from lattice, family and degree data:
//! dimension/validity arithmetic, wall-section degrees as invariants of
//! two-sphere families, the invariant matrix with its normalization, the
//! finiteness scan, and the conjugation/reflection/isometry laws.
//!
//! The bridge from analysis is imported, not recomputed: over the family of
//! hyperkaehler metrics the unperturbed solution count vanishes
//! (Weitzenboeck argument), so the invariant of a class equals the degree
//! of its wall section.  Every entry records that import in its metadata.

use serde::Serialize;

use crate::degree::{degree, degree_seq, DegreeOptions, DegreePair, SphereMap};
use crate::error::{Error, Result};
use crate::exec;
use crate::family::{FamilyCertificate, FamilyOptions, SphereFamily};
use crate::grid::{vec3, SphereGrid};
use crate::lattice::{K3Lattice, LatticeVector, DIM};
use crate::period::{construct_base_point, BaseOptions, BasePoint};
use crate::roots::RootSet;
use crate::tol;

/// The analytic theorem every invariant certificate leans on.
pub const ANALYTIC_INPUT: &str = "unperturbed solution count vanishes over the hyperkaehler \
     fibers (Weitzenboeck vanishing); imported as a theorem, so the invariant \
     equals the wall-section degree";

/// Virtual dimension of the solution space for the twisted structure with
/// `c1 = 2u`: `((2u)^2 - sigma)/4 - 1 - b_plus + b1`.
pub fn expected_dimension(
    lattice: &K3Lattice,
    u: &LatticeVector,
    b_plus: i64,
    b1: i64,
    sigma: i64,
) -> Result<i64> {
    let c1_sq = 4 * lattice.norm_sq(u);
    let num = c1_sq - sigma;
    if num.rem_euclid(4) != 0 {
        return Err(Error::Convention(format!(
            "(2u)^2 - sigma = {num} is not divisible by 4; \
             the class is not characteristic-compatible"
        )));
    }
    Ok(num / 4 - 1 - b_plus + b1)
}

/// The square a characteristic class must have for the invariant over a
/// 1-sphere worth of chambers (`b_plus = 3`) to be defined: `sigma + 8`.
pub fn validity_constant(sigma: i64) -> i64 {
    sigma + 8
}

/// Whether the invariant over an `n`-sphere base is chamber-independent:
/// exactly when `b_plus != n + 2`.
pub fn chamber_independent(b_plus: i64, n: i64) -> bool {
    b_plus != n + 2
}

/// Sign relating the invariant of a structure and of its conjugate over an
/// `n`-sphere base: `(-1)^{(b_plus - b1 - n)/2}`.
pub fn conjugation_sign(b_plus: i64, b1: i64, n: i64) -> Result<i64> {
    let num = b_plus - b1 - n;
    if num.rem_euclid(2) != 0 {
        return Err(Error::Convention(format!(
            "b_plus - b1 - n = {num} is odd; no conjugation sign is defined"
        )));
    }
    Ok(if (num / 2).rem_euclid(2) == 0 { 1 } else { -1 })
}

/// The twisted structure determined by an integral class `u`, with
/// `c1 = 2u`; on the standard even lattice its virtual dimension is
/// `<u,u>`, rechecked on construction.
#[derive(Debug, Clone, Serialize)]
pub struct SpinCClass {
    pub u: LatticeVector,
    pub c1: LatticeVector,
    pub dimension: i64,
}

impl SpinCClass {
    pub fn new(lattice: &K3Lattice, u: LatticeVector) -> Result<SpinCClass> {
        let c1 = u.scale(2);
        let dimension = expected_dimension(lattice, &u, 3, 0, -16)?;
        let square = lattice.norm_sq(&u);
        if dimension != square {
            return Err(Error::Convention(format!(
                "dimension {dimension} disagrees with the square {square}"
            )));
        }
        Ok(SpinCClass { u, c1, dimension })
    }

    /// Validity for the 2-sphere families considered here (`n = 1` chamber
    /// circle, `b_plus = 3`): `(2u)^2` must equal the validity constant,
    /// i.e. `u` must be a root.
    pub fn is_valid(&self) -> bool {
        4 * self.dimension == validity_constant(-16)
    }
}

/// The sign-normalization and analytic conventions every exported matrix
/// carries.
#[derive(Debug, Clone, Serialize)]
pub struct Normalization {
    /// The base 2-sphere is oriented outward.
    pub sphere_orientation: &'static str,
    /// The positive 3-plane is oriented by its frame order.
    pub plane_orientation: &'static str,
    /// Overall sign pinned by the invariant of the defining root being +1.
    pub unit: &'static str,
    pub analytic_input: &'static str,
}

impl Normalization {
    pub fn standard() -> Normalization {
        Normalization {
            sphere_orientation: "outward",
            plane_orientation: "(theta1, theta2, theta3)",
            unit: "invariant of the defining root over its own family is +1",
            analytic_input: ANALYTIC_INPUT,
        }
    }
}

/// One computed invariant with its full evidence trail.
#[derive(Debug, Clone, Serialize)]
pub struct SwEntry {
    pub alpha: LatticeVector,
    pub delta: LatticeVector,
    pub value: i64,
    pub pair: DegreePair,
    /// Wall-section margin on the precheck grid.
    pub wall_margin: f64,
    pub analytic_input: &'static str,
}

/// Which half a root lies in, per the root set's splitting vector.
pub fn positive_side(lattice: &K3Lattice, roots: &RootSet, r: &LatticeVector) -> Result<bool> {
    let v = roots
        .splitting_vector
        .as_ref()
        .ok_or_else(|| Error::Precondition("root set carries no splitting".into()))?;
    let p = lattice.pairing(v, r);
    if p == 0 {
        return Err(Error::Splitting { root: Box::new(*r) });
    }
    Ok(p > 0)
}

/// Invariant of the class `alpha` for the given family: the degree of its
/// wall section, computed by both engine routes.
pub fn sw_of_family(
    lattice: &K3Lattice,
    alpha: &LatticeVector,
    family: &SphereFamily,
    opts: &DegreeOptions,
) -> Result<SwEntry> {
    sw_of_family_impl(lattice, alpha, family, opts, true)
}

fn sw_of_family_impl(
    lattice: &K3Lattice,
    alpha: &LatticeVector,
    family: &SphereFamily,
    opts: &DegreeOptions,
    parallel: bool,
) -> Result<SwEntry> {
    let class = SpinCClass::new(lattice, *alpha)?;
    if !class.is_valid() {
        return Err(Error::Precondition(format!(
            "{alpha:?} has square {}, not -2; the invariant needs a root class",
            class.dimension
        )));
    }
    let section = family.wall_section(lattice, alpha);
    let grid = SphereGrid::new(opts.level_start);
    let (margin, _) = section.min_on_grid(&grid);
    if margin <= tol::WALL_FLOOR {
        return Err(Error::Wall {
            alpha: Box::new(*alpha),
            min: margin,
        });
    }
    let sec = section.clone();
    let map = SphereMap::new(move |x| sec.eval(x), margin);
    let pair = if parallel {
        degree(&map, opts)?
    } else {
        degree_seq(&map, opts)?
    };
    Ok(SwEntry {
        alpha: *alpha,
        delta: *family.delta(),
        value: pair.degree,
        pair,
        wall_margin: margin,
        analytic_input: ANALYTIC_INPUT,
    })
}

/// A failed matrix entry, kept alongside the completed ones.
#[derive(Debug, Clone, Serialize)]
pub struct EntryFailure {
    pub alpha_index: usize,
    pub delta_index: usize,
    pub message: String,
}

/// The invariant matrix `(alpha, delta) -> sw_alpha(h_delta)` with
/// per-entry certificates and per-column family data.
#[derive(Debug, Clone, Serialize)]
pub struct SwMatrix {
    pub normalization: Normalization,
    pub deltas: Vec<LatticeVector>,
    pub alphas: Vec<LatticeVector>,
    /// `entries[i][j]` is the invariant of `alphas[i]` over the family of
    /// `deltas[j]`; `None` marks a recorded failure.
    pub entries: Vec<Vec<Option<i64>>>,
    pub certificates: Vec<Vec<Option<SwEntry>>>,
    pub failures: Vec<EntryFailure>,
    /// Base point used for each column's family.
    pub base_points: Vec<BasePoint>,
    pub family_certificates: Vec<FamilyCertificate>,
    pub seed: u64,
}

impl SwMatrix {
    /// The sign pattern the theory predicts for an entry.
    pub fn expected_entry(&self, i: usize, j: usize) -> i64 {
        if self.alphas[i] == self.deltas[j] {
            1
        } else if self.alphas[i] == self.deltas[j].neg() {
            -1
        } else {
            0
        }
    }

    /// All entries present and matching the predicted pattern.
    pub fn pattern_ok(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, e)| *e == Some(self.expected_entry(i, j)))
        })
    }

    /// Interchange JSON layout.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "normalization": self.normalization,
            "deltas": self.deltas,
            "alphas": self.alphas,
            "entries": self.entries,
            "certificates": self.certificates,
            "failures": self.failures,
            "families": self.base_points.iter().zip(&self.family_certificates)
                .map(|(b, c)| serde_json::json!({
                    "base_point": b.to_json(),
                    "certificate": c,
                }))
                .collect::<Vec<_>>(),
            "seed": self.seed,
        })
    }

    /// CSV layout: one row per alpha, one column per delta, `NA` for holes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha");
        for d in &self.deltas {
            out.push_str(&format!(",{d:?}"));
        }
        out.push('\n');
        for (i, a) in self.alphas.iter().enumerate() {
            out.push_str(&format!("{a:?}"));
            for j in 0..self.deltas.len() {
                match self.entries[i][j] {
                    Some(v) => out.push_str(&format!(",{v}")),
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn derived_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((index as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9))
}

/// Bundled tunables for matrix-scale computations.
#[derive(Debug, Clone, Default)]
pub struct SwOptions {
    pub family: FamilyOptions,
    pub degree: DegreeOptions,
}

/// Compute the invariant matrix over fresh certified families, one per
/// `delta`.  Per-entry failures are recorded and the matrix completes.
pub fn sw_matrix(
    lattice: &K3Lattice,
    deltas: &[LatticeVector],
    alphas: &[LatticeVector],
    roots: &RootSet,
    seed: u64,
    opts: &SwOptions,
) -> Result<SwMatrix> {
    for d in deltas {
        if !roots.contains(d) {
            return Err(Error::Input(format!("{d:?} is not an enumerated root")));
        }
        if !positive_side(lattice, roots, d)? {
            return Err(Error::Precondition(format!(
                "{d:?} lies in the negative half; families are indexed by positive roots"
            )));
        }
    }
    for a in alphas {
        if !roots.contains(a) {
            return Err(Error::Input(format!("{a:?} is not an enumerated root")));
        }
    }
    let mut base_points = Vec::with_capacity(deltas.len());
    let mut family_certificates = Vec::with_capacity(deltas.len());
    let mut families = Vec::with_capacity(deltas.len());
    for (j, d) in deltas.iter().enumerate() {
        let base = construct_base_point(
            lattice,
            d,
            roots,
            derived_seed(seed, j),
            &BaseOptions::default(),
        )?;
        base_points.push(base.clone());
        let (family, cert) = SphereFamily::certified(lattice, base, roots, &opts.family)?;
        family_certificates.push(cert);
        families.push(family);
    }
    let (na, nd) = (alphas.len(), deltas.len());
    let flat: Vec<Result<SwEntry>> = exec::map_indexed(na * nd, true, |k| {
        let (i, j) = (k / nd.max(1), k % nd.max(1));
        sw_of_family(lattice, &alphas[i], &families[j], &opts.degree)
    });
    let mut entries = vec![vec![None; nd]; na];
    let mut certificates = vec![vec![None; nd]; na];
    let mut failures = Vec::new();
    for (k, r) in flat.into_iter().enumerate() {
        let (i, j) = (k / nd.max(1), k % nd.max(1));
        match r {
            Ok(entry) => {
                entries[i][j] = Some(entry.value);
                certificates[i][j] = Some(entry);
            }
            Err(e) => failures.push(EntryFailure {
                alpha_index: i,
                delta_index: j,
                message: e.to_string(),
            }),
        }
    }
    Ok(SwMatrix {
        normalization: Normalization::standard(),
        deltas: deltas.to_vec(),
        alphas: alphas.to_vec(),
        entries,
        certificates,
        failures,
        base_points,
        family_certificates,
        seed,
    })
}

/// Outcome of scanning every positive enumerated root against one family.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub delta: LatticeVector,
    pub epsilon: f64,
    /// Roots actually scanned.
    pub checked: usize,
    /// The classes with nonzero invariant; the theory predicts exactly
    /// `[(delta, 1)]` when scanning the half containing `delta`.
    pub nonzero: Vec<(LatticeVector, i64)>,
    pub failures: Vec<(LatticeVector, String)>,
}

impl ScanReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "delta": self.delta,
            "epsilon": self.epsilon,
            "checked": self.checked,
            "nonzero": self.nonzero,
            "failures": self.failures,
        })
    }
}

/// Compute the invariant of every positive root in the set against one
/// family and report the nonzero ones.  Per-root failures are flagged; the
/// scan completes.
pub fn finiteness_scan(
    lattice: &K3Lattice,
    family: &SphereFamily,
    roots: &RootSet,
    opts: &DegreeOptions,
) -> Result<ScanReport> {
    finiteness_scan_impl(lattice, family, roots, opts, true)
}

/// Sequential twin of [`finiteness_scan`]; reference path for the benches.
pub fn finiteness_scan_seq(
    lattice: &K3Lattice,
    family: &SphereFamily,
    roots: &RootSet,
    opts: &DegreeOptions,
) -> Result<ScanReport> {
    finiteness_scan_impl(lattice, family, roots, opts, false)
}

fn finiteness_scan_impl(
    lattice: &K3Lattice,
    family: &SphereFamily,
    roots: &RootSet,
    opts: &DegreeOptions,
    parallel: bool,
) -> Result<ScanReport> {
    if !roots.is_empty() && roots.splitting_vector.is_none() {
        return Err(Error::Precondition(
            "root set carries no splitting; scan targets the positive half".into(),
        ));
    }
    let plus: Vec<LatticeVector> = roots.delta_plus().copied().collect();
    let results: Vec<Result<SwEntry>> = exec::map_indexed(plus.len(), parallel, |i| {
        sw_of_family_impl(lattice, &plus[i], family, opts, parallel)
    });
    let mut nonzero = Vec::new();
    let mut failures = Vec::new();
    for (root, r) in plus.iter().zip(results) {
        match r {
            Ok(entry) if entry.value != 0 => nonzero.push((*root, entry.value)),
            Ok(_) => {}
            Err(e) => failures.push((*root, e.to_string())),
        }
    }
    Ok(ScanReport {
        delta: *family.delta(),
        epsilon: family.epsilon,
        checked: plus.len(),
        nonzero,
        failures,
    })
}

/// Both degree runs of a reflection check, and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct KappaFlip {
    pub class: LatticeVector,
    pub original: DegreePair,
    pub reflected: DegreePair,
    /// Whether composing with the orientation-reversing reflection negated
    /// the degree, as the vanishing argument requires.
    pub flipped: bool,
}

fn mat3_apply(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

/// Verify that an orientation-reversing orthogonal reflection negates the
/// wall-section degree of `c` (the mechanism forcing the invariant of
/// crossed-wall-free classes to vanish).
pub fn kappa_flip_check(
    lattice: &K3Lattice,
    family: &SphereFamily,
    c: &LatticeVector,
    reflection: &[[f64; 3]; 3],
    opts: &DegreeOptions,
) -> Result<KappaFlip> {
    // exact-ish orthogonality and det -1
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| reflection[k][i] * reflection[k][j]).sum();
            if (dot - f64::from(i == j)).abs() > 1e-9 {
                return Err(Error::Input("reflection matrix is not orthogonal".into()));
            }
        }
    }
    let det = vec3::det(
        [reflection[0][0], reflection[1][0], reflection[2][0]],
        [reflection[0][1], reflection[1][1], reflection[2][1]],
        [reflection[0][2], reflection[1][2], reflection[2][2]],
    );
    if (det + 1.0).abs() > 1e-9 {
        return Err(Error::Input(format!(
            "reflection must reverse orientation; determinant is {det}"
        )));
    }
    let section = family.wall_section(lattice, c);
    let grid = SphereGrid::new(opts.level_start);
    let (margin, _) = section.min_on_grid(&grid);
    if margin <= tol::WALL_FLOOR {
        return Err(Error::Wall {
            alpha: Box::new(*c),
            min: margin,
        });
    }
    let s1 = section.clone();
    let original = degree(&SphereMap::new(move |x| s1.eval(x), margin), opts)?;
    let r = *reflection;
    let reflected = degree(
        &SphereMap::new(move |x| mat3_apply(&r, section.eval(x)), margin),
        opts,
    )?;
    let flipped = reflected.degree == -original.degree;
    Ok(KappaFlip {
        class: *c,
        original,
        reflected,
        flipped,
    })
}

/// Result of transporting a computed matrix through a lattice isometry and
/// recomputing it from scratch.
#[derive(Debug, Clone, Serialize)]
pub struct EquivarianceVerdict {
    /// Images of the deltas, normalized into the positive half.
    pub transported_deltas: Vec<LatticeVector>,
    pub transported_alphas: Vec<LatticeVector>,
    /// +1 when the image was already positive, -1 when it was negated.
    pub delta_signs: Vec<i64>,
    pub alpha_signs: Vec<i64>,
    /// Entries recomputed over transported deltas, alphas and frames.
    pub recomputed: Vec<Vec<Option<i64>>>,
    /// `alpha_sign * delta_sign * original entry`.
    pub expected: Vec<Vec<Option<i64>>>,
    pub pass: bool,
}

/// Transport a root into the positive half, recording the sign used.
fn normalize_image(
    lattice: &K3Lattice,
    roots: &RootSet,
    image: LatticeVector,
) -> Result<(LatticeVector, i64)> {
    if !roots.contains(&image) {
        return Err(Error::Input(format!(
            "isometry carries {image:?} outside the enumerated set; enlarge the bound"
        )));
    }
    if positive_side(lattice, roots, &image)? {
        Ok((image, 1))
    } else {
        Ok((image.neg(), -1))
    }
}

/// Recompute an invariant matrix with every input (deltas, alphas, base
/// frames) transported by an isometry, and check the entries transform by
/// the signed permutation induced on positive roots.
pub fn isometry_equivariance_check(
    lattice: &K3Lattice,
    iso: &[[i64; DIM]; DIM],
    matrix: &SwMatrix,
    roots: &RootSet,
    opts: &SwOptions,
) -> Result<EquivarianceVerdict> {
    if !lattice.is_isometry(iso) {
        return Err(Error::Input(
            "matrix does not preserve the intersection form exactly".into(),
        ));
    }
    let mut transported_alphas = Vec::with_capacity(matrix.alphas.len());
    let mut alpha_signs = Vec::with_capacity(matrix.alphas.len());
    for a in &matrix.alphas {
        let (img, sign) = normalize_image(lattice, roots, lattice.apply_matrix(iso, a))?;
        transported_alphas.push(img);
        alpha_signs.push(sign);
    }
    let mut transported_deltas = Vec::with_capacity(matrix.deltas.len());
    let mut delta_signs = Vec::with_capacity(matrix.deltas.len());
    let mut families = Vec::with_capacity(matrix.deltas.len());
    for (j, d) in matrix.deltas.iter().enumerate() {
        let (img, sign) = normalize_image(lattice, roots, lattice.apply_matrix(iso, d))?;
        // transport the original base frame and re-verify it
        let theta = std::array::from_fn(|i| {
            lattice.apply_matrix_real(iso, &matrix.base_points[j].frame.theta[i])
        });
        let base = BasePoint::from_frame(lattice, theta, img, roots, &BaseOptions::default())?;
        let family = SphereFamily::new(base, matrix.family_certificates[j].epsilon)?;
        transported_deltas.push(img);
        delta_signs.push(sign);
        families.push(family);
    }
    let (na, nd) = (matrix.alphas.len(), matrix.deltas.len());
    let flat: Vec<Option<i64>> = exec::map_indexed(na * nd, true, |k| {
        let (i, j) = (k / nd.max(1), k % nd.max(1));
        sw_of_family(lattice, &transported_alphas[i], &families[j], &opts.degree)
            .ok()
            .map(|e| e.value)
    });
    let mut recomputed = vec![vec![None; nd]; na];
    for (k, v) in flat.into_iter().enumerate() {
        recomputed[k / nd.max(1)][k % nd.max(1)] = v;
    }
    let expected: Vec<Vec<Option<i64>>> = (0..na)
        .map(|i| {
            (0..nd)
                .map(|j| matrix.entries[i][j].map(|e| alpha_signs[i] * delta_signs[j] * e))
                .collect()
        })
        .collect();
    let pass = recomputed.iter().flatten().all(|e| e.is_some()) && recomputed == expected;
    Ok(EquivarianceVerdict {
        transported_deltas,
        transported_alphas,
        delta_signs,
        alpha_signs,
        recomputed,
        expected,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Block;
    use crate::roots::{enumerate_and_split, EnumOptions};

    fn setup() -> (K3Lattice, RootSet) {
        let lat = K3Lattice::new();
        let roots = enumerate_and_split(&lat, &EnumOptions::default()).unwrap();
        (lat, roots)
    }

    /// First positive root supported on a single given block.
    fn positive_root_in(roots: &RootSet, block: Block) -> LatticeVector {
        *roots
            .delta_plus()
            .find(|r| r.support() == vec![block])
            .expect("block has positive roots")
    }

    fn quick_opts() -> SwOptions {
        SwOptions {
            family: FamilyOptions {
                grid_level: 3,
                ..Default::default()
            },
            degree: DegreeOptions::default(),
        }
    }

    fn family_over(
        lat: &K3Lattice,
        roots: &RootSet,
        delta: &LatticeVector,
        seed: u64,
    ) -> SphereFamily {
        let base = construct_base_point(lat, delta, roots, seed, &BaseOptions::default()).unwrap();
        SphereFamily::certified(lat, base, roots, &quick_opts().family)
            .unwrap()
            .0
    }

    #[test]
    fn dimension_formula_examples() {
        let lat = K3Lattice::new();
        let root = crate::lattice::hyperbolic_root(1);
        assert_eq!(expected_dimension(&lat, &root, 3, 0, -16).unwrap(), -2);
        assert_eq!(
            expected_dimension(&lat, &LatticeVector::zero(), 3, 0, -16).unwrap(),
            0
        );
    }

    #[test]
    fn dimension_equals_square_for_random_classes() {
        let lat = K3Lattice::new();
        let mut state = 0xD1CEu64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 40) % 7) as i64 - 3
        };
        for _ in 0..100 {
            let u = LatticeVector(std::array::from_fn(|_| next()));
            assert_eq!(
                expected_dimension(&lat, &u, 3, 0, -16).unwrap(),
                lat.norm_sq(&u)
            );
        }
    }

    #[test]
    fn dimension_divisibility_probe() {
        let lat = K3Lattice::new();
        let root = crate::lattice::hyperbolic_root(1);
        assert!(matches!(
            expected_dimension(&lat, &root, 3, 0, -15),
            Err(Error::Convention(_))
        ));
    }

    #[test]
    fn validity_constant_table() {
        assert_eq!(validity_constant(-16), -8);
        assert_eq!(validity_constant(-8), 0);
        assert_eq!(validity_constant(0), 8);
    }

    #[test]
    fn chamber_independence_predicate() {
        assert!(!chamber_independent(3, 1)); // the critical case computed here
        assert!(chamber_independent(4, 1));
        assert!(chamber_independent(3, 2));
    }

    #[test]
    fn conjugation_sign_table() {
        assert_eq!(conjugation_sign(3, 0, 1).unwrap(), -1);
        assert_eq!(conjugation_sign(5, 0, 1).unwrap(), 1);
        assert!(matches!(
            conjugation_sign(3, 1, 1),
            Err(Error::Convention(_))
        ));
    }

    #[test]
    fn spin_c_class_invariants() {
        let (lat, roots) = setup();
        let d = positive_root_in(&roots, Block::U1);
        let class = SpinCClass::new(&lat, d).unwrap();
        assert_eq!(class.c1, d.scale(2));
        assert_eq!(class.dimension, -2);
        assert!(class.is_valid());
        let off = SpinCClass::new(&lat, LatticeVector::basis(0)).unwrap();
        assert_eq!(off.dimension, 0);
        assert!(!off.is_valid());
    }

    #[test]
    fn invariant_is_one_for_the_defining_root_and_zero_otherwise() {
        let (lat, roots) = setup();
        let delta = positive_root_in(&roots, Block::U1);
        let fam = family_over(&lat, &roots, &delta, 11);
        let opts = DegreeOptions::default();
        let own = sw_of_family(&lat, &delta, &fam, &opts).unwrap();
        assert_eq!(own.value, 1);
        assert!(own.pair.kronecker.agreement && own.pair.preimage.agreement);
        assert_eq!(own.analytic_input, ANALYTIC_INPUT);
        let other = positive_root_in(&roots, Block::U2);
        assert_eq!(sw_of_family(&lat, &other, &fam, &opts).unwrap().value, 0);
        let e8 = positive_root_in(&roots, Block::E8A);
        assert_eq!(sw_of_family(&lat, &e8, &fam, &opts).unwrap().value, 0);
    }

    #[test]
    fn invariant_is_odd_under_conjugation() {
        let (lat, roots) = setup();
        let delta = positive_root_in(&roots, Block::U2);
        let fam = family_over(&lat, &roots, &delta, 3);
        let opts = DegreeOptions::default();
        assert_eq!(
            sw_of_family(&lat, &delta.neg(), &fam, &opts).unwrap().value,
            -1
        );
        let other = positive_root_in(&roots, Block::E8B);
        let plus = sw_of_family(&lat, &other, &fam, &opts).unwrap().value;
        let minus = sw_of_family(&lat, &other.neg(), &fam, &opts).unwrap().value;
        assert_eq!(plus, -minus);
    }

    #[test]
    fn invariant_rejects_non_root_classes() {
        let (lat, roots) = setup();
        let delta = positive_root_in(&roots, Block::U1);
        let fam = family_over(&lat, &roots, &delta, 19);
        let opts = DegreeOptions::default();
        assert!(matches!(
            sw_of_family(&lat, &LatticeVector::basis(0), &fam, &opts),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn small_matrix_is_the_identity_pattern() {
        let (lat, roots) = setup();
        let picks = [
            positive_root_in(&roots, Block::U1),
            positive_root_in(&roots, Block::U3),
            positive_root_in(&roots, Block::E8A),
        ];
        let m = sw_matrix(&lat, &picks, &picks, &roots, 5, &quick_opts()).unwrap();
        assert!(m.failures.is_empty());
        assert!(m.pattern_ok());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.entries[i][j], Some(i64::from(i == j)));
                let cert = m.certificates[i][j].as_ref().unwrap();
                assert!(cert.pair.kronecker.agreement);
            }
        }
        // serialization round-trips through the documented top-level keys
        let json = m.to_json();
        for key in [
            "normalization",
            "deltas",
            "alphas",
            "entries",
            "certificates",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().ends_with(",1,0,0"));
    }

    #[test]
    fn mirrored_alphas_negate_the_identity_block() {
        let (lat, roots) = setup();
        let deltas = [
            positive_root_in(&roots, Block::U1),
            positive_root_in(&roots, Block::U2),
        ];
        let alphas = [deltas[0], deltas[1], deltas[0].neg(), deltas[1].neg()];
        let m = sw_matrix(&lat, &deltas, &alphas, &roots, 23, &quick_opts()).unwrap();
        assert!(m.failures.is_empty());
        assert!(m.pattern_ok());
        assert_eq!(m.entries[2][0], Some(-1));
        assert_eq!(m.entries[3][1], Some(-1));
        assert_eq!(m.entries[2][1], Some(0));
    }

    #[test]
    fn empty_alpha_list_gives_an_empty_matrix() {
        let (lat, roots) = setup();
        let deltas = [positive_root_in(&roots, Block::U1)];
        let m = sw_matrix(&lat, &deltas, &[], &roots, 1, &quick_opts()).unwrap();
        assert!(m.entries.is_empty());
        assert!(m.pattern_ok());
    }

    #[test]
    fn matrix_rejects_negative_deltas_and_non_roots() {
        let (lat, roots) = setup();
        let d = positive_root_in(&roots, Block::U1);
        assert!(matches!(
            sw_matrix(&lat, &[d.neg()], &[d], &roots, 1, &quick_opts()),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            sw_matrix(
                &lat,
                &[LatticeVector::basis(0)],
                &[d],
                &roots,
                1,
                &quick_opts()
            ),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn scan_of_a_small_positive_set_finds_only_the_defining_root() {
        let (lat, roots) = setup();
        let delta = positive_root_in(&roots, Block::U1);
        let fam = family_over(&lat, &roots, &delta, 31);
        // a hand-restricted subset keeps the unit test quick; the full-width
        // scan runs in the acceptance gate
        let mut picks: Vec<LatticeVector> = roots.delta_plus().take(8).copied().collect();
        if !picks.contains(&delta) {
            picks.push(delta);
        }
        let mut subset = roots.clone();
        subset.roots = picks.clone();
        subset.roots.extend(picks.iter().map(|r| r.neg()));
        subset.roots.sort();
        subset.positive = subset
            .roots
            .iter()
            .enumerate()
            .filter(|(_, r)| positive_side(&lat, &roots, r).unwrap())
            .map(|(i, _)| i)
            .collect();
        let report = finiteness_scan(&lat, &fam, &subset, &DegreeOptions::default()).unwrap();
        assert_eq!(report.checked, picks.len());
        assert!(report.failures.is_empty());
        assert_eq!(report.nonzero, vec![(delta, 1)]);
        let seq = finiteness_scan_seq(&lat, &fam, &subset, &DegreeOptions::default()).unwrap();
        assert_eq!(seq.nonzero, report.nonzero);
        // scanning the mirrored half instead finds the mirrored entry
        let flipped =
            crate::roots::split_roots(&lat, subset.clone(), &roots.splitting_vector.unwrap().neg())
                .unwrap();
        let report = finiteness_scan(&lat, &fam, &flipped, &DegreeOptions::default()).unwrap();
        assert_eq!(report.nonzero, vec![(delta.neg(), -1)]);
    }

    #[test]
    fn scan_of_an_empty_set_is_empty() {
        let (lat, roots) = setup();
        let delta = positive_root_in(&roots, Block::U3);
        let fam = family_over(&lat, &roots, &delta, 41);
        let empty = RootSet {
            roots: Vec::new(),
            bound: 0.0,
            splitting_vector: None,
            positive: Vec::new(),
        };
        let report = finiteness_scan(&lat, &fam, &empty, &DegreeOptions::default()).unwrap();
        assert_eq!(report.checked, 0);
        assert!(report.nonzero.is_empty());
    }

    #[test]
    fn reflection_flips_the_defining_degree() {
        let (lat, roots) = setup();
        let delta = positive_root_in(&roots, Block::U1);
        let fam = family_over(&lat, &roots, &delta, 13);
        let refl = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        let opts = DegreeOptions::default();
        let verdict = kappa_flip_check(&lat, &fam, &delta, &refl, &opts).unwrap();
        assert!(verdict.flipped);
        assert_eq!(verdict.original.degree, 1);
        assert_eq!(verdict.reflected.degree, -1);
        // a zero-degree class flips to zero
        let other = positive_root_in(&roots, Block::U2);
        let verdict = kappa_flip_check(&lat, &fam, &other, &refl, &opts).unwrap();
        assert!(verdict.flipped);
        assert_eq!(verdict.original.degree, 0);
        assert_eq!(verdict.reflected.degree, 0);
    }

    #[test]
    fn reflection_input_is_validated() {
        let (lat, roots) = setup();
        let delta = positive_root_in(&roots, Block::U1);
        let fam = family_over(&lat, &roots, &delta, 17);
        let opts = DegreeOptions::default();
        let rotation = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            kappa_flip_check(&lat, &fam, &delta, &rotation, &opts),
            Err(Error::Input(_))
        ));
        let skew = [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        assert!(matches!(
            kappa_flip_check(&lat, &fam, &delta, &skew, &opts),
            Err(Error::Input(_))
        ));
    }

    fn identity_iso() -> [[i64; DIM]; DIM] {
        let mut m = [[0i64; DIM]; DIM];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1;
        }
        m
    }

    #[test]
    fn equivariance_under_the_identity() {
        let (lat, roots) = setup();
        let picks = [
            positive_root_in(&roots, Block::U1),
            positive_root_in(&roots, Block::U2),
        ];
        let m = sw_matrix(&lat, &picks, &picks, &roots, 29, &quick_opts()).unwrap();
        let verdict =
            isometry_equivariance_check(&lat, &identity_iso(), &m, &roots, &quick_opts()).unwrap();
        assert!(verdict.pass);
        assert_eq!(verdict.transported_deltas, picks.to_vec());
        assert_eq!(verdict.delta_signs, vec![1, 1]);
        assert_eq!(verdict.recomputed, m.entries);
    }

    #[test]
    fn equivariance_under_a_block_swap_and_a_negation() {
        let (lat, roots) = setup();
        let picks = [
            positive_root_in(&roots, Block::U1),
            positive_root_in(&roots, Block::U2),
        ];
        let m = sw_matrix(&lat, &picks, &picks, &roots, 37, &quick_opts()).unwrap();
        assert!(m.pattern_ok());
        // swap the first two hyperbolic blocks
        let mut swap = identity_iso();
        for k in 0..2 {
            swap[k][k] = 0;
            swap[k + 2][k + 2] = 0;
            swap[k][k + 2] = 1;
            swap[k + 2][k] = 1;
        }
        let verdict = isometry_equivariance_check(&lat, &swap, &m, &roots, &quick_opts()).unwrap();
        assert!(verdict.pass, "swap verdict: {verdict:?}");
        // negate the first hyperbolic block: delta_1 -> -delta_1 crosses
        // to the negative half, so the sign rule engages
        let mut negate = identity_iso();
        negate[0][0] = -1;
        negate[1][1] = -1;
        let verdict =
            isometry_equivariance_check(&lat, &negate, &m, &roots, &quick_opts()).unwrap();
        assert!(verdict.pass, "negation verdict: {verdict:?}");
        assert!(verdict.delta_signs.contains(&-1));
    }

    #[test]
    fn equivariance_rejects_non_isometries() {
        let (lat, roots) = setup();
        let picks = [positive_root_in(&roots, Block::U1)];
        let m = sw_matrix(&lat, &picks, &picks, &roots, 43, &quick_opts()).unwrap();
        let mut shear = identity_iso();
        shear[0][1] = 1;
        shear[1][0] = 1;
        shear[1][1] = 0;
        shear[0][0] = 0;
        shear[0][0] = 1; // a genuinely non-orthogonal tweak
        assert!(matches!(
            isometry_equivariance_check(&lat, &shear, &m, &roots, &quick_opts()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn entries_are_stable_under_bound_enlargement() {
        let lat = K3Lattice::new();
        let small = enumerate_and_split(&lat, &EnumOptions::default()).unwrap();
        let delta = positive_root_in(&small, Block::U1);
        let alpha = positive_root_in(&small, Block::E8A);
        let opts = DegreeOptions::default();
        let fam_small = family_over(&lat, &small, &delta, 47);
        let own_small = sw_of_family(&lat, &delta, &fam_small, &opts).unwrap().value;
        let off_small = sw_of_family(&lat, &alpha, &fam_small, &opts).unwrap().value;
        // a strictly larger enumeration radius pulls in mixed-support roots
        let large = enumerate_and_split(
            &lat,
            &EnumOptions {
                max_vectors: 100_000,
                ..EnumOptions::with_bound(1.8)
            },
        )
        .unwrap();
        assert!(large.len() > small.len());
        let fam_large = family_over(&lat, &large, &delta, 47);
        assert_eq!(
            sw_of_family(&lat, &delta, &fam_large, &opts).unwrap().value,
            own_small
        );
        assert_eq!(
            sw_of_family(&lat, &alpha, &fam_large, &opts).unwrap().value,
            off_small
        );
        assert_eq!(own_small, 1);
        assert_eq!(off_small, 0);
    }
}
