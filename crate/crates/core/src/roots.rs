//! Bounded enumeration of the `(-2)`-classes (roots) and the positive /
//! negative splitting of the root system.
//!
//! The full root system of the K3 lattice is infinite; everything here is
//! relative to a radius in the canonical positive-definite reference form.
//! Within a radius the block decomposition makes enumeration cheap: each
//! block contributes vectors grouped by their (reference norm, intersection
//! norm) shell, and full-lattice roots are assembled by walking shell
//! combinations under a shared norm budget while steering the total
//! intersection square to exactly `-2`.  Candidate counts are known *before*
//! any vector is materialized, which is what makes the cap check and the
//! count-only entry point exact.
//!
//! # Determinism
//!
//! Output is always sorted lexicographically on coordinates, regardless of
//! how the assembly work was partitioned across threads.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::lattice::{Block, K3Lattice, LatticeVector, DIM, E8_CARTAN};
use crate::linalg;

/// Options for root enumeration.
#[derive(Debug, Clone)]
pub struct EnumOptions {
    /// Radius in the reference norm: a vector qualifies when its reference
    /// norm squared is at most `bound^2`.
    pub bound: f64,
    /// Hard cap on the number of emitted vectors.
    pub max_vectors: u64,
    /// Restrict enumeration to these blocks (all five when `None`).
    pub blocks: Option<Vec<Block>>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            bound: 1.5,
            max_vectors: 1_000_000,
            blocks: None,
        }
    }
}

impl EnumOptions {
    pub fn with_bound(bound: f64) -> Self {
        EnumOptions {
            bound,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        // a zero radius is a legitimate (empty) enumeration; only negative
        // or non-finite radii are malformed
        if !self.bound.is_finite() || self.bound < 0.0 {
            return Err(Error::Input(format!(
                "enumeration bound must be non-negative and finite, got {}",
                self.bound
            )));
        }
        Ok(())
    }

    /// Largest integer value of the reference form inside the radius.
    fn budget(&self) -> i64 {
        let b2 = self.bound * self.bound;
        let mut q = b2.floor() as i64;
        // guard against the floor landing one too high through rounding
        while q > 0 && q as f64 > b2 {
            q -= 1;
        }
        q
    }

    fn active_blocks(&self) -> Vec<Block> {
        match &self.blocks {
            None => Block::ALL.to_vec(),
            Some(list) => {
                let mut seen: Vec<Block> = Vec::new();
                for b in Block::ALL {
                    if list.contains(&b) && !seen.contains(&b) {
                        seen.push(b);
                    }
                }
                seen
            }
        }
    }
}

/// The enumerated roots inside a radius, optionally with a chamber splitting.
#[derive(Debug, Clone, Serialize)]
pub struct RootSet {
    /// All roots within the radius, sorted lexicographically.
    pub roots: Vec<LatticeVector>,
    /// The enumeration radius (reference norm).
    pub bound: f64,
    /// Splitting vector defining the positive side, when a splitting has
    /// been computed.
    pub splitting_vector: Option<LatticeVector>,
    /// Indices (into `roots`) of the positive side.
    pub positive: Vec<usize>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Membership test; valid because `roots` is sorted.
    pub fn contains(&self, v: &LatticeVector) -> bool {
        self.roots.binary_search(v).is_ok()
    }

    /// Iterator over the positive roots (requires a splitting).
    pub fn delta_plus(&self) -> impl Iterator<Item = &LatticeVector> {
        self.positive.iter().map(|&i| &self.roots[i])
    }

    /// Serialize in the root-set interchange layout.
    pub fn to_json(&self, lattice: &K3Lattice) -> serde_json::Value {
        serde_json::json!({
            "basis": lattice.labels(),
            "gram": lattice.gram().iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
            "roots": self.roots,
            "bound": self.bound,
            "v": self.splitting_vector,
            "delta_plus_indices": self.positive,
        })
    }
}

// ---------------------------------------------------------------------------
// per-block shells
// ---------------------------------------------------------------------------

/// Vectors of one block sharing a (reference norm, intersection norm) pair.
struct ShellGroup {
    /// Reference norm squared (non-negative integer).
    e: i64,
    /// Intersection norm squared.
    g: i64,
    vectors: Vec<Vec<i64>>,
}

/// All shell groups of `block` with reference norm squared at most `budget`,
/// sorted by `(e, g)` with lexicographically sorted members.
fn block_shells(block: Block, budget: i64) -> Vec<ShellGroup> {
    let mut groups: std::collections::BTreeMap<(i64, i64), Vec<Vec<i64>>> =
        std::collections::BTreeMap::new();
    if block.is_hyperbolic() {
        let m_max = (budget as f64).sqrt().floor() as i64;
        for m in -m_max..=m_max {
            for n in -m_max..=m_max {
                let e = m * m + n * n;
                if e <= budget {
                    groups.entry((e, 2 * m * n)).or_default().push(vec![m, n]);
                }
            }
        }
    } else {
        // Intersection norm of an E8(-1) block vector is minus its reference
        // norm, so each reference shell is a single group.
        for v in enumerate_e8_ball(budget) {
            let e = e8_cartan_norm(&v);
            groups.entry((e, -e)).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .map(|((e, g), mut vectors)| {
            vectors.sort();
            ShellGroup { e, g, vectors }
        })
        .collect()
}

fn e8_cartan_norm(v: &[i64]) -> i64 {
    let mut acc = 0i64;
    for i in 0..8 {
        if v[i] == 0 {
            continue;
        }
        for j in 0..8 {
            acc += v[i] * E8_CARTAN[i][j] * v[j];
        }
    }
    acc
}

/// All integer vectors with E8 Cartan norm at most `budget`, by bounded
/// recursion on a Cholesky factorization (floating bounds with slack, exact
/// final filter).
fn enumerate_e8_ball(budget: i64) -> Vec<Vec<i64>> {
    if budget < 0 {
        return Vec::new();
    }
    let rows: Vec<Vec<f64>> = E8_CARTAN
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect();
    let l = linalg::cholesky(&rows).expect("E8 Cartan matrix is positive definite");
    // upper-triangular factor R with q(x) = |R x|^2
    let mut r = vec![vec![0.0f64; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            r[j][i] = l[i][j];
        }
    }
    let mut out = Vec::new();
    let mut x = [0i64; 8];
    let slack = 1e-9;
    fn recurse(
        r: &[Vec<f64>],
        budget: i64,
        slack: f64,
        level: usize,
        remaining: f64,
        x: &mut [i64; 8],
        out: &mut Vec<Vec<i64>>,
    ) {
        let mut t = 0.0;
        for j in level + 1..8 {
            t += r[level][j] * x[j] as f64;
        }
        let rad = remaining.max(0.0).sqrt();
        let lo = ((-rad - t) / r[level][level] - slack).ceil() as i64;
        let hi = ((rad - t) / r[level][level] + slack).floor() as i64;
        for xi in lo..=hi {
            x[level] = xi;
            let term = r[level][level] * xi as f64 + t;
            let rem = remaining - term * term;
            if level == 0 {
                if e8_cartan_norm(x) <= budget {
                    out.push(x.to_vec());
                }
            } else if rem >= -slack {
                recurse(r, budget, slack, level - 1, rem, x, out);
            }
        }
        x[level] = 0;
    }
    recurse(
        &r,
        budget,
        slack,
        7,
        budget as f64 + slack,
        &mut x,
        &mut out,
    );
    out
}

// ---------------------------------------------------------------------------
// full-lattice assembly
// ---------------------------------------------------------------------------

/// One admissible combination of shell groups across the active blocks.
struct Leaf {
    /// Group index chosen for each active block.
    choice: Vec<usize>,
    /// Product of group sizes: how many vectors this leaf materializes.
    count: u64,
}

/// Depth-first state for [`admissible_leaves`]: the per-block shell groups
/// being combined, the pruning table, and the accumulators.
struct LeafSearch<'a> {
    shells: &'a [Vec<ShellGroup>],
    /// Can blocks from `level` onward still reach a positive square?
    /// Hyperbolic shells reach any square in `[-e, e]`; E8(-1) only `[-e, 0]`.
    has_hyperbolic_from: Vec<bool>,
    choice: Vec<usize>,
    leaves: Vec<Leaf>,
}

impl LeafSearch<'_> {
    fn recurse(&mut self, level: usize, budget: i64, need: i64, count: u64) {
        if level == self.shells.len() {
            if need == 0 {
                self.leaves.push(Leaf {
                    choice: self.choice.clone(),
                    count,
                });
            }
            return;
        }
        let max_reach = if self.has_hyperbolic_from[level] {
            budget
        } else {
            0
        };
        if need > max_reach || need < -budget {
            return;
        }
        for gi in 0..self.shells[level].len() {
            let (e, g, size) = {
                let group = &self.shells[level][gi];
                (group.e, group.g, group.vectors.len() as u64)
            };
            if e > budget {
                break; // groups sorted by e
            }
            self.choice[level] = gi;
            self.recurse(level + 1, budget - e, need - g, count * size);
        }
    }
}

/// Walk shell-group combinations with a shared reference-norm budget,
/// keeping only those whose intersection squares sum to exactly `-2`.
fn admissible_leaves(shells: &[Vec<ShellGroup>], blocks: &[Block], budget: i64) -> Vec<Leaf> {
    let mut search = LeafSearch {
        shells,
        has_hyperbolic_from: (0..=blocks.len())
            .map(|level| blocks[level..].iter().any(|b| b.is_hyperbolic()))
            .collect(),
        choice: vec![0usize; blocks.len()],
        leaves: Vec::new(),
    };
    search.recurse(0, budget, -2, 1);
    search.leaves
}

/// Enumeration plan: everything needed to either count or materialize.
struct Prepared {
    blocks: Vec<Block>,
    shells: Vec<Vec<ShellGroup>>,
    leaves: Vec<Leaf>,
    total: u64,
}

fn prepare(opts: &EnumOptions) -> Result<Prepared> {
    opts.validate()?;
    let blocks = opts.active_blocks();
    let budget = opts.budget();
    let shells: Vec<Vec<ShellGroup>> = blocks.iter().map(|&b| block_shells(b, budget)).collect();
    let leaves = admissible_leaves(&shells, &blocks, budget);
    let total: u64 = leaves.iter().map(|l| l.count).sum();
    Ok(Prepared {
        blocks,
        shells,
        leaves,
        total,
    })
}

/// Number of roots inside the radius, computed without materializing any
/// vector (counts multiply across blocks).
pub fn count_roots(opts: &EnumOptions) -> Result<u64> {
    Ok(prepare(opts)?.total)
}

/// Enumerate all roots inside the radius.  Fails with a resource error when
/// the (exactly pre-computed) output size exceeds `opts.max_vectors`.
pub fn enumerate_roots(lattice: &K3Lattice, opts: &EnumOptions) -> Result<RootSet> {
    enumerate_impl(lattice, opts, true)
}

/// Sequential twin of [`enumerate_roots`]; reference path for the benches.
pub fn enumerate_roots_seq(lattice: &K3Lattice, opts: &EnumOptions) -> Result<RootSet> {
    enumerate_impl(lattice, opts, false)
}

fn enumerate_impl(lattice: &K3Lattice, opts: &EnumOptions, parallel: bool) -> Result<RootSet> {
    let Prepared {
        blocks,
        shells,
        leaves,
        total,
    } = prepare(opts)?;
    if total > opts.max_vectors {
        return Err(Error::Resource {
            needed: total,
            cap: opts.max_vectors,
        });
    }
    let chunks: Vec<Vec<LatticeVector>> = exec::map_indexed(leaves.len(), parallel, |li| {
        let leaf = &leaves[li];
        let groups: Vec<&ShellGroup> = leaf
            .choice
            .iter()
            .zip(&shells)
            .map(|(&gi, s)| &s[gi])
            .collect();
        let mut out = Vec::with_capacity(leaf.count as usize);
        let mut coords = [0i64; DIM];
        cartesian(&groups, &blocks, 0, &mut coords, &mut out);
        out
    });
    let mut roots: Vec<LatticeVector> = chunks.into_iter().flatten().collect();
    roots.sort();
    debug_assert!(roots.windows(2).all(|w| w[0] != w[1]));
    debug_assert!(roots.iter().all(|r| lattice.norm_sq(r) == -2));
    Ok(RootSet {
        roots,
        bound: opts.bound,
        splitting_vector: None,
        positive: Vec::new(),
    })
}

fn cartesian(
    groups: &[&ShellGroup],
    blocks: &[Block],
    level: usize,
    coords: &mut [i64; DIM],
    out: &mut Vec<LatticeVector>,
) {
    if level == groups.len() {
        out.push(LatticeVector(*coords));
        return;
    }
    let range = blocks[level].range();
    for v in &groups[level].vectors {
        coords[range.clone()].copy_from_slice(v);
        cartesian(groups, blocks, level + 1, coords, out);
    }
    for slot in &mut coords[range] {
        *slot = 0;
    }
}

// ---------------------------------------------------------------------------
// generic enumeration under a caller-supplied reference form
// ---------------------------------------------------------------------------

/// Enumerate roots using an arbitrary positive-definite integer reference
/// form, by bounded recursion over all 22 coordinates.  Slower than the
/// blockwise path but makes no structural assumption; it doubles as an
/// independent cross-check of the default enumeration.
pub fn enumerate_roots_with_form(
    lattice: &K3Lattice,
    form: &[[i64; DIM]; DIM],
    opts: &EnumOptions,
) -> Result<RootSet> {
    opts.validate()?;
    for i in 0..DIM {
        for j in 0..DIM {
            if form[i][j] != form[j][i] {
                return Err(Error::Geometry("reference form must be symmetric".into()));
            }
        }
    }
    let rows: Vec<Vec<f64>> = form
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect();
    let l = linalg::cholesky(&rows)
        .ok_or_else(|| Error::Geometry("reference form must be positive definite".into()))?;
    let mut r = vec![vec![0.0f64; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            r[j][i] = l[i][j];
        }
    }
    let budget = opts.budget();
    let form_norm = |x: &[i64; DIM]| -> i64 {
        let mut acc = 0i64;
        for i in 0..DIM {
            if x[i] == 0 {
                continue;
            }
            for j in 0..DIM {
                acc += x[i] * form[i][j] * x[j];
            }
        }
        acc
    };
    let mut roots = Vec::new();
    let mut x = [0i64; DIM];
    let slack = 1e-7;
    let mut emitted: u64 = 0;
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        lattice: &K3Lattice,
        r: &[Vec<f64>],
        budget: i64,
        slack: f64,
        cap: u64,
        form_norm: &dyn Fn(&[i64; DIM]) -> i64,
        level: usize,
        remaining: f64,
        x: &mut [i64; DIM],
        roots: &mut Vec<LatticeVector>,
        emitted: &mut u64,
    ) -> Result<()> {
        let mut t = 0.0;
        for j in level + 1..DIM {
            t += r[level][j] * x[j] as f64;
        }
        let rad = remaining.max(0.0).sqrt();
        let lo = ((-rad - t) / r[level][level] - slack).ceil() as i64;
        let hi = ((rad - t) / r[level][level] + slack).floor() as i64;
        for xi in lo..=hi {
            x[level] = xi;
            let term = r[level][level] * xi as f64 + t;
            let rem = remaining - term * term;
            if level == 0 {
                let v = LatticeVector(*x);
                if form_norm(x) <= budget && lattice.norm_sq(&v) == -2 {
                    *emitted += 1;
                    if *emitted > cap {
                        return Err(Error::Resource {
                            needed: *emitted,
                            cap,
                        });
                    }
                    roots.push(v);
                }
            } else if rem >= -slack {
                recurse(
                    lattice,
                    r,
                    budget,
                    slack,
                    cap,
                    form_norm,
                    level - 1,
                    rem,
                    x,
                    roots,
                    emitted,
                )?;
            }
        }
        x[level] = 0;
        Ok(())
    }
    recurse(
        lattice,
        &r,
        budget,
        slack,
        opts.max_vectors,
        &form_norm,
        DIM - 1,
        budget as f64 + slack,
        &mut x,
        &mut roots,
        &mut emitted,
    )?;
    roots.sort();
    Ok(RootSet {
        roots,
        bound: opts.bound,
        splitting_vector: None,
        positive: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// splitting
// ---------------------------------------------------------------------------

/// Split a root set into positive and negative halves by the sign of the
/// pairing with `v`.  Errors on the first root pairing to zero.
pub fn split_roots(lattice: &K3Lattice, mut set: RootSet, v: &LatticeVector) -> Result<RootSet> {
    let gv = lattice.gram_apply(v);
    let mut positive = Vec::with_capacity(set.roots.len() / 2);
    for (i, root) in set.roots.iter().enumerate() {
        let mut s: i128 = 0;
        for j in 0..DIM {
            if root.0[j] != 0 {
                s += root.0[j] as i128 * gv[j] as i128;
            }
        }
        match s.cmp(&0) {
            std::cmp::Ordering::Greater => positive.push(i),
            std::cmp::Ordering::Less => {}
            std::cmp::Ordering::Equal => {
                return Err(Error::Splitting {
                    root: Box::new(*root),
                })
            }
        }
    }
    // roots come in +- pairs, so a valid splitting takes exactly half
    debug_assert_eq!(positive.len() * 2, set.roots.len());
    set.splitting_vector = Some(*v);
    set.positive = positive;
    Ok(set)
}

/// First 40 primes, the alphabet for default splitting functionals.
const PRIMES: [i64; 40] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173,
];

/// Deterministic default splitting vector for a root set: the integral class
/// whose pairing functional against the fixed basis is a window of distinct
/// primes (possible because the lattice is unimodular).  Successive windows
/// are tried until no enumerated root pairs to zero; in practice the first
/// or second window works for every radius used here.
pub fn default_splitting_vector(lattice: &K3Lattice, set: &RootSet) -> Result<LatticeVector> {
    let inv = lattice.gram_inverse();
    'window: for w in 0..=(PRIMES.len() - DIM) {
        // v = G^{-1} p  =>  <v, x> = p . x  for every integral x
        let mut v = [0i64; DIM];
        for (i, slot) in v.iter_mut().enumerate() {
            let mut acc = 0i64;
            for j in 0..DIM {
                acc += inv[i][j] * PRIMES[w + j];
            }
            *slot = acc;
        }
        let cand = LatticeVector(v);
        for root in &set.roots {
            let dot: i128 = (0..DIM)
                .map(|j| PRIMES[w + j] as i128 * root.0[j] as i128)
                .sum();
            if dot == 0 {
                continue 'window;
            }
        }
        return Ok(cand);
    }
    Err(Error::Splitting {
        root: Box::new(set.roots.first().copied().unwrap_or(LatticeVector::zero())),
    })
}

/// Enumerate and split in one step with the default splitting vector.
pub fn enumerate_and_split(lattice: &K3Lattice, opts: &EnumOptions) -> Result<RootSet> {
    let set = enumerate_roots(lattice, opts)?;
    if set.is_empty() {
        return Ok(set);
    }
    let v = default_splitting_vector(lattice, &set)?;
    split_roots(lattice, set, &v)
}
