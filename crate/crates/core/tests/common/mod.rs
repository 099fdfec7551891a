//! Independent counting oracles and small helpers shared by the integration
//! suites.
//!
//! Everything in this module re-derives its numbers by brute force from
//! first principles, deliberately avoiding the enumeration code under test:
//! the hyperbolic-plane counts come from a literal two-coordinate box scan,
//! and the octonionic-block counts come from a box scan of the standard
//! coordinate model (integer or half-integer coordinates with even sum),
//! which is a different presentation than the Cartan basis the library works
//! in.  Agreement between the two routes is therefore a genuine cross-check,
//! not a tautology.
#![allow(dead_code)]

use std::collections::BTreeMap;

use k3sw::{
    construct_base_point, enumerate_and_split, BaseOptions, BasePoint, Block, EnumOptions,
    FamilyOptions, K3Lattice, LatticeVector, RootSet, SphereFamily, SwOptions,
};

/// Histogram of a single block: (reference value, intersection value) ->
/// number of block vectors realizing that pair.  The zero vector is included
/// as the `(0, 0)` entry so that block histograms can be convolved.
pub type BlockHistogram = BTreeMap<(i64, i64), u64>;

/// Replicates the radius -> integer budget conversion (floor of the squared
/// bound, guarded against floating-point overshoot).
pub fn budget_of(bound: f64) -> i64 {
    let b2 = bound * bound;
    let mut q = b2.floor() as i64;
    while q > 0 && q as f64 > b2 {
        q -= 1;
    }
    q
}

/// Box scan of one hyperbolic plane.  A block vector `(m, n)` has
/// intersection value `2mn` and reference value `m^2 + n^2`, so scanning the
/// coordinate box `[-B, B]^2` with `B = floor(sqrt(budget))` is exhaustive.
pub fn u_histogram(budget: i64) -> BlockHistogram {
    let mut hist = BlockHistogram::new();
    if budget < 0 {
        return hist;
    }
    let b = (budget as f64).sqrt() as i64 + 1;
    for m in -b..=b {
        for n in -b..=b {
            let e = m * m + n * n;
            if e <= budget {
                *hist.entry((e, 2 * m * n)).or_insert(0) += 1;
            }
        }
    }
    hist
}

/// Box scan of one octonionic block via the standard coordinate model:
/// vectors with all-integer or all-half-integer coordinates and even
/// coordinate sum.  Working with doubled coordinates `d = 2v` turns the
/// membership test into integer arithmetic: the `d_i` share one parity, their
/// sum is divisible by 4, and the (positive-definite) norm is `sum(d^2)/4`.
/// Inside the block the intersection value is the negated norm and the
/// reference value is the norm itself.
pub fn e8_histogram(budget: i64) -> BlockHistogram {
    let mut hist = BlockHistogram::new();
    if budget < 0 {
        return hist;
    }
    let cap4 = 4 * budget;
    fn rec(
        depth: usize,
        parity: Option<i64>,
        acc_sq: i64,
        acc_sum: i64,
        cap4: i64,
        hist: &mut BlockHistogram,
    ) {
        if depth == 8 {
            if acc_sum.rem_euclid(4) == 0 {
                debug_assert_eq!(acc_sq % 4, 0, "same-parity coordinates force 4 | sum(d^2)");
                let n = acc_sq / 4;
                *hist.entry((n, -n)).or_insert(0) += 1;
            }
            return;
        }
        let d_max = ((cap4 - acc_sq) as f64).sqrt() as i64 + 1;
        for d in -d_max..=d_max {
            let sq = acc_sq + d * d;
            if sq > cap4 {
                continue;
            }
            if let Some(p) = parity {
                if d.rem_euclid(2) != p {
                    continue;
                }
            }
            rec(
                depth + 1,
                Some(d.rem_euclid(2)),
                sq,
                acc_sum + d,
                cap4,
                hist,
            );
        }
    }
    rec(0, None, 0, 0, cap4, &mut hist);
    hist
}

/// Number of vectors of a given norm in the standard octonionic model,
/// straight from the box scan.
pub fn e8_norm_count(n: i64) -> u64 {
    e8_histogram(n).get(&(n, -n)).copied().unwrap_or(0)
}

/// Number of square `-2` vectors a single block contributes inside the
/// budget (other blocks held at zero).
pub fn block_root_count(hist: &BlockHistogram, budget: i64) -> u64 {
    hist.iter()
        .filter(|&(&(e, g), _)| e <= budget && g == -2)
        .map(|(_, &c)| c)
        .sum()
}

/// Convolution of per-block histograms: the number of ways to pick one
/// vector from each block with total reference value within `budget` and
/// total intersection value exactly `need`.
pub fn convolve_count(blocks: &[&BlockHistogram], budget: i64, need: i64) -> u64 {
    match blocks.split_first() {
        None => u64::from(need == 0),
        Some((first, rest)) => {
            let mut total = 0;
            for (&(e, g), &cnt) in first.iter() {
                if e <= budget {
                    total += cnt * convolve_count(rest, budget - e, need - g);
                }
            }
            total
        }
    }
}

/// Full-lattice root count within the radius, derived purely from the two
/// box scans: three hyperbolic planes and two octonionic blocks, total
/// intersection value `-2`.
pub fn full_count_oracle(bound: f64) -> u64 {
    let budget = budget_of(bound);
    let u = u_histogram(budget);
    let e8 = e8_histogram(budget);
    convolve_count(&[&u, &u, &u, &e8, &e8], budget, -2)
}

/// Lattice plus default enumerated-and-split root set.
pub fn setup() -> (K3Lattice, RootSet) {
    let lattice = K3Lattice::new();
    let roots = enumerate_and_split(&lattice, &EnumOptions::default()).expect("default root set");
    (lattice, roots)
}

/// First positive root supported entirely on the given block.
pub fn positive_root_in(roots: &RootSet, block: Block) -> LatticeVector {
    *roots
        .delta_plus()
        .find(|r| r.support() == vec![block])
        .expect("block contributes a positive root")
}

/// Base point for `delta` with default construction options.
pub fn base_for(
    lattice: &K3Lattice,
    roots: &RootSet,
    delta: &LatticeVector,
    seed: u64,
) -> BasePoint {
    construct_base_point(lattice, delta, roots, seed, &BaseOptions::default())
        .expect("base point construction")
}

/// Certified family over `delta` at the given verification-grid level.
pub fn family_over(
    lattice: &K3Lattice,
    roots: &RootSet,
    delta: &LatticeVector,
    seed: u64,
    grid_level: u32,
) -> SphereFamily {
    let base = base_for(lattice, roots, delta, seed);
    let opts = FamilyOptions {
        grid_level,
        ..FamilyOptions::default()
    };
    SphereFamily::certified(lattice, base, roots, &opts)
        .expect("family certification")
        .0
}

/// Matrix options with a coarser certification grid, for the quick flows.
pub fn quick_sw_opts() -> SwOptions {
    SwOptions {
        family: FamilyOptions {
            grid_level: 3,
            ..FamilyOptions::default()
        },
        ..SwOptions::default()
    }
}
