//! Command-line front end.
//!
//! Every subcommand follows the same shape: merge configuration (defaults,
//! then an optional TOML file, then flags), run one pipeline computation,
//! write a self-describing payload to the configured output, and print a
//! one-line human summary.  Diagnostics and warnings go to standard error.
//!
//! Exit codes: `0` success (and, for `sw-matrix`, the sign pattern holding),
//! `1` malformed input or violated precondition, `2` resource exhaustion,
//! `3` computational inconsistency (vanishing sections, non-convergence,
//! method disagreement, failed verdicts).

mod config;

use std::io::Write as _;
use std::path::PathBuf;

use clap::{ArgAction, Parser, Subcommand};
use serde_json::json;

use config::{Format, RunConfig};
use k3sw::{
    construct_base_point, default_splitting_vector, enumerate_and_split, finiteness_scan,
    isometry_equivariance_check, kappa_flip_check, parse_vector, split_roots, sw_matrix,
    sw_of_family, Block, Error, FamilyCertificate, K3Lattice, LatticeVector, Result, RootSet,
    SphereFamily, DIM,
};

#[derive(Parser)]
#[command(
    name = "k3sw",
    version,
    about = "Certified wall-crossing invariants of sphere families over the even unimodular lattice of signature (3, 19)",
    after_help = "Lattice classes are written as 22 comma-separated integers in the fixed basis \
                  (three hyperbolic planes, then two rank-eight even blocks). Flags override the \
                  config file; the config file overrides built-in defaults."
)]
struct Cli {
    /// TOML configuration file (same field names as the embedded `config`)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Enumeration radius for the root system
    #[arg(long, global = true)]
    bound: Option<f64>,

    /// Starting family parameter
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Initial sphere-grid refinement level
    #[arg(long, global = true)]
    grid_level_start: Option<u32>,

    /// Finest sphere-grid refinement level
    #[arg(long, global = true)]
    grid_level_cap: Option<u32>,

    /// Frame orthonormalization tolerance
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Seed for every pseudo-random draw
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output path for the result payload (`-` for standard output)
    #[arg(long, global = true)]
    output: Option<String>,

    /// Payload format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Cap on the number of vectors the enumeration may materialize
    #[arg(long, global = true)]
    max_vectors: Option<u64>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate the root system inside the radius and split it into halves
    Roots {
        /// Restrict enumeration to these blocks (u1, u2, u3, e8a, e8b); repeatable
        #[arg(long = "block", action = ArgAction::Append)]
        blocks: Vec<String>,
    },
    /// Construct the certified generic base point for a root
    BasePoint {
        /// The defining root (22 comma-separated integers)
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
    },
    /// Certify a family over a root: shrink the parameter until every other
    /// wall section stays away from zero, and report the margins
    FamilyCheck {
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
    },
    /// Degree of one wall section over a certified family, by both engine
    /// routes
    Degree {
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
        /// The class whose wall section is measured
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    /// Invariant matrix over certified families, one per defining root
    SwMatrix {
        /// Defining roots, one flag per root; must lie in the positive half
        #[arg(long = "delta", action = ArgAction::Append, required = true, allow_hyphen_values = true)]
        deltas: Vec<String>,
        /// Test classes, one flag per class; defaults to the deltas
        #[arg(long = "alpha", action = ArgAction::Append, allow_hyphen_values = true)]
        alphas: Vec<String>,
    },
    /// Invariant of every enumerated positive root against one family
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
    },
    /// Verify that an orientation-reversing reflection negates the degree
    KappaCheck {
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
        /// Class to measure; defaults to the defining root
        #[arg(long, allow_hyphen_values = true)]
        class: Option<String>,
    },
    /// Verify the matrix transforms by a signed permutation under an isometry
    EquivarianceCheck {
        /// One of: identity, swap-u1-u2, negate-u1
        #[arg(long)]
        isometry: String,
        /// Defining roots; defaults to the positive root of each hyperbolic plane
        #[arg(long = "delta", action = ArgAction::Append, allow_hyphen_values = true)]
        deltas: Vec<String>,
    },
}

/// What a subcommand hands back to the writer.
struct Outcome {
    /// Payload body before the envelope is added.
    payload: Payload,
    /// One-line human summary.
    summary: String,
    /// Exit code once the payload has been written.
    code: i32,
}

enum Payload {
    Json(serde_json::Value),
    Csv(String),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(v) = cli.bound {
        cfg.enumeration_bound = v;
    }
    if let Some(v) = cli.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = cli.grid_level_start {
        cfg.grid_level_start = v;
    }
    if let Some(v) = cli.grid_level_cap {
        cfg.grid_level_cap = v;
    }
    if let Some(v) = cli.tolerance {
        cfg.tolerance = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.output {
        cfg.output_path = v;
    }
    if let Some(v) = cli.format {
        cfg.format = v;
    }
    if let Some(v) = cli.max_vectors {
        cfg.max_vectors = v;
    }
    cfg.validate()?;

    let lattice = K3Lattice::new();
    let (name, outcome) = match &cli.command {
        Cmd::Roots { blocks } => ("roots", cmd_roots(&cfg, &lattice, blocks)?),
        Cmd::BasePoint { delta } => ("base-point", cmd_base_point(&cfg, &lattice, delta)?),
        Cmd::FamilyCheck { delta } => ("family-check", cmd_family_check(&cfg, &lattice, delta)?),
        Cmd::Degree { delta, alpha } => ("degree", cmd_degree(&cfg, &lattice, delta, alpha)?),
        Cmd::SwMatrix { deltas, alphas } => {
            ("sw-matrix", cmd_sw_matrix(&cfg, &lattice, deltas, alphas)?)
        }
        Cmd::Scan { delta } => ("scan", cmd_scan(&cfg, &lattice, delta)?),
        Cmd::KappaCheck { delta, class } => (
            "kappa-check",
            cmd_kappa_check(&cfg, &lattice, delta, class.as_deref())?,
        ),
        Cmd::EquivarianceCheck { isometry, deltas } => (
            "equivariance-check",
            cmd_equivariance_check(&cfg, &lattice, isometry, deltas)?,
        ),
    };

    let destination = write_payload(&cfg, name, &outcome.payload)?;
    if cfg.output_path == "-" {
        eprintln!("{}", outcome.summary);
    } else {
        println!("{}", outcome.summary);
        println!("wrote {destination}");
    }
    Ok(outcome.code)
}

/// Wrap the payload in the self-describing envelope and write it out.
/// Returns a human name for the destination.
fn write_payload(cfg: &RunConfig, command: &str, payload: &Payload) -> Result<String> {
    let bytes = match payload {
        Payload::Json(result) => {
            let envelope = json!({
                "command": command,
                "version": env!("CARGO_PKG_VERSION"),
                "config": cfg,
                "result": result,
            });
            let mut text = serde_json::to_string_pretty(&envelope)
                .map_err(|e| Error::Input(format!("serialization: {e}")))?;
            text.push('\n');
            text.into_bytes()
        }
        Payload::Csv(body) => {
            let config_line = serde_json::to_string(cfg)
                .map_err(|e| Error::Input(format!("serialization: {e}")))?;
            format!(
                "# k3sw {}\n# command: {command}\n# config: {config_line}\n{body}",
                env!("CARGO_PKG_VERSION")
            )
            .into_bytes()
        }
    };
    if cfg.output_path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(&bytes)?;
        Ok("standard output".to_string())
    } else {
        std::fs::write(&cfg.output_path, bytes)?;
        Ok(cfg.output_path.clone())
    }
}

fn parse_class(s: &str) -> Result<LatticeVector> {
    parse_vector(s)
}

fn csv_unsupported(command: &str) -> Error {
    Error::Input(format!(
        "csv output is not defined for `{command}`; use --format json"
    ))
}

/// Enumerated and split roots at the configured radius.
fn enumerated(cfg: &RunConfig, lattice: &K3Lattice) -> Result<RootSet> {
    enumerate_and_split(lattice, &cfg.enum_options())
}

/// Base point plus certified family for `delta`, which must belong to `roots`.
fn certified_family(
    cfg: &RunConfig,
    lattice: &K3Lattice,
    roots: &RootSet,
    delta: &LatticeVector,
) -> Result<(SphereFamily, FamilyCertificate)> {
    let base = construct_base_point(lattice, delta, roots, cfg.seed, &cfg.base_options())?;
    SphereFamily::certified(lattice, base, roots, &cfg.family_options())
}

fn cmd_roots(cfg: &RunConfig, lattice: &K3Lattice, blocks: &[String]) -> Result<Outcome> {
    let mut opts = cfg.enum_options();
    if !blocks.is_empty() {
        let mut parsed = Vec::new();
        for name in blocks {
            let block = Block::parse(name).ok_or_else(|| {
                Error::Input(format!(
                    "unknown block {name:?}; expected one of u1, u2, u3, e8a, e8b"
                ))
            })?;
            parsed.push(block);
        }
        opts.blocks = Some(parsed);
    }
    let set = enumerate_and_split(lattice, &opts)?;
    let summary = format!(
        "{} roots within radius {} ({} in the positive half)",
        set.len(),
        cfg.enumeration_bound,
        set.positive.len()
    );
    let payload = match cfg.format {
        Format::Json => Payload::Json(set.to_json(lattice)),
        Format::Csv => {
            let mut body = String::from("class");
            for label in lattice.labels() {
                body.push(',');
                body.push_str(label);
            }
            body.push_str(",positive\n");
            let positive: std::collections::BTreeSet<usize> =
                set.positive.iter().copied().collect();
            for (i, r) in set.roots.iter().enumerate() {
                body.push_str(&format!("{r:?}"));
                for c in r.0 {
                    body.push_str(&format!(",{c}"));
                }
                body.push_str(if positive.contains(&i) {
                    ",1\n"
                } else {
                    ",0\n"
                });
            }
            Payload::Csv(body)
        }
    };
    Ok(Outcome {
        payload,
        summary,
        code: 0,
    })
}

fn cmd_base_point(cfg: &RunConfig, lattice: &K3Lattice, delta: &str) -> Result<Outcome> {
    if cfg.format == Format::Csv {
        return Err(csv_unsupported("base-point"));
    }
    let delta = parse_class(delta)?;
    let roots = enumerated(cfg, lattice)?;
    let base = construct_base_point(lattice, &delta, &roots, cfg.seed, &cfg.base_options())?;
    let summary = format!(
        "base point for {delta:?}: genericity margin {:.3e} against {} roots",
        base.genericity_margin,
        roots.len()
    );
    Ok(Outcome {
        payload: Payload::Json(base.to_json()),
        summary,
        code: 0,
    })
}

fn cmd_family_check(cfg: &RunConfig, lattice: &K3Lattice, delta: &str) -> Result<Outcome> {
    if cfg.format == Format::Csv {
        return Err(csv_unsupported("family-check"));
    }
    let delta = parse_class(delta)?;
    let roots = enumerated(cfg, lattice)?;
    let base = construct_base_point(lattice, &delta, &roots, cfg.seed, &cfg.base_options())?;
    let base_json = base.to_json();
    let (_, cert) = SphereFamily::certified(lattice, base, &roots, &cfg.family_options())?;
    let summary = format!(
        "family over {delta:?} certified at parameter {} ({} halvings, min wall margin {:.3e})",
        cert.epsilon, cert.halvings, cert.min_wall_margin
    );
    Ok(Outcome {
        payload: Payload::Json(json!({
            "base_point": base_json,
            "certificate": cert,
        })),
        summary,
        code: 0,
    })
}

fn cmd_degree(cfg: &RunConfig, lattice: &K3Lattice, delta: &str, alpha: &str) -> Result<Outcome> {
    if cfg.format == Format::Csv {
        return Err(csv_unsupported("degree"));
    }
    let delta = parse_class(delta)?;
    let alpha = parse_class(alpha)?;
    let roots = enumerated(cfg, lattice)?;
    let (family, cert) = certified_family(cfg, lattice, &roots, &delta)?;
    let entry = sw_of_family(lattice, &alpha, &family, &cfg.degree_options())?;
    let summary = format!(
        "wall-section degree of {alpha:?} over the family of {delta:?}: {}",
        entry.value
    );
    Ok(Outcome {
        payload: Payload::Json(json!({
            "certificate": cert,
            "entry": entry,
        })),
        summary,
        code: 0,
    })
}

fn cmd_sw_matrix(
    cfg: &RunConfig,
    lattice: &K3Lattice,
    deltas: &[String],
    alphas: &[String],
) -> Result<Outcome> {
    let deltas: Vec<LatticeVector> = deltas
        .iter()
        .map(|s| parse_class(s))
        .collect::<Result<_>>()?;
    let alphas: Vec<LatticeVector> = if alphas.is_empty() {
        deltas.clone()
    } else {
        alphas
            .iter()
            .map(|s| parse_class(s))
            .collect::<Result<_>>()?
    };
    let roots = enumerated(cfg, lattice)?;
    let matrix = sw_matrix(
        lattice,
        &deltas,
        &alphas,
        &roots,
        cfg.seed,
        &cfg.sw_options(),
    )?;

    for f in &matrix.failures {
        eprintln!(
            "entry ({}, {}) failed: {}",
            f.alpha_index, f.delta_index, f.message
        );
    }
    let pattern = matrix.pattern_ok();
    if !pattern && matrix.failures.is_empty() {
        eprintln!("computed entries violate the expected sign pattern");
    }
    let code = if matrix.failures.is_empty() && pattern {
        0
    } else {
        3
    };
    let summary = format!(
        "{}x{} invariant matrix over {} families; sign pattern {}",
        matrix.alphas.len(),
        matrix.deltas.len(),
        matrix.deltas.len(),
        if pattern { "holds" } else { "violated" }
    );
    let payload = match cfg.format {
        Format::Json => Payload::Json(matrix.to_json()),
        Format::Csv => Payload::Csv(matrix.to_csv()),
    };
    Ok(Outcome {
        payload,
        summary,
        code,
    })
}

fn cmd_scan(cfg: &RunConfig, lattice: &K3Lattice, delta: &str) -> Result<Outcome> {
    let delta = parse_class(delta)?;
    let roots = enumerated(cfg, lattice)?;

    // The family must be certified against a set containing its defining
    // root.  When the radius excludes it, certify against the enumerated
    // set extended by the root pair and scan the enumerated classes only.
    let (family, cert) = if roots.contains(&delta) {
        certified_family(cfg, lattice, &roots, &delta)?
    } else {
        eprintln!(
            "warning: {delta:?} lies outside the enumeration radius {}; \
             certifying against the enumerated set extended by the root pair, \
             scanning enumerated classes only",
            cfg.enumeration_bound
        );
        let mut all = roots.roots.clone();
        all.push(delta);
        all.push(delta.neg());
        all.sort();
        all.dedup();
        let extended = RootSet {
            roots: all,
            bound: cfg.enumeration_bound,
            splitting_vector: None,
            positive: Vec::new(),
        };
        let v = default_splitting_vector(lattice, &extended)?;
        let extended = split_roots(lattice, extended, &v)?;
        certified_family(cfg, lattice, &extended, &delta)?
    };

    let report = finiteness_scan(lattice, &family, &roots, &cfg.degree_options())?;
    for (class, message) in &report.failures {
        eprintln!("scan of {class:?} failed: {message}");
    }
    let code = if report.failures.is_empty() { 0 } else { 3 };
    let summary = format!(
        "scanned {} positive classes at parameter {}; {} nonzero",
        report.checked,
        report.epsilon,
        report.nonzero.len()
    );
    let payload = match cfg.format {
        Format::Json => Payload::Json(json!({
            "certificate": cert,
            "report": report.to_json(),
        })),
        Format::Csv => {
            let mut body = format!("# checked: {}\nclass,invariant\n", report.checked);
            for (class, value) in &report.nonzero {
                body.push_str(&format!("{class:?},{value}\n"));
            }
            Payload::Csv(body)
        }
    };
    Ok(Outcome {
        payload,
        summary,
        code,
    })
}

fn cmd_kappa_check(
    cfg: &RunConfig,
    lattice: &K3Lattice,
    delta: &str,
    class: Option<&str>,
) -> Result<Outcome> {
    if cfg.format == Format::Csv {
        return Err(csv_unsupported("kappa-check"));
    }
    let delta = parse_class(delta)?;
    let class = match class {
        Some(s) => parse_class(s)?,
        None => delta,
    };
    let roots = enumerated(cfg, lattice)?;
    let (family, cert) = certified_family(cfg, lattice, &roots, &delta)?;
    let reflection = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
    let flip = kappa_flip_check(lattice, &family, &class, &reflection, &cfg.degree_options())?;
    if !flip.flipped {
        eprintln!(
            "reflection failed to negate the degree: {} vs {}",
            flip.original.degree, flip.reflected.degree
        );
    }
    let summary = format!(
        "degree of {class:?}: {}; after the orientation-reversing reflection: {}",
        flip.original.degree, flip.reflected.degree
    );
    Ok(Outcome {
        payload: Payload::Json(json!({
            "certificate": cert,
            "flip": flip,
        })),
        summary,
        code: if flip.flipped { 0 } else { 3 },
    })
}

fn named_isometry(name: &str) -> Result<[[i64; DIM]; DIM]> {
    let mut m = [[0i64; DIM]; DIM];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    match name {
        "identity" => {}
        "swap-u1-u2" => {
            for (i, row) in m.iter_mut().enumerate().take(4) {
                row[i] = 0;
            }
            m[0][2] = 1;
            m[2][0] = 1;
            m[1][3] = 1;
            m[3][1] = 1;
        }
        "negate-u1" => {
            m[0][0] = -1;
            m[1][1] = -1;
        }
        other => {
            return Err(Error::Input(format!(
                "unknown isometry {other:?}; expected identity, swap-u1-u2 or negate-u1"
            )))
        }
    }
    Ok(m)
}

fn cmd_equivariance_check(
    cfg: &RunConfig,
    lattice: &K3Lattice,
    isometry: &str,
    deltas: &[String],
) -> Result<Outcome> {
    if cfg.format == Format::Csv {
        return Err(csv_unsupported("equivariance-check"));
    }
    let iso = named_isometry(isometry)?;
    let roots = enumerated(cfg, lattice)?;
    let deltas: Vec<LatticeVector> = if deltas.is_empty() {
        let picks: Vec<LatticeVector> = [Block::U1, Block::U2, Block::U3]
            .into_iter()
            .filter_map(|b| roots.delta_plus().find(|r| r.support() == vec![b]).copied())
            .collect();
        if picks.len() != 3 {
            return Err(Error::Input(
                "the radius enumerates no hyperbolic-plane roots; pass --delta explicitly".into(),
            ));
        }
        picks
    } else {
        deltas
            .iter()
            .map(|s| parse_class(s))
            .collect::<Result<_>>()?
    };
    let opts = cfg.sw_options();
    let matrix = sw_matrix(lattice, &deltas, &deltas, &roots, cfg.seed, &opts)?;
    let verdict = isometry_equivariance_check(lattice, &iso, &matrix, &roots, &opts)?;
    if !verdict.pass {
        eprintln!("transported matrix disagrees with the signed permutation of the original");
    }
    let summary = format!(
        "equivariance under {isometry}: {}",
        if verdict.pass { "holds" } else { "violated" }
    );
    Ok(Outcome {
        payload: Payload::Json(json!({
            "matrix": matrix.to_json(),
            "verdict": verdict,
        })),
        summary,
        code: if verdict.pass { 0 } else { 3 },
    })
}
