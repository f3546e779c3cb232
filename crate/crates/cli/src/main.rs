//! `tangents`: seeded experiment runner.
//!
//! Exit codes: 0 on completion, 1 on configuration or I/O errors, 2 when an
//! assertion-style check fails (hyperbolicity violation, failed
//! certification, monotonicity violation, non-convergence, non-convexity).

mod commands;
mod inputs;
mod report;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand};

use commands::Context;
use spec::Spec;

#[derive(Parser, Debug)]
#[command(name = "tangents", version, about = "Seeded experiments on cone subequations, Garding operators, plane families and tangent flows")]
struct Cli {
    #[command(subcommand)]
    group: Group,

    /// Spec file (`key = value` lines).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Master seed; may instead be given as `seed = ...` in the spec.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for the JSON report and CSV table.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Overrides the command's numeric tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Overrides the sample or trial budget.
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Cone subequations on symmetric matrices.
    Subeq {
        #[command(subcommand)]
        op: SubeqOp,
    },
    /// Garding operators.
    Garding {
        #[command(subcommand)]
        op: GardingOp,
    },
    /// Plane families in the Grassmannian.
    Grass {
        #[command(subcommand)]
        op: GrassOp,
    },
    /// Tangent flows of scalar fields.
    Flow {
        #[command(subcommand)]
        op: FlowOp,
    },
    /// Spherical 2-jets of homogeneous functions.
    Sphere {
        #[command(subcommand)]
        op: SphereOp,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum SubeqOp {
    /// Margins and membership of matrices.
    Member,
    /// Increasing and decreasing Riesz characteristics.
    Riesz,
    /// The dual subequation: characteristics and margins.
    Dual,
    /// Characteristics of the expansions F(delta).
    Expand,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum GardingOp {
    /// Garding eigenvalues by root finding.
    Eig,
    /// Branch margins.
    Branch,
    /// Sampled certification of hyperbolicity, convexity, positivity, monotonicity.
    Certify,
    /// Elementary symmetric functions against the eigenvalue route.
    Sigma,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum GrassOp {
    /// Orbit invariant statistics over sampled planes.
    Invariant,
    /// Sampled search for a chain of planes joining two points.
    Transitivity,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum FlowOp {
    /// Sup-radius quotients, density and monotonicity.
    Density,
    /// L1 convergence of the flow to a candidate tangent.
    Tangent,
    /// Convex flow and the support function of the subdifferential.
    Convex,
    /// Density of the restriction to a plane.
    Restrict,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum SphereOp {
    /// The symmetric matrix Phi of a spherical jet.
    Phi,
    /// Phi against the finite-difference Hessian.
    Fdcheck,
    /// Membership of spherical jets in a subequation.
    Member,
    /// Complex radial structure of Theta log|x| + g.
    Complex,
    /// Quaternionic block structure of |x|^-2 g.
    Quaternion,
}

type Runner = fn(&mut Context) -> Result<report::Outcome>;

impl Group {
    fn resolve(&self) -> (&'static str, Runner) {
        use commands as c;
        match self {
            Group::Subeq { op } => match op {
                SubeqOp::Member => ("subeq member", c::subeq_member),
                SubeqOp::Riesz => ("subeq riesz", c::subeq_riesz),
                SubeqOp::Dual => ("subeq dual", c::subeq_dual),
                SubeqOp::Expand => ("subeq expand", c::subeq_expand),
            },
            Group::Garding { op } => match op {
                GardingOp::Eig => ("garding eig", c::garding_eig),
                GardingOp::Branch => ("garding branch", c::garding_branch),
                GardingOp::Certify => ("garding certify", c::garding_certify),
                GardingOp::Sigma => ("garding sigma", c::garding_sigma),
            },
            Group::Grass { op } => match op {
                GrassOp::Invariant => ("grass invariant", c::grass_invariant),
                GrassOp::Transitivity => ("grass transitivity", c::grass_transitivity),
            },
            Group::Flow { op } => match op {
                FlowOp::Density => ("flow density", c::flow_density),
                FlowOp::Tangent => ("flow tangent", c::flow_tangent),
                FlowOp::Convex => ("flow convex", c::flow_convex),
                FlowOp::Restrict => ("flow restrict", c::flow_restrict),
            },
            Group::Sphere { op } => match op {
                SphereOp::Phi => ("sphere phi", c::sphere_phi),
                SphereOp::Fdcheck => ("sphere fdcheck", c::sphere_fdcheck),
                SphereOp::Member => ("sphere member", c::sphere_member),
                SphereOp::Complex => ("sphere complex", c::sphere_complex),
                SphereOp::Quaternion => ("sphere quaternion", c::sphere_quaternion),
            },
        }
    }
}

enum Failure {
    Config(anyhow::Error),
    Check(String),
}

/// Core errors that report a failed mathematical check rather than bad input.
fn is_check_error(e: &anyhow::Error) -> bool {
    use tangents_core::Error as E;
    matches!(
        e.downcast_ref::<E>(),
        Some(E::HyperbolicityViolation { .. } | E::NotConvex { .. } | E::ChainValidation(_))
    )
}

fn resolve_seed(cli_seed: Option<u64>, spec: &mut Spec) -> Result<u64> {
    let from_spec: Option<u64> = spec.get("seed")?;
    let seed = match (cli_seed, from_spec) {
        (Some(a), Some(b)) if a != b => bail!("--seed {a} contradicts `seed = {b}` in the spec"),
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => bail!("no seed given: pass --seed or set `seed = ...` in the spec"),
    };
    spec.record("seed", seed);
    Ok(seed)
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let (command, runner) = cli.group.resolve();
    let path = cli.spec.as_ref().ok_or_else(|| Failure::Config(anyhow::anyhow!("--spec <path> is required")))?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading spec {}", path.display()))
        .map_err(Failure::Config)?;
    let mut spec = Spec::parse(&text).map_err(|e| Failure::Config(e.into()))?;
    let seed = resolve_seed(cli.seed, &mut spec).map_err(Failure::Config)?;
    let mut cx = Context { spec, seed, tol: cli.tol, budget: cli.budget };

    let start = Instant::now();
    let outcome = runner(&mut cx).map_err(|e| if is_check_error(&e) { Failure::Check(format!("{e:#}")) } else { Failure::Config(e) })?;
    let files = report::write(&cli.out, command, seed, cx.spec.echo(), &outcome).map_err(Failure::Config)?;
    for f in &files {
        println!("{}", f.display());
    }
    eprintln!("{command}: {:.3}s", start.elapsed().as_secs_f64());
    if outcome.failed_checks.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(outcome.failed_checks.join("; ")))
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for failed checks.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
