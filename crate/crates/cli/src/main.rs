//! `summtool`: decompositions, Gevrey fits, level bookkeeping, Borel-Laplace
//! sums and Pfaffian system checks from the command line.
//!
//! Exit codes: 0 on success, 1 when the mathematics rejects a well-formed
//! request (singular linear part, pole on the ray, ...), 2 on bad input.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{parse_pair, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "summtool", version, about = "Monomial summability toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Plot-data CSV path (gevrey and sum only).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Padé degrees `L,M`.
    #[arg(long, global = true, value_name = "L,M")]
    pade: Option<String>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    panels: Option<usize>,
    /// The Laplace ray is cut at this multiple of |t|.
    #[arg(long, global = true)]
    xi_max_factor: Option<f64>,
    /// Angular clearance (radians) between the ray and any pole.
    #[arg(long, global = true)]
    pole_margin: Option<f64>,
    #[arg(long, global = true)]
    root_radius: Option<f64>,
    #[arg(long, global = true)]
    cluster_tol: Option<f64>,
    /// Float coefficients at or below this modulus count as zero.
    #[arg(long, global = true)]
    residual_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Split a series into layers in the monomial x1^p x2^q.
    Decompose {
        #[arg(long)]
        series: Option<String>,
        /// `p,q`
        #[arg(long)]
        monomial: Option<String>,
    },
    /// Estimate the Gevrey order in a monomial and certify a bound.
    ///
    /// CSV columns: degree (n+m), log_norm (log of the coefficient norm),
    /// fitted_log (fitted bound at the same bidegree); one row per nonzero
    /// coefficient, ordered by degree then n.
    Gevrey {
        #[arg(long)]
        series: Option<String>,
        #[arg(long)]
        monomial: Option<String>,
        /// Order for the certificate (defaults to the estimate).
        #[arg(long)]
        s: Option<f64>,
        /// Lowest total degree entering the certificate.
        #[arg(long)]
        floor: Option<usize>,
    },
    /// Compatibility of summability levels and their blow-up normalization.
    Levels {
        /// `p,q,k`
        #[arg(long)]
        candidate: Option<String>,
        #[arg(long, num_args = 1..)]
        components: Vec<String>,
    },
    /// k-sum in a monomial at sample points.
    ///
    /// CSV columns: re_x1, im_x1, re_x2, im_x2, re_value, im_value,
    /// tail_bound; one row per point in input order.
    Sum {
        /// Series or decomposition JSON.
        #[arg(long)]
        series: Option<String>,
        /// `p,q,k`
        #[arg(long)]
        level: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<f64>,
        /// `x1,x2`, complex values written like `0.1+0.2i`; repeat for more points.
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Estimated singular directions of the Borel transform.
    Singular {
        #[arg(long)]
        series: Option<String>,
        #[arg(long)]
        level: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Write a standard test series as JSON.
    Witness {
        /// poincare, euler or geometric
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        trunc: Option<usize>,
        /// Diagonal monomial for euler and geometric (default 1,1).
        #[arg(long)]
        monomial: Option<String>,
    },
    /// Pfaffian systems with normal crossings.
    #[command(subcommand)]
    Pfaffian(Pfaffian),
}

#[derive(Subcommand)]
enum Pfaffian {
    /// Formal solution of one equation, checked against the other.
    Solve {
        #[arg(long)]
        system: Option<String>,
        /// 1 or 2
        #[arg(long)]
        side: Option<u8>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Complete integrability residuals and spectral diagnosis.
    Check {
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Spectral conditions on the linear parts at the origin.
    Classify {
        /// `p,q,p',q'`
        #[arg(long)]
        exponents: Option<String>,
        #[arg(long = "A")]
        a: Option<String>,
        #[arg(long = "B")]
        b: Option<String>,
    },
    /// Rank reduction of a linear pair with p = p'.
    Reduce {
        #[arg(long)]
        exponents: Option<String>,
        #[arg(long = "A")]
        a: Option<String>,
        #[arg(long = "B")]
        b: Option<String>,
    },
    /// Pull a system back along pi1^N or pi2^N.
    Pullback {
        #[arg(long)]
        system: Option<String>,
        /// e.g. `pi1^2`
        #[arg(long)]
        map: Option<String>,
    },
}

fn apply_flags(cli: Cli) -> Result<RunConfig> {
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.output = g.out.or(cfg.output);
    cfg.csv = g.csv.or(cfg.csv);
    cfg.mode = g.mode.unwrap_or(cfg.mode);
    if let Some(p) = g.pade {
        cfg.summation.pade = parse_pair(&p, "pade")?;
    }
    let q = &mut cfg.summation.quadrature;
    q.nodes = g.nodes.unwrap_or(q.nodes);
    q.panels = g.panels.unwrap_or(q.panels);
    q.xi_max_factor = g.xi_max_factor.unwrap_or(q.xi_max_factor);
    q.pole_margin = g.pole_margin.unwrap_or(q.pole_margin);
    cfg.summation.root_radius = g.root_radius.unwrap_or(cfg.summation.root_radius);
    cfg.summation.cluster_tol = g.cluster_tol.unwrap_or(cfg.summation.cluster_tol);
    cfg.tolerances.residual = g.residual_tol.unwrap_or(cfg.tolerances.residual);

    let list = |v: Vec<String>| (!v.is_empty()).then(|| serde_json::Value::from(v));
    let name = match cli.command {
        Command::Decompose { series, monomial } => {
            cfg.set_opt("series", series);
            cfg.set_opt("monomial", monomial);
            "decompose"
        }
        Command::Gevrey { series, monomial, s, floor } => {
            cfg.set_opt("series", series);
            cfg.set_opt("monomial", monomial);
            cfg.set_opt("s", s);
            cfg.set_opt("floor", floor);
            "gevrey"
        }
        Command::Levels { candidate, components } => {
            cfg.set_opt("candidate", candidate);
            cfg.set_opt("components", list(components));
            "levels"
        }
        Command::Sum { series, level, direction, points } => {
            cfg.set_opt("series", series);
            cfg.set_opt("level", level);
            cfg.set_opt("direction", direction);
            cfg.set_opt("points", list(points));
            "sum"
        }
        Command::Singular { series, level, point } => {
            cfg.set_opt("series", series);
            cfg.set_opt("level", level);
            cfg.set_opt("point", point);
            "singular"
        }
        Command::Witness { kind, trunc, monomial } => {
            cfg.set_opt("kind", kind);
            cfg.set_opt("trunc", trunc);
            cfg.set_opt("monomial", monomial);
            "witness"
        }
        Command::Pfaffian(sub) => match sub {
            Pfaffian::Solve { system, side, order } => {
                cfg.set_opt("system", system);
                cfg.set_opt("side", side);
                cfg.set_opt("order", order);
                "pfaffian solve"
            }
            Pfaffian::Check { system, order } => {
                cfg.set_opt("system", system);
                cfg.set_opt("order", order);
                "pfaffian check"
            }
            Pfaffian::Classify { exponents, a, b } => {
                cfg.set_opt("exponents", exponents);
                cfg.set_opt("a", a);
                cfg.set_opt("b", b);
                "pfaffian classify"
            }
            Pfaffian::Reduce { exponents, a, b } => {
                cfg.set_opt("exponents", exponents);
                cfg.set_opt("a", a);
                cfg.set_opt("b", b);
                "pfaffian reduce"
            }
            Pfaffian::Pullback { system, map } => {
                cfg.set_opt("system", system);
                cfg.set_opt("map", map);
                "pfaffian pullback"
            }
        },
    };
    cfg.command = name.to_string();
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = apply_flags(cli)?;
    cfg.validate()?;
    let outcome = commands::dispatch(&cfg)?;
    match (&cfg.csv, &outcome.csv) {
        (Some(path), Some(text)) => output::emit(Some(path), text)?,
        (Some(_), None) => anyhow::bail!("--csv is only available for gevrey and sum"),
        _ => {}
    }
    let report = json!({ "command": cfg.command, "config": cfg, "result": outcome.result });
    let text = output::to_json_string(&report).context("serializing report")?;
    output::emit(cfg.output.as_deref(), &text)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<monosum::Error>() {
        Some(e) if e.is_domain() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
