//! Command-line front end for the `tandem_overflow` library.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
//! 3 solver non-convergence.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tandem_overflow::exactsolve::{self, SolverOptions};
use tandem_overflow::harmonic::{self, BasisElement};
use tandem_overflow::model::{transform_tn, RatesConfig};
use tandem_overflow::montecarlo::{self, SimConfig};
use tandem_overflow::report::{self, fmt_f64};
use tandem_overflow::{Error, LatticePoint, Rates, C64};

#[derive(Parser)]
#[command(
    name = "tandem",
    version,
    about = "Buffer-overflow probabilities of tandem queues"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Arrival rate (defaults to 0.1, or the config value).
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Service rate of station 1 (defaults to 0.4).
    #[arg(long, global = true)]
    mu1: Option<f64>,
    /// Service rate of station 2 (defaults to 0.5).
    #[arg(long, global = true)]
    mu2: Option<f64>,
    /// Service rate of station 3; selects the three-station network.
    #[arg(long, global = true)]
    mu3: Option<f64>,
    /// JSON file `{"lambda": .., "mu": [..]}`; explicit rate flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance of the Gauss-Seidel solver.
    #[arg(long, global = true, default_value_t = exactsolve::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, global = true, default_value_t = exactsolve::DEFAULT_MAX_SWEEPS)]
    max_sweeps: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact p_n on the whole simplex, or at one point with --x.
    Exact {
        #[arg(long)]
        n: i64,
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<i64>>,
    },
    /// Closed-form approximation W*(T_n x), or W*(y) with --y.
    Approx {
        #[arg(long)]
        n: Option<i64>,
        #[arg(long, value_delimiter = ',', conflicts_with = "y")]
        x: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',')]
        y: Option<Vec<i64>>,
    },
    /// Monte Carlo estimate of p_n(x), or of P_y(hit) with --y and --escape-gap.
    Simulate {
        #[arg(long)]
        n: Option<i64>,
        #[arg(long, value_delimiter = ',', conflicts_with = "y")]
        x: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',', requires = "escape_gap")]
        y: Option<Vec<i64>>,
        #[arg(long)]
        escape_gap: Option<i64>,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
    },
    /// Exact vs approximate values over the simplex.
    Sweep {
        #[arg(long)]
        n: i64,
        #[arg(long, default_value_t = 1)]
        stride: i64,
    },
    /// Real section of the characteristic surface.
    Charsurf {
        #[arg(long, default_value_t = 0.05)]
        alpha_min: f64,
        #[arg(long, default_value_t = 3.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Large-deviation decay rate V(x), optionally checked against exact solves.
    LdRate {
        #[arg(long, value_delimiter = ',', num_args = 1)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        check_n: Vec<i64>,
    },
    /// Runs the invariant suite; exits 1 if any check fails.
    Verify,
    /// Least-squares fit of harmonic functions to 1 on the exit face.
    Fit {
        /// Conjugate-pair basis elements as re or re:im; defaults to rho2.
        #[arg(long = "beta", value_delimiter = ',')]
        betas: Vec<String>,
        /// Leave out the [(rho1, rho1), .] bracket.
        #[arg(long)]
        no_bracket: bool,
        #[arg(long, default_value_t = 50)]
        samples: i64,
    },
}

fn rates(g: &Global) -> anyhow::Result<Rates> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<RatesConfig>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => RatesConfig {
            lambda: 0.1,
            mu: vec![0.4, 0.5],
        },
    };
    if let Some(l) = g.lambda {
        cfg.lambda = l;
    }
    for (i, m) in [g.mu1, g.mu2].into_iter().enumerate() {
        if let Some(m) = m {
            cfg.mu[i] = m;
        }
    }
    if let Some(m) = g.mu3 {
        cfg.mu.truncate(2);
        cfg.mu.push(m);
    }
    Ok(Rates::from_config(&cfg)?)
}

fn point(coords: &[i64]) -> anyhow::Result<LatticePoint> {
    Ok(LatticePoint::new(coords)?)
}

fn closed_form(r: &Rates, y: &LatticePoint) -> tandem_overflow::Result<f64> {
    match r.stations() {
        2 => harmonic::w_approx(r, y),
        _ => harmonic::w_star_3d(r, y),
    }
}

fn parse_beta(s: &str) -> anyhow::Result<C64> {
    let (re, im) = s.split_once(':').unwrap_or((s, "0"));
    Ok(C64::new(re.trim().parse()?, im.trim().parse()?))
}

fn kv_csv(pairs: &[(String, String)]) -> String {
    let head: Vec<&str> = pairs.iter().map(|p| p.0.as_str()).collect();
    let vals: Vec<&str> = pairs.iter().map(|p| p.1.as_str()).collect();
    format!("{}\n{}\n", head.join(","), vals.join(","))
}

/// `(name1, c1), (name2, c2), ..` columns for a lattice point.
fn coord_cols(name: &str, x: &LatticePoint) -> Vec<(String, String)> {
    x.coords()
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("{name}{}", i + 1), c.to_string()))
        .collect()
}

fn cols<const N: usize>(pairs: [(&str, String); N]) -> Vec<(String, String)> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Returns the rendered output and whether it represents a failed check.
fn run(cli: &Cli) -> anyhow::Result<(String, bool)> {
    let g = &cli.global;
    let r = rates(g)?;
    let opts = SolverOptions::new(g.tol, g.max_sweeps);
    let json = g.format == Format::Json;
    let out = match &cli.command {
        Command::Exact { n, x } => {
            r.require_stations(2)?;
            r.require_stable()?;
            let field = exactsolve::solve_pn(&r, *n, &opts)?;
            match x {
                Some(x) => {
                    let x = point(x)?;
                    let v = field
                        .get(&x)
                        .ok_or_else(|| Error::InvalidPoint(format!("{x} not in A_{n}")))?;
                    if json {
                        json!({"x": x.coords(), "n": n, "p_exact": v}).to_string() + "\n"
                    } else {
                        let mut c = coord_cols("x", &x);
                        c.extend(cols([("n", n.to_string()), ("p_exact", fmt_f64(v))]));
                        kv_csv(&c)
                    }
                }
                None if json => field.to_json() + "\n",
                None => field.to_csv(),
            }
        }
        Command::Approx { n, x, y } => {
            let y = match (x, y, n) {
                (_, Some(y), _) => point(y)?,
                (Some(x), None, Some(n)) => transform_tn(*n, &point(x)?),
                _ => bail!(Error::InvalidArgument(
                    "approx needs --n with --x, or --y".into()
                )),
            };
            let w = closed_form(&r, &y)?;
            if json {
                json!({"y": y.coords(), "w_star": w}).to_string() + "\n"
            } else {
                let mut c = coord_cols("y", &y);
                c.extend(cols([("w_star", fmt_f64(w))]));
                kv_csv(&c)
            }
        }
        Command::Simulate {
            n,
            x,
            y,
            escape_gap,
            paths,
        } => {
            if !r.stable() {
                log::warn!("rates are unstable; estimating anyway");
            }
            let est = match (x, y, n, escape_gap) {
                (_, Some(y), _, Some(big_n)) => montecarlo::simulate_y_hit(&SimConfig::limit(
                    r,
                    point(y)?,
                    *big_n,
                    *paths,
                    g.seed,
                ))?,
                (Some(x), None, Some(n), _) => {
                    montecarlo::simulate_pn(&SimConfig::overflow(r, point(x)?, *n, *paths, g.seed))?
                }
                _ => bail!(Error::InvalidArgument(
                    "simulate needs --n with --x, or --y with --escape-gap".into()
                )),
            };
            if json {
                est.to_json() + "\n"
            } else {
                let (lo, hi) = est.ci95();
                kv_csv(&cols([
                    ("p_hat", fmt_f64(est.p_hat)),
                    ("std_err", fmt_f64(est.std_err)),
                    ("ci_lo", fmt_f64(lo)),
                    ("ci_hi", fmt_f64(hi)),
                    ("hits", est.hits.to_string()),
                    ("escapes", est.escapes.to_string()),
                    ("paths", est.paths.to_string()),
                    ("seed", est.seed.to_string()),
                    ("bias_bound", fmt_f64(est.bias_bound)),
                    ("unstable_rates", est.unstable_rates.to_string()),
                ]))
            }
        }
        Command::Sweep { n, stride } => {
            let rows = report::sweep_rows(&r, *n, *stride, &opts)?;
            let (p_max, log_max) = report::sweep_max_errors(&rows, 5);
            log::info!("max |rel_err| over x1+x2>=5: {p_max:e}; on the log scale: {log_max:e}");
            if json {
                serde_json::to_string(&rows)? + "\n"
            } else {
                report::sweep_csv(&rows)
            }
        }
        Command::Charsurf {
            alpha_min,
            alpha_max,
            points,
        } => {
            let grid = report::alpha_grid(*alpha_min, *alpha_max, *points);
            if json {
                let pts = tandem_overflow::charsurface::real_section(&r, &grid)?;
                let pts: Vec<_> = pts
                    .iter()
                    .map(|(a, b)| json!({"alpha": a, "beta": b}))
                    .collect();
                serde_json::to_string(&pts)? + "\n"
            } else {
                report::charsurf_csv(&r, &grid)?
            }
        }
        Command::LdRate { x, check_n } => {
            let [x1, x2] = x[..] else {
                bail!(Error::InvalidArgument("--x needs two coordinates".into()));
            };
            let rep = report::ld_rate(&r, [x1, x2])?;
            let checks = report::ld_cross_check(&r, [x1, x2], check_n, &opts)?;
            if json {
                json!({"report": rep, "checks": checks}).to_string() + "\n"
            } else {
                let mut s = kv_csv(&cols([
                    ("gamma", fmt_f64(rep.gamma)),
                    ("v_of_x", fmt_f64(rep.v_of_x)),
                    (
                        "r1",
                        format!("{} {}", fmt_f64(rep.r1[0]), fmt_f64(rep.r1[1])),
                    ),
                    (
                        "r3",
                        format!("{} {}", fmt_f64(rep.r3[0]), fmt_f64(rep.r3[1])),
                    ),
                ]));
                if !checks.is_empty() {
                    s.push_str("n,empirical,abs_diff\n");
                    for c in &checks {
                        s.push_str(&format!(
                            "{},{},{}\n",
                            c.n,
                            fmt_f64(c.empirical),
                            fmt_f64(c.abs_diff)
                        ));
                    }
                }
                s
            }
        }
        Command::Verify => {
            let rep = report::verify(&r);
            for n in &rep.notices {
                log::warn!("{n}");
            }
            let text = if json {
                rep.to_json() + "\n"
            } else {
                let mut s = String::from("check,passed,detail\n");
                for c in &rep.checks {
                    s.push_str(&format!(
                        "{},{},\"{}\"\n",
                        c.name,
                        c.passed,
                        c.detail.replace('"', "'")
                    ));
                }
                s
            };
            return Ok((text, !rep.passed));
        }
        Command::Fit {
            betas,
            no_bracket,
            samples,
        } => {
            let mut basis: Vec<BasisElement> = if betas.is_empty() {
                vec![BasisElement::Conjugate(C64::new(r.rho(1), 0.0))]
            } else {
                betas
                    .iter()
                    .map(|b| parse_beta(b).map(BasisElement::Conjugate))
                    .collect::<anyhow::Result<_>>()?
            };
            if !no_bracket {
                let r1 = C64::new(r.rho(0), 0.0);
                basis.push(BasisElement::Bracket {
                    beta: r1,
                    alpha: r1,
                });
            }
            let pts: Vec<_> = (0..*samples).map(|a| LatticePoint::d2(a, a)).collect();
            let fit = harmonic::balayage_fit(&r, &basis, &vec![1.0; pts.len()], &pts)?;
            if json {
                json!({
                    "weights": fit.weights.iter().map(|w| [w.re, w.im]).collect::<Vec<_>>(),
                    "max_boundary_error": fit.max_boundary_error,
                    "combination": serde_json::from_str::<serde_json::Value>(&fit.combination.to_json())?,
                })
                .to_string()
                    + "\n"
            } else {
                let mut s = String::from("index,weight_re,weight_im\n");
                for (i, w) in fit.weights.iter().enumerate() {
                    s.push_str(&format!("{i},{},{}\n", fmt_f64(w.re), fmt_f64(w.im)));
                }
                s.push_str(&format!(
                    "max_boundary_error\n{}\n",
                    fmt_f64(fit.max_boundary_error)
                ));
                s
            }
        }
    };
    Ok((out, false))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NotConverged { .. }) => 3,
        _ => 2,
    }
}

/// Runs the command, writes its output and returns the exit code.
fn execute(cli: &Cli) -> u8 {
    let (text, failed) = match run(cli) {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code(&e);
        }
    };
    let written = match &cli.global.out {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing stdout"),
    };
    match written {
        Ok(()) => u8::from(failed),
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(execute(&Cli::parse()))
}
