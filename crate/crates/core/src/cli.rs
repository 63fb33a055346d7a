//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 verification failure,
//! 3 numerical failure, 64 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::formula::{eval_compact_with, eval_cor12_with, eval_stable, eval_thm1_with, EvalOptions};
use crate::haar_mc::{mc_estimate, mc_estimate_extended, parse_seed, seed_from_env, DEFAULT_SEED};
use crate::params::{ExtendedParams, RawExtendedParams, RawParams, SpectralParams};
use crate::series_oracle::{torus_average, TruncationPolicy};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "ratiokit",
    version,
    about = "Haar averages of characteristic-polynomial ratios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one closed form at a parameter point.
    Eval {
        #[arg(long, value_enum, default_value_t = Mode::Thm1)]
        mode: Mode,
        #[command(flatten)]
        params: ParamArgs,
        /// Truncation order for `--mode series`.
        #[arg(long, default_value_t = 60)]
        order: usize,
        /// Cluster tolerance, or the truncation tolerance for `--mode series`.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate along a straight segment in one parameter.
    Sweep {
        #[arg(long, value_enum, default_value_t = Mode::Thm1)]
        mode: Mode,
        #[command(flatten)]
        params: ParamArgs,
        /// The swept parameter, `xs:K` or `ys:K` with K 1-based.
        #[arg(long)]
        vary: String,
        #[arg(long, value_parser = parse_complex)]
        from: [f64; 2],
        #[arg(long, value_parser = parse_complex)]
        to: [f64; 2],
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimate over Haar-random unitaries.
    Mc {
        #[arg(long, value_enum, default_value_t = Mode::Thm1)]
        mode: Mode,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Decimal or 0x-hex; falls back to RATIOKIT_SEED.
        #[arg(long)]
        seed: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run acceptance criteria and report pass/fail for each.
    Verify {
        /// `all`, `fast`, or a comma list of criterion numbers or names.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        seed: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    /// Equal counts, coset sum.
    Thm1,
    /// Unequal numerator and denominator counts.
    Cor12,
    /// All y-parameters removed.
    Compact,
    /// Pure reciprocal average, N ≥ max(p, q).
    Stable,
    /// Truncated torus series (oracle).
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// JSON parameter file; excludes the inline flags.
    #[arg(long, conflicts_with_all = ["p", "q", "n", "xs", "ys", "pprime", "qprime"])]
    params: Option<PathBuf>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long = "N", id = "n")]
    n: Option<usize>,
    /// Complex values as `re,im`.
    #[arg(long, num_args = 1.., value_parser = parse_complex)]
    xs: Vec<[f64; 2]>,
    #[arg(long, num_args = 1.., value_parser = parse_complex)]
    ys: Vec<[f64; 2]>,
    #[arg(long)]
    pprime: Option<usize>,
    #[arg(long)]
    qprime: Option<usize>,
}

fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let mut parts = s.split(',');
    let re = parts.next().unwrap_or("");
    let im = parts.next().unwrap_or("0");
    if parts.next().is_some() {
        return Err(format!("expected re,im but got {s:?}"));
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number"));
    Ok([num(re)?, num(im)?])
}

enum Failure {
    Usage(String),
    Input(String),
    Lib(Error),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// What the parameter flags or file describe, before choosing a formula.
struct Inputs {
    p: usize,
    q: usize,
    n: usize,
    xs: Vec<[f64; 2]>,
    ys: Vec<[f64; 2]>,
    pprime: usize,
    qprime: usize,
}

impl Inputs {
    fn spectral(&self) -> Outcome<SpectralParams> {
        if (self.pprime, self.qprime) != (self.p, self.q) {
            return Err(Failure::Usage("--pprime/--qprime only apply to --mode cor12".into()));
        }
        Ok(SpectralParams::validate(&RawParams {
            p: self.p,
            q: self.q,
            n: self.n,
            xs: self.xs.clone(),
            ys: self.ys.clone(),
        })?)
    }

    fn extended(&self) -> Outcome<ExtendedParams> {
        Ok(ExtendedParams::validate(&RawExtendedParams {
            p: self.p,
            q: self.q,
            pprime: self.pprime,
            qprime: self.qprime,
            n: self.n,
            xs: self.xs.clone(),
            ys: self.ys.clone(),
        })?)
    }

    fn complex(v: &[[f64; 2]]) -> Vec<Complex64> {
        v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
    }
}

fn read_params(path: &Path) -> Outcome<Inputs> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if let Ok(r) = serde_json::from_str::<RawExtendedParams>(&text) {
        return Ok(Inputs {
            p: r.p,
            q: r.q,
            n: r.n,
            xs: r.xs,
            ys: r.ys,
            pprime: r.pprime,
            qprime: r.qprime,
        });
    }
    let r: RawParams = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(Inputs {
        p: r.p,
        q: r.q,
        n: r.n,
        xs: r.xs,
        ys: r.ys,
        pprime: r.p,
        qprime: r.q,
    })
}

fn inputs(args: &ParamArgs) -> Outcome<Inputs> {
    if let Some(path) = &args.params {
        return read_params(path);
    }
    let (Some(p), Some(q), Some(n)) = (args.p, args.q, args.n) else {
        return Err(Failure::Usage("give --params FILE or all of --p, --q, --N".into()));
    };
    Ok(Inputs {
        p,
        q,
        n,
        xs: args.xs.clone(),
        ys: args.ys.clone(),
        pprime: args.pprime.unwrap_or(p),
        qprime: args.qprime.unwrap_or(q),
    })
}

fn resolve_seed(flag: Option<&str>) -> Outcome<u64> {
    match flag {
        Some(s) => Ok(parse_seed(s)?),
        None => Ok(seed_from_env()?.unwrap_or(DEFAULT_SEED)),
    }
}

fn eval_options(tol: Option<f64>) -> Outcome<EvalOptions> {
    let mut opts = EvalOptions::default();
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Input(format!("--tol must be positive, got {t}")));
        }
        opts.cluster_tol = t;
    }
    Ok(opts)
}

#[derive(Serialize)]
struct Tagged<R: Serialize, P: Serialize> {
    mode: Mode,
    #[serde(flatten)]
    result: R,
    params: P,
}

#[derive(Serialize)]
struct PartialParams {
    p: usize,
    q: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    xs: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ys: Option<Vec<[f64; 2]>>,
}

/// One evaluation in the given mode: JSON record, value and condition.
fn evaluate(
    mode: Mode,
    inp: &Inputs,
    opts: &EvalOptions,
    order: usize,
    tol: Option<f64>,
) -> Outcome<(serde_json::Value, Complex64, f64)> {
    let to_json = |v: serde_json::Result<serde_json::Value>| v.map_err(|e| Failure::Input(e.to_string()));
    Ok(match mode {
        Mode::Thm1 => {
            let prm = inp.spectral()?;
            let r = eval_thm1_with(&prm, opts)?;
            let (v, c) = (r.value, r.condition);
            (
                to_json(serde_json::to_value(Tagged {
                    mode,
                    result: r,
                    params: prm,
                }))?,
                v,
                c,
            )
        }
        Mode::Cor12 => {
            let prm = inp.extended()?;
            let r = eval_cor12_with(&prm, opts)?;
            let (v, c) = (r.value, r.condition);
            (
                to_json(serde_json::to_value(Tagged {
                    mode,
                    result: r,
                    params: prm,
                }))?,
                v,
                c,
            )
        }
        Mode::Compact => {
            let r = eval_compact_with(inp.p, inp.q, inp.n, &Inputs::complex(&inp.xs), opts)?;
            let params = PartialParams {
                p: inp.p,
                q: inp.q,
                n: inp.n,
                xs: Some(inp.xs.clone()),
                ys: None,
            };
            let (v, c) = (r.value, r.condition);
            (
                to_json(serde_json::to_value(Tagged {
                    mode,
                    result: r,
                    params,
                }))?,
                v,
                c,
            )
        }
        Mode::Stable => {
            let r = eval_stable(inp.p, inp.q, inp.n, &Inputs::complex(&inp.ys))?;
            let params = PartialParams {
                p: inp.p,
                q: inp.q,
                n: inp.n,
                xs: None,
                ys: Some(inp.ys.clone()),
            };
            let (v, c) = (r.value, r.condition);
            (
                to_json(serde_json::to_value(Tagged {
                    mode,
                    result: r,
                    params,
                }))?,
                v,
                c,
            )
        }
        Mode::Series => {
            let prm = inp.spectral()?;
            let policy = match tol {
                Some(t) => TruncationPolicy::with_tolerance(order, t),
                None => TruncationPolicy::new(order),
            };
            let r = torus_average(&prm, &policy)?;
            let v = r.value;
            (
                to_json(serde_json::to_value(Tagged {
                    mode,
                    result: r,
                    params: prm,
                }))?,
                v,
                1.0,
            )
        }
    })
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Input(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Input(e.to_string()))
}

fn json_bytes<T: Serialize>(v: &T) -> Outcome<Vec<u8>> {
    let mut s = serde_json::to_vec(v).map_err(|e| Failure::Input(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn no_text(format: Format) -> Outcome<()> {
    if format == Format::Text {
        return Err(Failure::Usage("--format text is only available for verify".into()));
    }
    Ok(())
}

fn parse_vary(s: &str, inp: &Inputs) -> Outcome<(bool, usize)> {
    let bad = || Failure::Usage(format!("--vary expects xs:K or ys:K, got {s:?}"));
    let (side, k) = s.split_once(':').ok_or_else(bad)?;
    let k: usize = k.parse().map_err(|_| bad())?;
    let is_x = match side {
        "xs" => true,
        "ys" => false,
        _ => return Err(bad()),
    };
    let len = if is_x { inp.xs.len() } else { inp.ys.len() };
    if k == 0 || k > len {
        return Err(Failure::Input(format!("--vary index {k} out of range 1..={len}")));
    }
    Ok((is_x, k - 1))
}

fn execute(cmd: Command) -> Outcome<(Vec<u8>, Option<PathBuf>)> {
    match cmd {
        Command::Eval {
            mode,
            params,
            order,
            tol,
            output,
        } => {
            no_text(output.format)?;
            let inp = inputs(&params)?;
            let opts = eval_options(if mode == Mode::Series { None } else { tol })?;
            let (json, v, cond) = evaluate(mode, &inp, &opts, order, tol)?;
            let bytes = match output.format {
                Format::Csv => csv_bytes(
                    &["value_re", "value_im", "condition"],
                    &[vec![v.re.to_string(), v.im.to_string(), cond.to_string()]],
                )?,
                _ => json_bytes(&json)?,
            };
            Ok((bytes, output.out))
        }
        Command::Sweep {
            mode,
            params,
            vary,
            from,
            to,
            steps,
            tol,
            output,
        } => {
            no_text(output.format)?;
            if mode == Mode::Series {
                return Err(Failure::Usage("sweep supports thm1, cor12, compact and stable".into()));
            }
            if steps < 2 {
                return Err(Failure::Input("--steps must be at least 2".into()));
            }
            let mut inp = inputs(&params)?;
            let (is_x, k) = parse_vary(&vary, &inp)?;
            let opts = eval_options(tol)?;
            #[derive(Serialize)]
            struct Row {
                point: f64,
                value: Complex64,
                condition: f64,
            }
            let mut rows = Vec::with_capacity(steps);
            for s in 0..steps {
                let t = s as f64 / (steps - 1) as f64;
                let z = [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])];
                if is_x {
                    inp.xs[k] = z;
                } else {
                    inp.ys[k] = z;
                }
                let (_, value, condition) = evaluate(mode, &inp, &opts, 0, None)?;
                rows.push(Row {
                    point: t,
                    value,
                    condition,
                });
            }
            let bytes = match output.format {
                Format::Csv => csv_bytes(
                    &["point", "value_re", "value_im", "condition"],
                    &rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.point.to_string(),
                                r.value.re.to_string(),
                                r.value.im.to_string(),
                                r.condition.to_string(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                )?,
                _ => json_bytes(&rows)?,
            };
            Ok((bytes, output.out))
        }
        Command::Mc {
            mode,
            params,
            samples,
            seed,
            output,
        } => {
            no_text(output.format)?;
            let inp = inputs(&params)?;
            let seed = resolve_seed(seed.as_deref())?;
            let (est, json) = match mode {
                Mode::Thm1 => {
                    let prm = inp.spectral()?;
                    let e = mc_estimate(&prm, samples, seed)?;
                    (
                        e.clone(),
                        serde_json::to_value(Tagged {
                            mode,
                            result: e,
                            params: prm,
                        }),
                    )
                }
                Mode::Cor12 => {
                    let prm = inp.extended()?;
                    let e = mc_estimate_extended(&prm, samples, seed)?;
                    (
                        e.clone(),
                        serde_json::to_value(Tagged {
                            mode,
                            result: e,
                            params: prm,
                        }),
                    )
                }
                _ => return Err(Failure::Usage("mc supports --mode thm1 or cor12".into())),
            };
            let bytes = match output.format {
                Format::Csv => csv_bytes(
                    &["mean_re", "mean_im", "stderr", "samples", "seed"],
                    &[vec![
                        est.mean.re.to_string(),
                        est.mean.im.to_string(),
                        est.stderr.to_string(),
                        est.samples.to_string(),
                        est.seed.to_string(),
                    ]],
                )?,
                _ => json_bytes(&json.map_err(|e| Failure::Input(e.to_string()))?)?,
            };
            Ok((bytes, output.out))
        }
        Command::Verify { suite, seed, output } => {
            let suite = Suite::from_str(&suite).map_err(|e| Failure::Usage(e.to_string()))?;
            let seed = resolve_seed(seed.as_deref())?;
            let report = run_suite(&suite, seed);
            let bytes = match output.format {
                Format::Json => json_bytes(&report)?,
                Format::Text => format!("{report}\n").into_bytes(),
                Format::Csv => csv_bytes(
                    &["id", "name", "passed", "detail"],
                    &report
                        .outcomes
                        .iter()
                        .map(|o| {
                            vec![
                                o.id.to_string(),
                                o.name.to_string(),
                                o.passed.to_string(),
                                o.detail.clone(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                )?,
            };
            write_output(&bytes, output.out.as_deref())?;
            if !report.passed() {
                return Err(Failure::Verify);
            }
            Ok((Vec::new(), None))
        }
    }
}

fn write_output(bytes: &[u8], out: Option<&Path>) -> Outcome<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

const COMPLEX_FLAGS: [&str; 4] = ["--xs", "--ys", "--from", "--to"];

/// Rewrites the numeric values following a complex-valued flag into
/// `--flag=value` form, so leading minus signs are not read as flags.
fn normalize_args(argv: Vec<OsString>) -> Vec<OsString> {
    let mut out = Vec::with_capacity(argv.len());
    // the active flag, and whether it still lacks a value
    let mut current: Option<(&str, bool)> = None;
    for arg in argv {
        if let Some(s) = arg.to_str() {
            if let Some(&flag) = COMPLEX_FLAGS.iter().find(|&&f| f == s) {
                if let Some((prev, true)) = current {
                    out.push(OsString::from(prev));
                }
                current = Some((flag, true));
                continue;
            }
            if let Some((flag, _)) = current {
                if parse_complex(s).is_ok() {
                    out.push(OsString::from(format!("{flag}={s}")));
                    current = Some((flag, false));
                    continue;
                }
            }
        }
        // a bare flag is left for clap to report
        if let Some((flag, true)) = current {
            out.push(OsString::from(flag));
        }
        current = None;
        out.push(arg);
    }
    if let Some((flag, true)) = current {
        out.push(OsString::from(flag));
    }
    out
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = normalize_args(argv.into_iter().map(Into::into).collect());
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(cli.command).and_then(|(bytes, out)| {
        if bytes.is_empty() {
            Ok(())
        } else {
            write_output(&bytes, out.as_deref())
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            EXIT_INPUT
        }
        Err(Failure::Verify) => EXIT_VERIFY,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_flags() {
        assert_eq!(parse_complex("2,0"), Ok([2.0, 0.0]));
        assert_eq!(parse_complex("-0.5,1e-3"), Ok([-0.5, 1e-3]));
        assert_eq!(parse_complex("3"), Ok([3.0, 0.0]));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("a,b").is_err());
    }

    #[test]
    fn negative_values_do_not_swallow_flags() {
        let argv = [
            "ratiokit", "eval", "--p", "1", "--q", "1", "--N", "1", "--xs", "-2,0", "3,-1", "--ys", "0.5,0", "4,0",
        ];
        let cli = Cli::try_parse_from(normalize_args(argv.iter().map(OsString::from).collect())).unwrap();
        let Command::Eval { params, .. } = cli.command else {
            panic!()
        };
        assert_eq!(params.xs, vec![[-2.0, 0.0], [3.0, -1.0]]);
        assert_eq!(params.ys, vec![[0.5, 0.0], [4.0, 0.0]]);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["ratiokit", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["ratiokit", "eval", "--p", "1"]), EXIT_USAGE);
        assert_eq!(run(["ratiokit", "verify", "--suite", "nope"]), EXIT_USAGE);
    }
}
