//! Command-line front end. `run` parses argv, dispatches to the library and
//! renders JSON or CSV; the binary only prints the result and exits.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dualnum::{dual_parse, DualScalar, Rational};
use crate::elliptic::verify_sigma_solution;
use crate::error::{Error, Result};
use crate::hankel::{bordered_det, hankel_det, moments, params_from_moments, MomentSpec};
use crate::laurentpoly::laurent_verify;
use crate::shadow::{
    even_sequence, shadow_iii_from_map, shadow_iv_sequence, variation_of_parameters, Sequence,
    VoPState,
};
use crate::somos::{
    dtoda_invariant, dtoda_jacobian, dtoda_step, j_dual, MapState, SomosOrbit, SomosParams,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MATH: i32 = 3;

/// What a run produced: the exit code and the two output streams.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "dual-somos",
    version,
    about = "Exact dual-number Somos-4 toolkit"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate the dual recurrence.
    Somos(OrbitArgs),
    /// Shadow basis rows, or the general solution by variation of parameters.
    Shadow(ShadowArgs),
    /// Moments, Hankel determinants, bordered determinants and parameters.
    Hankel(HankelArgs),
    /// First integrals along an orbit.
    Invariants(OrbitArgs),
    /// Symbolic Laurent check of the dual iterates.
    LaurentVerify(LaurentArgs),
    /// Compare an orbit against its sigma-function solution.
    EllipticVerify(EllipticArgs),
    /// Iterate the continued-fraction map.
    Map(MapArgs),
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[arg(long, default_value = "1", value_parser = parse_dual, allow_hyphen_values = true)]
    alpha: DualScalar,
    #[arg(long, default_value = "1", value_parser = parse_dual, allow_hyphen_values = true)]
    beta: DualScalar,
    /// Four comma-separated dual literals.
    #[arg(long, default_value = "1,1,1,1", value_parser = parse_seed, allow_hyphen_values = true)]
    seed: Seed,
    /// Index of the first seed term.
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    seed_index: i64,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    from: i64,
    #[arg(long, default_value_t = 12, allow_hyphen_values = true)]
    to: i64,
}

#[derive(Args, Debug)]
struct ShadowArgs {
    /// Use the classical host 1, 1, 1, 1, 2, 3, 7, … (the default).
    #[arg(long, conflicts_with_all = ["alpha", "beta", "seed"])]
    classical: bool,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    alpha: Option<Rational>,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    beta: Option<Rational>,
    /// Host terms at indices -1..=2.
    #[arg(long, value_parser = parse_rational_seed, allow_hyphen_values = true)]
    seed: Option<RationalSeed>,
    /// Comma-separated subset of i,ii,iii,iv.
    #[arg(long, default_value = "i,ii,iii,iv", value_parser = parse_rows)]
    rows: Rows,
    #[arg(long, default_value_t = 12, allow_hyphen_values = true)]
    to: i64,
    /// Emit the general solution built by variation of parameters.
    #[arg(long)]
    vop: bool,
    #[arg(long, default_value = "-1", value_parser = parse_rational, allow_hyphen_values = true, requires = "vop")]
    j1: Rational,
    #[arg(long, default_value = "0", value_parser = parse_rational, allow_hyphen_values = true, requires = "vop")]
    alpha1: Rational,
    #[arg(long, default_value = "0", value_parser = parse_rational, allow_hyphen_values = true, requires = "vop")]
    beta1: Rational,
    /// Coefficients of y(i), y(ii), y(iii) at index -1.
    #[arg(long, default_value = "0,0,0", value_parser = parse_coeffs, allow_hyphen_values = true, requires = "vop")]
    coeffs: Coeffs,
}

#[derive(Args, Debug)]
struct HankelArgs {
    /// `â,b̂,ĉ,s₀,s₁` as dual literals; defaults to the classical moments.
    #[arg(long, value_parser = parse_spec, allow_hyphen_values = true)]
    spec: Option<MomentSpec>,
    /// Number of moments to list.
    #[arg(long, default_value_t = 10)]
    moments: usize,
    /// Inclusive range `a..b` of Hankel determinant sizes.
    #[arg(long, default_value = "0..4", value_parser = parse_range)]
    dets: Range,
    /// Inclusive range of bordered determinant sizes.
    #[arg(long, value_parser = parse_range)]
    bordered: Option<Range>,
}

#[derive(Args, Debug)]
struct LaurentArgs {
    #[arg(long, default_value_t = 10)]
    depth: i64,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
}

#[derive(Args, Debug)]
struct EllipticArgs {
    #[arg(long, default_value = "1", value_parser = parse_dual, allow_hyphen_values = true)]
    alpha: DualScalar,
    #[arg(long, default_value = "1", value_parser = parse_dual, allow_hyphen_values = true)]
    beta: DualScalar,
    #[arg(long, default_value = "1,1,1,1", value_parser = parse_seed, allow_hyphen_values = true)]
    seed: Seed,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    seed_index: i64,
    #[arg(long, default_value_t = 12, allow_hyphen_values = true)]
    to: i64,
}

#[derive(Args, Debug)]
struct MapArgs {
    #[arg(long, default_value = "-1", value_parser = parse_rational, allow_hyphen_values = true)]
    u: Rational,
    #[arg(long, default_value = "-3", value_parser = parse_rational, allow_hyphen_values = true)]
    f: Rational,
    #[arg(long, default_value = "-1", value_parser = parse_rational, allow_hyphen_values = true)]
    v: Rational,
    #[arg(long, default_value = "1", value_parser = parse_rational, allow_hyphen_values = true)]
    d: Rational,
    #[arg(long, default_value_t = 10)]
    steps: usize,
}

type Seed = [DualScalar; 4];
type RationalSeed = [Rational; 4];
type Coeffs = [Rational; 3];

#[derive(Clone, Debug)]
struct Rows(Vec<String>);

#[derive(Clone, Copy, Debug)]
struct Range(usize, usize);

fn parse_dual(s: &str) -> std::result::Result<DualScalar, String> {
    dual_parse(s.trim()).map_err(|e| e.to_string())
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let d = parse_dual(s)?;
    if d.odd.is_zero() {
        Ok(d.even)
    } else {
        Err(format!("expected a rational, got dual literal {d}"))
    }
}

fn parse_list<T, const N: usize>(
    s: &str,
    item: fn(&str) -> std::result::Result<T, String>,
) -> std::result::Result<[T; N], String> {
    let items = s
        .split(',')
        .map(item)
        .collect::<std::result::Result<Vec<T>, String>>()?;
    let got = items.len();
    items
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated values, got {got}"))
}

fn parse_seed(s: &str) -> std::result::Result<Seed, String> {
    parse_list(s, parse_dual)
}

fn parse_rational_seed(s: &str) -> std::result::Result<RationalSeed, String> {
    parse_list(s, parse_rational)
}

fn parse_coeffs(s: &str) -> std::result::Result<Coeffs, String> {
    parse_list(s, parse_rational)
}

fn parse_spec(s: &str) -> std::result::Result<MomentSpec, String> {
    MomentSpec::parse(s).map_err(|e| e.to_string())
}

fn parse_rows(s: &str) -> std::result::Result<Rows, String> {
    let rows: Vec<String> = s.split(',').map(|r| r.trim().to_string()).collect();
    match rows
        .iter()
        .find(|r| !matches!(r.as_str(), "i" | "ii" | "iii" | "iv"))
    {
        Some(bad) => Err(format!("unknown row {bad:?}; expected i, ii, iii or iv")),
        None => Ok(Rows(rows)),
    }
}

fn parse_range(s: &str) -> std::result::Result<Range, String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected a range a..b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("range start: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("range end: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(Range(a, b))
}

/// A rendered result: JSON document plus a CSV table of its main series.
struct Report {
    json: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.json).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = self.header.join(",");
                s.push('\n');
                for row in &self.rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s
            }
        }
    }
}

fn term_json(n: i64, x: &DualScalar) -> Value {
    json!({"n": n, "even": x.even.to_string(), "odd": x.odd.to_string()})
}

fn term_row(n: i64, x: &DualScalar) -> Vec<String> {
    vec![n.to_string(), x.even.to_string(), x.odd.to_string()]
}

fn dual_terms(terms: &[(i64, DualScalar)]) -> (Value, Vec<Vec<String>>) {
    (
        Value::Array(terms.iter().map(|(n, x)| term_json(*n, x)).collect()),
        terms.iter().map(|(n, x)| term_row(*n, x)).collect(),
    )
}

fn seq_json(seq: &Sequence) -> Value {
    Value::Array(
        seq.iter()
            .map(|(n, v)| json!({"n": n, "value": v.to_string()}))
            .collect(),
    )
}

fn orbit_from(args: &OrbitArgs) -> Result<SomosOrbit> {
    let params = SomosParams::new(args.alpha.clone(), args.beta.clone())?;
    let mut orbit = SomosOrbit::new(params, args.seed_index, args.seed.clone());
    if args.from <= args.to {
        orbit.extend_to(args.from, args.to)?;
    }
    Ok(orbit)
}

fn cmd_somos(args: &OrbitArgs) -> Result<Report> {
    let orbit = orbit_from(args)?;
    let terms: Vec<(i64, DualScalar)> = (args.from..=args.to)
        .map(|n| orbit.term(n).map(|x| (n, x.clone())))
        .collect::<Result<_>>()?;
    let (series, rows) = dual_terms(&terms);
    Ok(Report {
        json: json!({
            "alpha": args.alpha.to_string(),
            "beta": args.beta.to_string(),
            "seed_index": args.seed_index,
            "seed": args.seed.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "terms": series,
        }),
        header: vec!["n", "even", "odd"],
        rows,
    })
}

fn cmd_invariants(args: &OrbitArgs) -> Result<Report> {
    let orbit = orbit_from(args)?;
    let mut terms = Vec::new();
    for n in args.from..=args.to - 3 {
        terms.push((n, j_dual(&orbit.window(n)?, &orbit.params)?));
    }
    let (series, rows) = dual_terms(&terms);
    // H along the map orbit, when the map route exists for this host
    let map = if orbit.lo() <= -1 && orbit.hi() >= 3 {
        MapState::from_orbit(&orbit).ok()
    } else {
        None
    };
    let h = map.map(|mut s| {
        let mut values = vec![json!({"n": 1, "value": dtoda_invariant(&s).to_string()})];
        for n in 2..=args.to.max(2) {
            match dtoda_step(&s) {
                Ok(next) => s = next,
                Err(_) => break,
            }
            values.push(json!({"n": n, "value": dtoda_invariant(&s).to_string()}));
        }
        Value::Array(values)
    });
    Ok(Report {
        json: json!({
            "alpha": args.alpha.to_string(),
            "beta": args.beta.to_string(),
            "j": series,
            "h": h.unwrap_or(Value::Null),
        }),
        header: vec!["n", "even", "odd"],
        rows,
    })
}

fn cmd_shadow(args: &ShadowArgs) -> Result<Report> {
    let one = || DualScalar::one();
    let (alpha, beta, seed) = if args.classical {
        (int_r(1), int_r(1), [one(), one(), one(), one()])
    } else {
        let seed = match &args.seed {
            Some(s) => s.clone().map(DualScalar::from_even),
            None => [one(), one(), one(), one()],
        };
        (
            args.alpha.clone().unwrap_or_else(|| int_r(1)),
            args.beta.clone().unwrap_or_else(|| int_r(1)),
            seed,
        )
    };
    let hi = args.to;
    if hi < 2 {
        return Err(Error::IndexOutOfRange { n: hi });
    }
    let host_params = SomosParams::new(
        DualScalar::from_even(alpha.clone()),
        DualScalar::from_even(beta.clone()),
    )?;
    let mut host = SomosOrbit::new(host_params.clone(), -1, seed);
    host.extend_to(-1, hi.max(3))?;

    let y_i = even_sequence(&host).slice(-1, hi)?;
    let y_ii = Sequence::new(-1, y_i.iter().map(|(n, x)| int_r(n) * x).collect());
    let need_iii = args.vop || args.rows.0.iter().any(|r| r == "iii");
    let y_iii = if need_iii {
        let map0 = MapState::from_orbit(&host)?;
        Some(shadow_iii_from_map(&host, &map0)?.slice(-1, hi)?)
    } else {
        None
    };

    let mut json_rows = serde_json::Map::new();
    let mut columns: Vec<(&'static str, Sequence)> = Vec::new();
    for name in &args.rows.0 {
        let seq = match name.as_str() {
            "i" => y_i.clone(),
            "ii" => y_ii.clone(),
            "iii" => y_iii.clone().expect("computed above"),
            _ => {
                let zero = Rational::zero;
                shadow_iv_sequence(
                    &host,
                    -1,
                    [zero(), zero(), zero()],
                    &int_r(-1),
                    &host_params,
                    hi,
                )?
            }
        };
        json_rows.insert(name.clone(), seq_json(&seq));
        columns.push((row_label(name), seq));
    }

    let mut doc = json!({
        "alpha": alpha.to_string(),
        "beta": beta.to_string(),
        "rows": Value::Object(json_rows),
    });
    if args.vop {
        let params = SomosParams::new(
            DualScalar::new(alpha, args.alpha1.clone()),
            DualScalar::new(beta, args.beta1.clone()),
        )?;
        let basis = [&y_i, &y_ii, y_iii.as_ref().expect("computed above")];
        let seed = VoPState {
            f: args.coeffs.clone(),
            n: -1,
        };
        let general = variation_of_parameters(&host, basis, &args.j1, &params, &seed, hi)?;
        doc["general"] = json!({
            "j1": args.j1.to_string(),
            "alpha1": args.alpha1.to_string(),
            "beta1": args.beta1.to_string(),
            "coeffs": args.coeffs.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "values": seq_json(&general),
        });
        columns.push(("general", general));
    }

    let mut header = vec!["n"];
    header.extend(columns.iter().map(|(name, _)| *name));
    let rows = (-1..=hi)
        .map(|n| {
            let mut row = vec![n.to_string()];
            for (_, seq) in &columns {
                row.push(seq.get(n).map(ToString::to_string).unwrap_or_default());
            }
            row
        })
        .collect();
    Ok(Report {
        json: doc,
        header,
        rows,
    })
}

fn row_label(name: &str) -> &'static str {
    match name {
        "i" => "i",
        "ii" => "ii",
        "iii" => "iii",
        _ => "iv",
    }
}

fn int_r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn cmd_hankel(args: &HankelArgs) -> Result<Report> {
    let spec = args.spec.clone().unwrap_or_else(MomentSpec::classical);
    let top_det = args.dets.1;
    let top_bordered = args.bordered.map_or(0, |r| r.1 + 1);
    let count = args.moments.max(2 * top_det + 2).max(2 * top_bordered + 2);
    let m = moments(&spec, count);
    let listed: Vec<(i64, DualScalar)> =
        m.s.iter()
            .take(args.moments)
            .enumerate()
            .map(|(k, s)| (k as i64, s.clone()))
            .collect();
    let mut dets = Vec::new();
    for n in args.dets.0..=args.dets.1 {
        dets.push((n as i64, hankel_det(&m, n)?));
    }
    let bordered = match args.bordered {
        Some(Range(a, b)) => {
            let mut out = Vec::new();
            for n in a..=b {
                out.push((n as i64, bordered_det(&m, n)?));
            }
            Some(out)
        }
        None => None,
    };
    let p = params_from_moments(&spec);
    let (moment_json, _) = dual_terms(&listed);
    let (det_json, rows) = dual_terms(&dets);
    Ok(Report {
        json: json!({
            "spec": spec.to_string(),
            "moments": moment_json,
            "dets": det_json,
            "bordered": bordered.map(|b| dual_terms(&b).0),
            "params": {
                "u": p.u.to_string(),
                "f": p.f.to_string(),
                "alpha": p.alpha.to_string(),
                "beta": p.beta.to_string(),
                "j": p.j.to_string(),
            },
        }),
        header: vec!["n", "even", "odd"],
        rows,
    })
}

fn cmd_laurent(args: &LaurentArgs) -> Result<(Report, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.rng_seed);
    let report = laurent_verify(args.depth, args.samples, &mut rng)?;
    let rows = report
        .iterates
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.even_terms.to_string(),
                r.odd_terms.to_string(),
                r.even_pure.to_string(),
                r.odd_affine_linear.to_string(),
            ]
        })
        .collect();
    let passed = report.passed;
    let json = serde_json::to_value(&report).expect("report serializes");
    Ok((
        Report {
            json,
            header: vec![
                "n",
                "even_terms",
                "odd_terms",
                "even_pure",
                "odd_affine_linear",
            ],
            rows,
        },
        passed,
    ))
}

fn cmd_elliptic(args: &EllipticArgs) -> Result<(Report, bool)> {
    let params = SomosParams::new(args.alpha.clone(), args.beta.clone())?;
    let orbit = SomosOrbit::new(params, args.seed_index, args.seed.clone());
    let report = verify_sigma_solution(&orbit, args.to)?;
    let rows = report
        .terms
        .iter()
        .map(|t| {
            vec![
                t.n.to_string(),
                t.exact.clone(),
                t.predicted.re.clone(),
                t.predicted.im.clone(),
                format!("{:e}", t.rel_err),
            ]
        })
        .collect();
    let passed = report.passed;
    let json = serde_json::to_value(&report).expect("report serializes");
    Ok((
        Report {
            json,
            header: vec!["n", "exact", "re", "im", "rel_err"],
            rows,
        },
        passed,
    ))
}

fn cmd_map(args: &MapArgs) -> Result<Report> {
    let mut s = MapState::new(
        args.u.clone(),
        args.f.clone(),
        args.v.clone(),
        args.d.clone(),
    );
    let mut states = Vec::new();
    let mut rows = Vec::new();
    for k in 0..=args.steps {
        if k > 0 {
            s = dtoda_step(&s)?;
        }
        let h = dtoda_invariant(&s);
        let jac = dtoda_jacobian(&s)?;
        states.push(json!({
            "step": k,
            "v": s.v.to_string(),
            "d": s.d.to_string(),
            "h": h.to_string(),
            "jacobian": jac.to_string(),
        }));
        rows.push(vec![
            k.to_string(),
            s.v.to_string(),
            s.d.to_string(),
            h.to_string(),
            jac.to_string(),
        ]);
    }
    Ok(Report {
        json: json!({"u": args.u.to_string(), "f": args.f.to_string(), "states": states}),
        header: vec!["step", "v", "d", "h", "jacobian"],
        rows,
    })
}

fn diagnostic(e: &Error) -> String {
    let mut doc = json!({"error": e.kind(), "message": e.to_string()});
    match e {
        Error::VanishingEvenPart { index: Some(n) }
        | Error::IndexOutOfRange { n }
        | Error::SingularLeadingCoefficient { n }
        | Error::SingularCasoratian { n } => doc["index"] = json!(n),
        Error::BranchFailure { best } => doc["best_residual"] = json!(best),
        _ => {}
    }
    let mut s = doc.to_string();
    s.push('\n');
    s
}

fn failed_check(what: &str) -> String {
    let mut s =
        json!({"error": "VerificationFailed", "message": format!("{what} check did not pass")})
            .to_string();
    s.push('\n');
    s
}

/// Run one command line (`argv[0]` is the program name).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Somos(a) => cmd_somos(a).map(|r| (r, None)),
        Command::Invariants(a) => cmd_invariants(a).map(|r| (r, None)),
        Command::Shadow(a) => cmd_shadow(a).map(|r| (r, None)),
        Command::Hankel(a) => cmd_hankel(a).map(|r| (r, None)),
        Command::LaurentVerify(a) => cmd_laurent(a).map(|(r, ok)| (r, (!ok).then_some("laurent"))),
        Command::EllipticVerify(a) => {
            cmd_elliptic(a).map(|(r, ok)| (r, (!ok).then_some("elliptic")))
        }
        Command::Map(a) => cmd_map(a).map(|r| (r, None)),
    };
    match result {
        Ok((report, None)) => Outcome {
            code: EXIT_OK,
            stdout: report.render(cli.format),
            stderr: String::new(),
        },
        Ok((report, Some(what))) => Outcome {
            code: EXIT_MATH,
            stdout: report.render(cli.format),
            stderr: failed_check(what),
        },
        Err(e) => Outcome {
            code: EXIT_MATH,
            stdout: String::new(),
            stderr: diagnostic(&e),
        },
    }
}
