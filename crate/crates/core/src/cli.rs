//! Command-line front end for the `mgc` binary.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::curve::{ArcLengthMap, Curve, CurveSpec};
use crate::error::{Error, Result};
use crate::family::{self, FamilyCurve, FamilyParams};
use crate::frenet::{apparatus_along, frenet_apparatus, s_grid, FrenetApparatus, FrenetTol, K3_CONVENTION};
use crate::lorentz::{classify, inner, Vec4, NULL_TOL};
use crate::mannheim::{self, MatePair, Thresholds};
use crate::report::{csv_f64, Json};
use crate::spline::SplineCurve;

#[derive(Debug, Parser)]
#[command(name = "mgc", version, about = "Frenet apparatus and generalized Mannheim curves in Minkowski space-time")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for per-sample work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Causal character of a vector.
    Classify {
        /// Comma-separated 4-tuple, e.g. "1,1,0,0".
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        /// Relative null band.
        #[arg(long, default_value_t = NULL_TOL)]
        tol: f64,
    },
    /// Frenet apparatus at one arc length or along the curve.
    Frenet {
        #[command(flatten)]
        source: Source,
        /// Arc length measured from the start of the domain.
        #[arg(long, conflicts_with = "samples", allow_hyphen_values = true)]
        at: Option<f64>,
        /// Number of equally spaced arc-length samples.
        #[arg(long)]
        samples: Option<usize>,
        /// Absolute degeneracy threshold for k1, k2, |k3| (default 1e-8 * max(1, curve scale)).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Mannheim condition, mates and their verification.
    #[command(subcommand)]
    Mannheim(MannheimCmd),
    /// The explicit family of generalized Mannheim curves.
    #[command(subcommand)]
    Family(FamilyCmd),
}

#[derive(Debug, Subcommand)]
enum MannheimCmd {
    /// Decide k1 = -alpha (mu1 k1^2 + mu2 k2^2) with constant alpha.
    Check {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Bound on the relative spread of the pointwise alpha.
        #[arg(long, default_value_t = 1e-3)]
        spread: f64,
        /// Bound on the normalized condition residual.
        #[arg(long, default_value_t = 1e-6)]
        residual: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Construct the mate c + alpha e2.
    Mate {
        #[command(flatten)]
        mate: MateArgs,
    },
    /// Check that e2 lies in the plane of e3*, e4* along the pair.
    Verify {
        #[command(flatten)]
        mate: MateArgs,
        /// Interior correspondence points.
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Bound on |<e2, e1*>| and |<e2, e2*>|.
        #[arg(long, default_value_t = 1e-4)]
        residual: f64,
    },
    /// Constant-curvature criterion for mates with e4* parallel to e2.
    Thm33 {
        #[command(flatten)]
        mate: MateArgs,
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Bound on |k1'| and |k2'| relative to max(1, max k).
        #[arg(long, default_value_t = 1e-6)]
        residual: f64,
        /// Bound on the Euclidean defect of e4* = -+e2.
        #[arg(long, default_value_t = 1e-3)]
        hyp_tol: f64,
    },
}

#[derive(Debug, Args)]
struct MateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Spline nodes for the mate (at least 200 are used).
    #[arg(long, default_value_t = mannheim::MIN_MATE_NODES)]
    samples: usize,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum FamilyCmd {
    /// Tabulate a member: u,x1,x2,x3,x4,f,k1_closed,ksq_closed.
    Generate {
        #[command(flatten)]
        member: Member,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Check k1 = alpha (k1^2 + k2^2) by closed forms and by the Frenet pipeline.
    Verify {
        #[command(flatten)]
        member: Member,
        #[arg(long, default_value_t = 50)]
        probes: usize,
    },
}

#[derive(Debug, Args)]
struct Member {
    #[arg(long, allow_hyphen_values = true)]
    g: String,
    #[arg(long, allow_hyphen_values = true)]
    h: String,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Parameter interval as lo:hi.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    range: (f64, f64),
    /// Quadrature cells for the position table.
    #[arg(long, default_value_t = family::DEFAULT_NODES)]
    nodes: usize,
}

impl Member {
    fn params(&self) -> Result<FamilyParams> {
        FamilyParams::new(self.alpha, crate::Expr::parse(&self.g)?, crate::Expr::parse(&self.h)?, self.range, self.nodes)
    }
}

/// Where a base curve comes from: a curve document, a sample table, or a
/// member of the family.
#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
struct Source {
    /// Curve JSON document.
    #[arg(long, group = "src")]
    curve: Option<PathBuf>,
    /// Sample table with header u,x1,x2,x3,x4 (fitted by natural cubic splines).
    #[arg(long, group = "src")]
    curve_csv: Option<PathBuf>,
    /// Family member g(u); needs --h, --family-alpha and --range.
    #[arg(long, group = "src", requires_all = ["h", "family_alpha", "range"], allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, requires = "g", allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long, requires = "g", allow_hyphen_values = true)]
    family_alpha: Option<f64>,
    #[arg(long, requires = "g", value_parser = parse_range, allow_hyphen_values = true)]
    range: Option<(f64, f64)>,
}

enum Loaded {
    Spec(CurveSpec),
    Spline(SplineCurve),
    Family(FamilyCurve),
}

impl Loaded {
    fn curve(&self) -> &dyn Curve {
        match self {
            Loaded::Spec(c) => c,
            Loaded::Spline(c) => c,
            Loaded::Family(c) => c,
        }
    }

    /// Positions of family members can be tiny or huge; their curvature
    /// thresholds default to cancellation-only.
    fn default_tol(&self) -> FrenetTol {
        match self {
            Loaded::Family(_) => FrenetTol::new(0.0),
            _ => FrenetTol::for_curve(self.curve()),
        }
    }

    fn tol(&self, abs: Option<f64>) -> Result<FrenetTol> {
        match abs {
            Some(t) if !(t >= 0.0) => Err(Error::InvalidInput(format!("--tol must be nonnegative, got {t}"))),
            Some(t) => Ok(FrenetTol::new(t)),
            None => Ok(self.default_tol()),
        }
    }
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("bad lower bound `{a}`: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("bad upper bound `{b}`: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("range {s} must satisfy lo < hi"));
    }
    Ok((lo, hi))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_samples(path: &Path) -> Result<SplineCurve> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ["u", "x1", "x2", "x3", "x4"] {
        return Err(Error::InvalidInput(format!("expected header u,x1,x2,x3,x4, got {}", header.join(","))));
    }
    let mut u = Vec::new();
    let mut x = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidInput(e.to_string()))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("row {}: {e}", line + 2)))?;
        u.push(vals[0]);
        x.push(Vec4::new(vals[1], vals[2], vals[3], vals[4]));
    }
    if u.len() < 4 {
        return Err(Error::InvalidInput("a sample table needs at least 4 rows".into()));
    }
    SplineCurve::natural_cubic(&u, &x)
}

fn load(src: &Source) -> Result<Loaded> {
    if let Some(p) = &src.curve {
        return Ok(Loaded::Spec(CurveSpec::from_json(&read(p)?)?));
    }
    if let Some(p) = &src.curve_csv {
        return Ok(Loaded::Spline(read_samples(p)?));
    }
    let (Some(g), Some(h), Some(alpha), Some(range)) = (&src.g, &src.h, src.family_alpha, src.range) else {
        return Err(Error::InvalidInput("no curve given".into()));
    };
    let p = FamilyParams::new(alpha, crate::Expr::parse(g)?, crate::Expr::parse(h)?, range, family::DEFAULT_NODES)?;
    Ok(Loaded::Family(family::generate_curve(&p)?))
}

enum Output {
    Json(Json),
    Csv(Vec<String>, Vec<Vec<String>>),
}

impl Output {
    fn render(&self) -> String {
        match self {
            Output::Json(j) => format!("{j}\n"),
            Output::Csv(head, rows) => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(head).expect("in-memory csv");
                for r in rows {
                    w.write_record(r).expect("in-memory csv");
                }
                String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
            }
        }
    }
}

fn frame_json(app: &FrenetApparatus) -> Json {
    Json::obj()
        .with("s", app.s)
        .with("case", app.case.name())
        .with("e", app.e.iter().map(|&v| Json::from(v)).collect::<Vec<_>>())
        .with("k", Json::nums(&app.k))
        .with("mu", Json::signs(&app.mu))
        .with("eps", Json::signs(&app.eps))
        .with("det", app.det())
        .with("u", app.u)
        .with("orient", app.orient as i64)
}

fn frame_row(app: &FrenetApparatus) -> Vec<String> {
    let mut row = vec![csv_f64(app.s), csv_f64(app.u), app.case.name().to_string()];
    row.extend(app.k.iter().map(|&k| csv_f64(k)));
    row.push(csv_f64(app.det()));
    for e in &app.e {
        row.extend(e.to_array().iter().map(|&x| csv_f64(x)));
    }
    row
}

fn frame_header() -> Vec<String> {
    let mut h: Vec<String> = ["s", "u", "case", "k1", "k2", "k3", "det"].iter().map(|s| s.to_string()).collect();
    for i in 1..=4 {
        for j in 1..=4 {
            h.push(format!("e{i}_{j}"));
        }
    }
    h.push("error".into());
    h
}

fn error_json(e: &Error) -> Json {
    Json::obj().with("error", e.code()).with("detail", e.to_string())
}

fn unsupported(what: &str) -> Error {
    Error::InvalidInput(format!("CSV output is not available for {what}"))
}

fn cmd_frenet(src: &Source, at: Option<f64>, samples: Option<usize>, tol: Option<f64>, fmt: Format) -> Result<Output> {
    let loaded = load(src)?;
    let c = loaded.curve();
    let tol = loaded.tol(tol)?;
    let reduced = c.exact_order() < 5;
    let m = ArcLengthMap::new(c)?;
    match (at, samples) {
        (Some(s), None) => {
            let app = frenet_apparatus(c, &m, s, &tol)?;
            if fmt == Format::Csv {
                let mut row = frame_row(&app);
                row.push(String::new());
                return Ok(Output::Csv(frame_header(), vec![row]));
            }
            let mut j = frame_json(&app);
            if let Json::Obj(f) = &mut j {
                f.push(("k3_convention".into(), K3_CONVENTION.into()));
                f.push(("reduced_accuracy".into(), reduced.into()));
            }
            Ok(Output::Json(j))
        }
        (None, Some(n)) => {
            if n < 2 {
                return Err(Error::InvalidInput("--samples must be at least 2".into()));
            }
            let along = apparatus_along(c, &m, &s_grid(&m, n), &tol);
            if fmt == Format::Csv {
                let rows = along
                    .iter()
                    .map(|a| match &a.result {
                        Ok(app) => {
                            let mut r = frame_row(app);
                            r.push(String::new());
                            r
                        }
                        Err(e) => {
                            let mut r = vec![csv_f64(a.s)];
                            r.resize(frame_header().len() - 1, String::new());
                            r.push(e.code().to_string());
                            r
                        }
                    })
                    .collect();
                return Ok(Output::Csv(frame_header(), rows));
            }
            let recs: Vec<Json> = along
                .iter()
                .map(|a| match &a.result {
                    Ok(app) => frame_json(app)
                        .with("case_change", a.case_change)
                        .with("misaligned", a.misaligned.to_vec()),
                    Err(e) => Json::obj().with("s", a.s).with("error", e.code()).with("detail", e.to_string()),
                })
                .collect();
            Ok(Output::Json(
                Json::obj()
                    .with("k3_convention", K3_CONVENTION)
                    .with("reduced_accuracy", reduced)
                    .with("samples", recs),
            ))
        }
        _ => Err(Error::InvalidInput("give exactly one of --at and --samples".into())),
    }
}

fn build_mate<'a>(loaded: &'a Loaded, a: &MateArgs) -> Result<(MatePair<'a>, FrenetTol)> {
    let tol = loaded.tol(a.tol)?;
    Ok((mannheim::construct_mate(loaded.curve(), a.alpha, a.samples, &tol)?, tol))
}

fn cmd_mannheim(cmd: &MannheimCmd, fmt: Format) -> Result<Output> {
    match cmd {
        MannheimCmd::Check { source, samples, spread, residual, tol } => {
            let loaded = load(source)?;
            let thr = Thresholds { spread: *spread, residual: *residual };
            if !(thr.spread > 0.0 && thr.residual > 0.0) {
                return Err(Error::InvalidInput("thresholds must be positive".into()));
            }
            let r = mannheim::check_condition(loaded.curve(), *samples, &thr, &loaded.tol(*tol)?)?;
            Ok(match fmt {
                Format::Json => Output::Json(r.to_json()),
                Format::Csv => Output::Csv(
                    ["s", "k1", "k2", "alpha", "residual"].map(String::from).to_vec(),
                    r.samples
                        .iter()
                        .map(|x| {
                            vec![
                                csv_f64(x.s),
                                csv_f64(x.k1),
                                csv_f64(x.k2),
                                x.alpha.map(csv_f64).unwrap_or_default(),
                                csv_f64(x.residual),
                            ]
                        })
                        .collect(),
                ),
            })
        }
        MannheimCmd::Mate { mate } => {
            let loaded = load(&mate.source)?;
            let (pair, _) = build_mate(&loaded, mate)?;
            match fmt {
                Format::Json => Ok(Output::Json(pair.to_json()?)),
                Format::Csv => {
                    let head = ["u", "s", "s_star", "x1", "x2", "x3", "x4", "speed"].map(String::from).to_vec();
                    let mut rows = Vec::with_capacity(pair.table.len());
                    for t in &pair.table {
                        let x = pair.mate.position(t.u)?;
                        let mut r = vec![csv_f64(t.u), csv_f64(t.s), csv_f64(t.s_star)];
                        r.extend(x.to_array().iter().map(|&v| csv_f64(v)));
                        r.push(csv_f64(pair.mate_speed_at(t.u)?));
                        rows.push(r);
                    }
                    Ok(Output::Csv(head, rows))
                }
            }
        }
        MannheimCmd::Verify { mate, points, residual } => {
            let loaded = load(&mate.source)?;
            let (pair, tol) = build_mate(&loaded, mate)?;
            let r = mannheim::verify_pair(&pair, *points, *residual, &tol)?;
            Ok(match fmt {
                Format::Json => Output::Json(r.to_json()),
                Format::Csv => Output::Csv(
                    ["u", "s", "s_star", "e2_e1star", "e2_e2star"].map(String::from).to_vec(),
                    r.samples
                        .iter()
                        .map(|x| [x.u, x.s, x.s_star, x.r1, x.r2].iter().map(|&v| csv_f64(v)).collect())
                        .collect(),
                ),
            })
        }
        MannheimCmd::Thm33 { mate, points, residual, hyp_tol } => {
            if fmt == Format::Csv {
                return Err(unsupported("mannheim thm33"));
            }
            let loaded = load(&mate.source)?;
            let (pair, tol) = build_mate(&loaded, mate)?;
            let r = mannheim::verify_thm33(&pair, *points, *residual, *hyp_tol, &tol)?;
            Ok(Output::Json(r.to_json()))
        }
    }
}

fn cmd_family(cmd: &FamilyCmd, fmt: Option<Format>) -> Result<Output> {
    match cmd {
        FamilyCmd::Generate { member, samples } => {
            if *samples < 2 {
                return Err(Error::InvalidInput("--samples must be at least 2".into()));
            }
            let p = member.params()?;
            let c = family::generate_curve(&p)?;
            let (lo, hi) = p.domain;
            let mut rows = Vec::with_capacity(*samples);
            let mut recs = Vec::with_capacity(*samples);
            for i in 0..*samples {
                let u = if i + 1 == *samples { hi } else { lo + (hi - lo) * i as f64 / (*samples - 1) as f64 };
                let x = c.position(u)?;
                let cf = family::closed_forms(&p, u)?;
                let vals = [u, x[0], x[1], x[2], x[3], cf.f, cf.k1, cf.ksq];
                rows.push(vals.iter().map(|&v| csv_f64(v)).collect());
                recs.push(
                    Json::obj()
                        .with("u", u)
                        .with("x", x)
                        .with("f", cf.f)
                        .with("k1_closed", cf.k1)
                        .with("ksq_closed", cf.ksq),
                );
            }
            Ok(match fmt.unwrap_or(Format::Csv) {
                Format::Csv => Output::Csv(
                    ["u", "x1", "x2", "x3", "x4", "f", "k1_closed", "ksq_closed"].map(String::from).to_vec(),
                    rows,
                ),
                Format::Json => Output::Json(Json::Arr(recs)),
            })
        }
        FamilyCmd::Verify { member, probes } => {
            let p = member.params()?;
            let r = family::verify_family(&p, *probes)?;
            Ok(match fmt.unwrap_or(Format::Json) {
                Format::Json => Output::Json(r.to_json()),
                Format::Csv => Output::Csv(
                    [
                        "u",
                        "f",
                        "qtilde",
                        "k1_closed",
                        "ksq_closed",
                        "k1_numeric",
                        "ksq_numeric",
                        "closed_residual",
                        "numeric_residual",
                        "case",
                    ]
                    .map(String::from)
                    .to_vec(),
                    r.probes
                        .iter()
                        .map(|q| {
                            let mut row: Vec<String> = [
                                q.u,
                                q.f,
                                q.qtilde,
                                q.k1_closed,
                                q.ksq_closed,
                                q.k1_numeric,
                                q.ksq_numeric,
                                q.closed_residual,
                                q.numeric_residual,
                            ]
                            .iter()
                            .map(|&v| csv_f64(v))
                            .collect();
                            row.push(q.case.name().to_string());
                            row
                        })
                        .collect(),
                ),
            })
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Output> {
    match &cli.cmd {
        Cmd::Classify { vector, tol } => {
            if !(*tol > 0.0) {
                return Err(Error::InvalidInput(format!("--tol must be positive, got {tol}")));
            }
            let v: Vec4 = vector.parse()?;
            let cls = classify(v, *tol);
            let q = inner(v, v);
            Ok(match cli.format.unwrap_or(Format::Json) {
                Format::Json => Output::Json(Json::obj().with("class", cls.kind.name()).with("q", q)),
                Format::Csv => Output::Csv(vec!["class".into(), "q".into()], vec![vec![cls.kind.name().into(), csv_f64(q)]]),
            })
        }
        Cmd::Frenet { source, at, samples, tol } => {
            cmd_frenet(source, *at, *samples, *tol, cli.format.unwrap_or(Format::Json))
        }
        Cmd::Mannheim(m) => cmd_mannheim(m, cli.format.unwrap_or(Format::Json)),
        Cmd::Family(f) => cmd_family(f, cli.format),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code: 0 on a completed run whatever the verdict, 2 on input errors, 3 on
/// numerical failures.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let detail = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let j = Json::obj().with("error", "Usage").with("detail", detail);
            let _ = writeln!(stderr, "{j}");
            return 2;
        }
    };

    let result = match cli.threads {
        Some(0) => Err(Error::InvalidInput("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::InvalidInput(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };

    let written = result.and_then(|out| {
        let text = out.render();
        match &cli.out {
            Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
            None => stdout.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
        }
    });
    match written {
        Ok(()) => 0,
        Err(e) => {
            log::debug!("failed: {e:?}");
            let _ = writeln!(stderr, "{}", error_json(&e));
            if e.is_input_error() {
                2
            } else {
                3
            }
        }
    }
}

/// Diagnostics on stderr, filtered by `MGC_LOG` (default `error`).
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("MGC_LOG", "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("mgc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn classify_null() {
        let (code, out, _) = run_args(&["classify", "--vector", "1,1,0,0"]);
        assert_eq!(code, 0);
        assert_eq!(out, "{\"class\":\"Null\",\"q\":0.0000000000000000e0}\n");
        let (code, out, _) = run_args(&["classify", "--vector", "-2,1,0,0", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, "class,q\nTimelike,-3.0000000000000000e0\n");
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, out, err) = run_args(&["classify"]);
        assert_eq!((code, out.as_str()), (2, ""));
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "Usage");
        let (code, _, err) = run_args(&["classify", "--vector", "1,2,3"]);
        assert_eq!(code, 2);
        assert!(err.contains("InvalidInput"));
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("family"));
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-1:2.5"), Ok((-1.0, 2.5)));
        assert!(parse_range("2:1").is_err());
        assert!(parse_range("1").is_err());
    }

    #[test]
    fn family_singular_exit_3() {
        let (code, _, err) = run_args(&[
            "family", "generate", "--g", "u", "--h", "u^2/4", "--alpha", "0.5", "--range", "0:2",
        ]);
        assert_eq!(code, 3);
        assert!(err.starts_with("{\"error\":\"SingularInner\""));
    }

    #[test]
    fn family_generate_csv() {
        let (code, out, _) = run_args(&[
            "family", "generate", "--g", "0", "--h", "0", "--alpha", "1", "--range", "0:1", "--samples", "3",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "u,x1,x2,x3,x4,f,k1_closed,ksq_closed");
        assert_eq!(lines.len(), 4);
        let last: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
        assert!((last[1] - (1f64.cosh() - 1.0)).abs() < 1e-12);
        assert!((last[2] - 1f64.sinh()).abs() < 1e-12);
    }

    #[test]
    fn threads_flag() {
        let (code, a, _) = run_args(&["--threads", "2", "classify", "--vector", "0,1,0,0"]);
        assert_eq!(code, 0);
        let (_, b, _) = run_args(&["classify", "--vector", "0,1,0,0"]);
        assert_eq!(a, b);
        let (code, _, _) = run_args(&["--threads", "0", "classify", "--vector", "0,1,0,0"]);
        assert_eq!(code, 2);
    }
}
