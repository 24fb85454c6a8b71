//! Command-line front end: spec files in, certificates and reports out.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error (bad flags, unreadable or malformed spec) |
//! | 2 | infeasible input: the measure gap is not positive |
//! | 3 | verification failed, or an oracle disagreed |
//! | 4 | construction failed |
//! | 5 | breakpoint budget exceeded |
//! | 6 | search depth exhausted |
//! | 7 | return time above the guard |

pub mod cert;
pub mod oracle;
pub mod spec;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dyncomp::comparison::{birkhoff_certificate, clopen_comparison, dynamic_comparison, verify_witness, ComparisonWitness, VerificationReport};
use dyncomp::regions::arcs::ArcSet;
use dyncomp::smallness::{self, verify_circle_smallness, verify_leftover_cover, verify_thin_cover, Verdict};
use dyncomp::towers::{build_tower, RokhlinTower};
use dyncomp::{Error, Region, Scalar, System};

use cert::{parse_certificate, Body, Certificate};
use spec::{emit_region, parse_spec, radicand, SpecFile, Tokens};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GAP: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_CONSTRUCTION: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;
pub const EXIT_SEARCH: i32 = 6;
pub const EXIT_RETURN: i32 = 7;

#[derive(Parser, Debug)]
#[command(name = "dyncomp", version, about = "Exact towers, covers and comparison witnesses for minimal rotations and odometers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SpecArg {
    /// Input spec file.
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rokhlin tower over a closed base (`--base LO HI` or region `Y`).
    Tower {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, num_args = 2..=6, allow_hyphen_values = true)]
        base: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tower refined by the regions whose names start with `P`.
    Refine {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, num_args = 2..=6, allow_hyphen_values = true)]
        base: Option<Vec<String>>,
    },
    /// Comparison witness for closed `C` into open `U`.
    Compare {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Comparison of clopen `A` into clopen `B` on an odometer.
    ClopenCompare {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-checks a certificate against the spec it was made from.
    Verify {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Uniform Birkhoff threshold for `F` and `E`.
    Birkhoff {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        sigma_fraction: Option<String>,
    },
    /// Smallness constant of the finite set `F`.
    Smallness {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Thin cover of the finite set `F` inside `U`; with `--epsilon`, a
    /// leftover cover of total measure below epsilon.
    Thincover {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force cross-checks.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Integer rotation by the convergent `p/q` against the exact tower.
    ReturnTimes {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, num_args = 2..=6, allow_hyphen_values = true)]
        base: Option<Vec<String>>,
    },
    /// Exact clopen comparison against exhaustive matching.
    Clopen {
        #[arg(long = "K")]
        k: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Float sampling of the certified Birkhoff average.
    Birkhoff {
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        sigma_fraction: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A failure with its exit code and diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn verification(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_VERIFY, message: message.into() }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::GapNonpositive => EXIT_GAP,
        Error::CoverFailure => EXIT_VERIFY,
        Error::BreakpointBudget { .. } => EXIT_BUDGET,
        Error::SearchExhausted(_) => EXIT_SEARCH,
        Error::NonTermination(_) => EXIT_RETURN,
        _ => EXIT_CONSTRUCTION,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the tool on `argv` (including the program name), writing the report
/// to `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let mut report = String::new();
    let result = dispatch(cli.command, &mut report);
    let _ = out.write_all(report.as_bytes());
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_spec(path: &Path) -> std::result::Result<SpecFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let spec = parse_spec(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(cap) = spec.params.bp_cap {
        if std::env::var_os("DYNCOMP_BP_CAP").is_none() {
            std::env::set_var("DYNCOMP_BP_CAP", cap.to_string());
        }
    }
    Ok(spec)
}

fn need<'a>(spec: &'a SpecFile, name: &str) -> std::result::Result<&'a Region, Failure> {
    spec.region(name).ok_or_else(|| usage(format!("spec has no region `{name}`")))
}

fn scalar_arg(system: &System, text: &str) -> std::result::Result<Scalar, Failure> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let mut t = Tokens::new(0, toks);
    let theta = system.as_rotation().ok().map(|r| r.theta());
    let s = t.scalar(radicand(system), theta).map_err(|e| usage(e.message))?;
    t.finish().map_err(|e| usage(e.message))?;
    Ok(s)
}

/// `--base LO HI`, each endpoint one `p/q` or `theta` token or an `a b c`
/// triple.
fn base_arg(spec: &SpecFile, base: &Option<Vec<String>>) -> std::result::Result<Region, Failure> {
    match base {
        None => need(spec, "Y").cloned(),
        Some(words) => {
            let toks: Vec<&str> = words.iter().map(String::as_str).collect();
            let mut t = Tokens::new(0, toks);
            let rot = spec.system.as_rotation().map_err(|_| usage("`--base` needs a rotation"))?;
            let lo = t.scalar(rot.radicand(), Some(rot.theta())).map_err(|e| usage(e.message))?;
            let hi = t.scalar(rot.radicand(), Some(rot.theta())).map_err(|e| usage(e.message))?;
            t.finish().map_err(|e| usage(e.message))?;
            if hi < lo {
                return Err(usage("base must satisfy lo <= hi"));
            }
            Ok(Region::Arcs(ArcSet::closed_arc(&lo, &hi)))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn dispatch(cmd: Command, out: &mut String) -> Outcome {
    match cmd {
        Command::Tower { spec, base, out: path } => {
            let s = read_spec(&spec.spec)?;
            let y = base_arg(&s, &base)?;
            let tower = build_tower(&s.system, &y)?;
            let text = tower_text(&tower)?;
            out.push_str(&text);
            if let Some(p) = path {
                write_file(&p, &text)?;
            }
            let report = tower.verify()?;
            if !report.ok() {
                return Err(verification("tower does not verify"));
            }
            Ok(())
        }
        Command::Refine { spec, base } => {
            let s = read_spec(&spec.spec)?;
            let y = base_arg(&s, &base)?;
            let partition: Vec<Region> = s.regions.iter().filter(|(n, _)| n.starts_with('P')).map(|(_, r)| r.clone()).collect();
            if partition.is_empty() {
                return Err(usage("refine needs partition regions named P..."));
            }
            let tower = build_tower(&s.system, &y)?.refine(&partition)?;
            out.push_str(&tower_text(&tower)?);
            let ok = tower.verify_refinement(&partition)?;
            let _ = writeln!(out, "refinement {}", pass(ok));
            if ok {
                Ok(())
            } else {
                Err(verification("a refined level meets more than one partition element"))
            }
        }
        Command::Compare { spec, out: path } => {
            let s = read_spec(&spec.spec)?;
            let (c, u) = (need(&s, "C")?, need(&s, "U")?);
            let w = dynamic_comparison(&s.system, c, u)?;
            finish_witness(&s.system, "compare", w, &path, out)
        }
        Command::ClopenCompare { spec, out: path } => {
            let s = read_spec(&spec.spec)?;
            let (a, b) = (need(&s, "A")?, need(&s, "B")?);
            let w = clopen_comparison(&s.system, a, b)?;
            finish_witness(&s.system, "clopen-compare", w, &path, out)
        }
        Command::Verify { spec, cert } => {
            let s = read_spec(&spec.spec)?;
            let text = std::fs::read_to_string(&cert).map_err(|e| usage(format!("cannot read {}: {e}", cert.display())))?;
            let c = parse_certificate(&text).map_err(|e| verification(format!("{}: {e}", cert.display())))?;
            verify_certificate(&s, &c, out)
        }
        Command::Birkhoff { spec, sigma_fraction } => {
            let s = read_spec(&spec.spec)?;
            let (f, e) = (need(&s, "F")?, need(&s, "E")?);
            let frac = sigma_fraction_of(&s, &sigma_fraction)?;
            let cert = birkhoff_certificate(&s.system, f, e, &frac)?;
            let ok = cert.spot_check(s.system.as_rotation()?)?;
            let _ = writeln!(out, "n0 {}\nn1 {}\nsigma {}\nm0 {}\nspot_check {}", cert.n0, cert.n1, cert.sigma.token(), cert.m0.token(), pass(ok));
            let _ = writeln!(out, "# sigma ~ {:.6}, m0 ~ {:.6}", cert.sigma.to_f64(), cert.m0.to_f64());
            if ok {
                Ok(())
            } else {
                Err(verification("Birkhoff spot check failed"))
            }
        }
        Command::Smallness { spec, depth, out: path } => {
            let s = read_spec(&spec.spec)?;
            let f = need(&s, "F")?;
            let depth = depth.or(s.params.search_depth).unwrap_or(smallness::DEFAULT_SEARCH_DEPTH);
            let c = smallness::smallness_constant(&s.system, f, depth)?;
            let _ = writeln!(out, "constant {}", c.constant);
            match c.verdict {
                Verdict::Proven => out.push_str("status proven\n"),
                Verdict::BoundedSearch { depth } => {
                    let _ = writeln!(out, "status bounded {depth}");
                }
            }
            let ws: Vec<String> = c.witness.iter().map(i64::to_string).collect();
            let _ = writeln!(out, "witness {}", ws.join(" "));
            let ok = match (&s.system, f) {
                (System::Rotation(rot), Region::Arcs(a)) => {
                    let pts = a.boundary_points();
                    verify_circle_smallness(rot, &pts, &c)
                }
                _ => true,
            };
            let _ = writeln!(out, "check {}", pass(ok));
            if let Some(p) = path {
                let cert = Certificate {
                    kind: "smallness".into(),
                    system: s.system.clone(),
                    body: Body::Smallness { f: f.clone(), cert: c },
                    verdicts: vec![("constant".into(), ok)],
                };
                write_file(&p, &cert.emit())?;
            }
            if ok {
                Ok(())
            } else {
                Err(verification("smallness certificate does not check"))
            }
        }
        Command::Thincover { spec, depth, epsilon, out: path } => {
            let s = read_spec(&spec.spec)?;
            let (f, u) = (need(&s, "F")?, need(&s, "U")?);
            let rot = s.system.as_rotation()?;
            let depth = depth.or(s.params.search_depth).unwrap_or(smallness::DEFAULT_SEARCH_DEPTH);
            let (fa, ua) = (f.as_arcs()?, u.as_arcs()?);
            let eps = match &epsilon {
                Some(t) => Some(scalar_arg(&s.system, t)?),
                None => s.params.epsilon.clone(),
            };
            if let Some(eps) = eps {
                let cover = smallness::leftover_cover_with_depth(&s.system, f, u, &eps, depth)?;
                let r = verify_leftover_cover(rot, fa, ua, &cover);
                let _ = writeln!(out, "pieces {}\nradius {}", cover.len(), cover.landing.radius.token());
                for j in 0..cover.len() {
                    let _ = writeln!(out, "piece {} shift {}", cover.landing.sources[j], cover.shift(j));
                }
                let _ = writeln!(
                    out,
                    "covers {}\nnested {}\nsums_to_one {}\nsupports {}\ndisjoint_small {}",
                    pass(r.covers),
                    pass(r.nested),
                    pass(r.sums_to_one),
                    pass(r.supports),
                    pass(r.disjoint_small)
                );
                return if r.ok() { Ok(()) } else { Err(verification("leftover cover does not verify")) };
            }
            let cover = smallness::thin_cover(&s.system, f, u, depth)?;
            let ok = verify_thin_cover(rot, fa, ua, &cover);
            let _ = writeln!(out, "pieces {}", cover.opens.len());
            for (o, d) in cover.opens.iter().zip(&cover.shifts) {
                let _ = writeln!(out, "piece shift {d} measure {}", o.measure().token());
            }
            let _ = writeln!(out, "cover {}", pass(ok));
            if let Some(p) = path {
                let cert = Certificate {
                    kind: "thincover".into(),
                    system: s.system.clone(),
                    body: Body::ThinCover { f: f.clone(), u: u.clone(), cover },
                    verdicts: vec![("cover".into(), ok)],
                };
                write_file(&p, &cert.emit())?;
            }
            if ok {
                Ok(())
            } else {
                Err(verification("thin cover does not verify"))
            }
        }
        Command::Oracle { which } => run_oracle(which, out),
    }
}

fn sigma_fraction_of(s: &SpecFile, flag: &Option<String>) -> std::result::Result<Scalar, Failure> {
    match flag {
        Some(t) => scalar_arg(&s.system, t),
        None => Ok(s.params.sigma_fraction.clone().unwrap_or_else(|| Scalar::rational(1, 2))),
    }
}

/// Columns as `column k height n` lines, each followed by its base.
pub fn tower_text(tower: &RokhlinTower) -> std::result::Result<String, Failure> {
    let mut out = String::new();
    for (k, col) in tower.columns.iter().enumerate() {
        let _ = write!(out, "column {k} height {}", col.height);
        if col.degenerate {
            out.push_str(" degenerate");
        }
        if !col.labels.is_empty() {
            let ls: Vec<String> = col.labels.iter().map(u32::to_string).collect();
            let _ = write!(out, " labels {}", ls.join(" "));
        }
        out.push('\n');
        emit_region(&col.base, &mut out);
    }
    let r = tower.verify()?;
    let _ = writeln!(out, "levels_disjoint {}\ncovers_base {}\ntiles {}", pass(r.open_levels_disjoint), pass(r.covers_base), pass(r.tiles));
    let _ = writeln!(out, "kac {}", r.kac_sum.token());
    Ok(out)
}

fn verdict_lines(r: &VerificationReport) -> Vec<(String, bool)> {
    vec![
        ("well_formed".into(), r.well_formed),
        ("ranges".into(), r.ranges),
        ("sums_to_one".into(), r.sums_to_one),
        ("disjoint".into(), r.disjoint),
        ("contained".into(), r.contained),
    ]
}

/// Human-readable summary of a witness.
pub fn witness_summary(w: &ComparisonWitness) -> String {
    let mut out = String::new();
    let p = &w.provenance;
    let _ = writeln!(out, "entries {}", w.entries.len());
    if p.n1 > 0 {
        let _ = writeln!(out, "birkhoff n0 {} n1 {}", p.n0, p.n1);
        let _ = writeln!(out, "tower height {} after {} attempt(s)", p.tower_height, p.attempts);
    }
    for (k, (h, m)) in p.columns.iter().enumerate() {
        let _ = writeln!(out, "column {k} height {h} base measure {:.6e}", m.to_f64());
    }
    for (k, t) in p.matching.iter().enumerate() {
        let _ = write!(out, "matching {k}: {} source levels into {} target levels;", t.n_c.len(), t.n_u0.len());
        for (s, t, d) in t.injection.iter().take(4) {
            let _ = write!(out, " {s}->{t} ({d:+})");
        }
        if t.injection.len() > 4 {
            out.push_str(" ...");
        }
        out.push('\n');
    }
    let _ = write!(out, "leftover pieces {}", p.leftover);
    if let Some(r) = &p.leftover_radius {
        let _ = write!(out, " radius {}", r.token());
    }
    out.push('\n');
    if p.absorbed {
        out.push_str("part of C absorbed before matching\n");
    }
    out
}

fn finish_witness(system: &System, kind: &str, w: ComparisonWitness, path: &Path, out: &mut String) -> Outcome {
    let report = verify_witness(system, &w.c, &w.u, &w);
    out.push_str(&witness_summary(&w));
    for (name, ok) in verdict_lines(&report) {
        let _ = writeln!(out, "{name} {}", pass(ok));
    }
    let ok = report.ok();
    let cert = Certificate { kind: kind.into(), system: system.clone(), body: Body::Witness(w), verdicts: verdict_lines(&report) };
    write_file(path, &cert.emit())?;
    if ok {
        Ok(())
    } else {
        Err(verification("witness does not verify"))
    }
}

/// Checks a parsed certificate against the spec: same system, same inputs,
/// and the body re-verified from scratch. Stored verdicts are ignored.
pub fn verify_certificate(s: &SpecFile, c: &Certificate, out: &mut String) -> Outcome {
    if c.system != s.system {
        return Err(verification("certificate was made for a different system"));
    }
    for (name, r) in c.inputs() {
        match s.region(name) {
            Some(mine) if mine == r => {}
            Some(_) => return Err(verification(format!("region `{name}` differs from the spec"))),
            None => return Err(usage(format!("spec has no region `{name}`"))),
        }
    }
    let ok = match &c.body {
        Body::Witness(w) => {
            let r = verify_witness(&s.system, &w.c, &w.u, w);
            for (name, ok) in verdict_lines(&r) {
                let _ = writeln!(out, "{name} {}", pass(ok));
            }
            r.ok()
        }
        Body::Smallness { f, cert } => {
            let ok = match (&s.system, f) {
                (System::Rotation(rot), Region::Arcs(a)) => verify_circle_smallness(rot, &a.boundary_points(), cert),
                _ => false,
            };
            let _ = writeln!(out, "constant {}", pass(ok));
            ok
        }
        Body::ThinCover { f, u, cover } => {
            let ok = verify_thin_cover(s.system.as_rotation()?, f.as_arcs()?, u.as_arcs()?, cover);
            let _ = writeln!(out, "cover {}", pass(ok));
            ok
        }
    };
    if ok {
        out.push_str("certificate verified\n");
        Ok(())
    } else {
        Err(verification("certificate does not verify"))
    }
}

fn golden_default(spec: &Option<PathBuf>) -> std::result::Result<SpecFile, Failure> {
    match spec {
        Some(p) => read_spec(p),
        None => Ok(SpecFile { system: System::golden(), regions: Vec::new(), params: Default::default() }),
    }
}

fn run_oracle(which: OracleCommand, out: &mut String) -> Outcome {
    match which {
        OracleCommand::ReturnTimes { q, spec, base } => {
            let s = golden_default(&spec)?;
            let rot = s.system.as_rotation()?;
            let y = match (&base, s.region("Y")) {
                (None, None) => Region::Arcs(ArcSet::closed_arc(&Scalar::zero(), rot.theta())),
                _ => base_arg(&s, &base)?,
            };
            let report = oracle::return_times(rot, y.as_arcs()?, q)?.map_err(usage)?;
            let _ = writeln!(out, "convergent {}/{}", report.p, report.q);
            let _ = writeln!(out, "exact heights {:?}\nlattice heights {:?}", report.exact_heights, report.lattice_heights);
            for (k, (seen, expected)) in report.counts.iter().enumerate() {
                let _ = writeln!(out, "column {k} lattice points {seen} expected {expected}");
            }
            let _ = writeln!(out, "interior mismatches {}", report.interior_mismatches);
            let agree = report.agree();
            let _ = writeln!(out, "{}", if agree { "agree" } else { "disagree" });
            if agree {
                Ok(())
            } else {
                Err(verification("return times disagree"))
            }
        }
        OracleCommand::Clopen { k, trials, seed } => {
            let results = oracle::clopen_trials(k, trials, seed).map_err(|e| usage(e.to_string()))?;
            let agree = results.iter().filter(|t| t.agree()).count();
            let _ = writeln!(out, "{agree}/{} agreement", results.len());
            if agree == results.len() {
                Ok(())
            } else {
                Err(verification("exact comparison and exhaustive matching disagree"))
            }
        }
        OracleCommand::Birkhoff { samples, spec, sigma_fraction, seed } => {
            let s = golden_default(&spec)?;
            let f = s.region("F").cloned().unwrap_or_else(|| Region::Arcs(ArcSet::closed_arc(&Scalar::zero(), &Scalar::rational(1, 10))));
            let e = s.region("E").cloned().unwrap_or_else(|| Region::Arcs(ArcSet::open_arc(&Scalar::rational(3, 10), &Scalar::rational(6, 10))));
            let frac = sigma_fraction_of(&s, &sigma_fraction)?;
            let o = oracle::birkhoff_oracle(&s.system, &f, &e, &frac, samples, seed)?;
            let _ = writeln!(out, "n0 {}\nsigma {:.12}\nexact min {:.12}\nfloat min {:.12}\nfloat at argmin {:.12}", o.cert.n0, o.sigma, o.exact_min, o.float_min, o.at_argmin);
            let agree = o.agree(1e-9);
            let _ = writeln!(out, "{}", if agree { "agree" } else { "disagree" });
            if agree {
                Ok(())
            } else {
                Err(verification("float sampling disagrees with the exact minimum"))
            }
        }
    }
}
