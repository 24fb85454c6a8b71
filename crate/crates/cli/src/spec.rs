//! The line-oriented input format.
//!
//! ```text
//! # golden rotation
//! system rotation
//! D 5
//! theta -1 1 2
//!
//! region C
//! closed 0/1 1/5
//!
//! region U
//! open 3/10 6/10
//!
//! params
//! epsilon 1/100
//! ```
//!
//! A scalar is either one token containing `/` (a rational `p/q`), the word
//! `theta`, or three integer tokens `a b c` meaning `(a + b√D)/c`.
//! Odometers use `system odometer`, `bases 2 2 2` and an optional `level`;
//! their regions list cylinder indices (`cylinders 0 3`) or digit prefixes
//! (`word 1 0`, least significant digit first).

use std::fmt::Write as _;

use dyncomp::regions::arcs::{ArcSet, Cut};
use dyncomp::regions::CylinderSet;
use dyncomp::scalar::is_squarefree;
use dyncomp::systems::{CircleRotation, Odometer};
use dyncomp::{Region, Scalar, System};
use num_bigint::BigInt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params {
    pub epsilon: Option<Scalar>,
    pub sigma_fraction: Option<Scalar>,
    pub search_depth: Option<u64>,
    pub bp_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecFile {
    pub system: System,
    pub regions: Vec<(String, Region)>,
    pub params: Params,
}

impl SpecFile {
    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }
}

/// Cursor over the tokens of one line.
pub struct Tokens<'a> {
    line: usize,
    toks: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    pub fn new(line: usize, toks: Vec<&'a str>) -> Tokens<'a> {
        Tokens { line, toks, pos: 0 }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    /// Tokens not consumed yet.
    pub fn rest(&self) -> &[&'a str] {
        &self.toks[self.pos.min(self.toks.len())..]
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        if self.is_done() {
            Ok(())
        } else {
            err(self.line, format!("unexpected trailing token `{}`", self.toks[self.pos]))
        }
    }

    pub fn word(&mut self) -> Result<&'a str, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => err(self.line, "missing token"),
        }
    }

    pub fn int<T: std::str::FromStr>(&mut self) -> Result<T, ParseError> {
        let t = self.word()?;
        t.parse().or_else(|_| err(self.line, format!("expected an integer, found `{t}`")))
    }

    pub fn bigint(&mut self) -> Result<BigInt, ParseError> {
        let line = self.line;
        let t = self.word()?;
        big(t).ok_or_else(|| ParseError { line, message: format!("expected an integer, found `{t}`") })
    }

    pub fn flag(&mut self) -> Result<bool, ParseError> {
        match self.word()? {
            "0" => Ok(false),
            "1" => Ok(true),
            t => err(self.line, format!("expected 0 or 1, found `{t}`")),
        }
    }

    /// A scalar in the field `Q(√d)`.
    pub fn scalar(&mut self, d: u64, theta: Option<&Scalar>) -> Result<Scalar, ParseError> {
        let line = self.line;
        let t = self.word()?;
        if t == "theta" {
            return match theta {
                Some(th) => Ok(th.clone()),
                None => err(line, "`theta` is only available for rotations"),
            };
        }
        if let Some((p, q)) = t.split_once('/') {
            let p = big(p).ok_or_else(|| ParseError { line, message: format!("bad rational `{t}`") })?;
            let q = big(q).ok_or_else(|| ParseError { line, message: format!("bad rational `{t}`") })?;
            return Scalar::from_big_parts(p, BigInt::from(0), q, 1)
                .map(|s| s.with_radicand(d))
                .ok_or_else(|| ParseError { line, message: format!("zero denominator in `{t}`") });
        }
        let a = big(t).ok_or_else(|| ParseError { line, message: format!("expected a scalar, found `{t}`") })?;
        let b = self.bigint()?;
        let c = self.bigint()?;
        Scalar::from_big_parts(a, b, c, d).ok_or_else(|| ParseError { line, message: "zero denominator".into() })
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.is_empty() {
            None
        } else {
            Some((i + 1, toks))
        }
    })
}

enum Section {
    None,
    Region,
    Params,
}

#[derive(Default)]
struct SystemDraft {
    kind: Option<(usize, String)>,
    d: Option<u64>,
    theta: Option<Vec<BigInt>>,
    bases: Option<Vec<u64>>,
    level: Option<usize>,
}

impl SystemDraft {
    fn build(self) -> Result<System, ParseError> {
        let (line, kind) = match self.kind {
            Some(k) => k,
            None => return err(0, "missing `system` block"),
        };
        match kind.as_str() {
            "rotation" => {
                let d = self.d.unwrap_or(5);
                if !is_squarefree(d) || d < 2 {
                    return err(line, "D must be a square-free integer at least 2");
                }
                let t = match self.theta {
                    Some(t) => t,
                    None => return err(line, "rotation needs `theta a b c`"),
                };
                let th = Scalar::from_big_parts(t[0].clone(), t[1].clone(), t[2].clone(), d)
                    .ok_or_else(|| ParseError { line, message: "zero denominator in theta".into() })?;
                CircleRotation::new(th).map(System::Rotation).or_else(|e| err(line, e.to_string()))
            }
            "odometer" => {
                let bases = match self.bases {
                    Some(b) => b,
                    None => return err(line, "odometer needs `bases k1 k2 ...`"),
                };
                let level = self.level.unwrap_or(bases.len());
                Odometer::new(bases, level).map(System::Odometer).or_else(|e| err(line, e.to_string()))
            }
            other => err(line, format!("unknown system `{other}`")),
        }
    }
}

/// Radicand that scalars of `system` live in (1 for odometers).
pub fn radicand(system: &System) -> u64 {
    match system {
        System::Rotation(r) => r.radicand(),
        _ => 1,
    }
}

fn theta_of(system: &System) -> Option<&Scalar> {
    match system {
        System::Rotation(r) => Some(r.theta()),
        _ => None,
    }
}

/// Parses one region body line and unions it into `acc`.
pub fn region_line(system: &System, toks: &mut Tokens, acc: &mut RegionDraft) -> Result<(), ParseError> {
    let line = toks.line();
    let d = radicand(system);
    let theta = theta_of(system);
    let kw = toks.word()?;
    match (system, kw) {
        (System::Rotation(_), "closed" | "open" | "lclosed" | "rclosed") => {
            let lo = toks.scalar(d, theta)?;
            let hi = toks.scalar(d, theta)?;
            toks.finish()?;
            let (lc, hc) = match kw {
                "closed" => (true, true),
                "open" => (false, false),
                "lclosed" => (true, false),
                _ => (false, true),
            };
            if hi < lo || (&hi - &lo) > Scalar::one() {
                return err(line, "arc endpoints must satisfy lo <= hi <= lo + 1");
            }
            acc.arcs = acc.arcs.union(&ArcSet::arc(&lo, &hi, lc, hc));
        }
        (System::Rotation(_), "point") => {
            let x = toks.scalar(d, theta)?;
            toks.finish()?;
            acc.arcs = acc.arcs.union(&ArcSet::point(&x));
        }
        (System::Rotation(_), "full") => {
            toks.finish()?;
            acc.arcs = ArcSet::full();
        }
        (System::Rotation(_), "cut") => {
            let at = toks.scalar(d, theta)?;
            let point = toks.flag()?;
            let after = toks.flag()?;
            toks.finish()?;
            if at.is_negative() || at >= Scalar::one() {
                return err(line, "cut position must lie in [0,1)");
            }
            if let Some(last) = acc.cuts.last() {
                if last.at >= at {
                    return err(line, "cuts must be strictly increasing");
                }
            }
            acc.cuts.push(Cut { at, point, after });
        }
        (System::Odometer(o), "cylinders") => {
            let k = o.period();
            let mut members = Vec::new();
            while !toks.is_done() {
                let i: u64 = toks.int()?;
                if i >= k {
                    return err(line, format!("cylinder index {i} out of range (period {k})"));
                }
                members.push(i);
            }
            acc.cyl.extend(members);
        }
        (System::Odometer(o), "word") => {
            let mut digits = Vec::new();
            while !toks.is_done() {
                digits.push(toks.int::<u64>()?);
            }
            if digits.len() > o.level() || digits.iter().zip(o.bases()).any(|(x, b)| x >= b) {
                return err(line, "word does not fit the odometer");
            }
            // the cylinder of a prefix is a residue class modulo K_len
            let step = o.period_at(digits.len());
            let mut i = 0u64;
            for (j, x) in digits.iter().enumerate().rev() {
                i = i * o.bases()[j] + x;
            }
            while i < o.period() {
                acc.cyl.push(i);
                i += step;
            }
        }
        (System::Odometer(_), "full") => {
            toks.finish()?;
            acc.full = true;
        }
        (_, other) => return err(line, format!("unknown region key `{other}`")),
    }
    Ok(())
}

/// Region lines collected so far.
pub struct RegionDraft {
    arcs: ArcSet,
    cuts: Vec<Cut>,
    cyl: Vec<u64>,
    full: bool,
}

impl Default for RegionDraft {
    fn default() -> Self {
        RegionDraft::new()
    }
}

impl RegionDraft {
    pub fn new() -> RegionDraft {
        RegionDraft { arcs: ArcSet::empty(), cuts: Vec::new(), cyl: Vec::new(), full: false }
    }

    pub fn build(self, system: &System) -> Region {
        match system {
            System::Odometer(o) if self.full => Region::Cylinders(CylinderSet::full(o.period())),
            System::Odometer(o) => Region::Cylinders(CylinderSet::new(o.period(), self.cyl)),
            _ => {
                let from_cuts = ArcSet::from_cuts(self.cuts, false);
                Region::Arcs(self.arcs.union(&from_cuts))
            }
        }
    }
}

/// Region lines in the canonical form used by certificates: the exact cut
/// list of a circle set, or the member list of a cylinder set.
pub fn emit_region(region: &Region, out: &mut String) {
    match region {
        Region::Arcs(a) => {
            if a.is_full() {
                out.push_str("full\n");
            }
            for c in a.cuts() {
                let _ = writeln!(out, "cut {} {} {}", c.at.triple(), c.point as u8, c.after as u8);
            }
        }
        Region::Cylinders(c) => {
            if c.len() as u64 == c.modulus() {
                out.push_str("full\n");
            } else if !c.is_empty() {
                out.push_str("cylinders");
                for m in c.members() {
                    let _ = write!(out, " {m}");
                }
                out.push('\n');
            }
        }
        Region::Boxes(_) => unreachable!("torus regions have no file form"),
    }
}

/// The system block, as written back into certificates.
pub fn emit_system(system: &System, out: &mut String) {
    match system {
        System::Rotation(r) => {
            let t = r.theta();
            let _ = writeln!(out, "system rotation\nD {}\ntheta {}", r.radicand(), t.triple());
        }
        System::Odometer(o) => {
            out.push_str("system odometer\nbases");
            for b in o.bases() {
                let _ = write!(out, " {b}");
            }
            let _ = writeln!(out, "\nlevel {}", o.level());
        }
        System::Torus(_) => unreachable!("torus systems have no file form"),
    }
}

/// Reads the system block out of a stream of lines; used by both file
/// formats. Returns the system and the number of lines consumed.
pub fn system_from_lines(ls: &[(usize, Vec<&str>)]) -> Result<(System, usize), ParseError> {
    let mut draft = SystemDraft::default();
    let mut used = 0;
    for (line, toks) in ls {
        let mut t = Tokens::new(*line, toks.clone());
        let key = t.word()?;
        match key {
            "system" if used == 0 => {
                draft.kind = Some((*line, t.word()?.to_string()));
                t.finish()?;
            }
            "D" if used > 0 => {
                draft.d = Some(t.int()?);
                t.finish()?;
            }
            "theta" if used > 0 => {
                draft.theta = Some(vec![t.bigint()?, t.bigint()?, t.bigint()?]);
                t.finish()?;
            }
            "bases" if used > 0 => {
                let mut b = Vec::new();
                while !t.is_done() {
                    b.push(t.int()?);
                }
                draft.bases = Some(b);
            }
            "level" if used > 0 => {
                draft.level = Some(t.int()?);
                t.finish()?;
            }
            _ if used == 0 => return err(*line, "expected `system`"),
            _ => break,
        }
        used += 1;
    }
    Ok((draft.build()?, used))
}

fn check_kind(system: &System, d: &SystemDraftKeys) -> Result<(), ParseError> {
    let rotation = matches!(system, System::Rotation(_));
    if rotation && d.bases.is_some() {
        return err(d.bases.unwrap(), "`bases` belongs to odometers");
    }
    if !rotation && (d.d.is_some() || d.theta.is_some()) {
        return err(d.d.or(d.theta).unwrap(), "`D` and `theta` belong to rotations");
    }
    Ok(())
}

#[derive(Default)]
struct SystemDraftKeys {
    d: Option<usize>,
    theta: Option<usize>,
    bases: Option<usize>,
}

fn big(t: &str) -> Option<BigInt> {
    match t.parse::<i64>() {
        Ok(v) => Some(v.into()),
        Err(_) => t.parse().ok(),
    }
}

pub(crate) fn tokenized(text: &str) -> Vec<(usize, Vec<&str>)> {
    lines(text).collect()
}

pub fn parse_spec(text: &str) -> Result<SpecFile, ParseError> {
    let ls = tokenized(text);
    if ls.is_empty() {
        return err(0, "empty spec file");
    }
    let (system, used) = system_from_lines(&ls)?;
    let mut keys = SystemDraftKeys::default();
    for (line, toks) in &ls[1..used] {
        match toks[0] {
            "D" => keys.d = Some(*line),
            "theta" => keys.theta = Some(*line),
            "bases" => keys.bases = Some(*line),
            _ => {}
        }
    }
    check_kind(&system, &keys)?;
    let mut regions: Vec<(String, Region)> = Vec::new();
    let mut params = Params::default();
    let mut section = Section::None;
    let mut draft: Option<(String, RegionDraft)> = None;
    let close = |draft: &mut Option<(String, RegionDraft)>, regions: &mut Vec<(String, Region)>| {
        if let Some((name, d)) = draft.take() {
            regions.push((name, d.build(&system)));
        }
    };
    for (line, toks) in &ls[used..] {
        let mut t = Tokens::new(*line, toks.clone());
        match toks[0] {
            "system" => return err(*line, "only one `system` block is allowed"),
            "region" => {
                close(&mut draft, &mut regions);
                t.word()?;
                let name = t.word()?.to_string();
                t.finish()?;
                if regions.iter().any(|(n, _)| *n == name) {
                    return err(*line, format!("region `{name}` defined twice"));
                }
                draft = Some((name, RegionDraft::new()));
                section = Section::Region;
            }
            "params" => {
                close(&mut draft, &mut regions);
                t.word()?;
                t.finish()?;
                section = Section::Params;
            }
            _ => match section {
                Section::Region => {
                    let d = &mut draft.as_mut().expect("open region").1;
                    region_line(&system, &mut t, d)?;
                }
                Section::Params => param_line(&system, &mut t, &mut params)?,
                Section::None => return err(*line, format!("unknown key `{}`", toks[0])),
            },
        }
    }
    close(&mut draft, &mut regions);
    Ok(SpecFile { system, regions, params })
}

fn param_line(system: &System, t: &mut Tokens, p: &mut Params) -> Result<(), ParseError> {
    let d = radicand(system);
    match t.word()? {
        "epsilon" => p.epsilon = Some(t.scalar(d, None)?),
        "sigma_fraction" => p.sigma_fraction = Some(t.scalar(d, None)?),
        "search_depth" => p.search_depth = Some(t.int()?),
        "bp_cap" => p.bp_cap = Some(t.int()?),
        other => return err(t.line(), format!("unknown parameter `{other}`")),
    }
    t.finish()
}
