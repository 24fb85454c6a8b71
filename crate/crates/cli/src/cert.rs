//! Certificate files.
//!
//! ```text
//! dyncomp-certificate 1
//! tool 0.1.0
//! kind compare
//! system rotation
//! D 5
//! theta -1 1 2
//! input system <sha256>
//! input C <sha256>
//! input U <sha256>
//! region C
//! cut 0 0 1 1 1
//! ...
//! provenance
//! ...
//! entries 2
//! entry
//! shift -3
//! bp x_a x_b x_c v_a v_b v_c
//! ...
//! end
//! verdict sums_to_one pass
//! ```
//!
//! Every scalar is written as an exact triple, so `parse(emit(c)) == c` and
//! emitting twice gives identical bytes. Nothing time-dependent is written.

use std::fmt::Write as _;

use dyncomp::comparison::{ComparisonWitness, MatchingTable, Provenance, WitnessEntry, WitnessFunction};
use dyncomp::plfun::{CylinderFunction, PlFunction};
use dyncomp::regions::arcs::ArcSet;
use dyncomp::smallness::{SmallnessCertificate, ThinCover, Verdict};
use dyncomp::{Region, Scalar, System};
use sha2::{Digest, Sha256};

use crate::spec::{emit_region, emit_system, radicand, region_line, system_from_lines, tokenized, ParseError, RegionDraft, Tokens};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    /// `compare` and `clopen-compare` output.
    Witness(ComparisonWitness),
    Smallness { f: Region, cert: SmallnessCertificate },
    ThinCover { f: Region, u: Region, cover: ThinCover },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub kind: String,
    pub system: System,
    pub body: Body,
    pub verdicts: Vec<(String, bool)>,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn system_text(system: &System) -> String {
    let mut s = String::new();
    emit_system(system, &mut s);
    s
}

pub fn region_text(region: &Region) -> String {
    let mut s = String::new();
    emit_region(region, &mut s);
    s
}

impl Certificate {
    /// Named input regions in header order.
    pub fn inputs(&self) -> Vec<(&'static str, &Region)> {
        match &self.body {
            Body::Witness(w) if self.kind == "clopen-compare" => vec![("A", &w.c), ("B", &w.u)],
            Body::Witness(w) => vec![("C", &w.c), ("U", &w.u)],
            Body::Smallness { f, .. } => vec![("F", f)],
            Body::ThinCover { f, u, .. } => vec![("F", f), ("U", u)],
        }
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dyncomp-certificate {FORMAT_VERSION}");
        let _ = writeln!(out, "tool {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "kind {}", self.kind);
        let sys = system_text(&self.system);
        out.push_str(&sys);
        let _ = writeln!(out, "input system {}", sha256_hex(&sys));
        let inputs = self.inputs();
        for (name, r) in &inputs {
            let _ = writeln!(out, "input {name} {}", sha256_hex(&region_text(r)));
        }
        for (name, r) in &inputs {
            let _ = writeln!(out, "region {name}");
            emit_region(r, &mut out);
        }
        match &self.body {
            Body::Witness(w) => emit_witness(w, &mut out),
            Body::Smallness { cert, .. } => emit_smallness(cert, &mut out),
            Body::ThinCover { cover, .. } => emit_thin_cover(cover, &mut out),
        }
        out.push_str("end\n");
        for (name, ok) in &self.verdicts {
            let _ = writeln!(out, "verdict {name} {}", if *ok { "pass" } else { "fail" });
        }
        out
    }
}

fn emit_scalars(out: &mut String, tag: &str, xs: &[&Scalar]) {
    out.push_str(tag);
    for x in xs {
        let _ = write!(out, " {} {} {}", x.a(), x.b(), x.c());
    }
    out.push('\n');
}

fn emit_ints<T: std::fmt::Display>(out: &mut String, tag: &str, xs: impl IntoIterator<Item = T>) {
    out.push_str(tag);
    for x in xs {
        let _ = write!(out, " {x}");
    }
    out.push('\n');
}

fn emit_witness(w: &ComparisonWitness, out: &mut String) {
    let p = &w.provenance;
    out.push_str("provenance\n");
    let _ = writeln!(out, "n0 {}\nn1 {}\ntower_height {}\nattempts {}", p.n0, p.n1, p.tower_height, p.attempts);
    let _ = writeln!(out, "leftover {}\nabsorbed {}", p.leftover, p.absorbed as u8);
    match &p.leftover_radius {
        Some(r) => emit_scalars(out, "leftover_radius", &[r]),
        None => out.push_str("leftover_radius none\n"),
    }
    for (h, m) in &p.columns {
        let _ = writeln!(out, "column {h} {}", m.triple());
    }
    for t in &p.matching {
        out.push_str("matching\n");
        emit_ints(out, "n_c", &t.n_c);
        emit_ints(out, "n_u0", &t.n_u0);
        emit_ints(out, "inj", t.injection.iter().flat_map(|(s, t, d)| [*s as i128, *t as i128, *d as i128]));
    }
    let _ = writeln!(out, "entries {}", w.entries.len());
    for e in &w.entries {
        let _ = writeln!(out, "entry\nshift {}", e.shift);
        match &e.f {
            WitnessFunction::Pl(f) => {
                for (x, v) in f.points() {
                    emit_scalars(out, "bp", &[x, v]);
                }
            }
            WitnessFunction::Cylinder(f) => {
                let _ = writeln!(out, "cyl {}", f.modulus);
                for (i, v) in &f.values {
                    let _ = writeln!(out, "cv {i} {}", v.triple());
                }
            }
        }
    }
}

fn emit_smallness(c: &SmallnessCertificate, out: &mut String) {
    let _ = writeln!(out, "constant {}", c.constant);
    match c.verdict {
        Verdict::Proven => out.push_str("status proven\n"),
        Verdict::BoundedSearch { depth } => {
            let _ = writeln!(out, "status bounded {depth}");
        }
    }
    emit_ints(out, "witness", &c.witness);
    emit_ints(out, "axis", &c.axis_constants);
}

fn emit_thin_cover(c: &ThinCover, out: &mut String) {
    out.push_str("nbhd\n");
    emit_region(&Region::Arcs(c.nbhd.clone()), out);
    let _ = writeln!(out, "entries {}", c.opens.len());
    for (o, d) in c.opens.iter().zip(&c.shifts) {
        let _ = writeln!(out, "entry\nshift {d}");
        emit_region(&Region::Arcs(o.clone()), out);
    }
}

/// Line-by-line reader over a tokenized certificate.
struct Reader<'a> {
    ls: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn peek_key(&self) -> Option<&'a str> {
        self.ls.get(self.pos).map(|(_, t)| t[0])
    }

    fn last_line(&self) -> usize {
        self.ls.last().map_or(0, |l| l.0)
    }

    fn next(&mut self) -> Result<Tokens<'a>, ParseError> {
        match self.ls.get(self.pos) {
            Some((line, toks)) => {
                self.pos += 1;
                Ok(Tokens::new(*line, toks.clone()))
            }
            None => Err(ParseError { line: self.last_line(), message: "unexpected end of certificate".into() }),
        }
    }

    /// Next line, which must start with `key`; returns the remaining tokens.
    fn expect(&mut self, key: &str) -> Result<Tokens<'a>, ParseError> {
        let mut t = self.next()?;
        let k = t.word()?;
        if k != key {
            return Err(ParseError { line: t.line(), message: format!("expected `{key}`, found `{k}`") });
        }
        Ok(t)
    }

    fn region(&mut self, system: &System) -> Result<Region, ParseError> {
        let mut draft = RegionDraft::new();
        while let Some(k) = self.peek_key() {
            if !matches!(k, "cut" | "full" | "cylinders") {
                break;
            }
            let mut t = self.next()?;
            region_line(system, &mut t, &mut draft)?;
        }
        Ok(draft.build(system))
    }
}

fn bad(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

pub fn parse_certificate(text: &str) -> Result<Certificate, ParseError> {
    let mut r = Reader { ls: tokenized(text), pos: 0 };
    let mut t = r.expect("dyncomp-certificate")?;
    let version: u32 = t.int()?;
    if version != FORMAT_VERSION {
        return Err(bad(t.line(), format!("unsupported certificate version {version}")));
    }
    r.expect("tool")?;
    let mut t = r.expect("kind")?;
    let kind = t.word()?.to_string();
    t.finish()?;
    let (system, used) = system_from_lines(&r.ls[r.pos..])?;
    r.pos += used;
    let d = radicand(&system);

    let mut t = r.expect("input")?;
    let line = t.line();
    if t.word()? != "system" || t.word()? != sha256_hex(&system_text(&system)) {
        return Err(bad(line, "system hash does not match the system block"));
    }
    let mut hashes: Vec<(String, String, usize)> = Vec::new();
    while r.peek_key() == Some("input") {
        let mut t = r.expect("input")?;
        hashes.push((t.word()?.to_string(), t.word()?.to_string(), t.line()));
        t.finish()?;
    }
    let mut regions: Vec<(String, Region)> = Vec::new();
    while r.peek_key() == Some("region") {
        let mut t = r.expect("region")?;
        let name = t.word()?.to_string();
        t.finish()?;
        regions.push((name, r.region(&system)?));
    }
    if regions.len() != hashes.len() {
        return Err(bad(r.last_line(), "every input needs exactly one region block"));
    }
    for ((name, region), (hname, h, line)) in regions.iter().zip(&hashes) {
        if name != hname || sha256_hex(&region_text(region)) != *h {
            return Err(bad(*line, format!("input hash mismatch for region `{hname}`")));
        }
    }
    let take = |name: &str| -> Result<Region, ParseError> {
        regions
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r.clone())
            .ok_or_else(|| bad(0, format!("missing input region `{name}`")))
    };
    let body = match kind.as_str() {
        "compare" => Body::Witness(parse_witness(&mut r, d, take("C")?, take("U")?)?),
        "clopen-compare" => Body::Witness(parse_witness(&mut r, d, take("A")?, take("B")?)?),
        "smallness" => Body::Smallness { f: take("F")?, cert: parse_smallness(&mut r)? },
        "thincover" => Body::ThinCover { f: take("F")?, u: take("U")?, cover: parse_thin_cover(&mut r, &system)? },
        other => return Err(bad(0, format!("unknown certificate kind `{other}`"))),
    };
    r.expect("end")?.finish()?;
    let mut verdicts = Vec::new();
    while r.peek_key().is_some() {
        let mut t = r.expect("verdict")?;
        let name = t.word()?.to_string();
        let ok = match t.word()? {
            "pass" => true,
            "fail" => false,
            v => return Err(bad(t.line(), format!("unknown verdict `{v}`"))),
        };
        t.finish()?;
        verdicts.push((name, ok));
    }
    Ok(Certificate { kind, system, body, verdicts })
}

fn scalar_list(t: &mut Tokens, d: u64) -> Result<Vec<Scalar>, ParseError> {
    let mut out = Vec::new();
    while !t.is_done() {
        out.push(t.scalar(d, None)?);
    }
    Ok(out)
}

fn int_list<T: std::str::FromStr>(t: &mut Tokens) -> Result<Vec<T>, ParseError> {
    let mut out = Vec::new();
    while !t.is_done() {
        out.push(t.int()?);
    }
    Ok(out)
}

fn parse_witness(r: &mut Reader, d: u64, c: Region, u: Region) -> Result<ComparisonWitness, ParseError> {
    r.expect("provenance")?.finish()?;
    let mut p = Provenance::default();
    p.n0 = r.expect("n0")?.int()?;
    p.n1 = r.expect("n1")?.int()?;
    p.tower_height = r.expect("tower_height")?.int()?;
    p.attempts = r.expect("attempts")?.int()?;
    p.leftover = r.expect("leftover")?.int()?;
    p.absorbed = r.expect("absorbed")?.flag()?;
    let mut t = r.expect("leftover_radius")?;
    p.leftover_radius = if t.rest() == ["none"] { None } else { Some(t.scalar(d, None)?) };
    while r.peek_key() == Some("column") {
        let mut t = r.expect("column")?;
        let h: u64 = t.int()?;
        let m = t.scalar(d, None)?;
        t.finish()?;
        p.columns.push((h, m));
    }
    while r.peek_key() == Some("matching") {
        r.expect("matching")?.finish()?;
        let n_c = int_list(&mut r.expect("n_c")?)?;
        let n_u0 = int_list(&mut r.expect("n_u0")?)?;
        let mut t = r.expect("inj")?;
        let flat: Vec<i128> = int_list(&mut t)?;
        if flat.len() % 3 != 0 || flat.iter().any(|x| *x < i64::MIN as i128 || *x > u64::MAX as i128) {
            return Err(bad(t.line(), "injection entries come in (s, t, d) triples"));
        }
        let injection = flat.chunks(3).map(|c| (c[0] as u64, c[1] as u64, c[2] as i64)).collect();
        p.matching.push(MatchingTable { n_c, n_u0, injection });
    }
    let mut t = r.expect("entries")?;
    let n: usize = t.int()?;
    t.finish()?;
    let mut entries = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        r.expect("entry")?.finish()?;
        let mut t = r.expect("shift")?;
        let shift: i64 = t.int()?;
        t.finish()?;
        let f = if r.peek_key() == Some("cyl") {
            let mut t = r.expect("cyl")?;
            let modulus: u64 = t.int()?;
            t.finish()?;
            let mut values = Vec::new();
            while r.peek_key() == Some("cv") {
                let mut t = r.expect("cv")?;
                let i: u64 = t.int()?;
                let v = t.scalar(d, None)?;
                t.finish()?;
                values.push((i, v));
            }
            WitnessFunction::Cylinder(CylinderFunction { modulus, values })
        } else {
            let mut pts = Vec::new();
            let mut line = 0;
            while r.peek_key() == Some("bp") {
                let mut t = r.expect("bp")?;
                line = t.line();
                let xs = scalar_list(&mut t, d)?;
                if xs.len() != 2 {
                    return Err(bad(line, "a breakpoint line holds two scalars"));
                }
                let mut it = xs.into_iter();
                pts.push((it.next().unwrap(), it.next().unwrap()));
            }
            WitnessFunction::Pl(PlFunction::from_points(pts).map_err(|e| bad(line, e.to_string()))?)
        };
        entries.push(WitnessEntry { f, shift });
    }
    Ok(ComparisonWitness { entries, c, u, provenance: p })
}

fn parse_smallness(r: &mut Reader) -> Result<SmallnessCertificate, ParseError> {
    let mut t = r.expect("constant")?;
    let constant = t.int()?;
    t.finish()?;
    let mut t = r.expect("status")?;
    let verdict = match t.word()? {
        "proven" => Verdict::Proven,
        "bounded" => Verdict::BoundedSearch { depth: t.int()? },
        v => return Err(bad(t.line(), format!("unknown status `{v}`"))),
    };
    t.finish()?;
    let witness = int_list(&mut r.expect("witness")?)?;
    let axis_constants = int_list(&mut r.expect("axis")?)?;
    Ok(SmallnessCertificate { constant, verdict, witness, axis_constants })
}

fn arcs(r: &mut Reader, system: &System) -> Result<ArcSet, ParseError> {
    match r.region(system)? {
        Region::Arcs(a) => Ok(a),
        _ => Err(bad(r.last_line(), "thin covers live on the circle")),
    }
}

fn parse_thin_cover(r: &mut Reader, system: &System) -> Result<ThinCover, ParseError> {
    r.expect("nbhd")?.finish()?;
    let nbhd = arcs(r, system)?;
    let mut t = r.expect("entries")?;
    let n: usize = t.int()?;
    t.finish()?;
    let (mut opens, mut shifts) = (Vec::new(), Vec::new());
    for _ in 0..n {
        r.expect("entry")?.finish()?;
        let mut t = r.expect("shift")?;
        shifts.push(t.int()?);
        t.finish()?;
        opens.push(arcs(r, system)?);
    }
    Ok(ThinCover { opens, shifts, nbhd })
}
