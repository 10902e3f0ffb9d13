//! Relative presentations, filling kernels, slope lengths and quotients.

use std::fmt;

use serde::Serialize;

use crate::parabolic::{PElem, Peripheral};
use crate::word::{parse_word, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PresentationError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid presentation: {0}")]
    Invalid(String),
    #[error("invalid filling kernel: {0}")]
    InvalidKernel(String),
    #[error("unsupported parabolic quotient: {0}")]
    UnsupportedQuotient(String),
    #[error("no kernel element of length at most {bound} found")]
    SearchBoundExceeded { bound: u64 },
    #[error("word problem in the parabolic quotient could not be decided")]
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ParabolicKind {
    FreeAbelian { rank: usize },
    /// A product of cyclic groups, one factor per generator. A single factor
    /// is the plain `Z/m` case.
    FiniteCyclic { orders: Vec<u64> },
    FreeGroup { rank: usize },
}

impl fmt::Display for ParabolicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParabolicKind::FreeAbelian { rank: 1 } => write!(f, "Z"),
            ParabolicKind::FreeAbelian { rank } => write!(f, "Z^{rank}"),
            ParabolicKind::FiniteCyclic { orders } => {
                let parts: Vec<String> = orders.iter().map(|m| format!("Z/{m}")).collect();
                write!(f, "{}", parts.join("x"))
            }
            ParabolicKind::FreeGroup { rank } => write!(f, "F_{rank}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParabolicSpec {
    pub id: usize,
    pub kind: ParabolicKind,
    /// Global generator indices.
    pub generators: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativePresentation {
    pub name: String,
    pub generators: Vec<String>,
    pub parabolics: Vec<ParabolicSpec>,
    pub relators: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelData {
    /// Rows generating a sublattice of `Z^r`.
    Lattice(Vec<Vec<i64>>),
    /// Words in the parabolic's generators normally generating the kernel.
    Words(Vec<Word>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillingKernel {
    pub parabolic_id: usize,
    pub data: KernelData,
}

impl FillingKernel {
    pub fn trivial(parabolic_id: usize) -> Self {
        FillingKernel { parabolic_id, data: KernelData::Words(Vec::new()) }
    }

    pub fn word(parabolic_id: usize, w: Word) -> Self {
        FillingKernel { parabolic_id, data: KernelData::Words(vec![w]) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SlopeLength {
    Finite(u64),
    Infinite,
}

impl fmt::Display for SlopeLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlopeLength::Finite(n) => write!(f, "{n}"),
            SlopeLength::Infinite => write!(f, "inf"),
        }
    }
}

impl RelativePresentation {
    pub fn new(
        name: &str,
        generators: &[&str],
        parabolics: Vec<ParabolicSpec>,
        relators: &[&str],
    ) -> Result<Self, PresentationError> {
        let generators: Vec<String> = generators.iter().map(|s| s.to_string()).collect();
        let relators = relators
            .iter()
            .map(|r| parse_word(r, &generators))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| PresentationError::Invalid(e.to_string()))?;
        let rp = RelativePresentation { name: name.to_string(), generators, parabolics, relators };
        rp.validate()?;
        Ok(rp)
    }

    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    pub fn generator(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn parse_word(&self, s: &str) -> Result<Word, PresentationError> {
        parse_word(s, &self.generators).map_err(|e| PresentationError::Invalid(e.to_string()))
    }

    pub fn show(&self, w: &Word) -> String {
        w.display(&self.generators).to_string()
    }

    pub fn parabolic(&self, id: usize) -> Option<&ParabolicSpec> {
        self.parabolics.iter().find(|p| p.id == id)
    }

    pub fn validate(&self) -> Result<(), PresentationError> {
        let n = self.ngens();
        for r in &self.relators {
            if r.letters().iter().any(|&l| l == 0 || l.unsigned_abs() as usize > n) {
                return Err(PresentationError::Invalid("relator letter out of range".into()));
            }
        }
        let mut used = vec![false; n];
        let mut ids = Vec::new();
        for p in &self.parabolics {
            if ids.contains(&p.id) {
                return Err(PresentationError::Invalid(format!("duplicate parabolic id {}", p.id)));
            }
            ids.push(p.id);
            for &g in &p.generators {
                if g >= n {
                    return Err(PresentationError::Invalid("parabolic generator out of range".into()));
                }
                if used[g] {
                    return Err(PresentationError::Invalid(format!(
                        "generator {} used by two parabolics",
                        self.generators[g]
                    )));
                }
                used[g] = true;
            }
            let ok = match &p.kind {
                ParabolicKind::FreeAbelian { rank } | ParabolicKind::FreeGroup { rank } => {
                    *rank == p.generators.len()
                }
                ParabolicKind::FiniteCyclic { orders } => {
                    orders.len() == p.generators.len() && orders.iter().all(|&m| m >= 1)
                }
            };
            if !ok || p.generators.is_empty() {
                return Err(PresentationError::Invalid(format!(
                    "parabolic {} of type {} has generators {:?}",
                    p.id, p.kind, p.generators
                )));
            }
        }
        Ok(())
    }

    /// The relators forced by the parabolic kinds alone: commutators for
    /// abelian kinds and powers for finite factors.
    pub fn parabolic_relators(&self) -> Vec<Word> {
        let mut out = Vec::new();
        for p in &self.parabolics {
            let gens = &p.generators;
            let abelian = !matches!(p.kind, ParabolicKind::FreeGroup { .. });
            if let ParabolicKind::FiniteCyclic { orders } = &p.kind {
                for (g, &m) in gens.iter().zip(orders) {
                    out.push(Word::power(*g, m as i64));
                }
            }
            if abelian {
                for i in 0..gens.len() {
                    for j in i + 1..gens.len() {
                        let (a, b) = (Word::power(gens[i], 1), Word::power(gens[j], 1));
                        out.push(a.concat(&b).concat(&a.inverse()).concat(&b.inverse()));
                    }
                }
            }
        }
        out
    }

    /// Parses the plain-text presentation format. Lines starting with `#` and
    /// `fill` lines are skipped.
    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        Ok(parse_manifest(text)?.0)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("group {}\ngenerators {}\n", self.name, self.generators.join(" "));
        for p in &self.parabolics {
            let names: Vec<&str> = p.generators.iter().map(|&g| self.generators[g].as_str()).collect();
            s += &format!("parabolic {} type {} generators {}\n", p.id, p.kind, names.join(" "));
        }
        for r in &self.relators {
            s += &format!("relator {}\n", self.show(r));
        }
        s
    }
}

fn parse_kind(t: &str, ngens: usize) -> Option<ParabolicKind> {
    if t == "Z" {
        return Some(ParabolicKind::FreeAbelian { rank: 1 });
    }
    if let Some(r) = t.strip_prefix("Z^") {
        return r.parse().ok().map(|rank| ParabolicKind::FreeAbelian { rank });
    }
    if let Some(r) = t.strip_prefix("F_") {
        return r.parse().ok().map(|rank| ParabolicKind::FreeGroup { rank });
    }
    if t.starts_with("Z/") {
        let orders: Option<Vec<u64>> =
            t.split('x').map(|f| f.strip_prefix("Z/").and_then(|m| m.parse().ok())).collect();
        let orders = orders?;
        if orders.len() == 1 && ngens > 1 {
            return Some(ParabolicKind::FiniteCyclic { orders: vec![orders[0]; ngens] });
        }
        return Some(ParabolicKind::FiniteCyclic { orders });
    }
    None
}

fn parse_matrix(s: &str) -> Option<Vec<Vec<i64>>> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    inner
        .split(';')
        .filter(|r| !r.trim().is_empty())
        .map(|r| r.split(|c: char| c == ',' || c.is_whitespace()).filter(|x| !x.is_empty()).map(|x| x.parse().ok()).collect())
        .collect()
}

/// Parses a presentation together with `fill <parabolic-id> <word|[matrix]>`
/// kernel lines. Parabolics without a `fill` line get the trivial kernel.
pub fn parse_manifest(text: &str) -> Result<(RelativePresentation, Vec<FillingKernel>), PresentationError> {
    let mut name = String::from("G");
    let mut generators: Vec<String> = Vec::new();
    let mut parabolics = Vec::new();
    let mut relators = Vec::new();
    let mut fills: Vec<(usize, usize, String)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| PresentationError::Parse { line: ln + 1, msg: msg.to_string() };
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match head {
            "group" => name = rest.to_string(),
            "generators" => generators = rest.split_whitespace().map(String::from).collect(),
            "parabolic" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() < 4 || toks[1] != "type" || toks[3] != "generators" {
                    return Err(err("expected `parabolic <id> type <kind> generators ...`"));
                }
                let id: usize = toks[0].parse().map_err(|_| err("bad parabolic id"))?;
                let gens = toks[4..]
                    .iter()
                    .map(|g| generators.iter().position(|n| n == g).ok_or_else(|| err(&format!("unknown generator {g}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let kind = parse_kind(toks[2], gens.len()).ok_or_else(|| err("unknown parabolic type"))?;
                parabolics.push(ParabolicSpec { id, kind, generators: gens });
            }
            "relator" => {
                relators.push(parse_word(rest, &generators).map_err(|e| err(&e.to_string()))?);
            }
            "fill" => {
                let (id, what) = rest.split_once(char::is_whitespace).ok_or_else(|| err("expected `fill <id> <kernel>`"))?;
                let id: usize = id.parse().map_err(|_| err("bad parabolic id"))?;
                fills.push((ln + 1, id, what.trim().to_string()));
            }
            "presentation" => {}
            _ => return Err(err(&format!("unknown declaration `{head}`"))),
        }
    }
    let rp = RelativePresentation { name, generators, parabolics, relators };
    rp.validate()?;
    let mut kernels: Vec<FillingKernel> = Vec::new();
    for (line, id, what) in fills {
        let err = |msg: &str| PresentationError::Parse { line, msg: msg.to_string() };
        rp.parabolic(id).ok_or_else(|| err("fill refers to unknown parabolic"))?;
        let data = if what.starts_with('[') {
            KernelData::Lattice(parse_matrix(&what).ok_or_else(|| err("bad matrix"))?)
        } else {
            KernelData::Words(vec![parse_word(&what, &rp.generators).map_err(|e| err(&e.to_string()))?])
        };
        match kernels.iter_mut().find(|k| k.parabolic_id == id) {
            Some(k) => match (&mut k.data, data) {
                (KernelData::Words(a), KernelData::Words(b)) => a.extend(b),
                (KernelData::Lattice(a), KernelData::Lattice(b)) => a.extend(b),
                _ => return Err(err("mixed kernel kinds for one parabolic")),
            },
            None => kernels.push(FillingKernel { parabolic_id: id, data }),
        }
    }
    for p in &rp.parabolics {
        if !kernels.iter().any(|k| k.parabolic_id == p.id) {
            kernels.push(FillingKernel::trivial(p.id));
        }
    }
    kernels.sort_by_key(|k| k.parabolic_id);
    Ok((rp, kernels))
}

/// Integer row echelon form with positive pivots, entries above each pivot
/// reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hermite_rows(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut top = 0;
    for c in 0..ncols {
        if top >= m.len() {
            break;
        }
        loop {
            let piv = (top..m.len()).filter(|&i| m[i][c] != 0).min_by_key(|&i| m[i][c].abs());
            let Some(p) = piv else { break };
            m.swap(top, p);
            let mut done = true;
            for i in top + 1..m.len() {
                if m[i][c] != 0 {
                    let q = m[i][c].div_euclid(m[top][c]);
                    let pr = m[top].clone();
                    for (x, y) in m[i].iter_mut().zip(&pr) {
                        *x -= q * y;
                    }
                    if m[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[top][c] == 0 {
            continue;
        }
        if m[top][c] < 0 {
            for x in m[top].iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..top {
            let q = m[i][c].div_euclid(m[top][c]);
            let pr = m[top].clone();
            for (x, y) in m[i].iter_mut().zip(&pr) {
                *x -= q * y;
            }
        }
        top += 1;
    }
    m.retain(|r| r.iter().any(|&x| x != 0));
    m
}

pub fn lattice_contains(hermite: &[Vec<i64>], v: &[i64]) -> bool {
    let mut v = v.to_vec();
    for row in hermite {
        let c = row.iter().position(|&x| x != 0).unwrap();
        if v[..c].iter().any(|&x| x != 0) {
            return false;
        }
        if v[c] % row[c] != 0 {
            return false;
        }
        let q = v[c] / row[c];
        for (x, y) in v.iter_mut().zip(row) {
            *x -= q * y;
        }
    }
    v.iter().all(|&x| x == 0)
}

/// Calls `f` on every vector of `Z^dim` with ℓ1 norm exactly `n` until it
/// returns true.
fn any_with_l1(dim: usize, n: i64, f: &mut dyn FnMut(&[i64]) -> bool) -> bool {
    fn rec(v: &mut Vec<i64>, i: usize, left: i64, f: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        if i + 1 == v.len() {
            for s in if left == 0 { vec![0] } else { vec![left, -left] } {
                v[i] = s;
                if f(v) {
                    return true;
                }
            }
            return false;
        }
        for a in 0..=left {
            for s in if a == 0 { vec![0] } else { vec![a, -a] } {
                v[i] = s;
                if rec(v, i + 1, left - a, f) {
                    return true;
                }
            }
        }
        false
    }
    let mut v = vec![0; dim];
    rec(&mut v, 0, n, f)
}

impl FillingKernel {
    /// Kernel generators as exponent vectors over the parabolic's generators.
    pub fn vectors(&self, p: &ParabolicSpec) -> Vec<Vec<i64>> {
        let per = Peripheral::new(p);
        match &self.data {
            KernelData::Lattice(rows) => rows.clone(),
            KernelData::Words(ws) => ws
                .iter()
                .map(|w| {
                    let mut v = vec![0i64; p.generators.len()];
                    for &l in w.letters() {
                        if let Some(i) = per.local(l) {
                            v[i] += if l > 0 { 1 } else { -1 };
                        }
                    }
                    v
                })
                .collect(),
        }
    }

    /// Kernel generators as words in global letters.
    pub fn words(&self, p: &ParabolicSpec) -> Vec<Word> {
        match &self.data {
            KernelData::Words(ws) => ws.clone(),
            KernelData::Lattice(rows) => rows
                .iter()
                .map(|r| {
                    let mut w = Vec::new();
                    for (i, &e) in r.iter().enumerate() {
                        w.extend(Word::power(p.generators[i], e).0);
                    }
                    Word(w)
                })
                .collect(),
        }
    }

    fn check_letters(&self, p: &ParabolicSpec) -> Result<(), PresentationError> {
        if let KernelData::Words(ws) = &self.data {
            let per = Peripheral::new(p);
            if ws.iter().flat_map(|w| w.letters()).any(|&l| !per.contains_letter(l)) {
                return Err(PresentationError::InvalidKernel(format!(
                    "kernel word uses letters outside parabolic {}",
                    p.id
                )));
            }
        }
        if let KernelData::Lattice(rows) = &self.data {
            if rows.iter().any(|r| r.len() != p.generators.len()) {
                return Err(PresentationError::InvalidKernel("lattice row has wrong length".into()));
            }
        }
        Ok(())
    }
}

/// Shortest nontrivial kernel element in the parabolic word metric.
pub fn slope_length(p: &ParabolicSpec, k: &FillingKernel, bound: u64) -> Result<SlopeLength, PresentationError> {
    if k.parabolic_id != p.id {
        return Err(PresentationError::InvalidKernel("kernel for a different parabolic".into()));
    }
    k.check_letters(p)?;
    match &p.kind {
        ParabolicKind::FreeAbelian { rank } => abelian_slope(*rank, &k.vectors(p), bound),
        ParabolicKind::FreeGroup { rank: 1 } => abelian_slope(1, &k.vectors(p), bound),
        ParabolicKind::FiniteCyclic { .. } => {
            let per = Peripheral::new(p);
            let gens: Vec<PElem> = k.words(p).iter().map(|w| per.element(w)).collect();
            let sub = subgroup_closure(&per, &gens);
            let best = sub.iter().filter(|e| !per.is_identity(e)).map(|e| per.length(e)).min();
            match best {
                None => Ok(SlopeLength::Infinite),
                Some(n) if n <= bound => Ok(SlopeLength::Finite(n)),
                Some(_) => Err(PresentationError::SearchBoundExceeded { bound }),
            }
        }
        ParabolicKind::FreeGroup { rank } => free_slope(p, *rank, &k.words(p), bound),
    }
}

fn abelian_slope(rank: usize, rows: &[Vec<i64>], bound: u64) -> Result<SlopeLength, PresentationError> {
    let h = hermite_rows(rows);
    if h.is_empty() {
        return Ok(SlopeLength::Infinite);
    }
    if h.len() != rows.iter().filter(|r| r.iter().any(|&x| x != 0)).count() {
        return Err(PresentationError::InvalidKernel("lattice rows are not independent".into()));
    }
    let cap = rows.iter().map(|r| r.iter().map(|x| x.unsigned_abs()).sum::<u64>()).filter(|&n| n > 0).min().unwrap();
    for n in 1..=cap.min(bound) {
        if any_with_l1(rank, n as i64, &mut |v| lattice_contains(&h, v)) {
            return Ok(SlopeLength::Finite(n));
        }
    }
    Err(PresentationError::SearchBoundExceeded { bound })
}

fn subgroup_closure(per: &Peripheral, gens: &[PElem]) -> Vec<PElem> {
    let mut seen = std::collections::BTreeSet::new();
    let id = per.identity();
    seen.insert(id.clone());
    let mut stack = vec![id];
    while let Some(e) = stack.pop() {
        for g in gens {
            let f = per.multiply(&e, g);
            if seen.insert(f.clone()) {
                stack.push(f);
            }
        }
    }
    seen.into_iter().collect()
}

fn free_slope(p: &ParabolicSpec, rank: usize, words: &[Word], bound: u64) -> Result<SlopeLength, PresentationError> {
    let reduced: Vec<Word> = words.iter().map(|w| w.free_reduce()).filter(|w| !w.is_empty()).collect();
    if reduced.is_empty() {
        return Ok(SlopeLength::Infinite);
    }
    let cap = reduced.iter().map(|w| w.len() as u64).min().unwrap();
    // Word problem of P/K via completion on the local alphabet.
    let local = |w: &Word| -> Word {
        Word(w.letters().iter().map(|&l| {
            let i = p.generators.iter().position(|&g| g == crate::word::gen_of(l)).unwrap() as i32 + 1;
            if l > 0 { i } else { -i }
        }).collect())
    };
    let names: Vec<String> = (0..rank).map(|i| format!("g{i}")).collect();
    let quotient = RelativePresentation {
        name: "P/K".into(),
        generators: names,
        parabolics: vec![],
        relators: reduced.iter().map(local).collect(),
    };
    let rs = crate::rewrite::knuth_bendix(&quotient, 5000, 64);
    if !rs.is_complete() {
        return Err(PresentationError::Undecided);
    }
    let letters: Vec<i32> = (1..=rank as i32).flat_map(|i| [i, -i]).collect();
    let mut layer = vec![Word::identity()];
    for n in 1..=cap.min(bound) {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                if w.letters().last() == Some(&-l) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                let v = Word(v);
                if rs.reduce(&v).is_empty() {
                    return Ok(SlopeLength::Finite(n));
                }
                next.push(v);
            }
        }
        layer = next;
    }
    Err(PresentationError::SearchBoundExceeded { bound })
}

/// Presentation of the filled group `G/K`.
pub fn quotient_presentation(
    rp: &RelativePresentation,
    kernels: &[FillingKernel],
) -> Result<RelativePresentation, PresentationError> {
    let mut out = rp.clone();
    let mut nontrivial = false;
    for (pi, p) in rp.parabolics.iter().enumerate() {
        let Some(k) = kernels.iter().find(|k| k.parabolic_id == p.id) else { continue };
        k.check_letters(p)?;
        let words: Vec<Word> = k.words(p).into_iter().filter(|w| !w.free_reduce().is_empty()).collect();
        if words.is_empty() {
            continue;
        }
        nontrivial = true;
        let unsupported = |why: &str| PresentationError::UnsupportedQuotient(format!("parabolic {}: {why}", p.id));
        let kind = match &p.kind {
            ParabolicKind::FreeAbelian { rank } | ParabolicKind::FreeGroup { rank: rank @ 1 } => {
                let h = hermite_rows(&k.vectors(p));
                if h.len() != *rank {
                    return Err(unsupported("kernel lattice does not have full rank"));
                }
                let mut orders = Vec::new();
                for (i, row) in h.iter().enumerate() {
                    if row.iter().enumerate().any(|(j, &x)| (j == i) != (x != 0)) {
                        return Err(unsupported("kernel lattice is not diagonal in the parabolic generators"));
                    }
                    orders.push(row[i] as u64);
                }
                ParabolicKind::FiniteCyclic { orders }
            }
            ParabolicKind::FiniteCyclic { orders } => {
                let mut new = orders.clone();
                for v in k.vectors(p) {
                    let nz: Vec<usize> = (0..v.len()).filter(|&i| v[i].rem_euclid(orders[i] as i64) != 0).collect();
                    if nz.len() > 1 {
                        return Err(unsupported("kernel element mixes finite factors"));
                    }
                    if let Some(&i) = nz.first() {
                        new[i] = gcd(new[i], v[i].unsigned_abs());
                    }
                }
                ParabolicKind::FiniteCyclic { orders: new }
            }
            ParabolicKind::FreeGroup { .. } => {
                return Err(unsupported("quotients of free parabolics of rank at least 2"));
            }
        };
        out.parabolics[pi].kind = kind;
        out.relators.extend(words);
    }
    if nontrivial {
        out.name = format!("{}/K", rp.name);
    }
    Ok(out)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F2REL: &str = "group F2\ngenerators a b\nparabolic 1 type Z generators a\nparabolic 2 type Z generators b\n";

    #[test]
    fn parse_round_trip() {
        let rp = RelativePresentation::parse(F2REL).unwrap();
        assert_eq!(rp.generators, vec!["a", "b"]);
        assert_eq!(rp.parabolics.len(), 2);
        assert_eq!(RelativePresentation::parse(&rp.to_text()).unwrap(), rp);
    }

    #[test]
    fn parse_rejects_shared_generators() {
        let t = "generators a\nparabolic 1 type Z generators a\nparabolic 2 type Z generators a\n";
        assert!(RelativePresentation::parse(t).is_err());
        let t = "generators a b\nparabolic 1 type Z^2 generators a\n";
        assert!(RelativePresentation::parse(t).is_err());
    }

    #[test]
    fn slope_of_cyclic_kernel() {
        let rp = RelativePresentation::parse(F2REL).unwrap();
        let k = FillingKernel::word(1, rp.parse_word("a^7").unwrap());
        assert_eq!(slope_length(&rp.parabolics[0], &k, 64).unwrap(), SlopeLength::Finite(7));
        let t = FillingKernel::trivial(1);
        assert_eq!(slope_length(&rp.parabolics[0], &t, 64).unwrap(), SlopeLength::Infinite);
        let k = FillingKernel::word(1, rp.parse_word("a^70").unwrap());
        assert_eq!(
            slope_length(&rp.parabolics[0], &k, 64),
            Err(PresentationError::SearchBoundExceeded { bound: 64 })
        );
    }

    #[test]
    fn slope_of_square_lattice() {
        let p = ParabolicSpec { id: 1, kind: ParabolicKind::FreeAbelian { rank: 2 }, generators: vec![0, 1] };
        let k = FillingKernel { parabolic_id: 1, data: KernelData::Lattice(vec![vec![4, 0], vec![0, 4]]) };
        assert_eq!(slope_length(&p, &k, 64).unwrap(), SlopeLength::Finite(4));
        let k = FillingKernel { parabolic_id: 1, data: KernelData::Lattice(vec![vec![3, 5], vec![1, -2]]) };
        assert_eq!(slope_length(&p, &k, 64).unwrap(), SlopeLength::Finite(3));
    }

    #[test]
    fn hermite_membership() {
        let h = hermite_rows(&[vec![2, 4], vec![0, 6]]);
        assert!(lattice_contains(&h, &[2, -2]));
        assert!(!lattice_contains(&h, &[1, 0]));
        assert!(lattice_contains(&h, &[0, 6]));
    }

    #[test]
    fn triangle_quotient() {
        let t = "generators x y z\nparabolic 1 type Z generators x\nparabolic 2 type Z generators y\nparabolic 3 type Z generators z\nrelator x y z^-1\n";
        let rp = RelativePresentation::parse(t).unwrap();
        let ks: Vec<FillingKernel> = ["x^2", "y^3", "z^7"]
            .iter()
            .enumerate()
            .map(|(i, w)| FillingKernel::word(i + 1, rp.parse_word(w).unwrap()))
            .collect();
        let q = quotient_presentation(&rp, &ks).unwrap();
        assert_eq!(q.relators.len(), 4);
        assert_eq!(q.parabolics[2].kind, ParabolicKind::FiniteCyclic { orders: vec![7] });
        let trivial: Vec<FillingKernel> = (1..=3).map(FillingKernel::trivial).collect();
        assert_eq!(quotient_presentation(&rp, &trivial).unwrap(), rp);
    }

    #[test]
    fn square_lattice_quotient_is_product() {
        let t = "generators a b\nparabolic 1 type Z^2 generators a b\nrelator a b a^-1 b^-1\nfill 1 [4 0; 0 4]\n";
        let (rp, ks) = parse_manifest(t).unwrap();
        let q = quotient_presentation(&rp, &ks).unwrap();
        assert_eq!(q.parabolics[0].kind, ParabolicKind::FiniteCyclic { orders: vec![4, 4] });
        assert_eq!(q.relators.len(), 3);
        let skew = "generators a b\nparabolic 1 type Z^2 generators a b\nrelator a b a^-1 b^-1\nfill 1 [1 1; 0 2]\n";
        let (rp, ks) = parse_manifest(skew).unwrap();
        assert!(matches!(quotient_presentation(&rp, &ks), Err(PresentationError::UnsupportedQuotient(_))));
    }
}
