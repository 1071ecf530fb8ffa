//! Graph families with canonical vertex addressing and lazy adjacency.
//!
//! Every family is an immutable descriptor; adjacency is computed on demand so
//! infinite graphs are only ever explored where a process actually goes.
//!
//! Canonical neighbour order (fixes DP iteration and multinomial sampling):
//!
//! * `T_d` root: children `0..d`. Other vertices: parent, then children `0..d-1`.
//! * `Z`: `n + 1`, then `n - 1`.
//! * Hammock tree vertex of generation `g`: parent (if `g >= 1`), children `0..4`,
//!   spine `g - 1` (if `g >= 1`), spine `g`.
//! * Hammock spine `k`: spine `k + 1`, spine `k - 1` (if `k >= 1`), the generation-`k`
//!   tree vertices in lexicographic order, then generation `k + 1`.
//! * Products: coordinate 1's moves first, in that factor's order, then coordinate 2, ...
//! * Glued origin: the parts' basepoint neighbourhoods concatenated in part order.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::FixedMap;

/// Children per hammock tree vertex.
pub const HAMMOCK_ARITY: u64 = 4;
/// Largest spine index whose degree fits in a `u64`.
pub const HAMMOCK_MAX_SPINE: u32 = 30;

/// A path from the root of a rooted tree, one child label per letter.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeWord(SmallVec<[u8; 16]>);

impl TreeWord {
    pub fn root() -> Self {
        TreeWord(SmallVec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        TreeWord(SmallVec::from_slice(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<TreeWord> {
        if self.0.is_empty() {
            None
        } else {
            Some(TreeWord(SmallVec::from_slice(&self.0[..self.0.len() - 1])))
        }
    }

    pub fn child(&self, label: u8) -> TreeWord {
        let mut w = self.0.clone();
        w.push(label);
        TreeWord(w)
    }

    pub fn is_prefix_of(&self, other: &TreeWord) -> bool {
        other.0.starts_with(&self.0)
    }

    fn common_prefix_len(&self, other: &TreeWord) -> usize {
        self.0.iter().zip(other.0.iter()).take_while(|(a, b)| a == b).count()
    }

    /// The `index`-th word of length `len` over `0..4` in lexicographic order.
    fn hammock_generation_word(len: u32, mut index: u64) -> TreeWord {
        let mut letters: SmallVec<[u8; 16]> = SmallVec::from_elem(0, len as usize);
        for slot in letters.iter_mut().rev() {
            *slot = (index % HAMMOCK_ARITY) as u8;
            index /= HAMMOCK_ARITY;
        }
        TreeWord(letters)
    }
}

impl fmt::Display for TreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in self.0.iter() {
            write!(f, "{}", l)?;
        }
        Ok(())
    }
}

fn parse_word(text: &str) -> Result<TreeWord> {
    let mut letters = SmallVec::new();
    for c in text.chars() {
        let d = c
            .to_digit(10)
            .ok_or_else(|| Error::address(format!("bad tree letter {c:?} in {text:?}")))?;
        letters.push(d as u8);
    }
    Ok(TreeWord(letters))
}

/// Canonical address of a vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexAddr {
    /// Vertex of a homogeneous tree (`w:012`).
    Word(TreeWord),
    /// Integer on the line (`z:-3`).
    Int(i64),
    /// Hammock spine vertex `k` (`h:s2`).
    Spine(u32),
    /// Hammock tree vertex (`h:t013`).
    HTree(TreeWord),
    /// Product vertex, one address per factor.
    Tuple(Vec<VertexAddr>),
    /// The shared vertex of a glued graph (`g:o`).
    GluedOrigin,
    /// Part-local vertex of a glued graph (`g1:w:0`).
    Glued(u32, Box<VertexAddr>),
}

impl VertexAddr {
    pub fn word(letters: &[u8]) -> Self {
        VertexAddr::Word(TreeWord::from_letters(letters))
    }

    pub fn htree(letters: &[u8]) -> Self {
        VertexAddr::HTree(TreeWord::from_letters(letters))
    }

    pub fn tuple(parts: impl IntoIterator<Item = VertexAddr>) -> Self {
        VertexAddr::Tuple(parts.into_iter().collect())
    }

    /// Coordinate `i` of a product address.
    pub fn coordinate(&self, i: usize) -> Option<&VertexAddr> {
        match self {
            VertexAddr::Tuple(cs) => cs.get(i),
            _ => None,
        }
    }

    fn write_nested(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        match self {
            VertexAddr::Word(w) => write!(f, "w:{w}"),
            VertexAddr::Int(n) => write!(f, "z:{n}"),
            VertexAddr::Spine(k) => write!(f, "h:s{k}"),
            VertexAddr::HTree(w) => write!(f, "h:t{w}"),
            VertexAddr::GluedOrigin => f.write_str("g:o"),
            VertexAddr::Glued(p, local) => {
                write!(f, "g{p}:")?;
                local.write_nested(f, true)
            }
            VertexAddr::Tuple(cs) => {
                if nested {
                    f.write_str("(")?;
                }
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    c.write_nested(f, true)?;
                }
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for VertexAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_nested(f, false)
    }
}

/// Splits on commas that are not inside parentheses.
fn split_top_level(text: &str) -> Result<Vec<&str>> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::address(format!("unbalanced parentheses in {text:?}")));
                }
            }
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::address(format!("unbalanced parentheses in {text:?}")));
    }
    out.push(&text[start..]);
    Ok(out)
}

fn parse_single(text: &str) -> Result<VertexAddr> {
    let text = text.trim();
    if let Some(inner) = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        return parse_any(inner);
    }
    if let Some(rest) = text.strip_prefix("w:") {
        return Ok(VertexAddr::Word(parse_word(rest)?));
    }
    if let Some(rest) = text.strip_prefix("z:") {
        return rest
            .parse()
            .map(VertexAddr::Int)
            .map_err(|_| Error::address(format!("bad integer address {text:?}")));
    }
    if let Some(rest) = text.strip_prefix("h:s") {
        return rest
            .parse()
            .map(VertexAddr::Spine)
            .map_err(|_| Error::address(format!("bad spine address {text:?}")));
    }
    if let Some(rest) = text.strip_prefix("h:t") {
        return Ok(VertexAddr::HTree(parse_word(rest)?));
    }
    if text == "g:o" {
        return Ok(VertexAddr::GluedOrigin);
    }
    if let Some(rest) = text.strip_prefix('g') {
        if let Some((idx, local)) = rest.split_once(':') {
            let p: u32 = idx
                .parse()
                .map_err(|_| Error::address(format!("bad glued part index in {text:?}")))?;
            return Ok(VertexAddr::Glued(p, Box::new(parse_single(local)?)));
        }
    }
    Err(Error::address(format!("unrecognised address {text:?}")))
}

fn parse_any(text: &str) -> Result<VertexAddr> {
    let parts = split_top_level(text)?;
    if parts.len() == 1 {
        parse_single(parts[0])
    } else {
        parts.into_iter().map(parse_single).collect::<Result<Vec<_>>>().map(VertexAddr::Tuple)
    }
}

impl FromStr for VertexAddr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_any(s)
    }
}

/// The isometric embedding of `Z` into `T_3` used for heights: `phi(0)` is the
/// root, `phi(n)` is `n` zeros and `phi(-n)` is `1` followed by `n - 1` zeros.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpineEmbedding;

impl SpineEmbedding {
    pub fn phi(&self, k: i64) -> TreeWord {
        let mut letters: SmallVec<[u8; 16]> = SmallVec::new();
        if k > 0 {
            letters.extend(std::iter::repeat_n(0, k as usize));
        } else if k < 0 {
            letters.push(1);
            letters.extend(std::iter::repeat_n(0, (-k - 1) as usize));
        }
        TreeWord(letters)
    }

    /// Label of the nearest spine vertex and the distance to it. The nearest
    /// spine vertex is the longest prefix of `w` lying on `phi(Z)`.
    pub fn nearest_spine(&self, w: &TreeWord) -> (i64, usize) {
        let letters = w.letters();
        match letters.first() {
            None => (0, 0),
            Some(0) => {
                let run = letters.iter().take_while(|&&l| l == 0).count();
                (run as i64, letters.len() - run)
            }
            Some(1) => {
                let run = letters[1..].iter().take_while(|&&l| l == 0).count();
                (-(1 + run as i64), letters.len() - 1 - run)
            }
            Some(_) => (0, letters.len()),
        }
    }

    /// Spine label of `w` if it lies on `phi(Z)`.
    pub fn spine_label(&self, w: &TreeWord) -> Option<i64> {
        match self.nearest_spine(w) {
            (k, 0) => Some(k),
            _ => None,
        }
    }

    /// Height: label of the nearest spine vertex plus the distance to it. This is
    /// the horofunction towards `phi(-inf)`, so every vertex has one neighbour one
    /// lower and two neighbours one higher.
    pub fn height(&self, w: &TreeWord) -> Result<i64> {
        validate_tree_word(3, w)?;
        let (label, dist) = self.nearest_spine(w);
        Ok(label + dist as i64)
    }
}

fn validate_tree_word(d: u32, w: &TreeWord) -> Result<()> {
    for (i, &l) in w.letters().iter().enumerate() {
        let bound = if i == 0 { d } else { d - 1 };
        if u32::from(l) >= bound {
            return Err(Error::address(format!("letter {l} at position {i} of w:{w} is not a label of T_{d}")));
        }
    }
    Ok(())
}

/// A graph family with a designated origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphFamily {
    /// Homogeneous tree in which every vertex has `degree` neighbours.
    HomTree { degree: u32 },
    /// The integer line.
    Line,
    /// The 4-ary rooted tree plus an `N_0` spine, spine `n` joined to tree
    /// generations `n` and `n + 1`. The origin is the tree root.
    Hammock,
    /// Cartesian product: an edge moves exactly one coordinate along a factor edge.
    Product(Vec<GraphFamily>),
    /// Parts glued by identifying all basepoints in a single origin vertex.
    Glued {
        parts: Vec<GraphFamily>,
        basepoints: Vec<VertexAddr>,
    },
}

impl GraphFamily {
    pub fn hom_tree(degree: u32) -> Result<Self> {
        if !(3..=10).contains(&degree) {
            return Err(Error::config(format!("homogeneous tree degree must lie in 3..=10, got {degree}")));
        }
        Ok(GraphFamily::HomTree { degree })
    }

    pub fn product(factors: Vec<GraphFamily>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::config("a product needs at least one factor"));
        }
        Ok(GraphFamily::Product(factors))
    }

    /// Identifies `basepoints[i]` of `parts[i]` for all `i` into a single origin.
    pub fn glue(parts: Vec<GraphFamily>, basepoints: Vec<VertexAddr>) -> Result<Self> {
        if parts.is_empty() || parts.len() != basepoints.len() {
            return Err(Error::config(format!(
                "glue needs one basepoint per part ({} parts, {} basepoints)",
                parts.len(),
                basepoints.len()
            )));
        }
        for (p, b) in parts.iter().zip(&basepoints) {
            p.validate(b).map_err(|e| Error::config(format!("bad basepoint: {e}")))?;
        }
        Ok(GraphFamily::Glued { parts, basepoints })
    }

    /// Glue at each part's own origin.
    pub fn glue_at_origins(parts: Vec<GraphFamily>) -> Result<Self> {
        let basepoints = parts.iter().map(GraphFamily::origin).collect();
        Self::glue(parts, basepoints)
    }

    pub fn origin(&self) -> VertexAddr {
        match self {
            GraphFamily::HomTree { .. } => VertexAddr::Word(TreeWord::root()),
            GraphFamily::Line => VertexAddr::Int(0),
            GraphFamily::Hammock => VertexAddr::HTree(TreeWord::root()),
            GraphFamily::Product(fs) => VertexAddr::Tuple(fs.iter().map(GraphFamily::origin).collect()),
            GraphFamily::Glued { .. } => VertexAddr::GluedOrigin,
        }
    }

    pub fn factors(&self) -> Option<&[GraphFamily]> {
        match self {
            GraphFamily::Product(fs) => Some(fs),
            _ => None,
        }
    }

    /// The common degree if every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<u64> {
        match self {
            GraphFamily::HomTree { degree } => Some(u64::from(*degree)),
            GraphFamily::Line => Some(2),
            GraphFamily::Hammock | GraphFamily::Glued { .. } => None,
            GraphFamily::Product(fs) => fs.iter().map(GraphFamily::regular_degree).sum(),
        }
    }

    pub fn validate(&self, v: &VertexAddr) -> Result<()> {
        match (self, v) {
            (GraphFamily::HomTree { degree }, VertexAddr::Word(w)) => validate_tree_word(*degree, w),
            (GraphFamily::Line, VertexAddr::Int(_)) => Ok(()),
            (GraphFamily::Hammock, VertexAddr::Spine(k)) => {
                if *k > HAMMOCK_MAX_SPINE {
                    Err(Error::address(format!("spine index {k} exceeds {HAMMOCK_MAX_SPINE}")))
                } else {
                    Ok(())
                }
            }
            (GraphFamily::Hammock, VertexAddr::HTree(w)) => {
                if w.len() > HAMMOCK_MAX_SPINE as usize {
                    return Err(Error::address(format!("hammock generation {} too deep", w.len())));
                }
                match w.letters().iter().find(|&&l| u64::from(l) >= HAMMOCK_ARITY) {
                    Some(l) => Err(Error::address(format!("hammock tree letter {l} out of range in h:t{w}"))),
                    None => Ok(()),
                }
            }
            (GraphFamily::Product(fs), VertexAddr::Tuple(cs)) => {
                if fs.len() != cs.len() {
                    return Err(Error::address(format!(
                        "product of {} factors given a {}-tuple",
                        fs.len(),
                        cs.len()
                    )));
                }
                fs.iter().zip(cs).try_for_each(|(f, c)| f.validate(c))
            }
            (GraphFamily::Glued { .. }, VertexAddr::GluedOrigin) => Ok(()),
            (GraphFamily::Glued { parts, basepoints }, VertexAddr::Glued(p, local)) => {
                let p = *p as usize;
                let part = parts
                    .get(p)
                    .ok_or_else(|| Error::address(format!("glued part {p} does not exist")))?;
                part.validate(local)?;
                if **local == basepoints[p] {
                    return Err(Error::address("basepoints are addressed as g:o"));
                }
                Ok(())
            }
            _ => Err(Error::address(format!("{v} is not a vertex of {self}"))),
        }
    }

    /// Number of neighbours of a (validated) vertex.
    pub fn degree(&self, v: &VertexAddr) -> Result<u64> {
        self.validate(v)?;
        Ok(self.degree_unchecked(v))
    }

    pub(crate) fn degree_unchecked(&self, v: &VertexAddr) -> u64 {
        match (self, v) {
            (GraphFamily::HomTree { degree }, _) => u64::from(*degree),
            (GraphFamily::Line, _) => 2,
            (GraphFamily::Hammock, VertexAddr::HTree(w)) => {
                if w.is_root() {
                    HAMMOCK_ARITY + 1
                } else {
                    HAMMOCK_ARITY + 3
                }
            }
            (GraphFamily::Hammock, VertexAddr::Spine(k)) => spine_degree(*k),
            (GraphFamily::Product(fs), VertexAddr::Tuple(cs)) => {
                fs.iter().zip(cs).map(|(f, c)| f.degree_unchecked(c)).sum()
            }
            (GraphFamily::Glued { parts, basepoints }, VertexAddr::GluedOrigin) => parts
                .iter()
                .zip(basepoints)
                .map(|(p, b)| p.degree_unchecked(b))
                .sum(),
            (GraphFamily::Glued { parts, .. }, VertexAddr::Glued(p, local)) => {
                parts[*p as usize].degree_unchecked(local)
            }
            _ => unreachable!("degree of an unvalidated address"),
        }
    }

    /// The `idx`-th neighbour in canonical order, without enumerating the others.
    pub fn neighbor_at(&self, v: &VertexAddr, idx: u64) -> Result<VertexAddr> {
        let deg = self.degree(v)?;
        if idx >= deg {
            return Err(Error::address(format!("neighbour index {idx} out of range for {v} (degree {deg})")));
        }
        Ok(self.neighbor_at_unchecked(v, idx))
    }

    pub(crate) fn neighbor_at_unchecked(&self, v: &VertexAddr, idx: u64) -> VertexAddr {
        match (self, v) {
            (GraphFamily::HomTree { .. }, VertexAddr::Word(w)) => {
                if w.is_root() {
                    VertexAddr::Word(w.child(idx as u8))
                } else if idx == 0 {
                    VertexAddr::Word(w.parent().expect("non-root"))
                } else {
                    VertexAddr::Word(w.child((idx - 1) as u8))
                }
            }
            (GraphFamily::Line, VertexAddr::Int(n)) => {
                if idx == 0 {
                    VertexAddr::Int(n + 1)
                } else {
                    VertexAddr::Int(n - 1)
                }
            }
            (GraphFamily::Hammock, VertexAddr::HTree(w)) => {
                let g = w.len() as u32;
                if g == 0 {
                    if idx < HAMMOCK_ARITY {
                        VertexAddr::HTree(w.child(idx as u8))
                    } else {
                        VertexAddr::Spine(0)
                    }
                } else {
                    match idx {
                        0 => VertexAddr::HTree(w.parent().expect("non-root")),
                        1..=4 => VertexAddr::HTree(w.child((idx - 1) as u8)),
                        5 => VertexAddr::Spine(g - 1),
                        _ => VertexAddr::Spine(g),
                    }
                }
            }
            (GraphFamily::Hammock, VertexAddr::Spine(k)) => {
                let k = *k;
                if idx == 0 {
                    return VertexAddr::Spine(k + 1);
                }
                let mut offset = 1;
                if k >= 1 {
                    if idx == 1 {
                        return VertexAddr::Spine(k - 1);
                    }
                    offset = 2;
                }
                let j = idx - offset;
                let gen_k = HAMMOCK_ARITY.pow(k);
                if j < gen_k {
                    VertexAddr::HTree(TreeWord::hammock_generation_word(k, j))
                } else {
                    VertexAddr::HTree(TreeWord::hammock_generation_word(k + 1, j - gen_k))
                }
            }
            (GraphFamily::Product(fs), VertexAddr::Tuple(cs)) => {
                let mut idx = idx;
                for (l, (f, c)) in fs.iter().zip(cs).enumerate() {
                    let d = f.degree_unchecked(c);
                    if idx < d {
                        let mut out = cs.clone();
                        out[l] = f.neighbor_at_unchecked(c, idx);
                        return VertexAddr::Tuple(out);
                    }
                    idx -= d;
                }
                unreachable!("product neighbour index out of range")
            }
            (GraphFamily::Glued { parts, basepoints }, VertexAddr::GluedOrigin) => {
                let mut idx = idx;
                for (p, (part, base)) in parts.iter().zip(basepoints).enumerate() {
                    let d = part.degree_unchecked(base);
                    if idx < d {
                        let local = part.neighbor_at_unchecked(base, idx);
                        return VertexAddr::Glued(p as u32, Box::new(local));
                    }
                    idx -= d;
                }
                unreachable!("glued neighbour index out of range")
            }
            (GraphFamily::Glued { parts, basepoints }, VertexAddr::Glued(p, local)) => {
                let part = &parts[*p as usize];
                let u = part.neighbor_at_unchecked(local, idx);
                if u == basepoints[*p as usize] {
                    VertexAddr::GluedOrigin
                } else {
                    VertexAddr::Glued(*p, Box::new(u))
                }
            }
            _ => unreachable!("neighbour of an unvalidated address"),
        }
    }

    /// All neighbours in canonical order, each exactly once.
    pub fn neighbors(&self, v: &VertexAddr) -> Result<Vec<VertexAddr>> {
        let deg = self.degree(v)?;
        Ok((0..deg).map(|i| self.neighbor_at_unchecked(v, i)).collect())
    }

    /// Graph distance from the origin.
    pub fn ball_distance(&self, v: &VertexAddr) -> Result<u64> {
        self.distance(&self.origin(), v)
    }

    /// Graph distance between two vertices.
    pub fn distance(&self, u: &VertexAddr, v: &VertexAddr) -> Result<u64> {
        self.validate(u)?;
        self.validate(v)?;
        Ok(self.distance_unchecked(u, v))
    }

    pub(crate) fn distance_unchecked(&self, u: &VertexAddr, v: &VertexAddr) -> u64 {
        match (self, u, v) {
            (GraphFamily::HomTree { .. }, VertexAddr::Word(a), VertexAddr::Word(b)) => {
                (a.len() + b.len() - 2 * a.common_prefix_len(b)) as u64
            }
            (GraphFamily::Line, VertexAddr::Int(a), VertexAddr::Int(b)) => a.abs_diff(*b),
            (GraphFamily::Hammock, a, b) => hammock_distance(a, b),
            (GraphFamily::Product(fs), VertexAddr::Tuple(a), VertexAddr::Tuple(b)) => fs
                .iter()
                .zip(a.iter().zip(b))
                .map(|(f, (x, y))| f.distance_unchecked(x, y))
                .sum(),
            (GraphFamily::Glued { parts, basepoints }, a, b) => {
                let to_origin = |x: &VertexAddr| match x {
                    VertexAddr::GluedOrigin => 0,
                    VertexAddr::Glued(p, local) => {
                        parts[*p as usize].distance_unchecked(&basepoints[*p as usize], local)
                    }
                    _ => unreachable!(),
                };
                match (a, b) {
                    (VertexAddr::Glued(p, x), VertexAddr::Glued(q, y)) if p == q => {
                        parts[*p as usize].distance_unchecked(x, y)
                    }
                    _ => to_origin(a) + to_origin(b),
                }
            }
            _ => unreachable!("distance between unvalidated addresses"),
        }
    }

    /// Canonical representative of `v` under the automorphisms that fix the ball
    /// of `radius` about the origin pointwise. Tree vertices deeper than `radius`
    /// keep their first `radius` letters and are padded with zeros; the subtrees
    /// hanging below the sphere can be permuted freely without moving the ball.
    pub fn collapse_beyond(&self, v: &VertexAddr, radius: u64) -> VertexAddr {
        fn collapse_word(w: &TreeWord, radius: u64) -> TreeWord {
            let r = radius as usize;
            if w.len() <= r {
                return w.clone();
            }
            let mut letters: SmallVec<[u8; 16]> = SmallVec::from_slice(&w.letters()[..r]);
            letters.resize(w.len(), 0);
            TreeWord(letters)
        }
        match (self, v) {
            (GraphFamily::HomTree { .. }, VertexAddr::Word(w)) => VertexAddr::Word(collapse_word(w, radius)),
            (GraphFamily::Hammock, VertexAddr::HTree(w)) => VertexAddr::HTree(collapse_word(w, radius)),
            (GraphFamily::Product(fs), VertexAddr::Tuple(cs)) => {
                VertexAddr::Tuple(fs.iter().zip(cs).map(|(f, c)| f.collapse_beyond(c, radius)).collect())
            }
            (GraphFamily::Glued { parts, basepoints }, VertexAddr::Glued(p, local)) => {
                let part = &parts[*p as usize];
                if basepoints[*p as usize] == part.origin() {
                    VertexAddr::Glued(*p, Box::new(part.collapse_beyond(local, radius)))
                } else {
                    v.clone()
                }
            }
            _ => v.clone(),
        }
    }

    /// All vertices within `radius` of the origin, in breadth-first order.
    pub fn ball(&self, radius: u64, cap: usize) -> Result<Vec<VertexAddr>> {
        let origin = self.origin();
        let mut seen: FixedMap<VertexAddr, ()> = FixedMap::default();
        let mut order = vec![origin.clone()];
        seen.insert(origin.clone(), ());
        let mut queue = VecDeque::from([origin]);
        while let Some(v) = queue.pop_front() {
            let d = self.distance_unchecked(&self.origin(), &v);
            if d == radius {
                continue;
            }
            for u in self.neighbors(&v)? {
                if seen.contains_key(&u) || self.distance_unchecked(&self.origin(), &u) > radius {
                    continue;
                }
                if order.len() >= cap {
                    return Err(Error::Resource(format!("ball of radius {radius} exceeds {cap} vertices")));
                }
                seen.insert(u.clone(), ());
                order.push(u.clone());
                queue.push_back(u);
            }
        }
        Ok(order)
    }
}

fn spine_degree(k: u32) -> u64 {
    let below = if k >= 1 { 1 } else { 0 };
    1 + below + HAMMOCK_ARITY.pow(k) + HAMMOCK_ARITY.pow(k + 1)
}

fn hammock_distance(a: &VertexAddr, b: &VertexAddr) -> u64 {
    // Spine k touches tree generations k and k + 1; every edge moves at most one
    // level, and the only strictly level-increasing paths from a tree vertex are
    // descending tree paths.
    fn tree_to_spine(gen: u64, k: u64) -> u64 {
        if gen == 0 {
            1 + k
        } else if k + 1 >= gen {
            // k >= gen - 1
            1 + k.saturating_sub(gen)
        } else {
            1 + (gen - 1 - k)
        }
    }
    match (a, b) {
        (VertexAddr::Spine(k), VertexAddr::Spine(l)) => u64::from(k.abs_diff(*l)),
        (VertexAddr::HTree(w), VertexAddr::Spine(k)) | (VertexAddr::Spine(k), VertexAddr::HTree(w)) => {
            tree_to_spine(w.len() as u64, u64::from(*k))
        }
        (VertexAddr::HTree(x), VertexAddr::HTree(y)) => {
            let (x, y) = if x.len() <= y.len() { (x, y) } else { (y, x) };
            let gap = (y.len() - x.len()) as u64;
            if x.is_prefix_of(y) {
                gap
            } else if gap == 0 {
                2
            } else {
                gap + 1
            }
        }
        _ => unreachable!("not hammock addresses"),
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFamily::HomTree { degree } => write!(f, "t({degree})"),
            GraphFamily::Line => f.write_str("z"),
            GraphFamily::Hammock => f.write_str("hammock"),
            GraphFamily::Product(fs) => {
                f.write_str("product(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{g}")?;
                }
                f.write_str(")")
            }
            GraphFamily::Glued { parts, basepoints } => {
                f.write_str("glue(")?;
                for (i, (g, b)) in parts.iter().zip(basepoints).enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{g}@")?;
                    b.write_nested(f, true)?;
                }
                f.write_str(")")
            }
        }
    }
}
