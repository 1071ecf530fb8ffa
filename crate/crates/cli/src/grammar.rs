//! Expression grammar for graph, kernel and offspring specs.
//!
//! ```text
//! graph  := t(D) | z | hammock | product(graph, ...) | glue(graph@addr, ...)
//! kernel := simple | lazy(kernel, s) | biasedline(p) | heightbiased(p)
//!         | product(a: kernel@i, ...)
//! mu     := critical | const(k) | {k: p, ...}
//! ```
//! Numbers are decimals or fractions `a/b`.

use brwlab_core::weight::parse_rational;
use brwlab_core::{GraphFamily, KernelSpec, VertexAddr};
use num_rational::Rational64;

use crate::error::CliError;

fn bad(what: &str, text: &str) -> CliError {
    CliError::Config(format!("cannot parse {what} from `{text}`"))
}

/// Splits on `sep` outside parentheses and braces.
pub(crate) fn split_top(text: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts
}

/// `name(args)` -> `(name, Some(args))`; a bare word -> `(word, None)`.
fn call(text: &str) -> Option<(&str, Option<&str>)> {
    let text = text.trim();
    match text.find('(') {
        None => Some((text, None)),
        Some(open) => {
            let inner = text[open + 1..].strip_suffix(')')?;
            Some((text[..open].trim(), Some(inner)))
        }
    }
}

/// Position of the last `@` outside parentheses.
fn last_at(text: &str) -> Option<usize> {
    let mut depth = 0i32;
    let mut found = None;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '@' if depth == 0 => found = Some(i),
            _ => {}
        }
    }
    found
}

pub fn parse_number(text: &str) -> Result<Rational64, CliError> {
    parse_rational(text).ok_or_else(|| bad("a number", text))
}

pub fn parse_address(text: &str) -> Result<VertexAddr, CliError> {
    let text = text.trim();
    let text = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(text);
    text.parse().map_err(|e| CliError::Config(format!("bad address `{text}`: {e}")))
}

pub fn parse_graph(text: &str) -> Result<GraphFamily, CliError> {
    let (name, args) = call(text).ok_or_else(|| bad("a graph", text))?;
    let graph = match (name, args) {
        ("z", None) => GraphFamily::Line,
        ("hammock", None) => GraphFamily::Hammock,
        ("t", Some(d)) => {
            let d: u32 = d.trim().parse().map_err(|_| bad("a tree degree", d))?;
            GraphFamily::hom_tree(d)?
        }
        ("product", Some(args)) => {
            GraphFamily::product(split_top(args, ',').into_iter().map(parse_graph).collect::<Result<_, _>>()?)?
        }
        ("glue", Some(args)) => {
            let mut parts = Vec::new();
            let mut bases = Vec::new();
            for item in split_top(args, ',') {
                let at = last_at(item).ok_or_else(|| bad("a glue part `graph@address`", item))?;
                parts.push(parse_graph(&item[..at])?);
                bases.push(parse_address(&item[at + 1..])?);
            }
            GraphFamily::glue(parts, bases)?
        }
        _ => return Err(bad("a graph", text)),
    };
    Ok(graph)
}

pub fn parse_kernel(text: &str) -> Result<KernelSpec, CliError> {
    let (name, args) = call(text).ok_or_else(|| bad("a kernel", text))?;
    let spec = match (name, args) {
        ("simple", None) => KernelSpec::Simple,
        ("lazy", Some(args)) => match split_top(args, ',').as_slice() {
            [base, stay] => KernelSpec::lazy(parse_kernel(base)?, parse_number(stay)?),
            _ => return Err(bad("lazy(kernel, stay)", text)),
        },
        ("biasedline", Some(p)) => KernelSpec::BiasedLine { right: parse_number(p)? },
        ("heightbiased", Some(p)) => KernelSpec::HeightBiased { down: parse_number(p)? },
        ("product", Some(args)) => {
            let mut slots: Vec<Option<(KernelSpec, Rational64)>> = Vec::new();
            for item in split_top(args, ',') {
                let (weight, rest) = item.split_once(':').ok_or_else(|| bad("a product term `a: kernel@i`", item))?;
                let at = last_at(rest).ok_or_else(|| bad("a product term `a: kernel@i`", item))?;
                let index: usize = rest[at + 1..].trim().parse().map_err(|_| bad("a factor index", item))?;
                if index == 0 {
                    return Err(CliError::Config("factor indices start at 1".into()));
                }
                if slots.len() < index {
                    slots.resize(index, None);
                }
                if slots[index - 1].is_some() {
                    return Err(CliError::Config(format!("factor {index} appears twice in `{text}`")));
                }
                slots[index - 1] = Some((parse_kernel(&rest[..at])?, parse_number(weight)?));
            }
            KernelSpec::Product(
                slots
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| s.ok_or_else(|| CliError::Config(format!("factor {} has no kernel", i + 1))))
                    .collect::<Result<_, _>>()?,
            )
        }
        _ => return Err(bad("a kernel", text)),
    };
    Ok(spec)
}

/// Offspring law as written in a config.
#[derive(Clone, Debug, PartialEq)]
pub enum OffspringSpec {
    /// Two-point law with mean `1/rho`.
    Critical,
    Explicit(Vec<(u64, f64)>),
}

impl std::fmt::Display for OffspringSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OffspringSpec::Critical => f.write_str("critical"),
            OffspringSpec::Explicit(pairs) if pairs.len() == 1 => write!(f, "const({})", pairs[0].0),
            OffspringSpec::Explicit(pairs) => {
                let items: Vec<String> = pairs.iter().map(|(k, p)| format!("{k}: {p}")).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

pub fn parse_offspring(text: &str) -> Result<OffspringSpec, CliError> {
    let text = text.trim();
    if text == "critical" {
        return Ok(OffspringSpec::Critical);
    }
    if let Some(("const", Some(k))) = call(text) {
        let k: u64 = k.trim().parse().map_err(|_| bad("an offspring count", k))?;
        return Ok(OffspringSpec::Explicit(vec![(k, 1.0)]));
    }
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| bad("an offspring law", text))?;
    let mut pairs = Vec::new();
    for item in split_top(inner, ',') {
        let (k, p) = item.split_once(':').ok_or_else(|| bad("an offspring term `k: p`", item))?;
        let k: u64 = k.trim().parse().map_err(|_| bad("an offspring count", k))?;
        let p = parse_number(p)?;
        pairs.push((k, *p.numer() as f64 / *p.denom() as f64));
    }
    pairs.sort_by_key(|(k, _)| *k);
    Ok(OffspringSpec::Explicit(pairs))
}

/// Where the embedded Galton-Watson line sits; factor indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LineSpec {
    Fiber { factor: usize, vertex: VertexAddr },
    SpineFiber { factor: usize, vertex: VertexAddr, spine_factor: usize },
}

impl std::fmt::Display for LineSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineSpec::Fiber { factor, vertex } => write!(f, "fiber({factor}, {vertex})"),
            LineSpec::SpineFiber { factor, vertex, spine_factor } => {
                write!(f, "spinefiber({factor}, {vertex}, {spine_factor})")
            }
        }
    }
}

fn parse_factor(text: &str) -> Result<usize, CliError> {
    match text.trim().parse::<usize>() {
        Ok(i) if i >= 1 => Ok(i),
        _ => Err(bad("a 1-based factor index", text)),
    }
}

pub fn parse_line(text: &str) -> Result<LineSpec, CliError> {
    let (name, args) = call(text).ok_or_else(|| bad("a line", text))?;
    let args = split_top(args.unwrap_or(""), ',');
    match (name, args.as_slice()) {
        ("fiber", [factor, vertex]) => Ok(LineSpec::Fiber {
            factor: parse_factor(factor)?,
            vertex: parse_address(vertex)?,
        }),
        ("spinefiber", [factor, vertex, spine]) => Ok(LineSpec::SpineFiber {
            factor: parse_factor(factor)?,
            vertex: parse_address(vertex)?,
            spine_factor: parse_factor(spine)?,
        }),
        _ => Err(bad("a line `fiber(i, addr)` or `spinefiber(i, addr, j)`", text)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graphs_round_trip() {
        for text in ["t(3)", "z", "hammock", "product(t(3), z)", "product(t(3), t(3))", "glue(hammock@h:s0, product(t(3), t(3))@(w:,w:))"] {
            let g = parse_graph(text).unwrap();
            assert_eq!(parse_graph(&g.to_string()).unwrap(), g, "{text}");
        }
        assert!(parse_graph("t(2)").is_err());
        assert!(parse_graph("product(t(3), q)").is_err());
    }

    #[test]
    fn kernels_round_trip() {
        for text in [
            "simple",
            "lazy(simple, 0.5)",
            "product(0.5: simple@1, 0.5: biasedline(0.7)@2)",
            "product(1/2: biasedline(7/10)@2, 1/2: simple@1)",
            "heightbiased(0.7)",
        ] {
            let k = parse_kernel(text).unwrap();
            assert_eq!(parse_kernel(&k.to_string()).unwrap(), k, "{text}");
        }
        assert!(parse_kernel("product(0.5: simple@1, 0.5: simple@1)").is_err());
        assert!(parse_kernel("lazy(simple)").is_err());
        assert!(parse_kernel("simpel").is_err());
    }

    #[test]
    fn offspring_laws() {
        assert_eq!(parse_offspring("critical").unwrap(), OffspringSpec::Critical);
        assert_eq!(parse_offspring("const(2)").unwrap(), OffspringSpec::Explicit(vec![(2, 1.0)]));
        let law = parse_offspring("{2: 1/5, 1: 0.8}").unwrap();
        assert_eq!(law, OffspringSpec::Explicit(vec![(1, 0.8), (2, 0.2)]));
        assert_eq!(parse_offspring(&law.to_string()).unwrap(), law);
    }

    #[test]
    fn lines() {
        let l = parse_line("spinefiber(1, w:, 2)").unwrap();
        assert_eq!(parse_line(&l.to_string()).unwrap(), l);
        assert!(parse_line("fiber(0, w:)").is_err());
    }
}
