//! Coding-style observations extracted from user-supplied Python.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Naming {
    SnakeCase,
    CamelCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Indent {
    Spaces(usize),
    Tab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StyleHint {
    Naming(Naming),
    Indent(Indent),
    Docstrings(bool),
}

impl fmt::Display for StyleHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StyleHint::Naming(Naming::SnakeCase) => f.write_str("naming: snake_case"),
            StyleHint::Naming(Naming::CamelCase) => f.write_str("naming: camelCase"),
            StyleHint::Indent(Indent::Spaces(n)) => write!(f, "indent: {n}"),
            StyleHint::Indent(Indent::Tab) => f.write_str("indent: tab"),
            StyleHint::Docstrings(true) => f.write_str("docstrings: present"),
            StyleHint::Docstrings(false) => f.write_str("docstrings: absent"),
        }
    }
}

/// Returns `None` when the text does not look like Python, otherwise the
/// hints that could be determined (possibly none).
pub fn extract_hints(source: &str) -> Option<Vec<StyleHint>> {
    if !looks_like_python(source) {
        return None;
    }
    let mut hints = Vec::new();
    if let Some(n) = naming(source) {
        hints.push(StyleHint::Naming(n));
    }
    if let Some(i) = indent(source) {
        hints.push(StyleHint::Indent(i));
    }
    if let Some(d) = docstrings(source) {
        hints.push(StyleHint::Docstrings(d));
    }
    Some(hints)
}

/// Lexical sanity check: strings terminate, brackets balance, and indentation
/// only increases after a line that opens a block.
fn looks_like_python(source: &str) -> bool {
    let mut depth: Vec<char> = Vec::new();
    let mut in_triple: Option<&str> = None;
    let mut prev_opens_block = false;
    let mut prev_indent = 0usize;
    let mut statements = 0usize;

    for raw in source.lines() {
        let mut line = raw;
        if let Some(q) = in_triple {
            match line.find(q) {
                Some(end) => {
                    in_triple = None;
                    line = &line[end + 3..];
                    if line.trim().is_empty() {
                        continue;
                    }
                }
                None => continue,
            }
        } else {
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if depth.is_empty() {
                let ind = line.len() - trimmed.len();
                if ind > prev_indent && !prev_opens_block {
                    return false;
                }
                if prev_opens_block && ind <= prev_indent {
                    return false;
                }
                prev_indent = ind;
                statements += 1;
            }
        }

        let bytes: Vec<char> = line.chars().collect();
        let mut i = 0;
        let mut last_significant = ' ';
        while i < bytes.len() {
            let c = bytes[i];
            match c {
                '#' => break,
                '\'' | '"' => {
                    let triple = i + 2 < bytes.len() && bytes[i + 1] == c && bytes[i + 2] == c;
                    if triple {
                        let q = if c == '"' { "\"\"\"" } else { "'''" };
                        let rest: String = bytes[i + 3..].iter().collect();
                        match rest.find(q) {
                            Some(end) => {
                                i += 3 + rest[..end].chars().count() + 3;
                                last_significant = c;
                                continue;
                            }
                            None => {
                                in_triple = Some(q);
                                break;
                            }
                        }
                    }
                    let mut j = i + 1;
                    let mut closed = false;
                    while j < bytes.len() {
                        if bytes[j] == '\\' {
                            j += 2;
                            continue;
                        }
                        if bytes[j] == c {
                            closed = true;
                            break;
                        }
                        j += 1;
                    }
                    if !closed {
                        return false;
                    }
                    i = j + 1;
                    last_significant = c;
                    continue;
                }
                '(' | '[' | '{' => depth.push(c),
                ')' | ']' | '}' => {
                    let open = match c {
                        ')' => '(',
                        ']' => '[',
                        _ => '{',
                    };
                    if depth.pop() != Some(open) {
                        return false;
                    }
                }
                _ => {}
            }
            if !c.is_whitespace() {
                last_significant = c;
            }
            i += 1;
        }
        if depth.is_empty() && in_triple.is_none() {
            prev_opens_block = last_significant == ':';
        }
    }
    depth.is_empty() && in_triple.is_none() && !prev_opens_block && statements > 0
}

fn classify(name: &str) -> Option<Naming> {
    let name = name.trim_start_matches('_');
    if name.is_empty() || name.chars().all(|c| !c.is_lowercase()) {
        return None;
    }
    let first_lower = name.chars().next().is_some_and(|c| c.is_lowercase());
    let has_upper = name.chars().any(|c| c.is_uppercase());
    if name.contains('_') && !has_upper {
        Some(Naming::SnakeCase)
    } else if first_lower && has_upper && !name.contains('_') {
        Some(Naming::CamelCase)
    } else {
        None
    }
}

fn identifier_at(s: &str) -> &str {
    let end = s.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(s.len());
    &s[..end]
}

fn naming(source: &str) -> Option<Naming> {
    let mut counts: BTreeMap<bool, usize> = BTreeMap::new();
    for line in source.lines() {
        let t = line.trim_start();
        let name = if let Some(rest) = t.strip_prefix("def ").or_else(|| t.strip_prefix("async def ")) {
            identifier_at(rest.trim_start())
        } else {
            let id = identifier_at(t);
            let after = t[id.len()..].trim_start();
            if !id.is_empty() && after.starts_with('=') && !after.starts_with("==") {
                id
            } else {
                continue;
            }
        };
        match classify(name) {
            Some(Naming::SnakeCase) => *counts.entry(true).or_default() += 1,
            Some(Naming::CamelCase) => *counts.entry(false).or_default() += 1,
            None => {}
        }
    }
    let snake = counts.get(&true).copied().unwrap_or(0);
    let camel = counts.get(&false).copied().unwrap_or(0);
    match snake.cmp(&camel) {
        std::cmp::Ordering::Greater => Some(Naming::SnakeCase),
        std::cmp::Ordering::Less => Some(Naming::CamelCase),
        std::cmp::Ordering::Equal => None,
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn indent(source: &str) -> Option<Indent> {
    let mut g = 0usize;
    let mut tabs = 0usize;
    let mut spaced = 0usize;
    for line in source.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('\t') {
            tabs += 1;
            continue;
        }
        let n = line.len() - line.trim_start_matches(' ').len();
        if n > 0 {
            spaced += 1;
            g = gcd(g, n);
        }
    }
    if tabs > spaced {
        Some(Indent::Tab)
    } else if g > 0 {
        Some(Indent::Spaces(g))
    } else {
        None
    }
}

fn docstrings(source: &str) -> Option<bool> {
    let lines: Vec<&str> = source.lines().collect();
    let mut defs = 0;
    let mut documented = 0;
    for (i, line) in lines.iter().enumerate() {
        let t = line.trim_start();
        if !(t.starts_with("def ") || t.starts_with("async def ") || t.starts_with("class ")) {
            continue;
        }
        defs += 1;
        let next = lines[i + 1..].iter().map(|l| l.trim()).find(|l| !l.is_empty());
        if next.is_some_and(|n| n.starts_with("\"\"\"") || n.starts_with("'''")) {
            documented += 1;
        }
    }
    (defs > 0).then_some(documented * 2 >= defs)
}
