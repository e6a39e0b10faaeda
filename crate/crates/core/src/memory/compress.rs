/// Upper bound on a compressed final solution, in characters.
pub const MAX_COMPRESSED_CHARS: usize = 2000;

/// Drops full-line comments and blank lines, collapses runs of spaces outside
/// string literals (leading indentation is kept), and caps the result.
pub fn compress_source(source: &str) -> String {
    let mut out = String::new();
    for line in source.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let body = line.trim_end();
        let indent_len = body.len() - body.trim_start().len();
        out.push_str(&body[..indent_len]);
        collapse_spaces(&body[indent_len..], &mut out);
        out.push('\n');
    }
    truncate_chars(&out, MAX_COMPRESSED_CHARS)
}

fn collapse_spaces(code: &str, out: &mut String) {
    let mut quote: Option<char> = None;
    let mut escaped = false;
    let mut prev_space = false;
    for c in code.chars() {
        match quote {
            Some(q) => {
                out.push(c);
                if escaped {
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                }
            }
            None => {
                if c == ' ' {
                    if !prev_space {
                        out.push(c);
                    }
                    prev_space = true;
                    continue;
                }
                if c == '"' || c == '\'' {
                    quote = Some(c);
                }
                out.push(c);
            }
        }
        prev_space = false;
    }
}

pub(crate) fn truncate_chars(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((idx, _)) => s[..idx].to_string(),
        None => s.to_string(),
    }
}
