//! Entity identifiers: IRIs, relative IRI references and `#fragment` ids.
//!
//! Identity is decided on a normalized form (percent-decoding of unreserved
//! characters, dot-segment removal on relative paths) while the raw spelling
//! is preserved for serialization.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

/// One entity identifier: an absolute IRI, a relative IRI reference resolved
/// against the crate root, or a `#fragment` local id.
///
/// Two ids are equal iff their normalized forms are byte-equal; hashing and
/// ordering follow the same form. The raw spelling survives round trips.
#[derive(Debug, Clone)]
pub struct EntityId {
    raw: String,
    normalized: String,
}

impl EntityId {
    /// Wraps a raw identifier, computing its normalized form.
    ///
    /// Whitespace inside an id must be percent-encoded; an empty or
    /// whitespace-carrying id yields `None`.
    pub fn new(raw: impl Into<String>) -> Option<Self> {
        let raw = raw.into();
        if raw.is_empty() || raw.chars().any(char::is_whitespace) {
            return None;
        }
        let normalized = normalize(&raw);
        Some(EntityId { raw, normalized })
    }

    /// The identifier exactly as written.
    pub fn as_str(&self) -> &str {
        &self.raw
    }

    /// The comparison form: unreserved percent-escapes decoded and, for
    /// relative references, dot segments removed.
    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    /// True when the id carries a scheme (RFC 3987 absolute IRI).
    pub fn is_absolute(&self) -> bool {
        has_scheme(&self.raw)
    }

    /// True for `#fragment`-only local ids.
    pub fn is_local_fragment(&self) -> bool {
        self.raw.starts_with('#')
    }

    /// True for relative references (neither absolute nor `#local`).
    pub fn is_relative(&self) -> bool {
        !self.is_absolute() && !self.is_local_fragment()
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl PartialEq for EntityId {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}

impl Eq for EntityId {}

impl Hash for EntityId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.normalized.hash(state);
    }
}

impl PartialOrd for EntityId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EntityId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.normalized.cmp(&other.normalized)
    }
}

/// True when `s` starts with an RFC 3986 scheme followed by `:`.
fn has_scheme(s: &str) -> bool {
    let mut chars = s.char_indices();
    match chars.next() {
        Some((_, c)) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    for (i, c) in chars {
        match c {
            ':' => return i > 0,
            c if c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.') => {}
            _ => return false,
        }
    }
    false
}

fn is_unreserved(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~')
}

/// Percent-decodes escapes of unreserved characters, leaving every other
/// escape untouched.
fn decode_unreserved(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            let hi = (bytes[i + 1] as char).to_digit(16);
            let lo = (bytes[i + 2] as char).to_digit(16);
            if let (Some(hi), Some(lo)) = (hi, lo) {
                let decoded = (hi * 16 + lo) as u8;
                if is_unreserved(decoded) {
                    out.push(decoded as char);
                    i += 3;
                    continue;
                }
            }
        }
        let c = s[i..].chars().next().expect("in-bounds char");
        out.push(c);
        i += c.len_utf8();
    }
    out
}

/// RFC 3986 §5.2.4 remove_dot_segments.
fn remove_dot_segments(path: &str) -> String {
    let mut input = path.to_string();
    let mut output = String::new();
    while !input.is_empty() {
        if let Some(rest) = input.strip_prefix("../") {
            input = rest.to_string();
        } else if let Some(rest) = input.strip_prefix("./") {
            input = rest.to_string();
        } else if let Some(rest) = input.strip_prefix("/./") {
            input = format!("/{rest}");
        } else if input == "/." {
            input = "/".to_string();
        } else if let Some(rest) = input.strip_prefix("/../") {
            input = format!("/{rest}");
            truncate_last_segment(&mut output);
        } else if input == "/.." {
            input = "/".to_string();
            truncate_last_segment(&mut output);
        } else if input == "." || input == ".." {
            input.clear();
        } else {
            let start = usize::from(input.starts_with('/'));
            let end = match input[start..].find('/') {
                Some(pos) => start + pos,
                None => input.len(),
            };
            output.push_str(&input[..end]);
            input.drain(..end);
        }
    }
    output
}

fn truncate_last_segment(output: &mut String) {
    match output.rfind('/') {
        Some(pos) => output.truncate(pos),
        None => output.clear(),
    }
}

/// Normalized comparison form of an identifier.
fn normalize(raw: &str) -> String {
    let decoded = decode_unreserved(raw);
    if has_scheme(&decoded) || decoded.starts_with('#') {
        return decoded;
    }
    // Relative reference: dot-segment removal applies to the path part only.
    let (path, tail) = match decoded.find(['?', '#']) {
        Some(pos) => decoded.split_at(pos),
        None => (decoded.as_str(), ""),
    };
    let mut out = remove_dot_segments(path);
    out.push_str(tail);
    out
}
