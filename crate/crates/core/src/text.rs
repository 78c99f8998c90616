//! Backslash escaping for single-line, tab-separated text records.

/// Escapes `\`, newline, carriage return and tab so the result fits in one
/// tab-separated field.
pub fn escape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape`]. Returns `None` on a dangling or unknown escape.
pub fn unescape(field: &str) -> Option<String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            't' => out.push('\t'),
            _ => return None,
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn escapes_control_characters() {
        assert_eq!(escape("a\tb\nc\\d"), "a\\tb\\nc\\\\d");
        assert_eq!(unescape("x\\q"), None);
        assert_eq!(unescape("x\\"), None);
    }

    proptest! {
        #[test]
        fn round_trip(s in ".*") {
            let e = escape(&s);
            prop_assert!(!e.contains('\n') && !e.contains('\t'));
            prop_assert_eq!(unescape(&e).unwrap(), s);
        }
    }
}
