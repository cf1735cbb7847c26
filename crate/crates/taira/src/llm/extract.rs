//! Tolerant JSON extraction from free-form model replies.

/// Finds the first balanced, parseable JSON object embedded in `text`.
///
/// Models wrap JSON in code fences, prose, or both; this scans every `{`
/// candidate, walks to its balanced closing brace (string- and escape-aware),
/// and returns the first slice that parses. Returns `None` when no candidate
/// parses; never panics on arbitrary input.
pub fn extract_json(text: &str) -> Option<serde_json::Value> {
    let bytes = text.as_bytes();
    for (start, _) in text.char_indices().filter(|&(_, c)| c == '{') {
        if let Some(end) = balanced_end(bytes, start) {
            if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text[start..=end]) {
                if value.is_object() {
                    return Some(value);
                }
            }
        }
    }
    None
}

/// Byte index of the brace closing the object opened at `start`, if balanced.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(start + offset);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_object() {
        assert_eq!(extract_json("{\"a\": 1}").unwrap()["a"], 1);
    }

    #[test]
    fn fenced_object_with_prose() {
        let v = extract_json("Sure!\n```json\n{\"plan\": {\"x\": [1, 2]}}\n```\nDone.").unwrap();
        assert_eq!(v["plan"]["x"][1], 2);
    }

    #[test]
    fn braces_inside_strings_do_not_confuse_the_scan() {
        let v = extract_json("{\"s\": \"a } b { c\", \"n\": 3}").unwrap();
        assert_eq!(v["n"], 3);
    }

    #[test]
    fn skips_unparseable_candidates() {
        let v = extract_json("{not json} then {\"ok\": true}").unwrap();
        assert_eq!(v["ok"], true);
    }

    #[test]
    fn no_object_yields_none() {
        assert!(extract_json("nothing to see here").is_none());
        assert!(extract_json("unbalanced { \"a\": 1").is_none());
        assert!(extract_json("[1, 2, 3]").is_none(), "top-level arrays are not objects");
        assert!(extract_json("").is_none());
    }
}
