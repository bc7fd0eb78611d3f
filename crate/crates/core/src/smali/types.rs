//! Type descriptor helpers (`I`, `J`, `Ljava/lang/String;`, `[B`, ...).

/// Register words a value of this type occupies.
pub fn word_size(desc: &str) -> u16 {
    match desc {
        "J" | "D" => 2,
        _ => 1,
    }
}

/// Splits a concatenated parameter list such as `ILjava/lang/String;[B`.
pub fn split_descriptors(s: &str) -> Option<Vec<String>> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        while i < bytes.len() && bytes[i] == b'[' {
            i += 1;
        }
        match bytes.get(i)? {
            b'V' | b'Z' | b'B' | b'S' | b'C' | b'I' | b'J' | b'F' | b'D' => i += 1,
            b'L' => {
                let end = s[i..].find(';')?;
                i += end + 1;
            }
            _ => return None,
        }
        out.push(s[start..i].to_string());
    }
    Some(out)
}

/// Parses `(params)ret` into parameter and return types.
pub fn parse_method_descriptor(desc: &str) -> Option<(Vec<String>, String)> {
    let rest = desc.strip_prefix('(')?;
    let close = rest.find(')')?;
    let params = split_descriptors(&rest[..close])?;
    let ret = &rest[close + 1..];
    let rets = split_descriptors(ret)?;
    if rets.len() != 1 {
        return None;
    }
    Some((params, ret.to_string()))
}

pub fn is_valid_descriptor(desc: &str) -> bool {
    matches!(split_descriptors(desc), Some(v) if v.len() == 1)
}

pub fn is_class_descriptor(desc: &str) -> bool {
    desc.len() > 2 && desc.starts_with('L') && desc.ends_with(';') && !desc[1..desc.len() - 1].contains(';')
}

/// `com.example.Foo` -> `Lcom/example/Foo;`
pub fn java_to_descriptor(name: &str) -> String {
    format!("L{};", name.replace('.', "/"))
}

/// `Lcom/example/Foo;` -> `com.example.Foo`
pub fn descriptor_to_java(desc: &str) -> String {
    desc.trim_start_matches('L')
        .trim_end_matches(';')
        .replace('/', ".")
}

/// Simple class name without package or outer classes' `$` suffix handling.
pub fn simple_name(desc: &str) -> &str {
    let inner = desc.trim_start_matches('L').trim_end_matches(';');
    inner.rsplit('/').next().unwrap_or(inner)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_mixed_parameter_lists() {
        let v = split_descriptors("IJLjava/lang/String;[B[[Lx/Y;Z").unwrap();
        assert_eq!(v, ["I", "J", "Ljava/lang/String;", "[B", "[[Lx/Y;", "Z"]);
    }

    #[test]
    fn method_descriptor() {
        let (p, r) = parse_method_descriptor("(Ljava/lang/String;J)V").unwrap();
        assert_eq!(p, ["Ljava/lang/String;", "J"]);
        assert_eq!(r, "V");
        assert!(parse_method_descriptor("(Q)V").is_none());
        assert!(parse_method_descriptor("()").is_none());
    }

    #[test]
    fn java_names() {
        assert_eq!(java_to_descriptor("a.b.C"), "La/b/C;");
        assert_eq!(descriptor_to_java("La/b/C;"), "a.b.C");
        assert_eq!(simple_name("La/b/C$1;"), "C$1");
        assert!(is_class_descriptor("La/B;"));
        assert!(!is_class_descriptor("La/B"));
    }
}
