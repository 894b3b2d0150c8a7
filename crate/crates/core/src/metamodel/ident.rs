/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Replaces every character outside the identifier alphabet with `_`.
/// A leading digit gets a `_` prefix; the empty string becomes `_`.
///
/// Returns `None` when `s` already is an identifier.
pub fn sanitize_identifier(s: &str) -> Option<String> {
    if is_identifier(s) {
        return None;
    }
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert!(is_identifier("Vehicle"));
        assert!(is_identifier("_x9"));
        assert!(!is_identifier("9x"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("front-camera"));
    }

    #[test]
    fn sanitizing() {
        assert_eq!(sanitize_identifier("Vehicle"), None);
        assert_eq!(sanitize_identifier("front-camera").as_deref(), Some("front_camera"));
        assert_eq!(sanitize_identifier("3D Lidar").as_deref(), Some("_3D_Lidar"));
        assert_eq!(sanitize_identifier("").as_deref(), Some("_"));
        assert_eq!(sanitize_identifier("Größe").as_deref(), Some("Gr__e"));
    }
}
