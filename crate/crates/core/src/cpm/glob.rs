/// Full-string glob match where `*` matches any (possibly empty) run.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if pi < p.len() && p[pi] == t[ti] {
            pi += 1;
            ti += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// Whether `pattern` matches `symbol`.
///
/// Symbols are sequences of `_`-separated segments; the pattern must match
/// some contiguous run of whole segments (the full symbol is one such run).
/// So `EF*` matches `SSEL_EF_DG1` and `DF` matches `SEL_DF_LDS1`, while
/// `RD_BIN` does not match `SRD_BIN`.
pub fn symbol_matches(pattern: &str, symbol: &str) -> bool {
    if glob_match(pattern, symbol) {
        return true;
    }
    let segments: Vec<&str> = symbol.split('_').collect();
    if segments.len() == 1 {
        return false;
    }
    for start in 0..segments.len() {
        for end in start..segments.len() {
            if start == 0 && end == segments.len() - 1 {
                continue;
            }
            if glob_match(pattern, &segments[start..=end].join("_")) {
                return true;
            }
        }
    }
    false
}

/// True iff any pattern matches the symbol.
pub fn matches<S: AsRef<str>>(patterns: &[S], symbol: &str) -> bool {
    patterns.iter().any(|p| symbol_matches(p.as_ref(), symbol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_shapes() {
        assert!(matches(&["EF*"], "EF_DG2"));
        assert!(matches(&["*"], "anything"));
        assert!(!matches(&["6*"], "9000"));
        assert!(matches(&["6*"], "6986"));
        assert!(matches(&["*BIN"], "SRD_BIN"));
        assert!(matches(&["DF*"], "SEL_DF_LDS1"));
        assert!(matches(&["DF"], "SEL_DF_LDS1"));
        assert!(matches(&["SSEL_EF*"], "WS_SSEL_EF_DG1"));
        assert!(!matches(&["SEL_EF*"], "SSEL_EF_DG1"));
        assert!(!matches(&["RD_BIN"], "SRD_BIN"));
        assert!(!matches(&["EF_DG2"], "SEL_EF_DG20"));
        assert!(matches(&["Read*"], "ReadDID"));
        assert!(!matches(&["sa"], "SA"));
    }

    #[test]
    fn glob_basics() {
        assert!(glob_match("", ""));
        assert!(glob_match("*", ""));
        assert!(glob_match("a*b*c", "aXXbYc"));
        assert!(!glob_match("a*b", "ab_c"));
        assert!(glob_match("**", "x"));
    }

    proptest! {
        #[test]
        fn literal_pattern_matches_itself(s in "[A-Za-z0-9_]{1,12}") {
            prop_assert!(symbol_matches(&s, &s));
            prop_assert!(symbol_matches("*", &s));
            let prefixed = format!("{}*", &s[..1]);
            prop_assert!(symbol_matches(&prefixed, &s));
        }
    }
}
