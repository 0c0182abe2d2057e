use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// An identifier. Cheap to clone; compared by content.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(text: impl AsRef<str>) -> Self {
        Name(Arc::from(text.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True if `text` is a user-writable identifier: letters, digits, `_`,
    /// `'` and subscript digits, not starting with a digit or `'`.
    pub fn is_valid(text: &str) -> bool {
        let mut chars = text.chars();
        match chars.next() {
            Some(c) if c.is_alphabetic() || c == '_' => {}
            _ => return false,
        }
        chars.all(is_ident_continue)
    }
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || ('₀'..='₉').contains(&c)
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name::new(s)
    }
}

impl AsRef<str> for Name {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Picks `base` if unused, otherwise `base0`, `base1`, ... (Coq's scheme).
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    if !taken(base) {
        return Name::new(base);
    }
    (0..)
        .map(|i| format!("{base}{i}"))
        .find(|candidate| !taken(candidate))
        .map(Name::new)
        .expect("unbounded supply of names")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validity() {
        assert!(Name::is_valid("ls₁'"));
        assert!(Name::is_valid("sl_cons₂"));
        assert!(Name::is_valid("_x"));
        assert!(!Name::is_valid("1x"));
        assert!(!Name::is_valid(""));
        assert!(!Name::is_valid("a-b"));
    }

    #[test]
    fn fresh_follows_coq_suffixes() {
        let taken = ["H", "H0"];
        assert_eq!(fresh_name("H", |n| taken.contains(&n)).as_str(), "H1");
        assert_eq!(fresh_name("x", |n| taken.contains(&n)).as_str(), "x");
    }
}
