use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timing::Label;

/// Number of symbols in the digraph alphabet (`a-z0-9`).
pub const ALPHABET_SIZE: usize = 36;

/// Two consecutively typed characters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Digraph(pub char, pub char);

impl Digraph {
    /// True when both characters are lowercase ASCII letters or digits.
    pub fn is_lower_alnum(&self) -> bool {
        is_lower_alnum(self.0) && is_lower_alnum(self.1)
    }
}

pub fn is_lower_alnum(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit()
}

/// Digraphs of `s` in typing order.
pub fn digraphs(s: &str) -> Vec<Digraph> {
    let chars: Vec<char> = s.chars().collect();
    chars.windows(2).map(|w| Digraph(w[0], w[1])).collect()
}

impl fmt::Display for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0, self.1)
    }
}

impl FromStr for Digraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.chars();
        match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => Ok(Digraph(a, b)),
            _ => Err(Error::domain(format!("`{s}` is not a digraph"))),
        }
    }
}

impl Label for Digraph {
    fn parse_label(s: &str) -> Result<Self> {
        let d: Digraph = s.parse()?;
        if [d.0, d.1].iter().any(|c| matches!(c, ',' | '\n' | '\r')) {
            return Err(Error::domain(format!("digraph `{s}` contains a separator")));
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let d: Digraph = "re".parse().unwrap();
        assert_eq!(d, Digraph('r', 'e'));
        assert_eq!(d.to_string(), "re");
        assert!("r".parse::<Digraph>().is_err());
        assert!("rea".parse::<Digraph>().is_err());
        assert!(Digraph::parse_label("a,").is_err());
    }

    #[test]
    fn charset() {
        assert!(Digraph('3', 'b').is_lower_alnum());
        assert!(!Digraph('R', 'e').is_lower_alnum());
        assert!(!Digraph('!', 'a').is_lower_alnum());
        let alphabet = ('a'..='z').chain('0'..='9').filter(|&c| is_lower_alnum(c)).count();
        assert_eq!(alphabet, ALPHABET_SIZE);
    }

    #[test]
    fn password_digraphs() {
        let ds: Vec<String> = digraphs("jillie02").iter().map(ToString::to_string).collect();
        assert_eq!(ds, vec!["ji", "il", "ll", "li", "ie", "e0", "02"]);
        assert!(digraphs("a").is_empty());
    }
}
