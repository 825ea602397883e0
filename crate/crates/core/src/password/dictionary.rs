//! Password dictionaries with leak frequencies and the frequency baseline.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::scalar::Fraction;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DictEntry {
    pub password: String,
    pub count: u64,
}

/// Unique passwords with positive frequency counts.
#[derive(Clone, Debug, Default)]
pub struct Dictionary {
    entries: Vec<DictEntry>,
    index: HashMap<String, usize>,
}

impl Dictionary {
    pub fn new(entries: impl IntoIterator<Item = (String, u64)>) -> Result<Self> {
        let mut d = Dictionary::default();
        for (password, count) in entries {
            if count == 0 {
                return Err(Error::domain(format!("password `{password}` has count 0")));
            }
            if d.index.contains_key(&password) {
                return Err(Error::domain(format!("duplicate password `{password}`")));
            }
            d.index.insert(password.clone(), d.entries.len());
            d.entries.push(DictEntry { password, count });
        }
        Ok(d)
    }

    /// Reads `password<TAB>count` lines. Blank lines are skipped.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() {
                continue;
            }
            let (pw, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected password<TAB>count"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad count `{count}`")))?;
            entries.push((pw.to_string(), count));
        }
        Self::new(entries)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            writeln!(w, "{}\t{}", e.password, e.count)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[DictEntry] {
        &self.entries
    }

    pub fn count_of(&self, password: &str) -> Option<u64> {
        self.index.get(password).map(|&i| self.entries[i].count)
    }

    /// Entries whose length in characters is `len`.
    pub fn filter_length(&self, len: usize) -> Dictionary {
        Dictionary::new(
            self.entries
                .iter()
                .filter(|e| e.password.chars().count() == len)
                .map(|e| (e.password.clone(), e.count)),
        )
        .expect("subset of a valid dictionary")
    }

    /// Descending frequency, ties lexicographic.
    pub fn by_frequency(&self) -> Vec<&DictEntry> {
        let mut v: Vec<&DictEntry> = self.entries.iter().collect();
        v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.password.cmp(&b.password)));
        v
    }
}

/// Expected number of guesses for the frequency baseline to reach `password`
/// when ties are broken uniformly at random:
/// `#(strictly more frequent) + (#(equally frequent, itself included) + 1) / 2`.
pub fn baseline_expected_attempts<F: Fraction>(dict: &Dictionary, password: &str) -> Result<F> {
    let target = dict
        .count_of(password)
        .ok_or_else(|| Error::NotFound(format!("password `{password}` not in dictionary")))?;
    let (mut greater, mut tied) = (0u64, 0u64);
    for e in dict.entries() {
        if e.count > target {
            greater += 1;
        } else if e.count == target {
            tied += 1;
        }
    }
    Ok(F::from_ratio(2 * greater + tied + 1, 2))
}
