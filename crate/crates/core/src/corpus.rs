//! Annotated article corpus: publication months, descriptor annotations and
//! retraction flags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar month. Orders chronologically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Month {
    year: i32,
    month: u8,
}

impl Month {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) || !(0..=9999).contains(&year) {
            return Err(Error::InvalidMonth(format!("{year}-{month}")));
        }
        Ok(Month { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    /// Months elapsed since year 0, used for arithmetic.
    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(o: i64) -> Self {
        Month { year: o.div_euclid(12) as i32, month: (o.rem_euclid(12) + 1) as u8 }
    }

    pub fn succ(self) -> Self {
        Self::from_ordinal(self.ordinal() + 1)
    }

    pub fn plus(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    /// Signed number of months from `earlier` to `self`.
    pub fn months_since(self, earlier: Month) -> i64 {
        self.ordinal() - earlier.ordinal()
    }

    /// Inclusive month range.
    pub fn range_inclusive(first: Month, last: Month) -> impl Iterator<Item = Month> {
        (first.ordinal()..=last.ordinal()).map(Month::from_ordinal)
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = Error;

    /// Accepts `YYYY-MM`; a trailing `-DD` day is truncated.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidMonth(s.to_string());
        let b = s.as_bytes();
        let ok_shape = (b.len() == 7 || b.len() == 10)
            && b[4] == b'-'
            && b[..4].iter().all(u8::is_ascii_digit)
            && b[5..7].iter().all(u8::is_ascii_digit)
            && (b.len() == 7 || (b[7] == b'-' && b[8..].iter().all(u8::is_ascii_digit)));
        if !ok_shape {
            return Err(bad());
        }
        let year: i32 = s[..4].parse().map_err(|_| bad())?;
        let month: u8 = s[5..7].parse().map_err(|_| bad())?;
        Month::new(year, month).map_err(|_| bad())
    }
}

impl TryFrom<String> for Month {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Month> for String {
    fn from(m: Month) -> String {
        m.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: u64,
    pub month: Month,
    #[serde(rename = "mesh", default)]
    pub descriptors: BTreeSet<String>,
    #[serde(default)]
    pub retracted: bool,
}

/// All articles of a corpus, indexed by id and by publication month.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArticleStore {
    articles: BTreeMap<u64, Article>,
    by_month: BTreeMap<Month, BTreeSet<u64>>,
}

impl ArticleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, article: Article) -> Result<()> {
        if self.articles.contains_key(&article.id) {
            return Err(Error::DuplicateArticle { id: article.id, line: 0 });
        }
        self.by_month.entry(article.month).or_default().insert(article.id);
        self.articles.insert(article.id, article);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Article> {
        self.articles.get(&id)
    }

    pub fn contains(&self, id: u64) -> bool {
        self.articles.contains_key(&id)
    }

    /// Articles in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &Article> {
        self.articles.values()
    }

    pub fn months(&self) -> impl Iterator<Item = Month> + '_ {
        self.by_month.keys().copied()
    }

    pub fn month_of(&self, id: u64) -> Option<Month> {
        self.articles.get(&id).map(|a| a.month)
    }

    pub fn articles_in_month(&self, month: Month) -> BTreeSet<u64> {
        self.by_month.get(&month).cloned().unwrap_or_default()
    }

    /// Ids published in or before `month`.
    pub fn articles_up_to(&self, month: Month) -> BTreeSet<u64> {
        self.by_month.range(..=month).flat_map(|(_, ids)| ids.iter().copied()).collect()
    }

    pub fn retracted_ids(&self) -> BTreeSet<u64> {
        self.articles.values().filter(|a| a.retracted).map(|a| a.id).collect()
    }

    /// Writes one JSON object per line, ascending id.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for a in self.articles.values() {
            serde_json::to_writer(&mut w, a).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parses the JSON-lines article file. Blank lines are skipped.
pub fn parse_articles<R: BufRead>(reader: R) -> Result<ArticleStore> {
    let mut store = ArticleStore::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let article: Article =
            serde_json::from_str(&line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        let id = article.id;
        store.insert(article).map_err(|_| Error::DuplicateArticle { id, line: lineno })?;
    }
    Ok(store)
}
