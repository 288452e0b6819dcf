//! Year-month handling for monthly trade-flow series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A calendar month, `YYYY-MM` in all file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self, Error> {
        if !(1..=12).contains(&month) {
            return Err(Error::Parse(format!("month {month} out of range 1..=12")));
        }
        Ok(Self { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    /// Monotone index used for month arithmetic.
    fn index(&self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month - 1)
    }

    /// Whole months from `other` to `self` (positive when `self` is later).
    pub fn months_since(&self, other: YearMonth) -> i64 {
        self.index() - other.index()
    }

    pub fn plus_months(&self, n: i64) -> YearMonth {
        let idx = self.index() + n;
        let year = idx.div_euclid(12);
        let month = idx.rem_euclid(12) + 1;
        YearMonth {
            year: year as i32,
            month: month as u32,
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::Parse(format!("bad month {s:?}: expected YYYY-MM")))?;
        let year: i32 = y
            .parse()
            .map_err(|_| Error::Parse(format!("bad year in month {s:?}")))?;
        let month: u32 = m
            .parse()
            .map_err(|_| Error::Parse(format!("bad month in {s:?}")))?;
        YearMonth::new(year, month)
    }
}

impl TryFrom<String> for YearMonth {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<YearMonth> for String {
    fn from(ym: YearMonth) -> String {
        ym.to_string()
    }
}
