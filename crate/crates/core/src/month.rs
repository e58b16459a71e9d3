use std::fmt;

use chrono::{DateTime, Datelike, NaiveDate, TimeZone, Utc};

use crate::{Error, Result};

/// Calendar month, ordered chronologically. Formats as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Argument(format!("month {month} out of range")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn of(t: &DateTime<Utc>) -> Self {
        YearMonth {
            year: t.year(),
            month: t.month(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::parse("year-month", format!("`{s}` is not YYYY-MM"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        YearMonth::new(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// First instant of the month.
    pub fn start(self) -> DateTime<Utc> {
        let date = NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month");
        Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight"))
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Parses `YYYY-MM-DD` or an RFC 3339 instant.
pub fn parse_instant(s: &str) -> Result<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    let date = NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| Error::parse("timestamp", format!("`{s}` is neither YYYY-MM-DD nor RFC 3339")))?;
    Ok(Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight")))
}

pub fn format_instant(t: &DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn month_arithmetic() {
        let m = YearMonth::parse("2019-12").unwrap();
        assert_eq!(m.next().to_string(), "2020-01");
        assert!(YearMonth::parse("2019-13").is_err());
        assert_eq!(m.start(), parse_instant("2019-12-01").unwrap());
    }

    #[test]
    fn instants() {
        let t = parse_instant("2003-12-05T06:41:50Z").unwrap();
        assert_eq!(format_instant(&t), "2003-12-05T06:41:50Z");
        assert!(parse_instant("yesterday").is_err());
    }
}
