//! Exact non-negative rational timestamps.
//!
//! Comparisons must be exact because equality of timestamps decides whether
//! two observations synchronise. The runtime engine only ever produces
//! natural-number stamps; dense rationals exist for the data model.

use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeStamp(Rational64);

impl TimeStamp {
    pub fn new(numer: i64, denom: i64) -> Result<TimeStamp> {
        if denom == 0 {
            return Err(Error::InvalidTimeStamp(format!("{numer}/0")));
        }
        let r = Rational64::new(numer, denom);
        if r < Rational64::zero() {
            return Err(Error::InvalidTimeStamp(format!("{numer}/{denom}")));
        }
        Ok(TimeStamp(r))
    }

    pub fn from_nat(n: u64) -> TimeStamp {
        TimeStamp(Rational64::from_integer(n as i64))
    }

    pub fn as_nat(&self) -> Option<u64> {
        if self.0.is_integer() && *self.0.numer() >= 0 {
            Some(*self.0.numer() as u64)
        } else {
            None
        }
    }

    /// Parses `"3"` or `"3/2"`.
    pub fn parse(input: &str) -> Result<TimeStamp> {
        let input = input.trim();
        let (n, d) = match input.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (input, "1"),
        };
        let numer =
            n.parse::<i64>().map_err(|_| Error::InvalidTimeStamp(input.to_owned()))?;
        let denom =
            d.parse::<i64>().map_err(|_| Error::InvalidTimeStamp(input.to_owned()))?;
        TimeStamp::new(numer, denom)
    }
}

impl fmt::Display for TimeStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}
