//! Timestamps and durations on a whole-second grid.

use core::fmt;
use core::ops::{Add, Sub};
use serde::{Deserialize, Serialize};

/// Seconds since 1970-01-01T00:00:00 (UTC, no leap seconds).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

/// Signed span in seconds.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Duration(pub i64);

impl Duration {
    pub const fn seconds(s: i64) -> Self {
        Duration(s)
    }

    pub const fn minutes(m: i64) -> Self {
        Duration(m * 60)
    }

    pub const fn hours(h: i64) -> Self {
        Duration(h * 3600)
    }

    pub fn as_hours(self) -> f64 {
        self.0 as f64 / 3600.0
    }

    pub fn as_seconds(self) -> i64 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// `Some(k)` when `self == k * other` for a positive integer `k`.
    pub fn multiple_of(self, other: Duration) -> Option<i64> {
        if other.0 <= 0 || self.0 <= 0 || self.0 % other.0 != 0 {
            None
        } else {
            Some(self.0 / other.0)
        }
    }

    pub fn times(self, n: i64) -> Duration {
        Duration(self.0 * n)
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        if s % 3600 == 0 {
            write!(f, "{}h", s / 3600)
        } else if s % 60 == 0 {
            write!(f, "{}min", s / 60)
        } else {
            write!(f, "{}s", s)
        }
    }
}

impl Add<Duration> for Timestamp {
    type Output = Timestamp;
    fn add(self, rhs: Duration) -> Timestamp {
        Timestamp(self.0 + rhs.0)
    }
}

impl Sub<Duration> for Timestamp {
    type Output = Timestamp;
    fn sub(self, rhs: Duration) -> Timestamp {
        Timestamp(self.0 - rhs.0)
    }
}

impl Sub for Timestamp {
    type Output = Duration;
    fn sub(self, rhs: Timestamp) -> Duration {
        Duration(self.0 - rhs.0)
    }
}

impl Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        Duration(self.0 + rhs.0)
    }
}

impl Timestamp {
    /// Builds a timestamp from a proleptic Gregorian civil date/time.
    pub fn from_civil(year: i64, month: u32, day: u32, hour: u32, minute: u32, second: u32) -> Self {
        let days = days_from_civil(year, month, day);
        Timestamp(days * 86_400 + hour as i64 * 3600 + minute as i64 * 60 + second as i64)
    }

    /// `(year, month, day, hour, minute, second)`.
    pub fn to_civil(self) -> (i64, u32, u32, u32, u32, u32) {
        let days = self.0.div_euclid(86_400);
        let secs = self.0.rem_euclid(86_400);
        let (y, m, d) = civil_from_days(days);
        (
            y,
            m,
            d,
            (secs / 3600) as u32,
            ((secs % 3600) / 60) as u32,
            (secs % 60) as u32,
        )
    }

    /// Whole steps of `step` from `origin`, or `None` when off-grid or before origin.
    pub fn steps_from(self, origin: Timestamp, step: Duration) -> Option<usize> {
        let d = self.0 - origin.0;
        if d < 0 || step.0 <= 0 || d % step.0 != 0 {
            None
        } else {
            Some((d / step.0) as usize)
        }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, mo, d, h, mi, s) = self.to_civil();
        write!(f, "{y:04}-{mo:02}-{d:02}T{h:02}:{mi:02}:{s:02}")
    }
}

// Howard Hinnant's civil calendar algorithms.
fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = m as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn civil_round_trip() {
        let t = Timestamp::from_civil(2024, 2, 29, 13, 5, 9);
        assert_eq!(t.to_civil(), (2024, 2, 29, 13, 5, 9));
        assert_eq!(t.to_string(), "2024-02-29T13:05:09");
        assert_eq!(Timestamp::from_civil(1970, 1, 1, 0, 0, 0), Timestamp(0));
    }

    #[test]
    fn duration_multiples() {
        assert_eq!(Duration::hours(24).multiple_of(Duration::hours(1)), Some(24));
        assert_eq!(Duration::hours(24).multiple_of(Duration::hours(7)), None);
        assert_eq!(Duration::minutes(90).multiple_of(Duration::hours(1)), None);
        assert_eq!(Duration::hours(7).to_string(), "7h");
        assert_eq!(Duration::minutes(15).to_string(), "15min");
    }

    #[test]
    fn grid_steps() {
        let o = Timestamp(0);
        assert_eq!(Timestamp(7200).steps_from(o, Duration::hours(1)), Some(2));
        assert_eq!(Timestamp(1800).steps_from(o, Duration::hours(1)), None);
        assert_eq!(Timestamp(-3600).steps_from(o, Duration::hours(1)), None);
    }
}
