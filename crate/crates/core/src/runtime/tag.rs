use std::fmt;
use std::str::FromStr;

/// One millisecond of logical time, in nanoseconds.
pub const MS: u64 = 1_000_000;
/// One second of logical time, in nanoseconds.
pub const SECOND: u64 = 1_000 * MS;

/// A logical time point: integer nanoseconds since simulation start plus a
/// microstep that orders causally related events at the same instant.
///
/// The derived ordering compares `time_ns` first and `microstep` second.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub time_ns: u64,
    pub microstep: u32,
}

impl Tag {
    pub const ZERO: Tag = Tag {
        time_ns: 0,
        microstep: 0,
    };

    pub const fn new(time_ns: u64, microstep: u32) -> Self {
        Self { time_ns, microstep }
    }

    /// Tag at `time_ns` with microstep 0.
    pub const fn at(time_ns: u64) -> Self {
        Self::new(time_ns, 0)
    }

    /// The tag at which an event sent now with `delay_ns` is delivered.
    ///
    /// A positive delay lands at microstep 0 of the later instant; a zero
    /// delay advances one microstep.
    pub const fn delayed(self, delay_ns: u64) -> Self {
        if delay_ns == 0 {
            Self::new(self.time_ns, self.microstep + 1)
        } else {
            Self::new(self.time_ns + delay_ns, 0)
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.time_ns, self.microstep)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid tag `{0}`, expected `<time_ns>.<microstep>`")]
pub struct ParseTagError(pub String);

impl FromStr for Tag {
    type Err = ParseTagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseTagError(s.to_owned());
        let (time, micro) = s.split_once('.').ok_or_else(err)?;
        Ok(Tag::new(
            time.parse().map_err(|_| err())?,
            micro.parse().map_err(|_| err())?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn total_order_time_then_microstep() {
        assert!(Tag::new(100, 5) < Tag::new(200, 0));
        assert!(Tag::new(100, 0) < Tag::new(100, 1));
        assert_eq!(Tag::new(7, 3), Tag::new(7, 3));
    }

    #[test]
    fn delay_arithmetic() {
        assert_eq!(Tag::at(1000 * MS).delayed(500 * MS), Tag::at(1500 * MS));
        assert_eq!(Tag::ZERO.delayed(200 * MS), Tag::at(200 * MS));
        assert_eq!(Tag::new(300, 2).delayed(0), Tag::new(300, 3));
        // positive delays reset the microstep
        assert_eq!(Tag::new(300, 2).delayed(1), Tag::new(301, 0));
    }

    #[test]
    fn display_parse() {
        assert_eq!(Tag::new(1_500_000_000, 2).to_string(), "1500000000.2");
        assert!("12".parse::<Tag>().is_err());
        assert!("a.1".parse::<Tag>().is_err());
    }

    proptest! {
        #[test]
        fn order_matches_lexicographic(a in any::<(u32, u8)>(), b in any::<(u32, u8)>()) {
            let ta = Tag::new(a.0 as u64, a.1 as u32);
            let tb = Tag::new(b.0 as u64, b.1 as u32);
            prop_assert_eq!(ta.cmp(&tb), a.cmp(&b));
            prop_assert_eq!(ta.to_string().parse::<Tag>().unwrap(), ta);
        }
    }
}
