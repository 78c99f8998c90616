//! Fixed-point kinematic quantities.
//!
//! Velocities, displacements and accelerations are stored as integer
//! micro-units. Every acceleration the driver can command, multiplied by a
//! 100 ms step, is a whole number of µm/s, so Euler integration over these
//! types is exact and traces never depend on floating-point rounding.

use std::fmt;
use std::ops::{Add, Sub};

const MICRO: f64 = 1e6;
const NS_PER_S: i128 = 1_000_000_000;

/// `value * dt_ns / 1e9`, rounded half away from zero.
fn scale_by_dt(value: i64, dt_ns: u64) -> i64 {
    let num = value as i128 * dt_ns as i128;
    let q = num / NS_PER_S;
    let r = num % NS_PER_S;
    let q = if 2 * r.abs() >= NS_PER_S {
        q + num.signum()
    } else {
        q
    };
    q as i64
}

fn fmt_micros(v: i64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let sign = if v < 0 { "-" } else { "" };
    let abs = v.unsigned_abs();
    write!(f, "{sign}{}.{:06}", abs / 1_000_000, abs % 1_000_000)
}

macro_rules! quantity {
    ($(#[$doc:meta])* $name:ident, $to:ident, $from:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(i64);

        impl $name {
            pub const ZERO: $name = $name(0);

            pub const fn from_micros(micros: i64) -> Self {
                Self(micros)
            }

            pub const fn micros(self) -> i64 {
                self.0
            }

            /// Nearest micro-unit to a value in SI units.
            pub fn $from(si: f64) -> Self {
                Self((si * MICRO).round() as i64)
            }

            pub fn $to(self) -> f64 {
                self.0 as f64 / MICRO
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                $name(self.0 - rhs.0)
            }
        }

        /// Exact decimal with six fractional digits.
        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt_micros(self.0, f)
            }
        }
    };
}

quantity!(
    /// Velocity in µm/s.
    Velocity, mps, from_mps
);
quantity!(
    /// Displacement in µm.
    Displacement, meters, from_meters
);
quantity!(
    /// Acceleration in µm/s².
    Acceleration, mps2, from_mps2
);

impl Acceleration {
    /// Velocity change over `dt_ns`.
    pub fn over(self, dt_ns: u64) -> Velocity {
        Velocity(scale_by_dt(self.0, dt_ns))
    }
}

impl Velocity {
    /// Distance covered at this velocity over `dt_ns`.
    pub fn over(self, dt_ns: u64) -> Displacement {
        Displacement(scale_by_dt(self.0, dt_ns))
    }
}
