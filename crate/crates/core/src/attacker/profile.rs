use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::regen::{band_epochs, PrivilegeBand};

/// How an attacker obtained its reference set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackerProfile {
    /// Public-aware: augmented originals.
    J1,
    /// Low-privilege-aware: intercepted low-band regenerations.
    J2,
    /// Medium-privilege-aware.
    J3,
    /// High-privilege-aware.
    J4,
}

impl AttackerProfile {
    pub const ALL: [AttackerProfile; 4] = [Self::J1, Self::J2, Self::J3, Self::J4];

    pub fn band(self) -> Option<PrivilegeBand> {
        match self {
            Self::J1 => None,
            Self::J2 => Some(PrivilegeBand::Low),
            Self::J3 => Some(PrivilegeBand::Medium),
            Self::J4 => Some(PrivilegeBand::High),
        }
    }

    /// Inclusive epoch interval the reference regenerations are drawn from.
    pub fn epoch_band(self, e_max: u32) -> Option<(u32, u32)> {
        self.band().map(|b| band_epochs(b, e_max))
    }

    pub fn index(self) -> u64 {
        self as u64
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::J1 => "J1",
            Self::J2 => "J2",
            Self::J3 => "J3",
            Self::J4 => "J4",
        }
    }
}

impl fmt::Display for AttackerProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackerProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown attacker profile {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_for_full_schedule() {
        assert_eq!(AttackerProfile::J1.epoch_band(300), None);
        assert_eq!(AttackerProfile::J2.epoch_band(300), Some((1, 50)));
        assert_eq!(AttackerProfile::J3.epoch_band(300), Some((50, 70)));
        assert_eq!(AttackerProfile::J4.epoch_band(300), Some((70, 300)));
    }

    #[test]
    fn parses_names() {
        assert_eq!("j3".parse::<AttackerProfile>().unwrap(), AttackerProfile::J3);
        assert!("J5".parse::<AttackerProfile>().is_err());
    }
}
