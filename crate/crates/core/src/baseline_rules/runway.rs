use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::RuleError;

/// Parallel-runway side letter. Ordering is L < C < R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    L,
    C,
    R,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::L, Side::C, Side::R];

    pub fn letter(self) -> char {
        match self {
            Side::L => 'L',
            Side::C => 'C',
            Side::R => 'R',
        }
    }

    fn from_letter(c: char) -> Option<Side> {
        match c {
            'L' => Some(Side::L),
            'C' => Some(Side::C),
            'R' => Some(Side::R),
            _ => None,
        }
    }
}

/// Canonical runway identity: a number in 1..=36 and an optional side.
///
/// Field order matters for the derived `Ord`: number first, then side, with a
/// bare runway sorting before its sided variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunwayDesignator {
    number: u8,
    side: Option<Side>,
}

const RUNWAY_PREFIXES: [&str; 5] = ["RUNWAYS", "RUNWAY", "RWYS", "RWY", "RY"];

impl RunwayDesignator {
    pub fn new(number: u8, side: Option<Side>) -> Result<Self, RuleError> {
        if !(1..=36).contains(&number) {
            return Err(RuleError::NotARunway(format!("{number}")));
        }
        Ok(Self { number, side })
    }

    pub fn number(&self) -> u8 {
        self.number
    }

    pub fn side(&self) -> Option<Side> {
        self.side
    }

    /// Every valid designator, in canonical order (144 of them).
    pub fn all() -> impl Iterator<Item = RunwayDesignator> {
        (1..=36u8).flat_map(|n| {
            std::iter::once(None)
                .chain(Side::ALL.into_iter().map(Some))
                .map(move |side| RunwayDesignator { number: n, side })
        })
    }
}

impl fmt::Display for RunwayDesignator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number)?;
        if let Some(side) = self.side {
            write!(f, "{}", side.letter())?;
        }
        Ok(())
    }
}

impl FromStr for RunwayDesignator {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_runway_token(s)
    }
}

/// Strip an optional RWY/RY/RUNWAY prefix, then parse a possibly zero-padded
/// designator body such as `08L`.
pub fn normalize_runway_token(raw: &str) -> Result<RunwayDesignator, RuleError> {
    let not_a_runway = || RuleError::NotARunway(raw.to_string());
    let upper = raw.trim().to_ascii_uppercase();
    let mut body = upper.as_str();
    for prefix in RUNWAY_PREFIXES {
        if let Some(rest) = body.strip_prefix(prefix) {
            body = rest.trim_start();
            break;
        }
    }
    parse_designator_body(body).ok_or_else(not_a_runway)
}

/// Parses `N`, `NN`, `0N` with an optional trailing side letter. No prefix.
pub(crate) fn parse_designator_body(body: &str) -> Option<RunwayDesignator> {
    let (digits, side) = match body.char_indices().last() {
        Some((idx, c)) if c.is_ascii_alphabetic() => (&body[..idx], Some(Side::from_letter(c)?)),
        Some(_) => (body, None),
        None => return None,
    };
    if digits.is_empty() || digits.len() > 2 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // A single leading zero is allowed in front of one digit: "08".
    let significant = match digits.strip_prefix('0') {
        Some(rest) if rest.len() == 1 && rest != "0" => rest,
        Some(_) => return None,
        None => digits,
    };
    let number: u8 = significant.parse().ok()?;
    RunwayDesignator::new(number, side).ok()
}

/// Ordered, duplicate-free set of runways.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RunwaySet(BTreeSet<RunwayDesignator>);

impl RunwaySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, runway: RunwayDesignator) -> bool {
        self.0.insert(runway)
    }

    pub fn contains(&self, runway: &RunwayDesignator) -> bool {
        self.0.contains(runway)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RunwayDesignator> {
        self.0.iter()
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = RunwayDesignator>) {
        self.0.extend(other)
    }
}

impl FromIterator<RunwayDesignator> for RunwaySet {
    fn from_iter<I: IntoIterator<Item = RunwayDesignator>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a RunwaySet {
    type Item = &'a RunwayDesignator;
    type IntoIter = std::collections::btree_set::Iter<'a, RunwayDesignator>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Serialized form shared by gold files and model answers: `"32L, 32R, 36"`,
/// or `"None"` for the empty set.
impl fmt::Display for RunwaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("None");
        }
        for (i, rwy) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{rwy}")?;
        }
        Ok(())
    }
}

impl Serialize for RunwaySet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RunwaySet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        crate::extractors::parse_runway_list(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rwy(s: &str) -> RunwayDesignator {
        normalize_runway_token(s).unwrap()
    }

    #[test]
    fn sample_spellings() {
        assert_eq!(rwy("RY 31").to_string(), "31");
        assert_eq!(rwy("RWY 36C").to_string(), "36C");
        assert_eq!(rwy("08L").to_string(), "8L");
        assert_eq!(rwy("runway 9r").to_string(), "9R");
        assert_eq!(rwy("RWY36C").to_string(), "36C");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "RWY", "0", "00", "37", "36X", "L", "RWY 0L", "008", "100", "3 6", "-1"] {
            assert!(normalize_runway_token(bad).is_err(), "{bad:?} accepted");
        }
    }

    // Brute-force enumeration: every number 0..=99 crossed with every side
    // letter candidate and every supported spelling. Success must coincide
    // exactly with 1..=36 x {none, L, C, R}.
    #[test]
    fn exhaustive_enumeration_of_spellings() {
        let sides = ["", "L", "C", "R", "X", "B"];
        let mut accepted = std::collections::BTreeSet::new();
        for n in 0..=99u32 {
            for side in sides {
                let valid = (1..=36).contains(&n) && ["", "L", "C", "R"].contains(&side);
                let mut spellings = vec![format!("{n}{side}"), format!("{n:02}{side}")];
                for prefix in ["RWY ", "RY ", "RUNWAY ", "RWY", "rwy "] {
                    spellings.push(format!("{prefix}{n}{side}"));
                    spellings.push(format!("{prefix}{n:02}{side}"));
                }
                for spelling in spellings {
                    let got = normalize_runway_token(&spelling);
                    assert_eq!(got.is_ok(), valid, "{spelling:?}");
                    if let Ok(r) = got {
                        assert_eq!(r.to_string(), format!("{n}{side}"));
                        accepted.insert(r);
                    }
                }
            }
        }
        assert_eq!(accepted.len(), 144);
        assert_eq!(RunwayDesignator::all().count(), 144);
    }

    #[test]
    fn normalization_is_idempotent() {
        for r in RunwayDesignator::all() {
            assert_eq!(rwy(&r.to_string()), r);
        }
    }

    #[test]
    fn set_order_and_display() {
        let set: RunwaySet = ["36R", "32R", "36", "32L", "36C", "36L"].into_iter().map(rwy).collect();
        assert_eq!(set.to_string(), "32L, 32R, 36, 36L, 36C, 36R");
        assert_eq!(RunwaySet::new().to_string(), "None");
    }
}
