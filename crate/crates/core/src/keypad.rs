//! ATM keypad geometry.
//!
//! ```text
//!   1 2 3
//!   4 5 6
//!   7 8 9
//!     0
//! ```
//!
//! Keys sit on an integer grid with unit pitch. Every ordered keypair falls
//! into one of eight Euclidean distance classes. Distances are compared by
//! their exact integer square, never by floating point equality. Direction of
//! travel is not part of the class; [`Direction`] exists only for descriptive
//! statistics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Euclidean distance class of an ordered keypair.
///
/// The declaration order is the fixed label order used for tie breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceClass {
    /// Same key twice.
    Zero,
    /// Horizontal or vertical neighbours.
    One,
    /// Horizontal or vertical, two keys apart.
    Two,
    /// Vertical, three keys apart (only 2-0 and 0-2).
    Three,
    /// Diagonal neighbours, √2.
    Diag1,
    /// Corner to opposite corner, √8.
    Diag2,
    /// Knight-move, √5.
    Dogleg,
    /// Long knight-move to or from 0, √10.
    LongDogleg,
}

impl DistanceClass {
    pub const COUNT: usize = 8;

    pub const ALL: [DistanceClass; 8] = [
        DistanceClass::Zero,
        DistanceClass::One,
        DistanceClass::Two,
        DistanceClass::Three,
        DistanceClass::Diag1,
        DistanceClass::Diag2,
        DistanceClass::Dogleg,
        DistanceClass::LongDogleg,
    ];

    /// Position in [`DistanceClass::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Squared Euclidean distance in key-pitch units.
    pub fn squared_weight(self) -> u32 {
        match self {
            DistanceClass::Zero => 0,
            DistanceClass::One => 1,
            DistanceClass::Two => 4,
            DistanceClass::Three => 9,
            DistanceClass::Diag1 => 2,
            DistanceClass::Diag2 => 8,
            DistanceClass::Dogleg => 5,
            DistanceClass::LongDogleg => 10,
        }
    }

    pub fn from_squared_weight(sq: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.squared_weight() == sq)
    }

    /// Euclidean distance in key-pitch units.
    pub fn weight<T: Real>(self) -> T {
        T::of_usize(self.squared_weight() as usize).sqrt()
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceClass::Zero => "zero",
            DistanceClass::One => "one",
            DistanceClass::Two => "two",
            DistanceClass::Three => "three",
            DistanceClass::Diag1 => "diag1",
            DistanceClass::Diag2 => "diag2",
            DistanceClass::Dogleg => "dogleg",
            DistanceClass::LongDogleg => "long_dogleg",
        }
    }
}

impl fmt::Display for DistanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown distance class `{s}`")))
    }
}

/// Direction of travel between two keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    None,
    Horizontal,
    Vertical,
    Diagonal,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::None => "none",
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
            Direction::Diagonal => "diagonal",
        })
    }
}

/// Key-to-grid map. Coordinates are `(col, row)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Keypad {
    coords: [(i32, i32); 10],
}

impl Keypad {
    /// The 10-key ATM layout: 1-9 row-major on top, 0 centred below.
    pub const ATM: Keypad = Keypad {
        coords: [
            (1, 3),
            (0, 0),
            (1, 0),
            (2, 0),
            (0, 1),
            (1, 1),
            (2, 1),
            (0, 2),
            (1, 2),
            (2, 2),
        ],
    };

    pub fn coord(&self, key: u8) -> Result<(i32, i32)> {
        self.coords
            .get(key as usize)
            .copied()
            .ok_or_else(|| Error::domain(format!("invalid key digit {key}")))
    }

    pub fn squared_distance(&self, a: u8, b: u8) -> Result<u32> {
        let (ax, ay) = self.coord(a)?;
        let (bx, by) = self.coord(b)?;
        let (dx, dy) = (ax - bx, ay - by);
        Ok((dx * dx + dy * dy) as u32)
    }

    pub fn classify_pair(&self, a: u8, b: u8) -> Result<DistanceClass> {
        let sq = self.squared_distance(a, b)?;
        DistanceClass::from_squared_weight(sq)
            .ok_or_else(|| Error::Invariant(format!("keys {a}-{b} at unclassified squared distance {sq}")))
    }

    pub fn direction(&self, a: u8, b: u8) -> Result<Direction> {
        let (ax, ay) = self.coord(a)?;
        let (bx, by) = self.coord(b)?;
        Ok(match (ax == bx, ay == by) {
            (true, true) => Direction::None,
            (false, true) => Direction::Horizontal,
            (true, false) => Direction::Vertical,
            (false, false) => Direction::Diagonal,
        })
    }

    /// All ordered pairs `(a, b)` in `class`, sorted.
    pub fn pairs_in_class(&self, class: DistanceClass) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        for a in 0..10u8 {
            for b in 0..10u8 {
                if self.classify_pair(a, b).ok() == Some(class) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn pin_to_triplet(&self, pin: &Pin) -> Triplet {
        let d = pin.digits();
        let c = |i: usize| self.classify_pair(d[i], d[i + 1]).expect("pin digits are valid keys");
        Triplet([c(0), c(1), c(2)])
    }
}

impl Default for Keypad {
    fn default() -> Self {
        Keypad::ATM
    }
}

/// Distance class of `a` followed by `b` on the ATM keypad.
pub fn classify_pair(a: u8, b: u8) -> Result<DistanceClass> {
    Keypad::ATM.classify_pair(a, b)
}

pub fn pairs_in_class(class: DistanceClass) -> Vec<(u8, u8)> {
    Keypad::ATM.pairs_in_class(class)
}

/// Parses a 4-digit PIN and returns the classes of its three digraphs.
pub fn pin_to_triplet(pin: &str) -> Result<Triplet> {
    Ok(Keypad::ATM.pin_to_triplet(&pin.parse()?))
}

/// A 4-digit PIN. Leading zeros are significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pin([u8; 4]);

impl Pin {
    pub const SPACE: usize = 10_000;

    pub fn new(digits: [u8; 4]) -> Result<Self> {
        if digits.iter().any(|&d| d > 9) {
            return Err(Error::domain(format!("PIN digits out of range: {digits:?}")));
        }
        Ok(Pin(digits))
    }

    pub fn digits(&self) -> [u8; 4] {
        self.0
    }

    /// PIN with numeric value `n` (0..10000), zero-padded.
    pub fn from_index(n: u16) -> Result<Self> {
        if n as usize >= Self::SPACE {
            return Err(Error::domain(format!("PIN index {n} out of range")));
        }
        Ok(Pin([
            (n / 1000) as u8,
            (n / 100 % 10) as u8,
            (n / 10 % 10) as u8,
            (n % 10) as u8,
        ]))
    }

    pub fn index(&self) -> u16 {
        self.0.iter().fold(0u16, |acc, &d| acc * 10 + d as u16)
    }

    /// All 10⁴ PINs in ascending order.
    pub fn all() -> impl Iterator<Item = Pin> {
        (0..Self::SPACE as u16).map(|n| Pin::from_index(n).expect("in range"))
    }
}

impl fmt::Display for Pin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Pin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 4 || !bytes.iter().all(u8::is_ascii_digit) {
            return Err(Error::domain(format!("`{s}` is not a 4-digit PIN")));
        }
        Ok(Pin([
            bytes[0] - b'0',
            bytes[1] - b'0',
            bytes[2] - b'0',
            bytes[3] - b'0',
        ]))
    }
}

/// The distance classes of a PIN's three consecutive digraphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triplet(pub [DistanceClass; 3]);

impl Triplet {
    pub const COUNT: usize = 512;

    /// Dense index in 0..512, first class most significant.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, c| acc * DistanceClass::COUNT + c.index())
    }

    pub fn from_index(i: usize) -> Option<Self> {
        if i >= Self::COUNT {
            return None;
        }
        let n = DistanceClass::COUNT;
        Some(Triplet([
            DistanceClass::ALL[i / (n * n)],
            DistanceClass::ALL[i / n % n],
            DistanceClass::ALL[i % n],
        ]))
    }

    pub fn all() -> impl Iterator<Item = Triplet> {
        (0..Self::COUNT).map(|i| Triplet::from_index(i).expect("in range"))
    }

    pub fn classes(&self) -> [DistanceClass; 3] {
        self.0
    }
}

impl fmt::Display for Triplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for Triplet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 3 {
            return Err(Error::domain(format!("`{s}` is not a distance triplet")));
        }
        Ok(Triplet([parts[0].parse()?, parts[1].parse()?, parts[2].parse()?]))
    }
}
