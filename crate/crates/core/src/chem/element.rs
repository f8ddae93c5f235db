use std::fmt;

use serde::{Deserialize, Serialize};

/// Elements accepted by the SMILES reader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    B,
    C,
    N,
    O,
    P,
    S,
    F,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 10] = [
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::P,
        Element::S,
        Element::F,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::P => "P",
            Element::S => "S",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.symbol() == symbol)
    }

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::B => 5,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::P => 15,
            Element::S => 16,
            Element::F => 9,
            Element::Cl => 17,
            Element::Br => 35,
            Element::I => 53,
        }
    }

    /// Whether the element may be written as a lowercase aromatic atom.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    }

    fn neutral_valences(self) -> &'static [u8] {
        match self {
            Element::B => &[3],
            Element::C => &[4],
            Element::N => &[3],
            Element::O => &[2],
            Element::P => &[3, 5],
            Element::S => &[2, 4, 6],
            Element::F | Element::Cl | Element::Br | Element::I => &[1],
        }
    }

    /// Allowed valences for the element carrying `charge`, ascending.
    ///
    /// A unit of charge shifts the valence by one: boron gains a bond per
    /// negative charge, carbon loses one per unit of either sign, and the
    /// pnictogens, chalcogens and halogens follow the sign of the charge.
    pub fn valences(self, charge: i8) -> Vec<u8> {
        let shift = |v: u8| -> Option<u8> {
            let c = i16::from(charge);
            let v = i16::from(v);
            let adjusted = match self {
                Element::B => v - c,
                Element::C => v - c.abs(),
                _ => v + c,
            };
            u8::try_from(adjusted).ok()
        };
        self.neutral_valences()
            .iter()
            .filter_map(|&v| shift(v))
            .collect()
    }

    pub fn max_valence(self, charge: i8) -> Option<u8> {
        self.valences(charge).into_iter().max()
    }

    /// Smallest allowed valence that is at least `used`.
    pub fn fitting_valence(self, charge: i8, used: u8) -> Option<u8> {
        self.valences(charge).into_iter().find(|&v| v >= used)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charge_shifts_valence() {
        assert_eq!(Element::N.valences(1), vec![4]);
        assert_eq!(Element::N.valences(-1), vec![2]);
        assert_eq!(Element::O.valences(-1), vec![1]);
        assert_eq!(Element::C.valences(-1), vec![3]);
        assert_eq!(Element::B.valences(-1), vec![4]);
        assert_eq!(Element::S.valences(0), vec![2, 4, 6]);
    }

    #[test]
    fn symbols_round_trip() {
        for e in Element::ALL {
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
        }
        assert_eq!(Element::from_symbol("Se"), None);
    }

    #[test]
    fn fitting_valence_picks_smallest() {
        assert_eq!(Element::S.fitting_valence(0, 3), Some(4));
        assert_eq!(Element::C.fitting_valence(0, 5), None);
    }
}
