use std::collections::BTreeMap;

use super::element::Element;
use super::mol::{Atom, BondOrder, MolGraph};
use super::ChemError;

/// Non-fatal notes produced while reading a SMILES string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    StereoIgnored { pos: usize },
    IsotopeIgnored { pos: usize },
    AtomClassIgnored { pos: usize },
}

pub fn parse_smiles(text: &str) -> Result<MolGraph, ChemError> {
    parse_smiles_with_warnings(text).map(|(mol, _)| mol)
}

/// Parses `text`, also returning notes about ignored stereo, isotope and
/// atom-class annotations.
pub fn parse_smiles_with_warnings(text: &str) -> Result<(MolGraph, Vec<ParseWarning>), ChemError> {
    if text.is_empty() {
        return Err(ChemError::Empty);
    }
    let mut parser = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        warnings: Vec::new(),
    };
    parser.run()?;
    let warnings = std::mem::take(&mut parser.warnings);
    Ok((parser.build()?, warnings))
}

/// Reads a corpus: one SMILES per line, `#` comment lines and blank lines
/// skipped, anything after the first whitespace treated as a name.
/// Returns `(line number, smiles)` pairs, 1-based.
pub fn read_smiles_lines(content: &str) -> Vec<(usize, String)> {
    content
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                return None;
            }
            let smiles = line.split_whitespace().next()?;
            Some((i + 1, smiles.to_string()))
        })
        .collect()
}

struct PendingBond {
    a: usize,
    b: usize,
    order: Option<BondOrder>,
    pos: usize,
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<PendingBond>,
    warnings: Vec<ParseWarning>,
}

// Real two-letter element symbols, used only to report unsupported bracket
// elements accurately instead of misreading e.g. [Se] as S + e.
const OTHER_TWO_LETTER: &[&str] = &[
    "He", "Li", "Be", "Ne", "Na", "Mg", "Al", "Si", "Ar", "Ca", "Sc", "Ti", "Cr", "Mn", "Fe", "Co",
    "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Kr", "Rb", "Sr", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
    "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "Xe", "Cs", "Ba", "La", "Pt", "Au", "Hg", "Tl", "Pb",
    "Bi", "Po", "At", "Rn", "Gd",
];

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).map(|&(_, c)| c)
    }

    fn byte_pos(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(p, _)| p)
            .unwrap_or_else(|| self.chars.last().map(|&(p, c)| p + c.len_utf8()).unwrap_or(0))
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ChemError> {
        Err(ChemError::Syntax {
            pos: self.byte_pos(),
            msg: msg.into(),
        })
    }

    fn run(&mut self) -> Result<(), ChemError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondOrder, usize)> = None;
        let mut branches: Vec<Option<usize>> = Vec::new();
        let mut rings: BTreeMap<u32, (usize, Option<BondOrder>, usize)> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let here = self.byte_pos();
            match c {
                '[' | 'A'..='Z' | 'a'..='z' | '*' => {
                    let atom = if c == '[' {
                        self.bracket_atom()?
                    } else {
                        self.organic_atom()?
                    };
                    self.atoms.push(atom);
                    let idx = self.atoms.len() - 1;
                    match prev {
                        Some(p) => {
                            let order = pending.take().map(|(o, _)| o);
                            self.bonds.push(PendingBond {
                                a: p,
                                b: idx,
                                order,
                                pos: here,
                            });
                        }
                        None => {
                            if pending.is_some() {
                                return self.syntax("bond symbol without a preceding atom");
                            }
                        }
                    }
                    prev = Some(idx);
                }
                '(' => {
                    if prev.is_none() {
                        return self.syntax("branch without a preceding atom");
                    }
                    if pending.is_some() {
                        return self.syntax("bond symbol before '('");
                    }
                    branches.push(prev);
                    self.pos += 1;
                }
                ')' => {
                    if pending.is_some() {
                        return self.syntax("dangling bond symbol before ')'");
                    }
                    match branches.pop() {
                        Some(p) => prev = p,
                        None => return self.syntax("unmatched ')'"),
                    }
                    self.pos += 1;
                }
                '-' | '=' | '#' | ':' | '/' | '\\' => {
                    if pending.is_some() {
                        return self.syntax("two consecutive bond symbols");
                    }
                    let order = match c {
                        '=' => BondOrder::Double,
                        '#' => BondOrder::Triple,
                        ':' => BondOrder::Aromatic,
                        '/' | '\\' => {
                            self.warnings.push(ParseWarning::StereoIgnored { pos: here });
                            BondOrder::Single
                        }
                        _ => BondOrder::Single,
                    };
                    pending = Some((order, here));
                    self.pos += 1;
                }
                '0'..='9' | '%' => {
                    let Some(atom) = prev else {
                        return self.syntax("ring closure without a preceding atom");
                    };
                    let number = self.ring_number()?;
                    let order = pending.take().map(|(o, _)| o);
                    match rings.remove(&number) {
                        Some((open_atom, open_order, _)) => {
                            if open_atom == atom {
                                return self.syntax(format!("ring bond {number} closes on its own atom"));
                            }
                            let order = match (open_order, order) {
                                (Some(a), Some(b)) if a != b => {
                                    return self.syntax(format!("conflicting bond symbols on ring bond {number}"))
                                }
                                (Some(a), _) => Some(a),
                                (None, b) => b,
                            };
                            self.bonds.push(PendingBond {
                                a: open_atom,
                                b: atom,
                                order,
                                pos: here,
                            });
                        }
                        None => {
                            rings.insert(number, (atom, order, here));
                        }
                    }
                }
                '.' => return Err(ChemError::MultiFragment),
                _ => return self.syntax(format!("unexpected character '{c}'")),
            }
        }
        if pending.is_some() {
            return self.syntax("SMILES ends with a bond symbol");
        }
        if !branches.is_empty() {
            return self.syntax("unclosed branch");
        }
        if let Some((&number, _)) = rings.iter().next() {
            return Err(ChemError::UnclosedRing(number));
        }
        Ok(())
    }

    fn ring_number(&mut self) -> Result<u32, ChemError> {
        let c = self.peek().expect("caller checked");
        if c == '%' {
            self.pos += 1;
            let (Some(d1), Some(d2)) = (self.peek(), self.peek_at(1)) else {
                return self.syntax("'%' must be followed by two digits");
            };
            match (d1.to_digit(10), d2.to_digit(10)) {
                (Some(a), Some(b)) => {
                    self.pos += 2;
                    Ok(a * 10 + b)
                }
                _ => self.syntax("'%' must be followed by two digits"),
            }
        } else {
            self.pos += 1;
            Ok(c.to_digit(10).expect("digit"))
        }
    }

    fn organic_atom(&mut self) -> Result<Atom, ChemError> {
        let here = self.byte_pos();
        let c = self.peek().expect("caller checked");
        let next = self.peek_at(1);
        let (symbol, aromatic, len) = match (c, next) {
            ('C', Some('l')) => ("Cl".to_string(), false, 2),
            ('B', Some('r')) => ("Br".to_string(), false, 2),
            ('B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'I', _) => (c.to_string(), false, 1),
            ('b' | 'c' | 'n' | 'o' | 'p' | 's', _) => (c.to_ascii_uppercase().to_string(), true, 1),
            _ => {
                return Err(ChemError::UnsupportedElement {
                    symbol: c.to_string(),
                    pos: here,
                })
            }
        };
        self.pos += len;
        let element = Element::from_symbol(&symbol).expect("organic subset is supported");
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        Ok(atom)
    }

    fn read_number(&mut self) -> Option<u32> {
        let mut value: Option<u32> = None;
        while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
            value = Some(value.unwrap_or(0).saturating_mul(10).saturating_add(d));
            self.pos += 1;
        }
        value
    }

    fn bracket_atom(&mut self) -> Result<Atom, ChemError> {
        let open = self.byte_pos();
        self.pos += 1;
        if self.read_number().is_some() {
            self.warnings.push(ParseWarning::IsotopeIgnored { pos: open });
        }
        let sym_pos = self.byte_pos();
        let Some(first) = self.peek() else {
            return self.syntax("unterminated bracket atom");
        };
        let second = self.peek_at(1);
        let (element, aromatic) = if first.is_ascii_uppercase() {
            let two: Option<String> = second
                .filter(|c| c.is_ascii_lowercase())
                .map(|s| format!("{first}{s}"));
            if let Some(e) = two.as_deref().and_then(Element::from_symbol) {
                self.pos += 2;
                (e, false)
            } else if let Some(two) = two.filter(|t| OTHER_TWO_LETTER.contains(&t.as_str())) {
                return Err(ChemError::UnsupportedElement { symbol: two, pos: sym_pos });
            } else {
                match Element::from_symbol(&first.to_string()) {
                    Some(e) => {
                        self.pos += 1;
                        (e, false)
                    }
                    None => {
                        return Err(ChemError::UnsupportedElement {
                            symbol: first.to_string(),
                            pos: sym_pos,
                        })
                    }
                }
            }
        } else if first.is_ascii_lowercase() {
            if matches!((first, second), ('s', Some('e')) | ('a', Some('s')) | ('t', Some('e'))) {
                return Err(ChemError::UnsupportedElement {
                    symbol: format!("{first}{}", second.unwrap()),
                    pos: sym_pos,
                });
            }
            match Element::from_symbol(&first.to_ascii_uppercase().to_string()) {
                Some(e) if e.can_be_aromatic() => {
                    self.pos += 1;
                    (e, true)
                }
                _ => {
                    return Err(ChemError::UnsupportedElement {
                        symbol: first.to_string(),
                        pos: sym_pos,
                    })
                }
            }
        } else if first == '*' {
            return Err(ChemError::UnsupportedElement {
                symbol: "*".into(),
                pos: sym_pos,
            });
        } else {
            return self.syntax("expected element symbol in bracket atom");
        };

        if self.peek() == Some('@') {
            self.warnings.push(ParseWarning::StereoIgnored { pos: self.byte_pos() });
            while self.peek() == Some('@') {
                self.pos += 1;
            }
            // extended forms such as @TH1, @SP2, @OH12
            if matches!(
                (self.peek(), self.peek_at(1)),
                (Some('T'), Some('H')) | (Some('A'), Some('L')) | (Some('S'), Some('P')) | (Some('T'), Some('B')) | (Some('O'), Some('H'))
            ) {
                self.pos += 2;
                self.read_number();
            }
        }

        let mut h = 0u8;
        if self.peek() == Some('H') {
            self.pos += 1;
            h = match self.read_number() {
                Some(n) => u8::try_from(n).or_else(|_| self.syntax("hydrogen count too large"))?,
                None => 1,
            };
        }

        let mut charge: i32 = 0;
        if let Some(sign @ ('+' | '-')) = self.peek() {
            let unit = if sign == '+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.read_number() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
        }
        if !(-4..=4).contains(&charge) {
            return self.syntax(format!("formal charge {charge} outside [-4, 4]"));
        }

        if self.peek() == Some(':') {
            self.warnings.push(ParseWarning::AtomClassIgnored { pos: self.byte_pos() });
            self.pos += 1;
            if self.read_number().is_none() {
                return self.syntax("atom class must be numeric");
            }
        }
        if self.peek() != Some(']') {
            return self.syntax("expected ']'");
        }
        self.pos += 1;

        let mut atom = Atom::new(element).with_charge(charge as i8).with_explicit_h(h);
        atom.aromatic = aromatic;
        Ok(atom)
    }

    fn build(self) -> Result<MolGraph, ChemError> {
        let mut mol = MolGraph::new();
        for atom in self.atoms {
            mol.add_atom(atom);
        }
        for bond in &self.bonds {
            let order = bond.order.unwrap_or_else(|| {
                if mol.atom(bond.a).aromatic && mol.atom(bond.b).aromatic {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                }
            });
            if let Err(err) = mol.push_bond(bond.a, bond.b, order) {
                return Err(ChemError::Syntax {
                    pos: bond.pos,
                    msg: err.to_string(),
                });
            }
        }
        mol.perceive_rings();
        // an aromatic bond outside any ring is a plain single bond
        for idx in 0..mol.bond_count() {
            if mol.bond(idx).order == BondOrder::Aromatic && !mol.is_ring_bond(idx) {
                mol.set_bond_order(idx, BondOrder::Single);
            }
        }
        mol.check_valences()?;
        Ok(mol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ethanol_chain() {
        let m = parse_smiles("CCO").unwrap();
        assert_eq!(m.atom_count(), 3);
        assert_eq!(m.bond_count(), 2);
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Single));
        assert_eq!(m.atom(2).element, Element::O);
        assert_eq!(m.hydrogens(2), 1);
    }

    #[test]
    fn benzene_is_aromatic() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(m.atom_count(), 6);
        assert!(m.atoms().iter().all(|a| a.aromatic));
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert!((0..6).all(|i| m.hydrogens(i) == 1));
    }

    #[test]
    fn methylcyclopropane_ring_flags() {
        let m = parse_smiles("C1CC1C").unwrap();
        let ring: Vec<usize> = (0..4).filter(|&i| m.is_ring_atom(i)).collect();
        assert_eq!(ring, vec![0, 1, 2]);
    }

    #[test]
    fn bracket_atoms() {
        let m = parse_smiles("C[N+](=O)[O-]").unwrap();
        assert_eq!(m.atom(1).formal_charge, 1);
        assert_eq!(m.atom(3).formal_charge, -1);
        assert_eq!(m.hydrogens(1), 0);
        let m = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(m.atom(3).explicit_h, Some(1));
        assert!(!m.needs_pi_bond(3));
        assert!(m.needs_pi_bond(0));
        let m = parse_smiles("[NH4+]").unwrap();
        assert_eq!(m.hydrogens(0), 4);
        let m = parse_smiles("[Cl-]").unwrap();
        assert_eq!(m.atom(0).formal_charge, -1);
    }

    #[test]
    fn two_digit_ring_closures() {
        let a = parse_smiles("C%10CCCCC%10").unwrap();
        assert_eq!(a.bond_count(), 6);
        assert!((0..6).all(|i| a.is_ring_atom(i)));
    }

    #[test]
    fn ring_bond_symbols() {
        let m = parse_smiles("C=1CCCCC=1").unwrap();
        assert_eq!(m.bond(m.bond_between(0, 5).unwrap()).order, BondOrder::Double);
        assert!(matches!(parse_smiles("C=1CCCCC#1"), Err(ChemError::Syntax { .. })));
    }

    #[test]
    fn non_ring_aromatic_bond_becomes_single() {
        let m = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let bridge = m.bond_between(5, 6).unwrap();
        assert_eq!(m.bond(bridge).order, BondOrder::Single);
    }

    #[test]
    fn stereo_and_isotopes_warn() {
        let (m, w) = parse_smiles_with_warnings("F/C=C/[13CH2][C@@H](O)Cl").unwrap();
        assert_eq!(m.atom_count(), 7);
        assert!(w.contains(&ParseWarning::StereoIgnored { pos: 1 }));
        assert!(w.iter().any(|w| matches!(w, ParseWarning::IsotopeIgnored { .. })));
    }

    #[test]
    fn errors() {
        assert_eq!(parse_smiles(""), Err(ChemError::Empty));
        assert_eq!(parse_smiles("C1CC"), Err(ChemError::UnclosedRing(1)));
        assert!(matches!(parse_smiles("CC(C"), Err(ChemError::Syntax { .. })));
        assert!(matches!(parse_smiles("CC)C"), Err(ChemError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_smiles("C=C="), Err(ChemError::Syntax { .. })));
        assert!(matches!(
            parse_smiles("C[Se]C"),
            Err(ChemError::UnsupportedElement { pos: 2, .. })
        ));
        assert!(matches!(parse_smiles("CXC"), Err(ChemError::UnsupportedElement { .. })));
        assert!(matches!(parse_smiles("C(C)(C)(C)(C)C"), Err(ChemError::Valence { atom: 0, .. })));
        assert!(matches!(parse_smiles("O=O=O"), Err(ChemError::Valence { .. })));
        assert_eq!(parse_smiles("CC.O"), Err(ChemError::MultiFragment));
        assert!(matches!(parse_smiles("C11"), Err(ChemError::Syntax { .. })));
        assert!(matches!(parse_smiles("C12CC12"), Err(ChemError::Syntax { .. })));
    }

    #[test]
    fn corpus_lines() {
        let lines = read_smiles_lines("# header\nCCO ethanol\n\n  c1ccccc1\n");
        assert_eq!(lines, vec![(2, "CCO".to_string()), (4, "c1ccccc1".to_string())]);
    }
}
