use super::mol::{BondOrder, MolGraph};

/// How hydrogen counts are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HydrogenStyle {
    /// Brackets only where the reader would otherwise infer a different
    /// hydrogen count or pi requirement.
    Minimal,
    /// Atoms with a fixed hydrogen count keep their brackets, so the reader
    /// reproduces the same hydrogen policy atom by atom.
    Preserve,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenSmiles {
    pub smiles: String,
    /// Graph atom index of each written atom, in output order. Parsing the
    /// string yields atom `k` for graph atom `order[k]`.
    pub order: Vec<usize>,
}

/// Writes `mol` as SMILES, starting each component at its lowest-ranked atom
/// and visiting neighbours in rank order. Disconnected graphs are joined
/// with `.`.
pub fn write_smiles(mol: &MolGraph, ranks: &[usize], style: HydrogenStyle) -> WrittenSmiles {
    assert_eq!(ranks.len(), mol.atom_count(), "one rank per atom");
    let n = mol.atom_count();
    let mut plan = Plan {
        visited: vec![false; n],
        parent_bond: vec![usize::MAX; n],
        classified: vec![false; mol.bond_count()],
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
    };
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&i| ranks[i]);
    let mut roots = Vec::new();
    for &s in &starts {
        if !plan.visited[s] {
            roots.push(s);
            plan.dfs(mol, ranks, s);
        }
    }
    let mut out = Emitter {
        text: String::new(),
        order: Vec::with_capacity(n),
        digit_of: vec![0; mol.bond_count()],
        in_use: Vec::new(),
        style,
    };
    for (k, &root) in roots.iter().enumerate() {
        if k > 0 {
            out.text.push('.');
        }
        out.emit(mol, &plan, root);
    }
    WrittenSmiles {
        smiles: out.text,
        order: out.order,
    }
}

struct Plan {
    visited: Vec<bool>,
    parent_bond: Vec<usize>,
    classified: Vec<bool>,
    children: Vec<Vec<(usize, usize)>>,
    /// ring bonds whose digit is opened at this atom
    opens: Vec<Vec<usize>>,
    /// ring bonds whose digit is closed at this atom
    closes: Vec<Vec<usize>>,
}

impl Plan {
    fn dfs(&mut self, mol: &MolGraph, ranks: &[usize], u: usize) {
        self.visited[u] = true;
        let mut nbrs: Vec<(usize, usize)> = mol.neighbors(u).to_vec();
        nbrs.sort_by_key(|&(v, _)| ranks[v]);
        for (v, b) in nbrs {
            if b == self.parent_bond[u] || self.classified[b] {
                continue;
            }
            self.classified[b] = true;
            if self.visited[v] {
                self.opens[v].push(b);
                self.closes[u].push(b);
            } else {
                self.parent_bond[v] = b;
                self.children[u].push((v, b));
                self.dfs(mol, ranks, v);
            }
        }
    }
}

struct Emitter {
    text: String,
    order: Vec<usize>,
    digit_of: Vec<u32>,
    in_use: Vec<bool>,
    style: HydrogenStyle,
}

impl Emitter {
    fn emit(&mut self, mol: &MolGraph, plan: &Plan, u: usize) {
        self.order.push(u);
        self.text.push_str(&atom_text(mol, u, self.style));
        let mut freed = Vec::new();
        for &b in &plan.closes[u] {
            let d = self.digit_of[b];
            push_digit(&mut self.text, d);
            freed.push(d);
        }
        for &b in &plan.opens[u] {
            let d = match self.in_use.iter().position(|&used| !used) {
                Some(free) => free,
                None => {
                    self.in_use.push(false);
                    self.in_use.len() - 1
                }
            };
            self.in_use[d] = true;
            // digits start at 1
            let digit = d as u32 + 1;
            self.digit_of[b] = digit;
            let bond = mol.bond(b);
            self.text.push_str(bond_symbol(mol, bond.order, bond.a, bond.b));
            push_digit(&mut self.text, digit);
        }
        for d in freed {
            self.in_use[d as usize - 1] = false;
        }
        let children = &plan.children[u];
        for (k, &(v, b)) in children.iter().enumerate() {
            let last = k + 1 == children.len();
            if !last {
                self.text.push('(');
            }
            let bond = mol.bond(b);
            self.text.push_str(bond_symbol(mol, bond.order, bond.a, bond.b));
            self.emit(mol, plan, v);
            if !last {
                self.text.push(')');
            }
        }
    }
}

fn push_digit(text: &mut String, d: u32) {
    if d < 10 {
        text.push(char::from_digit(d, 10).expect("single digit"));
    } else {
        text.push_str(&format!("%{d:02}"));
    }
}

fn bond_symbol(mol: &MolGraph, order: BondOrder, a: usize, b: usize) -> &'static str {
    let both_aromatic = mol.atom(a).aromatic && mol.atom(b).aromatic;
    match order {
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
        BondOrder::Single if both_aromatic => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
    }
}

/// Whether the reader would infer this atom's hydrogen count (and, for
/// aromatic atoms, its pi requirement) from an unbracketed symbol.
fn reads_back_unbracketed(mol: &MolGraph, i: usize) -> bool {
    let atom = mol.atom(i);
    if atom.formal_charge != 0 {
        return false;
    }
    let used = mol.bond_order_sum(i);
    let Some(v) = atom.element.fitting_valence(0, used) else {
        return false;
    };
    let h = mol.hydrogens(i);
    let has_aromatic_bond = mol
        .neighbors(i)
        .iter()
        .any(|&(_, b)| mol.bond(b).order == BondOrder::Aromatic);
    if atom.aromatic && has_aromatic_bond {
        let implied_pi = v > used;
        let implied_h = if implied_pi { v - used - 1 } else { 0 };
        implied_pi == mol.needs_pi_bond(i) && implied_h == h
    } else {
        v - used == h
    }
}

fn atom_text(mol: &MolGraph, i: usize, style: HydrogenStyle) -> String {
    let atom = mol.atom(i);
    let symbol = if atom.aromatic {
        atom.element.symbol().to_ascii_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    let bracket = match style {
        HydrogenStyle::Minimal => !reads_back_unbracketed(mol, i),
        HydrogenStyle::Preserve => {
            atom.explicit_h.is_some() || atom.formal_charge != 0 || !reads_back_unbracketed(mol, i)
        }
    };
    if !bracket {
        return symbol;
    }
    let mut text = format!("[{symbol}");
    match mol.hydrogens(i) {
        0 => {}
        1 => text.push('H'),
        h => text.push_str(&format!("H{h}")),
    }
    match atom.formal_charge {
        0 => {}
        1 => text.push('+'),
        -1 => text.push('-'),
        c if c > 0 => text.push_str(&format!("+{c}")),
        c => text.push_str(&format!("-{}", -c)),
    }
    text.push(']');
    text
}
