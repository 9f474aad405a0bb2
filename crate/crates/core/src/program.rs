//! Ground normal logic programs: symbols, rules, programs and interpretations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;

/// Dense index of an atom in a [`SymbolTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(u32);

impl AtomId {
    pub fn new(index: usize) -> Self {
        AtomId(u32::try_from(index).expect("atom index overflows u32"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Interned atom names. `AtomId(i)` always names `names[i]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, AtomId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, appending it if it is not yet known.
    pub fn intern(&mut self, name: &str) -> AtomId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = AtomId::new(self.names.len());
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<AtomId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains_id(&self, id: AtomId) -> bool {
        id.index() < self.names.len()
    }

    /// All `(id, name)` pairs in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &str)> + '_ {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (AtomId::new(i), n.as_str()))
    }
}

/// A normal rule `head :- pos, not neg.`; a rule without head is a constraint.
///
/// Both bodies are kept sorted and deduplicated, so two rules are equal iff
/// they have the same head and the same body literal sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    head: Option<AtomId>,
    pos: Vec<AtomId>,
    neg: Vec<AtomId>,
}

fn canonical(atoms: impl IntoIterator<Item = AtomId>) -> Vec<AtomId> {
    let mut v: Vec<AtomId> = atoms.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

impl Rule {
    pub fn new(
        head: Option<AtomId>,
        pos: impl IntoIterator<Item = AtomId>,
        neg: impl IntoIterator<Item = AtomId>,
    ) -> Self {
        Rule {
            head,
            pos: canonical(pos),
            neg: canonical(neg),
        }
    }

    pub fn fact(head: AtomId) -> Self {
        Rule::new(Some(head), [], [])
    }

    pub fn constraint(
        pos: impl IntoIterator<Item = AtomId>,
        neg: impl IntoIterator<Item = AtomId>,
    ) -> Self {
        Rule::new(None, pos, neg)
    }

    pub fn head(&self) -> Option<AtomId> {
        self.head
    }

    pub fn pos(&self) -> &[AtomId] {
        &self.pos
    }

    pub fn neg(&self) -> &[AtomId] {
        &self.neg
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.pos.is_empty() && self.neg.is_empty()
    }

    /// Number of distinct body literals.
    pub fn body_len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    /// Whether the body holds in `m`.
    pub fn body_holds(&self, m: &Interpretation) -> bool {
        self.pos.iter().all(|&a| m.contains(a)) && self.neg.iter().all(|&a| !m.contains(a))
    }

    /// Every atom mentioned by the rule, head first.
    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.head
            .into_iter()
            .chain(self.pos.iter().copied())
            .chain(self.neg.iter().copied())
    }
}

/// A symbol table together with an ordered list of rules over it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    symbols: SymbolTable,
    rules: Vec<Rule>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a program from parts.
    ///
    /// # Panics
    ///
    /// Panics if a rule refers to an atom outside `symbols`.
    pub fn from_parts(symbols: SymbolTable, rules: Vec<Rule>) -> Self {
        let mut program = Program {
            symbols,
            rules: Vec::with_capacity(rules.len()),
        };
        for rule in rules {
            program.push_rule(rule);
        }
        program
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Interns `name` in this program's symbol table.
    pub fn atom(&mut self, name: &str) -> AtomId {
        self.symbols.intern(name)
    }

    /// Appends a rule.
    ///
    /// # Panics
    ///
    /// Panics if the rule refers to an atom outside the symbol table.
    pub fn push_rule(&mut self, rule: Rule) {
        for a in rule.atoms() {
            assert!(
                self.symbols.contains_id(a),
                "rule refers to unknown atom {a}"
            );
        }
        self.rules.push(rule);
    }

    /// `atoms(P)`: every atom that occurs in some head or body.
    pub fn atoms(&self) -> BTreeSet<AtomId> {
        self.rules.iter().flat_map(Rule::atoms).collect()
    }

    pub fn headed_rules(&self) -> impl Iterator<Item = &Rule> + '_ {
        self.rules.iter().filter(|r| !r.is_constraint())
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Rule> + '_ {
        self.rules.iter().filter(|r| r.is_constraint())
    }

    pub fn has_negation(&self) -> bool {
        self.rules.iter().any(|r| !r.neg.is_empty())
    }

    /// An empty interpretation sized for this program.
    pub fn empty_interpretation(&self) -> Interpretation {
        Interpretation::empty(self.symbols.len())
    }

    /// Builds an interpretation from atom names.
    pub fn interpretation<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<Interpretation, UnknownAtom> {
        let mut m = self.empty_interpretation();
        for name in names {
            let id = self
                .symbols
                .lookup(name)
                .ok_or_else(|| UnknownAtom(name.to_owned()))?;
            m.insert(id);
        }
        Ok(m)
    }
}

/// An atom name that is not part of a program's vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown atom `{0}`")]
pub struct UnknownAtom(pub String);

/// A set of atoms over a fixed-size symbol table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation {
    bits: FixedBitSet,
}

impl Interpretation {
    pub fn empty(universe: usize) -> Self {
        Interpretation {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn from_atoms(universe: usize, atoms: impl IntoIterator<Item = AtomId>) -> Self {
        let mut m = Self::empty(universe);
        for a in atoms {
            m.insert(a);
        }
        m
    }

    /// Size of the symbol table this interpretation ranges over.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, a: AtomId) -> bool {
        self.bits.contains(a.index())
    }

    pub fn insert(&mut self, a: AtomId) {
        self.bits.insert(a.index());
    }

    pub fn remove(&mut self, a: AtomId) {
        self.bits.set(a.index(), false);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.bits.ones().map(AtomId::new)
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Space-separated atom names in symbol order; the empty set prints as "".
    pub fn display<'a>(&'a self, symbols: &'a SymbolTable) -> impl fmt::Display + 'a {
        DisplayInterpretation {
            model: self,
            symbols,
        }
    }

    /// Member names, sorted lexicographically.
    pub fn sorted_names<'a>(&self, symbols: &'a SymbolTable) -> Vec<&'a str> {
        let mut names: Vec<&str> = self.iter().map(|a| symbols.name(a)).collect();
        names.sort_unstable();
        names
    }
}

struct DisplayInterpretation<'a> {
    model: &'a Interpretation,
    symbols: &'a SymbolTable,
}

impl fmt::Display for DisplayInterpretation<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.model.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.symbols.name(a))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intern_is_idempotent_and_dense() {
        let mut t = SymbolTable::new();
        assert_eq!(t.intern("p"), AtomId::new(0));
        assert_eq!(t.intern("p"), AtomId::new(0));
        assert_eq!(t.intern("q"), AtomId::new(1));
        assert_eq!(t.len(), 2);
        assert_eq!(t.name(AtomId::new(1)), "q");
    }

    #[test]
    fn intern_counts_distinct_names_of_single_rule() {
        // p :- q, r, not s.
        let mut t = SymbolTable::new();
        let ids: Vec<_> = ["p", "q", "r", "s"].iter().map(|n| t.intern(n)).collect();
        assert_eq!(ids, (0..4).map(AtomId::new).collect::<Vec<_>>());
    }

    #[test]
    fn rule_bodies_are_deduplicated() {
        let r = Rule::new(
            Some(AtomId::new(0)),
            [AtomId::new(2), AtomId::new(1), AtomId::new(2)],
            [AtomId::new(3), AtomId::new(3)],
        );
        assert_eq!(r.pos(), &[AtomId::new(1), AtomId::new(2)]);
        assert_eq!(r.neg(), &[AtomId::new(3)]);
        assert_eq!(r.body_len(), 3);
    }

    #[test]
    fn atoms_excludes_unused_symbols() {
        let mut p = Program::new();
        assert!(p.atoms().is_empty());
        let a = p.atom("a");
        p.atom("unused");
        p.push_rule(Rule::fact(a));
        assert_eq!(p.atoms().into_iter().collect::<Vec<_>>(), vec![a]);
    }

    #[test]
    fn example_program_has_three_atoms() {
        let mut p = Program::new();
        let (pp, q, r) = (p.atom("p"), p.atom("q"), p.atom("r"));
        p.push_rule(Rule::new(Some(pp), [q], [r]));
        p.push_rule(Rule::new(Some(q), [pp], []));
        assert_eq!(p.atoms().len(), 3);
    }

    #[test]
    #[should_panic(expected = "unknown atom")]
    fn push_rule_rejects_foreign_atoms() {
        let mut p = Program::new();
        p.push_rule(Rule::fact(AtomId::new(5)));
    }

    #[test]
    fn interpretation_display_uses_symbol_order() {
        let mut p = Program::new();
        p.atom("z");
        p.atom("a");
        let m = p.interpretation(["a", "z"]).unwrap();
        assert_eq!(m.display(p.symbols()).to_string(), "z a");
        assert_eq!(m.sorted_names(p.symbols()), vec!["a", "z"]);
        assert_eq!(
            p.empty_interpretation().display(p.symbols()).to_string(),
            ""
        );
        assert_eq!(
            p.interpretation(["nope"]).unwrap_err(),
            UnknownAtom("nope".into())
        );
    }
}
