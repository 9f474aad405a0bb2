//! Reference semantics by direct evaluation and exhaustive enumeration.
//!
//! Everything here follows the textbook definitions as literally as possible
//! and is meant to serve as an oracle for the faster machinery elsewhere.
//! Enumerators scan all `2^n` subsets of `atoms(P)`, so `n` is capped.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::program::{AtomId, Interpretation, Program, Rule, SymbolTable};

pub const DEFAULT_ATOM_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("program has {atoms} atoms, exhaustive enumeration is capped at {cap}")]
    AtomCapExceeded { atoms: usize, cap: usize },
    #[error("rule {rule} has negative body literals; expected a positive program")]
    NotPositive { rule: usize },
}

/// A duplicate-free set of interpretations in canonical order: by
/// cardinality, then lexicographically on the sorted member names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelSet {
    models: Vec<Interpretation>,
}

impl ModelSet {
    pub fn new(models: impl IntoIterator<Item = Interpretation>, symbols: &SymbolTable) -> Self {
        let unique: BTreeSet<Interpretation> = models.into_iter().collect();
        let mut keyed: Vec<(Vec<&str>, Interpretation)> = unique
            .into_iter()
            .map(|m| (m.sorted_names(symbols), m))
            .collect();
        keyed.sort_by(|(a, _), (b, _)| canonical_cmp(a, b));
        ModelSet {
            models: keyed.into_iter().map(|(_, m)| m).collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interpretation> {
        self.models.iter()
    }

    pub fn contains(&self, m: &Interpretation) -> bool {
        self.models.contains(m)
    }

    pub fn is_subset(&self, other: &ModelSet) -> bool {
        self.models.iter().all(|m| other.contains(m))
    }

    pub fn into_vec(self) -> Vec<Interpretation> {
        self.models
    }

    /// One model per line, atoms in symbol order; no trailing newline.
    pub fn to_text(&self, symbols: &SymbolTable) -> String {
        self.models
            .iter()
            .map(|m| m.display(symbols).to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl<'a> IntoIterator for &'a ModelSet {
    type Item = &'a Interpretation;
    type IntoIter = std::slice::Iter<'a, Interpretation>;

    fn into_iter(self) -> Self::IntoIter {
        self.models.iter()
    }
}

fn canonical_cmp(a: &[&str], b: &[&str]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

fn satisfies_rule(rule: &Rule, m: &Interpretation) -> bool {
    match rule.head() {
        Some(h) => !rule.body_holds(m) || m.contains(h),
        None => !rule.body_holds(m),
    }
}

/// Whether every constraint's body is false in `m`.
pub fn satisfies_constraints(program: &Program, m: &Interpretation) -> bool {
    program.constraints().all(|r| satisfies_rule(r, m))
}

/// `m` satisfies every rule and every constraint.
pub fn is_model(program: &Program, m: &Interpretation) -> bool {
    program.rules().iter().all(|r| satisfies_rule(r, m))
}

/// `m` is a model and each member is the head of a rule whose body holds in `m`.
pub fn is_supported(program: &Program, m: &Interpretation) -> bool {
    is_model(program, m)
        && m.iter().all(|a| {
            program
                .headed_rules()
                .any(|r| r.head() == Some(a) && r.body_holds(m))
        })
}

/// One application of the immediate-consequence operator.
pub fn immediate_consequence(program: &Program, m: &Interpretation) -> Interpretation {
    let mut next = Interpretation::empty(m.universe());
    for rule in program.headed_rules() {
        if rule.body_holds(m) {
            next.insert(rule.head().expect("headed"));
        }
    }
    next
}

/// Supportedness as a fixpoint: `m == T_P(m)` and no constraint fires.
///
/// Coded independently of [`is_supported`] so the two can check each other.
pub fn is_supported_fixpoint(program: &Program, m: &Interpretation) -> bool {
    immediate_consequence(program, m) == *m && satisfies_constraints(program, m)
}

/// The Gelfond-Lifschitz reduct: drop rules blocked by `m`, strip negation
/// from the rest. Constraints are treated like any other rule.
pub fn reduct(program: &Program, m: &Interpretation) -> Program {
    let rules = program
        .rules()
        .iter()
        .filter(|r| r.neg().iter().all(|&a| !m.contains(a)))
        .map(|r| Rule::new(r.head(), r.pos().iter().copied(), []))
        .collect();
    Program::from_parts(program.symbols().clone(), rules)
}

/// Least model of a positive program by naive iteration. Constraints are ignored.
pub fn least_model(program: &Program) -> Result<Interpretation, SemanticsError> {
    if let Some(rule) = program.rules().iter().position(|r| !r.neg().is_empty()) {
        return Err(SemanticsError::NotPositive { rule });
    }
    let mut m = program.empty_interpretation();
    loop {
        let mut changed = false;
        for rule in program.headed_rules() {
            let h = rule.head().expect("headed");
            if !m.contains(h) && rule.pos().iter().all(|&a| m.contains(a)) {
                m.insert(h);
                changed = true;
            }
        }
        if !changed {
            return Ok(m);
        }
    }
}

/// `m` is the least model of the reduct of the headed rules and satisfies
/// every constraint.
pub fn is_stable(program: &Program, m: &Interpretation) -> bool {
    let headed = Program::from_parts(
        program.symbols().clone(),
        program.headed_rules().cloned().collect(),
    );
    let lm = least_model(&reduct(&headed, m)).expect("reduct is positive");
    lm == *m && satisfies_constraints(program, m)
}

/// Collects every subset of `atoms(program)` accepted by `accept`.
///
/// Subsets are checked in parallel; the result does not depend on scheduling.
pub fn enumerate_subsets<F>(
    program: &Program,
    cap: usize,
    accept: F,
) -> Result<ModelSet, SemanticsError>
where
    F: Fn(&Program, &Interpretation) -> bool + Sync,
{
    let atoms: Vec<AtomId> = program.atoms().into_iter().collect();
    if atoms.len() > cap || atoms.len() >= 64 {
        return Err(SemanticsError::AtomCapExceeded {
            atoms: atoms.len(),
            cap,
        });
    }
    let universe = program.symbols().len();
    let found: Vec<Interpretation> = (0..1u64 << atoms.len())
        .into_par_iter()
        .filter_map(|mask| {
            let m = Interpretation::from_atoms(
                universe,
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, &a)| a),
            );
            accept(program, &m).then_some(m)
        })
        .collect();
    Ok(ModelSet::new(found, program.symbols()))
}

pub fn enumerate_supported(program: &Program) -> Result<ModelSet, SemanticsError> {
    enumerate_supported_capped(program, DEFAULT_ATOM_CAP)
}

pub fn enumerate_supported_capped(
    program: &Program,
    cap: usize,
) -> Result<ModelSet, SemanticsError> {
    enumerate_subsets(program, cap, is_supported)
}

pub fn enumerate_stable(program: &Program) -> Result<ModelSet, SemanticsError> {
    enumerate_stable_capped(program, DEFAULT_ATOM_CAP)
}

pub fn enumerate_stable_capped(program: &Program, cap: usize) -> Result<ModelSet, SemanticsError> {
    enumerate_subsets(program, cap, is_stable)
}
