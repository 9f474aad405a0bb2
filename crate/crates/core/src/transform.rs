//! Rewriting a program so that its stable models are exactly the supported
//! models of the input, plus the projection back to the input vocabulary.
//!
//! Each headed rule `h :- l1, ..., lm, not lm+1, ..., not ln.` with 1-based
//! position `i` becomes
//!
//! ```text
//! h :- not _dm_ri.
//! _dm_ri :- not l1.      % one per positive body literal
//! _dm_ri :- lj.          % one per negated body literal
//! ```
//!
//! `_dm_ri` holds exactly when the body of rule `i` is false. Constraints are
//! copied unchanged; they consume a position but get no auxiliary atom.

use std::collections::{BTreeMap, BTreeSet};

use crate::program::{AtomId, Interpretation, Program, Rule};

/// Prefix of every auxiliary atom. Input programs may not use it.
pub const RESERVED_PREFIX: &str = "_dm_";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("atom `{0}` uses the reserved prefix `{RESERVED_PREFIX}`")]
    ReservedPrefix(String),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TransformOptions {
    /// Emit facts as plain facts instead of `a :- not _dm_ri.`.
    pub simplify_facts: bool,
}

/// Name of the auxiliary atom for the rule at 0-based position `index`.
pub fn aux_name(index: usize) -> String {
    format!("{RESERVED_PREFIX}r{}", index + 1)
}

#[derive(Clone, Debug)]
pub struct TransformResult {
    transformed: Program,
    aux_of_rule: BTreeMap<usize, AtomId>,
    original_atoms: BTreeSet<AtomId>,
    original_universe: usize,
}

/// Counts describing a transformed program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeReport {
    /// Rules emitted for headed input rules.
    pub rules: usize,
    /// Constraints passed through unchanged.
    pub constraints: usize,
    /// Atoms occurring in the transformed program.
    pub atoms: usize,
}

pub fn transform(program: &Program) -> Result<TransformResult, TransformError> {
    transform_with(program, TransformOptions::default())
}

pub fn transform_with(
    program: &Program,
    options: TransformOptions,
) -> Result<TransformResult, TransformError> {
    if let Some((_, name)) = program
        .symbols()
        .iter()
        .find(|(_, n)| n.starts_with(RESERVED_PREFIX))
    {
        return Err(TransformError::ReservedPrefix(name.to_owned()));
    }

    // Original atoms keep their ids; auxiliaries are appended after them.
    let mut out = Program::from_parts(program.symbols().clone(), Vec::new());
    let mut aux_of_rule = BTreeMap::new();

    for (index, rule) in program.rules().iter().enumerate() {
        let Some(head) = rule.head() else {
            out.push_rule(rule.clone());
            continue;
        };
        if options.simplify_facts && rule.is_fact() {
            out.push_rule(rule.clone());
            continue;
        }
        let aux = out.atom(&aux_name(index));
        aux_of_rule.insert(index, aux);
        out.push_rule(Rule::new(Some(head), [], [aux]));
        for &l in rule.pos() {
            out.push_rule(Rule::new(Some(aux), [], [l]));
        }
        for &l in rule.neg() {
            out.push_rule(Rule::new(Some(aux), [l], []));
        }
    }

    Ok(TransformResult {
        transformed: out,
        aux_of_rule,
        original_atoms: program.atoms(),
        original_universe: program.symbols().len(),
    })
}

impl TransformResult {
    pub fn transformed(&self) -> &Program {
        &self.transformed
    }

    pub fn into_transformed(self) -> Program {
        self.transformed
    }

    /// Auxiliary atom per 0-based input rule position.
    pub fn aux_of_rule(&self) -> &BTreeMap<usize, AtomId> {
        &self.aux_of_rule
    }

    pub fn original_atoms(&self) -> &BTreeSet<AtomId> {
        &self.original_atoms
    }

    pub fn is_aux(&self, atom: AtomId) -> bool {
        atom.index() >= self.original_universe
    }

    /// Restricts a model of the transformed program to the input atoms,
    /// re-indexed over the input symbol table.
    pub fn project(&self, model: &Interpretation) -> Interpretation {
        Interpretation::from_atoms(
            self.original_universe,
            model.iter().filter(|a| self.original_atoms.contains(a)),
        )
    }

    /// The inverse of [`project`](Self::project) on supported models: adds
    /// `_dm_ri` for every rule `i` of `source` whose body is false in `model`.
    ///
    /// `source` must be the program this result was produced from.
    pub fn lift(&self, source: &Program, model: &Interpretation) -> Interpretation {
        let mut lifted = Interpretation::from_atoms(self.transformed.symbols().len(), model.iter());
        for (&index, &aux) in &self.aux_of_rule {
            if !source.rules()[index].body_holds(model) {
                lifted.insert(aux);
            }
        }
        lifted
    }

    pub fn size_report(&self) -> SizeReport {
        let constraints = self.transformed.constraints().count();
        SizeReport {
            rules: self.transformed.rules().len() - constraints,
            constraints,
            atoms: self.transformed.atoms().len(),
        }
    }

    /// Tab-separated `<aux-name>\t<rule-index>` lines, 1-based, in rule order.
    pub fn aux_map_tsv(&self) -> String {
        let mut out = String::new();
        for (&index, &aux) in &self.aux_of_rule {
            out.push_str(self.transformed.symbols().name(aux));
            out.push('\t');
            out.push_str(&(index + 1).to_string());
            out.push('\n');
        }
        out
    }
}
