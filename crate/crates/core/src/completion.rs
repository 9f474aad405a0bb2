//! Clark's completion of a ground program and its CNF encoding.
//!
//! Every atom `a` with defining rules `r1..rk` is completed to
//! `a <-> B1 | ... | Bk`. Each nonempty body gets a definitional variable
//! `b <-> B`, so the CNF stays linear in the program size. A fact makes its
//! head a unit clause, an atom without rules becomes `-a`, and a constraint
//! contributes the clause `-B`.
//!
//! Variables `1..=|symbols|` are the atoms in symbol order; body variables
//! follow in rule order and are named `_body_r<i>` (1-based rule position).

use std::fmt::Write as _;

use crate::program::{AtomId, Interpretation, Program, Rule};
use crate::semantics::{enumerate_subsets, ModelSet, SemanticsError, DEFAULT_ATOM_CAP};

/// A signed DIMACS literal.
pub type Lit = i32;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Named variables, ascending.
    pub var_map: Vec<(u32, String)>,
}

impl CnfFormula {
    /// Variable of an atom of the completed program.
    pub fn atom_var(atom: AtomId) -> u32 {
        atom.index() as u32 + 1
    }

    /// Whether `assignment` (indexed by variable, slot 0 unused) satisfies
    /// every clause.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize] == (l > 0))
        })
    }
}

fn atom_lit(a: AtomId, positive: bool) -> Lit {
    let v = CnfFormula::atom_var(a) as Lit;
    if positive {
        v
    } else {
        -v
    }
}

/// Literals of a body, as they must hold for the body to be true.
fn body_lits(rule: &Rule) -> impl Iterator<Item = Lit> + '_ {
    rule.pos()
        .iter()
        .map(|&a| atom_lit(a, true))
        .chain(rule.neg().iter().map(|&a| atom_lit(a, false)))
}

pub fn complete(program: &Program) -> CnfFormula {
    let symbols = program.symbols();
    let mut num_vars = symbols.len() as u32;
    let mut var_map: Vec<(u32, String)> = symbols
        .iter()
        .map(|(a, name)| (CnfFormula::atom_var(a), name.to_owned()))
        .collect();
    let mut clauses = Vec::new();

    // Per atom: whether it has a fact, and the body variables of its rules.
    let mut has_fact = vec![false; symbols.len()];
    let mut bodies: Vec<Vec<Lit>> = vec![Vec::new(); symbols.len()];

    for (index, rule) in program.rules().iter().enumerate() {
        let Some(head) = rule.head() else {
            continue;
        };
        if rule.body_len() == 0 {
            has_fact[head.index()] = true;
            continue;
        }
        num_vars += 1;
        let b = num_vars as Lit;
        var_map.push((num_vars, format!("_body_r{}", index + 1)));
        let mut back = vec![b];
        for l in body_lits(rule) {
            clauses.push(vec![-b, l]);
            back.push(-l);
        }
        clauses.push(back);
        bodies[head.index()].push(b);
    }

    for (a, _) in symbols.iter() {
        let x = atom_lit(a, true);
        if has_fact[a.index()] {
            clauses.push(vec![x]);
            continue;
        }
        let support = &bodies[a.index()];
        let mut forward = vec![-x];
        forward.extend(support);
        clauses.push(forward);
        for &b in support {
            clauses.push(vec![x, -b]);
        }
    }

    for rule in program.constraints() {
        clauses.push(body_lits(rule).map(|l| -l).collect());
    }

    CnfFormula {
        num_vars,
        clauses,
        var_map,
    }
}

/// Whether `m` satisfies the completion, evaluated on the formula itself
/// rather than its CNF.
pub fn satisfies_completion(program: &Program, m: &Interpretation) -> bool {
    for a in program.atoms() {
        let defined = program
            .headed_rules()
            .filter(|r| r.head() == Some(a))
            .any(|r| r.body_holds(m));
        if defined != m.contains(a) {
            return false;
        }
    }
    program.constraints().all(|r| !r.body_holds(m))
}

pub fn enumerate_completion_models(program: &Program) -> Result<ModelSet, SemanticsError> {
    enumerate_completion_models_capped(program, DEFAULT_ATOM_CAP)
}

pub fn enumerate_completion_models_capped(
    program: &Program,
    cap: usize,
) -> Result<ModelSet, SemanticsError> {
    enumerate_subsets(program, cap, satisfies_completion)
}

/// DIMACS text: `c map <var> <name>` comments, the `p cnf` header, then one
/// `0`-terminated clause per line. No trailing newline.
pub fn emit_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    for (var, name) in &formula.var_map {
        writeln!(out, "c map {var} {name}").unwrap();
    }
    write!(out, "p cnf {} {}", formula.num_vars, formula.clauses.len()).unwrap();
    for clause in &formula.clauses {
        out.push('\n');
        for l in clause {
            write!(out, "{l} ").unwrap();
        }
        out.push('0');
    }
    out
}
