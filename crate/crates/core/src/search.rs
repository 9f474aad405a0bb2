//! Stable-model enumeration by branching on negated atoms.
//!
//! A stable model `M` is fixed by which atoms occurring under `not` it
//! contains: `M` is the least model of the reduct, and the reduct only looks
//! at those atoms. The search assigns them one at a time. For a partial
//! assignment every stable model `M` extending it satisfies `lower ⊆ M ⊆ upper`
//! where `lower` is the least model of the rules whose negated atoms are all
//! assigned false and `upper` is the least model of the rules with no negated
//! atom assigned true. Both bounds drive propagation and pruning.

use std::collections::VecDeque;
use std::time::Instant;

use crate::program::{AtomId, Interpretation, Program};

/// Why a search stopped before exhausting the space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interrupt {
    LimitReached,
    DeadlinePassed,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Stable models in discovery order.
    pub models: Vec<Interpretation>,
    /// `None` when the whole space was explored.
    pub interrupted: Option<Interrupt>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SearchLimits {
    /// Stop after this many models; `0` means no limit.
    pub max_models: usize,
    pub deadline: Option<Instant>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    Unassigned,
    True,
    False,
}

struct Compiled {
    universe: usize,
    heads: Vec<usize>,
    pos: Vec<Vec<usize>>,
    neg: Vec<Vec<usize>>,
    /// Rules whose positive body mentions each atom.
    watch: Vec<Vec<usize>>,
    constraints: Vec<(Vec<usize>, Vec<usize>)>,
    /// Atoms occurring negated in some headed rule, ascending.
    branch_atoms: Vec<usize>,
}

impl Compiled {
    fn new(program: &Program) -> Self {
        let universe = program.symbols().len();
        let idx = |v: &[AtomId]| v.iter().map(|a| a.index()).collect::<Vec<_>>();
        let mut heads = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut constraints = Vec::new();
        let mut is_branch = vec![false; universe];
        for rule in program.rules() {
            match rule.head() {
                Some(h) => {
                    heads.push(h.index());
                    pos.push(idx(rule.pos()));
                    neg.push(idx(rule.neg()));
                    for a in rule.neg() {
                        is_branch[a.index()] = true;
                    }
                }
                None => constraints.push((idx(rule.pos()), idx(rule.neg()))),
            }
        }
        let mut watch = vec![Vec::new(); universe];
        for (r, body) in pos.iter().enumerate() {
            for &a in body {
                watch[a].push(r);
            }
        }
        let branch_atoms = (0..universe).filter(|&a| is_branch[a]).collect();
        Compiled {
            universe,
            heads,
            pos,
            neg,
            watch,
            constraints,
            branch_atoms,
        }
    }

    /// Least model of the positive parts of the rules selected by `enabled`.
    fn closure(&self, enabled: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut derived = vec![false; self.universe];
        let mut missing: Vec<usize> = self.pos.iter().map(Vec::len).collect();
        let mut queue = VecDeque::new();
        for r in 0..self.heads.len() {
            if missing[r] == 0 && enabled(r) && !derived[self.heads[r]] {
                derived[self.heads[r]] = true;
                queue.push_back(self.heads[r]);
            }
        }
        while let Some(a) = queue.pop_front() {
            for &r in &self.watch[a] {
                missing[r] -= 1;
                if missing[r] == 0 && enabled(r) && !derived[self.heads[r]] {
                    derived[self.heads[r]] = true;
                    queue.push_back(self.heads[r]);
                }
            }
        }
        derived
    }

    /// Propagates to a fixpoint. Returns the final lower bound, or `None` on
    /// conflict.
    fn propagate(&self, assign: &mut [Value]) -> Option<Vec<bool>> {
        loop {
            let lower = self.closure(|r| self.neg[r].iter().all(|&a| assign[a] == Value::False));
            let upper = self.closure(|r| self.neg[r].iter().all(|&a| assign[a] != Value::True));
            for (p, n) in &self.constraints {
                if p.iter().all(|&a| lower[a]) && n.iter().all(|&a| !upper[a]) {
                    return None;
                }
            }
            let mut changed = false;
            for &a in &self.branch_atoms {
                match (assign[a], lower[a], upper[a]) {
                    (Value::False, true, _) | (Value::True, _, false) => return None,
                    (Value::Unassigned, true, _) => {
                        assign[a] = Value::True;
                        changed = true;
                    }
                    (Value::Unassigned, _, false) => {
                        assign[a] = Value::False;
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Some(lower);
            }
        }
    }

    fn violates_constraint(&self, model: &[bool]) -> bool {
        self.constraints
            .iter()
            .any(|(p, n)| p.iter().all(|&a| model[a]) && n.iter().all(|&a| !model[a]))
    }
}

struct Search<'a> {
    compiled: &'a Compiled,
    limits: SearchLimits,
    models: Vec<Interpretation>,
    interrupted: Option<Interrupt>,
}

impl Search<'_> {
    fn run(&mut self, mut assign: Vec<Value>) {
        if self.interrupted.is_some() {
            return;
        }
        if let Some(deadline) = self.limits.deadline {
            if Instant::now() >= deadline {
                self.interrupted = Some(Interrupt::DeadlinePassed);
                return;
            }
        }
        let Some(lower) = self.compiled.propagate(&mut assign) else {
            return;
        };
        let next = self
            .compiled
            .branch_atoms
            .iter()
            .copied()
            .find(|&a| assign[a] == Value::Unassigned);
        match next {
            None => {
                // Fully assigned: both bounds coincide with the candidate.
                if self.compiled.violates_constraint(&lower) {
                    return;
                }
                let m = Interpretation::from_atoms(
                    self.compiled.universe,
                    (0..self.compiled.universe)
                        .filter(|&a| lower[a])
                        .map(AtomId::new),
                );
                self.models.push(m);
                if self.limits.max_models != 0 && self.models.len() >= self.limits.max_models {
                    self.interrupted = Some(Interrupt::LimitReached);
                }
            }
            Some(a) => {
                for value in [Value::False, Value::True] {
                    let mut branch = assign.clone();
                    branch[a] = value;
                    self.run(branch);
                    if self.interrupted.is_some() {
                        return;
                    }
                }
            }
        }
    }
}

/// Enumerates the stable models of `program`.
pub fn stable_models(program: &Program, limits: SearchLimits) -> SearchOutcome {
    let compiled = Compiled::new(program);
    let mut search = Search {
        compiled: &compiled,
        limits,
        models: Vec::new(),
        interrupted: None,
    };
    search.run(vec![Value::Unassigned; compiled.universe]);
    SearchOutcome {
        models: search.models,
        interrupted: search.interrupted,
    }
}
