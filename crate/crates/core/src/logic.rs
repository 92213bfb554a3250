//! Propositional formulas in negation normal form, literals, clauses and terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// An atom with a polarity. Orders by atom first so that a literal and its
/// complement sort next to each other.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal<A> {
    pub atom: A,
    pub positive: bool,
}

impl<A: Clone> Literal<A> {
    pub fn pos(atom: A) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: A) -> Self {
        Literal { atom, positive: false }
    }

    pub fn complement(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }
}

impl<A: Ord> Literal<A> {
    pub fn holds(&self, assignment: &BTreeMap<A, bool>) -> bool {
        assignment.get(&self.atom).copied().unwrap_or(false) == self.positive
    }
}

impl<A: fmt::Display> fmt::Display for Literal<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "¬{}", self.atom)
        }
    }
}

/// Formula in negation normal form: negation only on literals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula<A> {
    Lit(Literal<A>),
    /// Conjunction; empty means `true`.
    And(Vec<Formula<A>>),
    /// Disjunction; empty means `false`.
    Or(Vec<Formula<A>>),
}

impl<A: Clone + Ord> Formula<A> {
    pub fn truth() -> Self {
        Formula::And(Vec::new())
    }

    pub fn falsity() -> Self {
        Formula::Or(Vec::new())
    }

    pub fn atom(a: A) -> Self {
        Formula::Lit(Literal::pos(a))
    }

    pub fn not_atom(a: A) -> Self {
        Formula::Lit(Literal::neg(a))
    }

    pub fn eval(&self, assignment: &BTreeMap<A, bool>) -> bool {
        match self {
            Formula::Lit(l) => l.holds(assignment),
            Formula::And(fs) => fs.iter().all(|f| f.eval(assignment)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(assignment)),
        }
    }

    /// Negation pushed to the literals, so the result stays in NNF.
    pub fn negate(&self) -> Self {
        match self {
            Formula::Lit(l) => Formula::Lit(l.complement()),
            Formula::And(fs) => Formula::Or(fs.iter().map(Formula::negate).collect()),
            Formula::Or(fs) => Formula::And(fs.iter().map(Formula::negate).collect()),
        }
    }

    pub fn atoms(&self) -> BTreeSet<A> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<A>) {
        match self {
            Formula::Lit(l) => {
                out.insert(l.atom.clone());
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }
}

impl<A: fmt::Display> fmt::Display for Formula<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (parts, sep, empty) = match self {
            Formula::Lit(l) => return write!(f, "{l}"),
            Formula::And(fs) => (fs, " & ", "true"),
            Formula::Or(fs) => (fs, " | ", "false"),
        };
        match parts.as_slice() {
            [] => f.write_str(empty),
            [only] => write!(f, "{only}"),
            _ => {
                f.write_str("(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A set of literals read as a disjunction (clause) or conjunction (term).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LiteralSet<A: Ord>(pub BTreeSet<Literal<A>>);

/// Disjunction of literals. The empty clause is `false`.
pub type Clause<A> = LiteralSet<A>;
/// Conjunction of literals. The empty term is `true`.
pub type Term<A> = LiteralSet<A>;

impl<A: Ord + Clone> LiteralSet<A> {
    pub fn new() -> Self {
        LiteralSet(BTreeSet::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Literal<A>> {
        self.0.iter()
    }

    pub fn contains(&self, l: &Literal<A>) -> bool {
        self.0.contains(l)
    }

    /// Whether the set holds both a literal and its complement.
    pub fn is_complementary(&self) -> bool {
        self.0
            .iter()
            .zip(self.0.iter().skip(1))
            .any(|(a, b)| a.atom == b.atom)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn all_hold(&self, assignment: &BTreeMap<A, bool>) -> bool {
        self.0.iter().all(|l| l.holds(assignment))
    }

    pub fn any_holds(&self, assignment: &BTreeMap<A, bool>) -> bool {
        self.0.iter().any(|l| l.holds(assignment))
    }

    /// The same literals, each complemented.
    pub fn complemented(&self) -> Self {
        LiteralSet(self.0.iter().map(Literal::complement).collect())
    }

    /// Ranking for display: fewer literals first, then literal order.
    pub fn display_order(a: &Self, b: &Self) -> std::cmp::Ordering {
        a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0))
    }
}

impl<A: Ord + Clone> Default for LiteralSet<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A: Ord> FromIterator<Literal<A>> for LiteralSet<A> {
    fn from_iter<T: IntoIterator<Item = Literal<A>>>(iter: T) -> Self {
        LiteralSet(iter.into_iter().collect())
    }
}

impl<A: Ord + fmt::Display> LiteralSet<A> {
    fn joined(&self, sep: &str, empty: &str) -> String {
        if self.0.is_empty() {
            return empty.to_string();
        }
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        format!("({})", parts.join(sep))
    }

    /// Canonical clause text, e.g. `(¬Bad(beg_frank) | Bad(lie_frank))`.
    pub fn clause_string(&self) -> String {
        self.joined(" | ", "false")
    }

    /// Canonical term text, e.g. `(¬Bad(beg_frank) & ¬Bad(exercise))`.
    pub fn term_string(&self) -> String {
        self.joined(" & ", "true")
    }
}

/// Enumerates all assignments over `atoms` (2^n of them).
pub fn assignments<A: Ord + Clone>(atoms: &[A]) -> impl Iterator<Item = BTreeMap<A, bool>> + '_ {
    assert!(atoms.len() < 32, "truth tables over {} atoms are too large", atoms.len());
    (0u32..(1u32 << atoms.len())).map(move |bits| {
        atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), bits & (1 << i) != 0))
            .collect()
    })
}
