//! Theories as truth assignments and the problem-family combinators built on a
//! distinguishing statement `Q`: `Q ∨ H`, `¬Q ∨ H` and `(¬Q ∧ H_i) ∨ (Q ∧ H_f(i))`.
//!
//! The halting family is stood in for by a bounded PCP search over an indexed
//! instance corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcp::{decide_fragment, find_match, random_instance, GeneratorParams, MatchSearch, PcpInstance, SearchBudget};
use crate::protocol::{run_game, GameConfig};
use crate::strategies::{ClassicalCheat, QuantumCheat};

/// The statement separating the bundled classical and quantum theories.
pub const INTERFERENCE: &str = "interference-allowed";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theory {
    name: String,
    valuation: BTreeMap<String, bool>,
}

impl Theory {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), valuation: BTreeMap::new() }
    }

    pub fn with(mut self, statement: impl Into<String>, value: bool) -> Self {
        self.valuation.insert(statement.into(), value);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn valuation(&self) -> &BTreeMap<String, bool> {
        &self.valuation
    }

    pub fn truth(&self, statement: &str) -> Result<bool> {
        self.valuation.get(statement).copied().ok_or_else(|| Error::UnknownStatement(statement.to_string()))
    }

    /// Same theory with `statement` flipped.
    pub fn flipped(&self, statement: &str) -> Result<Theory> {
        let v = self.truth(statement)?;
        Ok(self.clone().with(statement, !v))
    }

    /// Statements both theories answer, but differently.
    pub fn distinguishing(&self, other: &Theory) -> Vec<String> {
        self.valuation
            .iter()
            .filter(|(k, v)| other.valuation.get(*k).is_some_and(|o| o != *v))
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn is_distinct_from(&self, other: &Theory) -> bool {
        !self.distinguishing(other).is_empty()
    }
}

/// Classical theory (`T1`): no interference.
pub fn classical_theory() -> Theory {
    Theory::new("classical").with(INTERFERENCE, false)
}

/// Quantum theory (`T2`): interference allowed.
pub fn quantum_theory() -> Theory {
    Theory::new("quantum").with(INTERFERENCE, true)
}

/// Values `Q` by playing the game: a theory allows interference iff its best
/// cheat wins on `instance`.
pub fn theories_from_games(instance: &PcpInstance, config: &GameConfig) -> Result<(Theory, Theory)> {
    let classical = run_game(instance, &ClassicalCheat, config)?.is_win();
    let quantum = run_game(instance, &QuantumCheat::default(), config)?.is_win();
    Ok((Theory::new("classical").with(INTERFERENCE, classical), Theory::new("quantum").with(INTERFERENCE, quantum)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decidability {
    /// Same answer on every instance.
    Trivially,
    /// Decidable with both answers occurring.
    Nontrivially,
    /// Bounded stand-in for an undecidable family.
    ProxyUndecidable,
}

impl fmt::Display for Decidability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decidability::Trivially => "trivially decidable",
            Decidability::Nontrivially => "non-trivially decidable",
            Decidability::ProxyUndecidable => "undecidable (bounded proxy)",
        })
    }
}

type Evaluator = dyn Fn(&Theory, usize) -> Result<bool> + Send + Sync;
type Classifier = dyn Fn(&Theory) -> Result<Decidability> + Send + Sync;

/// An indexed yes/no family whose answers may depend on the theory.
#[derive(Clone)]
pub struct ProblemFamily {
    name: String,
    range: usize,
    eval: Arc<Evaluator>,
    classify: Arc<Classifier>,
    searches: Arc<AtomicUsize>,
}

impl fmt::Debug for ProblemFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemFamily").field("name", &self.name).field("range", &self.range).finish()
    }
}

impl ProblemFamily {
    /// A theory-independent family with a fixed classification.
    pub fn from_fn(
        name: impl Into<String>,
        range: usize,
        decidability: Decidability,
        f: impl Fn(usize) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            range,
            eval: Arc::new(move |_, i| Ok(f(i))),
            classify: Arc::new(move |_| Ok(decidability)),
            searches: Arc::new(AtomicUsize::new(0)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn evaluate(&self, theory: &Theory, i: usize) -> Result<bool> {
        if i >= self.range {
            return Err(Error::IndexOutOfRange { index: i, len: self.range });
        }
        (self.eval)(theory, i)
    }

    pub fn evaluate_all(&self, theory: &Theory) -> Result<Vec<bool>> {
        (0..self.range).map(|i| self.evaluate(theory, i)).collect()
    }

    pub fn decidability(&self, theory: &Theory) -> Result<Decidability> {
        (self.classify)(theory)
    }

    /// Bounded searches run so far by the underlying proxy.
    pub fn search_count(&self) -> usize {
        self.searches.load(Ordering::SeqCst)
    }
}

/// `H_i`: instance `i` of `corpus` has a match. Syntactically decidable
/// instances are answered directly; the rest fall back to a bounded search.
pub fn halting_proxy(corpus: Vec<PcpInstance>, budget: SearchBudget) -> ProblemFamily {
    let searches = Arc::new(AtomicUsize::new(0));
    let counter = searches.clone();
    let range = corpus.len();
    let corpus = Arc::new(corpus);
    ProblemFamily {
        name: "H".into(),
        range,
        eval: Arc::new(move |_, i| {
            let inst = &corpus[i];
            Ok(decide_fragment(inst).unwrap_or_else(|| {
                counter.fetch_add(1, Ordering::SeqCst);
                matches!(find_match(inst, budget), MatchSearch::Found(_))
            }))
        }),
        classify: Arc::new(|_| Ok(Decidability::ProxyUndecidable)),
        searches,
    }
}

/// Indices of `corpus` whose match question is settled without search.
pub fn fragment_indices(corpus: &[PcpInstance]) -> Vec<usize> {
    corpus.iter().enumerate().filter(|(_, c)| decide_fragment(c).is_some()).map(|(i, _)| i).collect()
}

/// A seeded corpus of small instances for the proxy family.
pub fn proxy_corpus(size: usize, seed: u64) -> Result<Vec<PcpInstance>> {
    (0..size)
        .map(|i| {
            let params = GeneratorParams { num_dominoes: 1 + i % 3, max_string_len: 3, ensure_nontrivial: false };
            random_instance(params, seed.wrapping_add(i as u64))
        })
        .collect()
}

/// `f`: a map from instance indices onto a set of target indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexMap {
    map: Vec<usize>,
    targets: BTreeSet<usize>,
}

impl IndexMap {
    /// Rejects maps that leave a target unhit or leave the target set.
    pub fn new(map: Vec<usize>, targets: impl IntoIterator<Item = usize>) -> Result<Self> {
        let targets: BTreeSet<usize> = targets.into_iter().collect();
        if let Some(bad) = map.iter().find(|j| !targets.contains(j)) {
            return Err(Error::IndexMap(format!("f maps into {bad}, which is not a target")));
        }
        let image: BTreeSet<usize> = map.iter().copied().collect();
        if let Some(missed) = targets.difference(&image).next() {
            return Err(Error::IndexMap(format!("target {missed} is not in the image of f")));
        }
        Ok(Self { map, targets })
    }

    /// `i ↦ targets[i mod |targets|]`; surjective when `domain ≥ |targets|`.
    pub fn cyclic(domain: usize, targets: &[usize]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::IndexMap("no targets".into()));
        }
        Self::new((0..domain).map(|i| targets[i % targets.len()]).collect(), targets.iter().copied())
    }

    pub fn constant(domain: usize, target: usize) -> Result<Self> {
        Self::new(vec![target; domain], [target])
    }

    pub fn apply(&self, i: usize) -> Option<usize> {
        self.map.get(i).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn targets(&self) -> &BTreeSet<usize> {
        &self.targets
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }
}

/// `D_i := Q ∨ H_i`.
pub fn construct_d(q: &str, h: &ProblemFamily) -> ProblemFamily {
    let (q1, q2) = (q.to_string(), q.to_string());
    let (h1, h2) = (h.clone(), h.clone());
    ProblemFamily {
        name: format!("D[{q} or {}]", h.name),
        range: h.range,
        eval: Arc::new(move |t, i| Ok(t.truth(&q1)? || h1.evaluate(t, i)?)),
        classify: Arc::new(move |t| if t.truth(&q2)? { Ok(Decidability::Trivially) } else { h2.decidability(t) }),
        searches: h.searches.clone(),
    }
}

/// `D̃_i := ¬Q ∨ H_i`.
pub fn construct_d_tilde(q: &str, h: &ProblemFamily) -> ProblemFamily {
    let (q1, q2) = (q.to_string(), q.to_string());
    let (h1, h2) = (h.clone(), h.clone());
    ProblemFamily {
        name: format!("D~[not {q} or {}]", h.name),
        range: h.range,
        eval: Arc::new(move |t, i| Ok(!t.truth(&q1)? || h1.evaluate(t, i)?)),
        classify: Arc::new(move |t| if !t.truth(&q2)? { Ok(Decidability::Trivially) } else { h2.decidability(t) }),
        searches: h.searches.clone(),
    }
}

/// `D_i[f] := (¬Q ∧ H_i) ∨ (Q ∧ H_f(i))`.
pub fn construct_d_f(q: &str, h: &ProblemFamily, f: &IndexMap) -> Result<ProblemFamily> {
    if f.len() != h.range {
        return Err(Error::IndexMap(format!("f has domain {}, family has {} instances", f.len(), h.range)));
    }
    if let Some(&bad) = f.targets.iter().find(|&&j| j >= h.range) {
        return Err(Error::IndexOutOfRange { index: bad, len: h.range });
    }
    let (q1, q2) = (q.to_string(), q.to_string());
    let (h1, h2) = (h.clone(), h.clone());
    let (f1, f2) = (f.clone(), f.clone());
    Ok(ProblemFamily {
        name: format!("D[f]({q}, {})", h.name),
        range: h.range,
        eval: Arc::new(move |t, i| {
            if t.truth(&q1)? {
                h1.evaluate(t, f1.map[i])
            } else {
                h1.evaluate(t, i)
            }
        }),
        classify: Arc::new(move |t| {
            if !t.truth(&q2)? {
                return h2.decidability(t);
            }
            let answers: BTreeSet<bool> =
                f2.targets.iter().map(|&j| h2.evaluate(t, j)).collect::<Result<_>>()?;
            Ok(if answers.len() > 1 { Decidability::Nontrivially } else { Decidability::Trivially })
        }),
        searches: h.searches.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruthRow {
    /// `Q` for the `D` table, `¬Q` for the `D̃` table.
    pub premise: bool,
    pub h: bool,
    pub result: bool,
}

fn table(rows: [(bool, bool); 4], negate: bool) -> Result<Vec<TruthRow>> {
    rows.into_iter()
        .map(|(premise, h)| {
            let q = if negate { !premise } else { premise };
            let theory = Theory::new("row").with("Q", q);
            let family = ProblemFamily::from_fn("H", 1, Decidability::Trivially, move |_| h);
            let d = if negate { construct_d_tilde("Q", &family) } else { construct_d("Q", &family) };
            Ok(TruthRow { premise, h, result: d.evaluate(&theory, 0)? })
        })
        .collect()
}

/// Rows of `Q ∨ H` in the order (yes, yes), (yes, no), (no, yes), (no, no).
pub fn truth_table_d() -> Result<Vec<TruthRow>> {
    table([(true, true), (true, false), (false, true), (false, false)], false)
}

/// Rows of `¬Q ∨ H` in the order (no, yes), (no, no), (yes, yes), (yes, no).
pub fn truth_table_d_tilde() -> Result<Vec<TruthRow>> {
    table([(false, true), (false, false), (true, true), (true, false)], true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyEvaluation {
    pub family: String,
    pub theory: String,
    pub decidability: Decidability,
    pub answers: Vec<bool>,
    pub equals_h: bool,
    pub equals_h_after_f: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicReport {
    pub statement: String,
    pub theories: Vec<Theory>,
    pub table_d: Vec<TruthRow>,
    pub table_d_tilde: Vec<TruthRow>,
    pub corpus_size: usize,
    pub f: Vec<usize>,
    pub evaluations: Vec<FamilyEvaluation>,
    /// Bounded searches the proxy ran while evaluating `D[f]` in each theory.
    pub d_f_searches: BTreeMap<String, usize>,
}

/// Evaluates `H`, `D`, `D̃` and `D[f]` in each theory over the proxy corpus.
pub fn logic_report(
    statement: &str,
    theories: &[Theory],
    corpus: Vec<PcpInstance>,
    budget: SearchBudget,
    f: &IndexMap,
) -> Result<LogicReport> {
    let corpus_size = corpus.len();
    let mut evaluations = Vec::new();
    let mut d_f_searches = BTreeMap::new();
    for theory in theories {
        theory.truth(statement)?;
        let h = halting_proxy(corpus.clone(), budget);
        let d_f = construct_d_f(statement, &h, f)?;
        let before = h.search_count();
        let d_f_answers = d_f.evaluate_all(theory)?;
        d_f_searches.insert(theory.name().to_string(), h.search_count() - before);
        let h_answers = h.evaluate_all(theory)?;
        let h_after_f: Vec<bool> = f.as_slice().iter().map(|&j| h_answers[j]).collect();
        let families = [
            (h.clone(), Some(h_answers.clone())),
            (construct_d(statement, &h), None),
            (construct_d_tilde(statement, &h), None),
            (d_f, Some(d_f_answers)),
        ];
        for (family, known) in families {
            let answers = match known {
                Some(a) => a,
                None => family.evaluate_all(theory)?,
            };
            evaluations.push(FamilyEvaluation {
                family: family.name().to_string(),
                theory: theory.name().to_string(),
                decidability: family.decidability(theory)?,
                equals_h: answers == h_answers,
                equals_h_after_f: answers == h_after_f,
                answers,
            });
        }
    }
    Ok(LogicReport {
        statement: statement.to_string(),
        theories: theories.to_vec(),
        table_d: truth_table_d()?,
        table_d_tilde: truth_table_d_tilde()?,
        corpus_size,
        f: f.as_slice().to_vec(),
        evaluations,
        d_f_searches,
    })
}
