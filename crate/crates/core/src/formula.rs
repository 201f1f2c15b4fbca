//! Co-safe LTL formulas and their good-prefix automata.
//!
//! Formulas are kept in negation normal form with negation allowed only on
//! atoms. [`compile`] turns a formula into a minimal, complete DFA over the
//! letters `2^AP`: a tableau expansion yields an NFA whose states are sets of
//! pending obligations, the subset construction determinizes it, and Hopcroft
//! refinement minimizes the result.
//!
//! [`progress`] is formula progression with eager simplification. It is not
//! used by the compiler and serves as an independent reference in tests.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of atomic propositions in an automaton alphabet.
pub const MAX_ATOMS: usize = 8;

/// A letter of `2^AP`, encoded as a bitmask over the automaton's sorted atom
/// list (bit `i` set iff atom `i` holds).
pub type Letter = u32;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    /// Negated atom.
    Not(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    /// `F p`, shorthand for `true U p`.
    Eventually(Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    /// Atoms occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) | Formula::Not(a) => {
                out.insert(a.clone());
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
            Formula::Next(f) | Formula::Eventually(f) => f.collect_atoms(out),
        }
    }

    /// Rewrites every `F p` into `true U p`.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) | Formula::Not(_) => self.clone(),
            Formula::And(l, r) => Formula::And(Box::new(l.desugar()), Box::new(r.desugar())),
            Formula::Or(l, r) => Formula::Or(Box::new(l.desugar()), Box::new(r.desugar())),
            Formula::Until(l, r) => Formula::Until(Box::new(l.desugar()), Box::new(r.desugar())),
            Formula::Next(f) => Formula::Next(Box::new(f.desugar())),
            Formula::Eventually(f) => Formula::Until(Box::new(Formula::True), Box::new(f.desugar())),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Or(l, r) => write!(f, "({l} | {r})"),
            Formula::Until(l, r) => write!(f, "({l} U {r})"),
            Formula::Next(p) => write!(f, "X {p}"),
            Formula::Eventually(p) => write!(f, "F {p}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Not,
    And,
    Or,
    Next,
    Until,
    Eventually,
    True,
    False,
    Ident(String),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => toks.push((start, Tok::LParen)),
            ')' => toks.push((start, Tok::RParen)),
            '!' | '~' => toks.push((start, Tok::Not)),
            '&' => {
                if bytes.get(i + 1) == Some(&b'&') {
                    i += 1;
                }
                toks.push((start, Tok::And));
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    i += 1;
                }
                toks.push((start, Tok::Or));
            }
            '[' if bytes.get(i + 1) == Some(&b']') => {
                return Err(Error::NotCoSafe(format!("`[]` (always) at offset {start}")));
            }
            '<' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                toks.push((start, Tok::Eventually));
            }
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: "implication is not supported; rewrite with | and negated atoms".into(),
                });
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &src[i..j];
                i = j;
                if word.chars().next().is_some_and(|ch| ch.is_ascii_uppercase()) {
                    // A run of capitals like `XF` is a chain of unary operators.
                    for (k, ch) in word.chars().enumerate() {
                        let tok = match ch {
                            'X' => Tok::Next,
                            'U' => Tok::Until,
                            'F' => Tok::Eventually,
                            'G' => {
                                return Err(Error::NotCoSafe(format!("`G` (always) at offset {}", start + k)))
                            }
                            'R' | 'W' => {
                                return Err(Error::NotCoSafe(format!(
                                    "`{ch}` (release/weak until) at offset {}",
                                    start + k
                                )))
                            }
                            _ => {
                                return Err(Error::Syntax {
                                    pos: start,
                                    msg: format!("unexpected `{word}`; atoms must start with a lowercase letter"),
                                })
                            }
                        };
                        toks.push((start + k, tok));
                    }
                } else {
                    let tok = match word {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        _ => Tok::Ident(word.to_string()),
                    };
                    toks.push((start, tok));
                }
                continue;
            }
            _ => {
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{c}`") });
            }
        }
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.until()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::Until) {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::Until(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                match self.unary()? {
                    Formula::Atom(a) => Ok(Formula::Not(a)),
                    other => Err(Error::NotCoSafe(format!("negation of non-atomic `{other}` at offset {pos}"))),
                }
            }
            Some(Tok::Next) => {
                self.bump();
                Ok(Formula::Next(Box::new(self.unary()?)))
            }
            Some(Tok::Eventually) => {
                self.bump();
                Ok(Formula::Eventually(Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::True) => Ok(Formula::True),
            Some(Tok::False) => Ok(Formula::False),
            Some(Tok::Ident(a)) => Ok(Formula::Atom(a)),
            Some(Tok::LParen) => {
                let inner = self.or()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Syntax { pos: self.toks.get(self.at - 1).map(|t| t.0).unwrap_or(self.len), msg: "expected `)`".into() }),
                }
            }
            Some(t) => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
            None => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parses a co-safe LTL formula.
///
/// Grammar, loosest binding first: `|`, `&`, `U` (right associative), then
/// the prefix operators `!`, `X`, `F`. Atoms are lowercase identifiers;
/// `true` and `false` are constants. `!` may only be applied to an atom, and
/// `G`, `R`, `W` and `[]` are rejected with [`Error::NotCoSafe`].
pub fn parse(src: &str) -> Result<Formula> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, len: src.len() };
    let f = p.or()?;
    if p.at < p.toks.len() {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Progression

fn mk_and(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, _) | (_, Formula::False) => Formula::False,
        (Formula::True, x) | (x, Formula::True) => x,
        (a, b) if a == b => a,
        (a, b) => Formula::And(Box::new(a), Box::new(b)),
    }
}

fn mk_or(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, _) | (_, Formula::True) => Formula::True,
        (Formula::False, x) | (x, Formula::False) => x,
        (a, b) if a == b => a,
        (a, b) => Formula::Or(Box::new(a), Box::new(b)),
    }
}

/// Residual obligation after reading one letter, given as the set of atoms
/// that hold. The result is simplified bottom-up, so `true` means the prefix
/// read so far is a good prefix.
pub fn progress(f: &Formula, letter: &BTreeSet<String>) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(a) => {
            if letter.contains(a) {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Not(a) => {
            if letter.contains(a) {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::And(l, r) => mk_and(progress(l, letter), progress(r, letter)),
        Formula::Or(l, r) => mk_or(progress(l, letter), progress(r, letter)),
        Formula::Next(p) => (**p).clone(),
        Formula::Until(l, r) => mk_or(progress(r, letter), mk_and(progress(l, letter), f.clone())),
        Formula::Eventually(p) => mk_or(progress(p, letter), f.clone()),
    }
}

// ---------------------------------------------------------------------------
// Automata

/// Complete deterministic automaton accepting exactly the good prefixes of a
/// co-safe formula. Accepting states are absorbing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    atoms: Vec<String>,
    accepting: Vec<bool>,
    initial: usize,
    /// `delta[q * letters + l]`.
    delta: Vec<usize>,
}

impl Dfa {
    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn num_letters(&self) -> usize {
        1 << self.atoms.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.num_states()).filter(|&q| self.accepting[q]).collect()
    }

    pub fn step(&self, q: usize, letter: Letter) -> usize {
        self.delta[q * self.num_letters() + letter as usize]
    }

    /// Encodes a set of atoms as a letter. Every atom must belong to the
    /// alphabet.
    pub fn letter<S: AsRef<str>>(&self, atoms: &[S]) -> Result<Letter> {
        let mut l = 0;
        for a in atoms {
            let i = self
                .atoms
                .binary_search_by(|x| x.as_str().cmp(a.as_ref()))
                .map_err(|_| Error::AtomMismatch(a.as_ref().to_string()))?;
            l |= 1 << i;
        }
        Ok(l)
    }

    /// Atoms holding in `letter`, sorted.
    pub fn letter_atoms(&self, letter: Letter) -> Vec<String> {
        (0..self.atoms.len()).filter(|i| letter >> i & 1 == 1).map(|i| self.atoms[i].clone()).collect()
    }

    /// State reached from the initial state after `word`.
    pub fn run(&self, word: &[Letter]) -> usize {
        word.iter().fold(self.initial, |q, &l| self.step(q, l))
    }

    pub fn accepts(&self, word: &[Letter]) -> bool {
        self.is_accepting(self.run(word))
    }

    /// Language equality over a common alphabet.
    pub fn equivalent(&self, other: &Dfa) -> bool {
        if self.atoms != other.atoms {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([(self.initial, other.initial)]);
        seen.insert((self.initial, other.initial));
        while let Some((p, q)) = queue.pop_front() {
            if self.accepting[p] != other.accepting[q] {
                return false;
            }
            for l in 0..self.num_letters() as Letter {
                let next = (self.step(p, l), other.step(q, l));
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        true
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_states();
        if n == 0 || self.initial >= n {
            return Err(Error::InvalidAutomaton("initial state out of range".into()));
        }
        if self.atoms.len() > MAX_ATOMS {
            return Err(Error::TooManyAtoms { got: self.atoms.len(), max: MAX_ATOMS });
        }
        if self.atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAutomaton("atoms must be sorted and distinct".into()));
        }
        for q in 0..n {
            for l in 0..self.num_letters() as Letter {
                let t = self.step(q, l);
                if t >= n {
                    return Err(Error::InvalidAutomaton(format!("transition target {t} out of range")));
                }
                if self.accepting[q] && !self.accepting[t] {
                    return Err(Error::InvalidAutomaton(format!("accepting state {q} is not absorbing")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> DfaJson {
        let mut transitions = Vec::with_capacity(self.delta.len());
        for q in 0..self.num_states() {
            for l in 0..self.num_letters() as Letter {
                transitions.push(DfaTransitionJson { from: q, letter: self.letter_atoms(l), to: self.step(q, l) });
            }
        }
        DfaJson {
            atoms: self.atoms.clone(),
            states: self.num_states(),
            initial: self.initial,
            accepting: self.accepting_states(),
            transitions,
        }
    }

    pub fn from_json(j: &DfaJson) -> Result<Dfa> {
        let mut atoms = j.atoms.clone();
        atoms.sort();
        let letters = 1usize << atoms.len().min(31);
        let mut accepting = vec![false; j.states];
        for &q in &j.accepting {
            *accepting
                .get_mut(q)
                .ok_or_else(|| Error::InvalidAutomaton(format!("accepting state {q} out of range")))? = true;
        }
        let mut dfa = Dfa { atoms, accepting, initial: j.initial, delta: vec![usize::MAX; j.states * letters] };
        if dfa.atoms.len() > MAX_ATOMS {
            return Err(Error::TooManyAtoms { got: dfa.atoms.len(), max: MAX_ATOMS });
        }
        for t in &j.transitions {
            if t.from >= j.states {
                return Err(Error::InvalidAutomaton(format!("transition source {} out of range", t.from)));
            }
            let l = dfa.letter(&t.letter)? as usize;
            let slot = &mut dfa.delta[t.from * letters + l];
            if *slot != usize::MAX && *slot != t.to {
                return Err(Error::InvalidAutomaton(format!("nondeterministic transition from {}", t.from)));
            }
            *slot = t.to;
        }
        if dfa.delta.contains(&usize::MAX) {
            return Err(Error::InvalidAutomaton("transition function is not total".into()));
        }
        dfa.validate()?;
        Ok(dfa)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaJson {
    pub atoms: Vec<String>,
    pub states: usize,
    pub initial: usize,
    pub accepting: Vec<usize>,
    pub transitions: Vec<DfaTransitionJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaTransitionJson {
    pub from: usize,
    pub letter: Vec<String>,
    pub to: usize,
}

type Obligations = BTreeSet<Formula>;

/// One way of discharging a set of obligations in the current step: literals
/// the letter must satisfy plus the obligations left for the next step.
struct Cover {
    pos: Letter,
    neg: Letter,
    next: Obligations,
}

fn expand(todo: &mut Vec<Formula>, pos: Letter, neg: Letter, next: &mut Obligations, index: &HashMap<&str, usize>, out: &mut Vec<Cover>) {
    let Some(f) = todo.pop() else {
        out.push(Cover { pos, neg, next: next.clone() });
        return;
    };
    match f {
        Formula::True => expand(todo, pos, neg, next, index, out),
        Formula::False => {}
        Formula::Atom(ref a) => {
            let bit = 1 << index[a.as_str()];
            if neg & bit == 0 {
                expand(todo, pos | bit, neg, next, index, out);
            }
        }
        Formula::Not(ref a) => {
            let bit = 1 << index[a.as_str()];
            if pos & bit == 0 {
                expand(todo, pos, neg | bit, next, index, out);
            }
        }
        Formula::And(l, r) => {
            todo.push(*r);
            todo.push(*l);
            expand(todo, pos, neg, next, index, out);
        }
        Formula::Or(l, r) => {
            let mut alt_todo = todo.clone();
            let mut alt_next = next.clone();
            todo.push(*l);
            expand(todo, pos, neg, next, index, out);
            alt_todo.push(*r);
            expand(&mut alt_todo, pos, neg, &mut alt_next, index, out);
        }
        Formula::Next(p) => {
            let inserted = *p != Formula::True && next.insert((*p).clone());
            expand(todo, pos, neg, next, index, out);
            if inserted {
                next.remove(&p);
            }
        }
        Formula::Until(ref l, ref r) => {
            let mut alt_todo = todo.clone();
            let mut alt_next = next.clone();
            todo.push((**r).clone());
            expand(todo, pos, neg, next, index, out);
            alt_todo.push(Formula::Next(Box::new(f.clone())));
            alt_todo.push((**l).clone());
            expand(&mut alt_todo, pos, neg, &mut alt_next, index, out);
        }
        Formula::Eventually(ref p) => {
            let mut alt_todo = todo.clone();
            let mut alt_next = next.clone();
            todo.push((**p).clone());
            expand(todo, pos, neg, next, index, out);
            alt_todo.push(Formula::Next(Box::new(f.clone())));
            expand(&mut alt_todo, pos, neg, &mut alt_next, index, out);
        }
    }
}

/// Compiles `f` into the minimal good-prefix DFA over the alphabet `2^atoms`.
///
/// `atoms` must include every atom of `f`; duplicates are ignored and the
/// alphabet is stored sorted.
pub fn compile<S: AsRef<str>>(f: &Formula, atoms: &[S]) -> Result<Dfa> {
    let alphabet: Vec<String> = atoms.iter().map(|a| a.as_ref().to_string()).collect::<BTreeSet<_>>().into_iter().collect();
    if alphabet.len() > MAX_ATOMS {
        return Err(Error::TooManyAtoms { got: alphabet.len(), max: MAX_ATOMS });
    }
    for a in f.atoms() {
        if alphabet.binary_search(&a).is_err() {
            return Err(Error::AtomNotDeclared(a));
        }
    }
    let index: HashMap<&str, usize> = alphabet.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let letters = 1usize << alphabet.len();

    // Tableau NFA over obligation sets; the empty set is the accepting sink.
    let mut nfa_ids: HashMap<Obligations, usize> = HashMap::new();
    let mut nfa_states: Vec<Obligations> = Vec::new();
    let mut nfa_delta: Vec<Vec<BTreeSet<usize>>> = Vec::new();
    let start: Obligations = if *f == Formula::True { BTreeSet::new() } else { BTreeSet::from([f.clone()]) };
    nfa_ids.insert(start.clone(), 0);
    nfa_states.push(start);
    let mut i = 0;
    while i < nfa_states.len() {
        let mut covers = Vec::new();
        let mut todo: Vec<Formula> = nfa_states[i].iter().rev().cloned().collect();
        expand(&mut todo, 0, 0, &mut BTreeSet::new(), &index, &mut covers);
        let mut row = vec![BTreeSet::new(); letters];
        for c in covers {
            let next_len = nfa_states.len();
            let id = *nfa_ids.entry(c.next.clone()).or_insert(next_len);
            if id == next_len {
                nfa_states.push(c.next);
            }
            for (l, succ) in row.iter_mut().enumerate() {
                let l = l as Letter;
                if l & c.pos == c.pos && l & c.neg == 0 {
                    succ.insert(id);
                }
            }
        }
        nfa_delta.push(row);
        i += 1;
    }
    let nfa_accept = nfa_ids.get(&BTreeSet::new()).copied();

    // Subset construction.
    let mut macro_ids: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    let mut macros: Vec<BTreeSet<usize>> = vec![BTreeSet::from([0])];
    macro_ids.insert(macros[0].clone(), 0);
    let mut delta: Vec<usize> = Vec::new();
    let mut m = 0;
    while m < macros.len() {
        for l in 0..letters {
            let succ: BTreeSet<usize> = macros[m].iter().flat_map(|&s| nfa_delta[s][l].iter().copied()).collect();
            let next_len = macros.len();
            let id = *macro_ids.entry(succ.clone()).or_insert(next_len);
            if id == next_len {
                macros.push(succ);
            }
            delta.push(id);
        }
        m += 1;
    }
    let n = macros.len();
    let reached_sink: Vec<bool> = macros.iter().map(|s| nfa_accept.is_some_and(|a| s.contains(&a))).collect();

    // A macro state is a good-prefix state iff every continuation eventually
    // reaches the sink. Compute the complement: states that can avoid the
    // sink forever (greatest fixpoint).
    let mut avoid: Vec<bool> = reached_sink.iter().map(|&r| !r).collect();
    loop {
        let mut changed = false;
        for q in 0..n {
            if avoid[q] && !(0..letters).any(|l| avoid[delta[q * letters + l]]) {
                avoid[q] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let good: Vec<bool> = avoid.iter().map(|&a| !a).collect();

    Ok(minimize(alphabet, &good, 0, &delta))
}

/// Hopcroft partition refinement followed by breadth-first renumbering from
/// the initial state (letters in ascending order), which makes state ids
/// canonical.
fn minimize(atoms: Vec<String>, accepting: &[bool], initial: usize, delta: &[usize]) -> Dfa {
    let n = accepting.len();
    let letters = 1usize << atoms.len();

    let mut inverse: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; letters];
    for q in 0..n {
        for (l, inv) in inverse.iter_mut().enumerate() {
            inv[delta[q * letters + l]].push(q);
        }
    }

    let mut block_of = vec![0usize; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let acc: Vec<usize> = (0..n).filter(|&q| accepting[q]).collect();
    let rej: Vec<usize> = (0..n).filter(|&q| !accepting[q]).collect();
    for b in [acc, rej] {
        if !b.is_empty() {
            for &q in &b {
                block_of[q] = blocks.len();
            }
            blocks.push(b);
        }
    }
    let mut in_work = vec![false; blocks.len()];
    let mut work: Vec<usize> = Vec::new();
    if blocks.len() == 2 {
        let smaller = if blocks[0].len() <= blocks[1].len() { 0 } else { 1 };
        work.push(smaller);
        in_work[smaller] = true;
    }
    while let Some(a) = work.pop() {
        in_work[a] = false;
        let splitter = blocks[a].clone();
        for inv in &inverse {
            let mut pre = vec![false; n];
            for &s in &splitter {
                for &p in &inv[s] {
                    pre[p] = true;
                }
            }
            let touched: BTreeSet<usize> = (0..n).filter(|&p| pre[p]).map(|p| block_of[p]).collect();
            for y in touched {
                let (inside, outside): (Vec<usize>, Vec<usize>) = blocks[y].iter().partition(|&&p| pre[p]);
                if outside.is_empty() {
                    continue;
                }
                let new_id = blocks.len();
                for &p in &outside {
                    block_of[p] = new_id;
                }
                let inside_len = inside.len();
                let outside_len = outside.len();
                blocks[y] = inside;
                blocks.push(outside);
                in_work.push(false);
                if in_work[y] {
                    work.push(new_id);
                    in_work[new_id] = true;
                } else {
                    let pick = if inside_len <= outside_len { y } else { new_id };
                    work.push(pick);
                    in_work[pick] = true;
                }
            }
        }
    }

    let mut order: Vec<usize> = Vec::new();
    let mut renum: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([block_of[initial]]);
    renum.insert(block_of[initial], 0);
    while let Some(b) = queue.pop_front() {
        order.push(b);
        let rep = blocks[b][0];
        for l in 0..letters {
            let t = block_of[delta[rep * letters + l]];
            if !renum.contains_key(&t) {
                renum.insert(t, renum.len());
                queue.push_back(t);
            }
        }
    }
    let mut out_delta = Vec::with_capacity(order.len() * letters);
    let mut out_acc = Vec::with_capacity(order.len());
    for &b in &order {
        let rep = blocks[b][0];
        out_acc.push(accepting[rep]);
        for l in 0..letters {
            out_delta.push(renum[&block_of[delta[rep * letters + l]]]);
        }
    }
    Dfa { atoms, accepting: out_acc, initial: 0, delta: out_delta }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(atoms: &[&str]) -> BTreeSet<String> {
        atoms.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse("a | b & c U d U e").unwrap();
        let expected = Formula::Or(
            Box::new(Formula::atom("a")),
            Box::new(Formula::And(
                Box::new(Formula::atom("b")),
                Box::new(Formula::Until(
                    Box::new(Formula::atom("c")),
                    Box::new(Formula::Until(Box::new(Formula::atom("d")), Box::new(Formula::atom("e")))),
                )),
            )),
        );
        assert_eq!(f, expected);
        assert_eq!(parse("!a U F b").unwrap().to_string(), "(!a U F b)");
        assert_eq!(parse("XF a").unwrap(), parse("X F a").unwrap());
    }

    #[test]
    fn rejects_non_cosafe_and_garbage() {
        assert!(matches!(parse("G a"), Err(Error::NotCoSafe(_))));
        assert!(matches!(parse("F G a"), Err(Error::NotCoSafe(_))));
        assert!(matches!(parse("[] a"), Err(Error::NotCoSafe(_))));
        assert!(matches!(parse("!(a & b)"), Err(Error::NotCoSafe(_))));
        assert!(matches!(parse("!F a"), Err(Error::NotCoSafe(_))));
        assert!(matches!(parse("a &"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(a"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("a b"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("Foo"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("a -> b"), Err(Error::Syntax { .. })));
        assert_eq!(parse("!(a)").unwrap(), Formula::Not("a".into()));
    }

    #[test]
    fn progression_examples() {
        let until = parse("a U b").unwrap();
        assert_eq!(progress(&until, &set(&["a"])), until);
        assert_eq!(progress(&until, &set(&[])), Formula::False);
        assert_eq!(progress(&until, &set(&["b"])), Formula::True);
        let ev = parse("F b").unwrap();
        assert_eq!(progress(&ev, &set(&["b"])), Formula::True);
        assert_eq!(progress(&ev, &set(&["a"])), ev);
    }

    #[test]
    fn state_counts() {
        let t = compile(&parse("true").unwrap(), &["a"]).unwrap();
        assert_eq!(t.num_states(), 1);
        assert!(t.is_accepting(0));
        let ev = compile(&parse("F target").unwrap(), &["target"]).unwrap();
        assert_eq!(ev.num_states(), 2);
        let until = compile(&parse("a U b").unwrap(), &["a", "b"]).unwrap();
        assert_eq!(until.num_states(), 3);
        // A tautology accepts the empty prefix even though no disjunct is
        // discharged syntactically.
        let taut = compile(&parse("X a | X !a").unwrap(), &["a"]).unwrap();
        assert_eq!(taut.num_states(), 1);
        assert!(taut.accepts(&[]));
        let later = compile(&parse("a & (X b | X !b)").unwrap(), &["a", "b"]).unwrap();
        assert_eq!(later.num_states(), 3);
        assert!(later.accepts(&[0b01]));
        assert!(!later.accepts(&[0b10]));
    }

    #[test]
    fn undeclared_and_too_many_atoms() {
        assert!(matches!(compile(&parse("F z").unwrap(), &["a"]), Err(Error::AtomNotDeclared(_))));
        let many: Vec<String> = (0..9).map(|i| format!("p{i}")).collect();
        assert!(matches!(compile(&Formula::True, &many), Err(Error::TooManyAtoms { .. })));
    }

    #[test]
    fn json_round_trip() {
        let dfa = compile(&parse("(!fire U ext) & F fire").unwrap(), &["ext", "fire"]).unwrap();
        let j = serde_json::to_string(&dfa.to_json()).unwrap();
        let back = Dfa::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, dfa);
        let mut broken = dfa.to_json();
        broken.transitions.pop();
        assert!(matches!(Dfa::from_json(&broken), Err(Error::InvalidAutomaton(_))));
    }
}
