//! Alternating Turing machines with linearly bounded space, their direct
//! simulation, and their encoding as an implication instance.
//!
//! Tape cells are `0..=n+1`; cells `0` and `n+1` hold the end markers, which
//! are the first and last alphabet symbols. Transitions reading a marker
//! must write it back and move away from the tape end.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::model::{Atom, Constraint, ConstraintSet, Dtgd, RelAtom, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AtmError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid machine: {0}")]
    Invalid(String),
    #[error("word symbol `{0}` is not an inner alphabet symbol")]
    WordAlphabetMismatch(String),
    #[error("configuration space of {0} exceeds the simulation cap")]
    StateSpaceCap(u128),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Move {
    Left,
    Right,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Transition {
    pub next: usize,
    pub write: usize,
    pub dir: Move,
}

/// `delta[j][q][a]` is the `(j+1)`-th transition of state `q` on symbol `a`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Atm {
    pub states: Vec<String>,
    pub universal: Vec<bool>,
    pub alphabet: Vec<String>,
    pub delta: [Vec<Vec<Transition>>; 2],
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Atm {
    pub fn new(
        states: Vec<String>,
        universal: Vec<bool>,
        alphabet: Vec<String>,
        delta: [Vec<Vec<Transition>>; 2],
        initial: usize,
        accepting: BTreeSet<usize>,
    ) -> Result<Self, AtmError> {
        let m = Atm { states, universal, alphabet, delta, initial, accepting };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), AtmError> {
        let bad = |msg: String| Err(AtmError::Invalid(msg));
        let (nq, t) = (self.states.len(), self.alphabet.len());
        if nq == 0 || t < 2 {
            return bad("need at least one state and both end markers".into());
        }
        if self.universal.len() != nq {
            return bad("universal flags do not match the states".into());
        }
        if let Some(s) = self.states.iter().find(|s| !is_name(s)) {
            return bad(format!("`{s}` is not a valid state name"));
        }
        if let Some(s) =
            self.alphabet.iter().find(|s| s.is_empty() || s.contains(|c: char| c.is_whitespace() || c == '#'))
        {
            return bad(format!("`{s}` is not a valid symbol"));
        }
        if BTreeSet::from_iter(&self.states).len() != nq || BTreeSet::from_iter(&self.alphabet).len() != t {
            return bad("duplicate state or symbol".into());
        }
        if self.initial >= nq || self.accepting.iter().any(|&q| q >= nq) {
            return bad("state index out of range".into());
        }
        if self.accepting.contains(&self.initial) {
            return bad("the initial state must not be accepting".into());
        }
        for table in &self.delta {
            if table.len() != nq || table.iter().any(|row| row.len() != t) {
                return bad("transition table is not total".into());
            }
            for (q, row) in table.iter().enumerate() {
                for (a, tr) in row.iter().enumerate() {
                    if tr.next >= nq || tr.write >= t {
                        return bad(format!(
                            "transition of ({}, {}) is out of range",
                            self.states[q], self.alphabet[a]
                        ));
                    }
                    let marker = [(0, Move::Right), (t - 1, Move::Left)].into_iter().find(|(m, _)| *m == a);
                    if let Some((m, dir)) = marker {
                        if tr.write != m || tr.dir != dir {
                            return bad(format!("end marker `{}` must be kept and moved away from", self.alphabet[m]));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Symbol indices of a word given as names.
    pub fn word(&self, w: &[&str]) -> Result<Vec<usize>, AtmError> {
        let t = self.alphabet.len();
        w.iter()
            .map(|s| match self.alphabet.iter().position(|a| a == s) {
                Some(i) if i != 0 && i != t - 1 => Ok(i),
                _ => Err(AtmError::WordAlphabetMismatch(s.to_string())),
            })
            .collect()
    }
}

/// Parses the line-based `.atm` format:
///
/// ```text
/// states q0 q1 h          # names; the first is initial unless `initial` says otherwise
/// universal q1            # all other states are existential
/// accept h
/// alphabet < a b >        # first and last symbols are the end markers
/// delta 1 q0 a -> q1 b R  # j state read -> next write L|R
/// ```
pub fn parse_atm(text: &str) -> Result<Atm, AtmError> {
    let mut states: Vec<String> = Vec::new();
    let mut alphabet: Vec<String> = Vec::new();
    let mut universal = BTreeSet::new();
    let mut accepting = BTreeSet::new();
    let mut initial = None;
    let mut rules: Vec<(usize, usize, [String; 5])> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| AtmError::Parse { line, msg };
        let words: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        let Some((&key, rest)) = words.split_first() else { continue };
        let names = || rest.iter().map(|s| s.to_string());
        match key {
            "states" => states.extend(names()),
            "alphabet" => alphabet.extend(names()),
            "universal" => universal.extend(names()),
            "accept" => accepting.extend(names()),
            "initial" => match rest {
                [q] => initial = Some(q.to_string()),
                _ => return Err(err("`initial` takes one state".into())),
            },
            "delta" => match rest {
                [j, q, a, "->", n, w, d] => {
                    let j = match *j {
                        "1" => 0,
                        "2" => 1,
                        _ => return Err(err(format!("transition index `{j}` is not 1 or 2"))),
                    };
                    rules.push((line, j, [q, a, n, w, d].map(|s| s.to_string())));
                }
                _ => return Err(err("expected `delta J STATE SYMBOL -> STATE SYMBOL L|R`".into())),
            },
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    let state_ix: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let sym_ix: HashMap<&str, usize> = alphabet.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let lookup = |ix: &HashMap<&str, usize>, s: &str, line: usize| {
        ix.get(s).copied().ok_or_else(|| AtmError::Parse { line, msg: format!("unknown name `{s}`") })
    };
    let mut table: [BTreeMap<(usize, usize), Transition>; 2] = Default::default();
    for (line, j, [q, a, n, w, d]) in &rules {
        let dir = match d.as_str() {
            "L" => Move::Left,
            "R" => Move::Right,
            _ => return Err(AtmError::Parse { line: *line, msg: format!("direction `{d}` is not L or R") }),
        };
        let key = (lookup(&state_ix, q, *line)?, lookup(&sym_ix, a, *line)?);
        let tr = Transition { next: lookup(&state_ix, n, *line)?, write: lookup(&sym_ix, w, *line)?, dir };
        if table[*j].insert(key, tr).is_some() {
            return Err(AtmError::Parse { line: *line, msg: format!("duplicate transition {} for ({q}, {a})", j + 1) });
        }
    }
    let delta = table.map(|t| {
        (0..states.len())
            .map(|q| (0..alphabet.len()).map(|a| t.get(&(q, a)).copied()).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
    });
    let [Some(d1), Some(d2)] = delta else {
        return Err(AtmError::Invalid("transition table is not total".into()));
    };
    let flag = |set: &BTreeSet<String>| -> Result<BTreeSet<usize>, AtmError> {
        set.iter()
            .map(|s| state_ix.get(s.as_str()).copied().ok_or_else(|| AtmError::Invalid(format!("unknown state `{s}`"))))
            .collect()
    };
    let univ = flag(&universal)?;
    let initial = match initial {
        Some(q) => flag(&[q].into())?.into_iter().next().expect("one state"),
        None => 0,
    };
    Atm::new(
        states.clone(),
        (0..states.len()).map(|q| univ.contains(&q)).collect(),
        alphabet,
        [d1, d2],
        initial,
        flag(&accepting)?,
    )
}

impl fmt::Display for Atm {
    /// Renders the `.atm` format accepted by [`parse_atm`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.states.join(" "))?;
        writeln!(f, "initial {}", self.states[self.initial])?;
        let univ: Vec<&str> =
            (0..self.states.len()).filter(|&q| self.universal[q]).map(|q| self.states[q].as_str()).collect();
        if !univ.is_empty() {
            writeln!(f, "universal {}", univ.join(" "))?;
        }
        let acc: Vec<&str> = self.accepting.iter().map(|&q| self.states[q].as_str()).collect();
        if !acc.is_empty() {
            writeln!(f, "accept {}", acc.join(" "))?;
        }
        writeln!(f, "alphabet {}", self.alphabet.join(" "))?;
        for (j, table) in self.delta.iter().enumerate() {
            for (q, row) in table.iter().enumerate() {
                for (a, tr) in row.iter().enumerate() {
                    let d = if tr.dir == Move::Left { "L" } else { "R" };
                    writeln!(
                        f,
                        "delta {} {} {} -> {} {} {d}",
                        j + 1,
                        self.states[q],
                        self.alphabet[a],
                        self.states[tr.next],
                        self.alphabet[tr.write]
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Upper bound on configurations handled by [`simulate_atm`].
pub const STATE_SPACE_CAP: u128 = 1 << 22;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Config {
    state: usize,
    head: usize,
    tape: Vec<usize>,
}

impl Atm {
    fn read(&self, c: &Config) -> usize {
        match c.head {
            0 => 0,
            p if p == c.tape.len() + 1 => self.alphabet.len() - 1,
            p => c.tape[p - 1],
        }
    }

    fn step(&self, c: &Config, j: usize) -> Config {
        let tr = self.delta[j][c.state][self.read(c)];
        let mut tape = c.tape.clone();
        if (1..=tape.len()).contains(&c.head) {
            tape[c.head - 1] = tr.write;
        }
        let head = match tr.dir {
            Move::Left => c.head - 1,
            Move::Right => c.head + 1,
        };
        Config { state: tr.next, head, tape }
    }
}

/// Whether `m` accepts `w`, by a least fixpoint over all configurations.
pub fn simulate_atm(m: &Atm, w: &[usize]) -> Result<bool, AtmError> {
    let n = w.len();
    let t = m.alphabet.len();
    let size = (m.states.len() as u128) * (n as u128 + 2) * (t as u128).saturating_pow(n as u32);
    if size > STATE_SPACE_CAP {
        return Err(AtmError::StateSpaceCap(size));
    }
    let mut configs = Vec::new();
    for code in 0..t.pow(n as u32) {
        let tape: Vec<usize> = (0..n).map(|i| code / t.pow(i as u32) % t).collect();
        for state in 0..m.states.len() {
            for head in 0..=n + 1 {
                configs.push(Config { state, head, tape: tape.clone() });
            }
        }
    }
    let index: HashMap<&Config, usize> = configs.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let succ: Vec<[usize; 2]> = configs.iter().map(|c| [0, 1].map(|j| index[&m.step(c, j)])).collect();
    let mut acc: Vec<bool> = configs.iter().map(|c| m.accepting.contains(&c.state)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for (i, c) in configs.iter().enumerate() {
            if acc[i] {
                continue;
            }
            let [a, b] = succ[i].map(|s| acc[s]);
            if if m.universal[c.state] { a && b } else { a || b } {
                acc[i] = true;
                changed = true;
            }
        }
    }
    let start = Config { state: m.initial, head: 0, tape: w.to_vec() };
    Ok(acc[index[&start]])
}

fn var(name: String) -> Term {
    Term::Var(crate::model::Var::new(&name))
}

struct Names {
    n: usize,
    t: usize,
}

impl Names {
    fn x(&self, i: usize) -> Term {
        var(format!("x{i}"))
    }

    fn y(&self, r: usize) -> Term {
        var(format!("y{r}"))
    }

    /// Variable for the symbol at cell `i`; the markers use `y1` and `yt`.
    fn z(&self, i: usize) -> Term {
        match i {
            0 => self.y(1),
            i if i == self.n + 1 => self.y(self.t),
            i => var(format!("z{i}")),
        }
    }

    fn succ(&self) -> Vec<Atom> {
        (0..=self.n).map(|i| RelAtom::new("Succ", vec![self.x(i), self.x(i + 1)]).global()).collect()
    }

    /// `A_{q,p}`: state, head position and one symbol per cell, with the
    /// cell symbols taken from `cell`.
    fn config(&self, state: &str, p: usize, cell: &dyn Fn(usize) -> Term) -> Vec<RelAtom> {
        let mut atoms = vec![RelAtom::new(&format!("State_{state}"), vec![]), RelAtom::new("Head", vec![self.x(p)])];
        atoms.extend((0..=self.n + 1).map(|i| RelAtom::new("Sym", vec![self.x(i), cell(i)])));
        atoms
    }
}

fn alph(r: usize, t: Term) -> Atom {
    RelAtom::new(&format!("Alph_{r}"), vec![t]).global()
}

fn placed(atoms: Vec<RelAtom>, k: &str) -> impl Iterator<Item = Atom> + '_ {
    atoms.into_iter().map(move |a| a.at(k))
}

/// The implication instance `(Σ, τ)` with `Σ ⊨ τ` iff `m` accepts `w`.
///
/// Σ holds one node-creating generator per state and head position, one
/// collector per state, symbol, transition index and position, and the
/// acceptance rules. τ places the initial configuration at a node and
/// asks for `Acc()` there.
pub fn gen_atm_instance(m: &Atm, w: &[usize]) -> Result<(ConstraintSet, Constraint), AtmError> {
    let (n, t) = (w.len(), m.alphabet.len());
    if let Some(&a) = w.iter().find(|&&a| a == 0 || a >= t - 1) {
        return Err(AtmError::WordAlphabetMismatch(m.alphabet.get(a).cloned().unwrap_or_else(|| a.to_string())));
    }
    let nm = Names { n, t };
    let mut rules: Vec<Constraint> = Vec::new();
    let acc = || RelAtom::new("Acc", vec![]);
    for (q, name) in m.states.iter().enumerate() {
        for p in 0..=n + 1 {
            let mut body = nm.succ();
            body.push(alph(1, nm.y(1)));
            body.push(alph(t, nm.y(t)));
            body.extend((1..=n).map(|i| RelAtom::new("Alph", vec![nm.z(i)]).global()));
            let mut head: Vec<Atom> = placed(nm.config(name, p, &|i| nm.z(i)), "k").collect();
            if m.accepting.contains(&q) {
                head.push(acc().at("k"));
            }
            rules.push(Dtgd::new(body, vec![], head).into());
        }
    }
    for (q, name) in m.states.iter().enumerate() {
        for r in 0..t {
            for (j, table) in m.delta.iter().enumerate() {
                let tr = table[q][r];
                for p in 0..=n + 1 {
                    // The marker cells only ever hold their marker.
                    let fixed = (p == 0 && r != 0) || (p == n + 1 && r != t - 1);
                    let target = match tr.dir {
                        Move::Left if p > 0 => p - 1,
                        Move::Right if p <= n => p + 1,
                        _ => continue,
                    };
                    if fixed {
                        continue;
                    }
                    let inner = (1..=n).contains(&p);
                    let written = if inner { var(format!("z{p}'")) } else { nm.z(p) };
                    let mut body = nm.succ();
                    body.push(alph(r + 1, nm.z(p)));
                    if inner {
                        body.push(alph(tr.write + 1, written.clone()));
                    }
                    body.extend(placed(nm.config(name, p, &|i| nm.z(i)), "k"));
                    let after = |i: usize| if i == p { written.clone() } else { nm.z(i) };
                    body.extend(placed(nm.config(&m.states[tr.next], target, &after), "m"));
                    body.push(acc().at("m"));
                    let head = vec![RelAtom::new(&format!("Acc{}", j + 1), vec![]).at("k")];
                    rules.push(Dtgd::new(body, vec![], head).into());
                }
            }
        }
    }
    for (q, name) in m.states.iter().enumerate() {
        let state = || RelAtom::new(&format!("State_{name}"), vec![]).at("k");
        let flags = || [1, 2].map(|j| RelAtom::new(&format!("Acc{j}"), vec![]).at("k"));
        let bodies: Vec<Vec<Atom>> = if m.universal[q] {
            vec![std::iter::once(state()).chain(flags()).collect()]
        } else {
            flags().into_iter().map(|f| vec![state(), f]).collect()
        };
        for body in bodies {
            rules.push(Dtgd::new(body, vec![], vec![acc().at("k")]).into());
        }
    }
    let mut body = nm.succ();
    for r in 1..=t {
        body.push(alph(r, nm.y(r)));
        body.push(RelAtom::new("Alph", vec![nm.y(r)]).global());
    }
    body.extend(placed(
        nm.config(&m.states[m.initial], 0, &|i| if (1..=n).contains(&i) { nm.y(w[i - 1] + 1) } else { nm.z(i) }),
        "k",
    ));
    let tau = Dtgd::new(body, vec![], vec![acc().at("k")]).into();
    let sigma = ConstraintSet::new(rules).map_err(|e| AtmError::Invalid(e.to_string()))?;
    Ok((sigma, tau))
}
