//! Transition-based nondeterministic Büchi automata.
//!
//! States are dense indices `0..num_states`. A letter is a bitmask over the
//! atomic propositions: bit `i` gives the truth value of `ap_list[i]`, and the
//! alphabet is the full set of `2^|ap_list|` valuations. Acceptance is
//! transition-based: a run is accepting iff it takes infinitely many
//! accepting transitions.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::{Error, Result};

/// A letter: bitmask over the atomic propositions (bit `i` = `ap_list[i]`).
pub type Letter = u32;

/// Dense state index.
pub type StateId = usize;

/// Maximum number of atomic propositions (alphabet `2^20` at most).
pub const MAX_APS: usize = 20;

/// How many lasso words a bounded language comparison may enumerate.
pub const MAX_LASSO_WORDS: u64 = 10_000_000;

/// One transition `src --letter--> dst`, possibly accepting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    /// Source state.
    pub src: StateId,
    /// Letter read.
    pub letter: Letter,
    /// Destination state.
    pub dst: StateId,
    /// Whether this transition is in the accepting set.
    pub accepting: bool,
}

/// An ultimately periodic word `prefix · period^ω` with non-empty period.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoWord {
    /// Finite prefix (may be empty).
    pub prefix: Vec<Letter>,
    /// Non-empty period, repeated forever.
    pub period: Vec<Letter>,
}

impl LassoWord {
    /// Builds a lasso word; the period must be non-empty.
    pub fn new(prefix: Vec<Letter>, period: Vec<Letter>) -> Self {
        assert!(!period.is_empty(), "lasso period must be non-empty");
        LassoWord { prefix, period }
    }
}

impl fmt::Display for LassoWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let render = |w: &[Letter]| {
            w.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "[{}]([{}])^w", render(&self.prefix), render(&self.period))
    }
}

/// A transition-based nondeterministic Büchi automaton.
///
/// Transitions are stored sorted by `(src, letter, dst)` with no duplicate
/// triples; the constructor rejects a triple that occurs both accepting and
/// non-accepting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    ap_list: Vec<String>,
    num_states: usize,
    initial: BTreeSet<StateId>,
    transitions: Vec<Transition>,
    /// Start of each state's transition block in `transitions` (length `num_states + 1`).
    row_offsets: Vec<usize>,
    state_names: Vec<Option<String>>,
}

impl BuchiAutomaton {
    /// Builds an automaton, validating indices, letters, and duplicate
    /// transitions. Identical duplicate triples are collapsed; a triple that
    /// appears both accepting and non-accepting is an error.
    pub fn new(
        ap_list: Vec<String>,
        num_states: usize,
        initial: BTreeSet<StateId>,
        mut transitions: Vec<Transition>,
        state_names: Vec<Option<String>>,
    ) -> Result<Self> {
        if ap_list.len() > MAX_APS {
            return Err(Error::TooManyAps(ap_list.len()));
        }
        let mut seen = std::collections::HashSet::new();
        for ap in &ap_list {
            if !seen.insert(ap.as_str()) {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate atomic proposition {ap:?}"
                )));
            }
        }
        if num_states == 0 {
            return Err(Error::InvalidAutomaton("automaton has no states".into()));
        }
        if initial.is_empty() {
            return Err(Error::InvalidAutomaton("no initial state".into()));
        }
        if let Some(&q) = initial.iter().find(|&&q| q >= num_states) {
            return Err(Error::InvalidAutomaton(format!(
                "initial state {q} out of range (have {num_states} states)"
            )));
        }
        let num_letters = 1u32 << ap_list.len();
        for t in &transitions {
            if t.src >= num_states || t.dst >= num_states {
                return Err(Error::InvalidAutomaton(format!(
                    "transition {} -> {} out of range (have {num_states} states)",
                    t.src, t.dst
                )));
            }
            if t.letter >= num_letters {
                return Err(Error::InvalidAutomaton(format!(
                    "letter {:#b} out of range for {} atomic propositions",
                    t.letter,
                    ap_list.len()
                )));
            }
        }
        if state_names.len() != num_states && !state_names.is_empty() {
            return Err(Error::InvalidAutomaton(format!(
                "got {} state names for {} states",
                state_names.len(),
                num_states
            )));
        }
        transitions.sort_unstable();
        // After sorting, a conflicting pair is adjacent: same triple, the
        // non-accepting copy first (`false < true`).
        let mut deduped: Vec<Transition> = Vec::with_capacity(transitions.len());
        for t in transitions {
            if let Some(last) = deduped.last() {
                if (last.src, last.letter, last.dst) == (t.src, t.letter, t.dst) {
                    if last.accepting != t.accepting {
                        return Err(Error::ConflictingTransition {
                            src: t.src,
                            letter: t.letter,
                            dst: t.dst,
                        });
                    }
                    continue;
                }
            }
            deduped.push(t);
        }
        let mut row_offsets = vec![0usize; num_states + 1];
        for t in &deduped {
            row_offsets[t.src + 1] += 1;
        }
        for i in 0..num_states {
            row_offsets[i + 1] += row_offsets[i];
        }
        let state_names = if state_names.is_empty() {
            vec![None; num_states]
        } else {
            state_names
        };
        Ok(BuchiAutomaton {
            ap_list,
            num_states,
            initial,
            transitions: deduped,
            row_offsets,
            state_names,
        })
    }

    /// Atomic propositions, in bit order.
    pub fn ap_list(&self) -> &[String] {
        &self.ap_list
    }

    /// Number of states.
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Number of letters in the alphabet (`2^|ap_list|`).
    pub fn num_letters(&self) -> u32 {
        1u32 << self.ap_list.len()
    }

    /// The set of initial states.
    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    /// All transitions, sorted by `(src, letter, dst)`.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transitions leaving `src`.
    pub fn transitions_from(&self, src: StateId) -> &[Transition] {
        &self.transitions[self.row_offsets[src]..self.row_offsets[src + 1]]
    }

    /// Indices into [`Self::transitions`] of the transitions leaving `src`.
    pub fn transition_range(&self, src: StateId) -> std::ops::Range<usize> {
        self.row_offsets[src]..self.row_offsets[src + 1]
    }

    /// Transitions leaving `src` on `letter`.
    pub fn transitions_on(&self, src: StateId, letter: Letter) -> &[Transition] {
        let row = self.transitions_from(src);
        let lo = row.partition_point(|t| t.letter < letter);
        let hi = row.partition_point(|t| t.letter <= letter);
        &row[lo..hi]
    }

    /// True iff `(src, letter, dst)` is a transition; `Some(accepting)` if so.
    pub fn lookup(&self, src: StateId, letter: Letter, dst: StateId) -> Option<bool> {
        self.transitions_on(src, letter)
            .iter()
            .find(|t| t.dst == dst)
            .map(|t| t.accepting)
    }

    /// Number of accepting transitions.
    pub fn num_accepting(&self) -> usize {
        self.transitions.iter().filter(|t| t.accepting).count()
    }

    /// Optional display name of a state.
    pub fn state_name(&self, q: StateId) -> Option<&str> {
        self.state_names[q].as_deref()
    }

    /// All state names (indexed by state).
    pub fn state_names(&self) -> &[Option<String>] {
        &self.state_names
    }

    /// True iff both automata list exactly the same APs in the same order.
    pub fn same_alphabet(&self, other: &BuchiAutomaton) -> bool {
        self.ap_list == other.ap_list
    }

    /// Checks alphabet equality, returning an error naming both AP lists.
    pub fn require_same_alphabet(&self, other: &BuchiAutomaton) -> Result<()> {
        if self.same_alphabet(other) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                left: self.ap_list.clone(),
                right: other.ap_list.clone(),
            })
        }
    }

    /// An automaton is deterministic when it has one initial state and at most
    /// one transition per state and letter.
    pub fn is_deterministic(&self) -> bool {
        if self.initial.len() != 1 {
            return false;
        }
        self.transitions
            .windows(2)
            .all(|w| (w[0].src, w[0].letter) != (w[1].src, w[1].letter))
    }

    /// An automaton is complete when every state has at least one transition
    /// on every letter.
    pub fn is_complete(&self) -> bool {
        let num_letters = self.num_letters();
        (0..self.num_states).all(|q| {
            let row = self.transitions_from(q);
            if (row.len() as u64) < num_letters as u64 {
                return false;
            }
            let mut expected = 0u32;
            for t in row {
                if t.letter != expected {
                    if t.letter > expected {
                        return false;
                    }
                    continue; // another dst on the same letter
                }
                expected += 1;
            }
            expected == num_letters
        })
    }

    /// States forward-reachable (inclusive) from `seeds` along all transitions.
    fn forward_closure(&self, seeds: impl IntoIterator<Item = StateId>) -> Vec<bool> {
        let mut on = vec![false; self.num_states];
        let mut queue: VecDeque<StateId> = VecDeque::new();
        for q in seeds {
            if !on[q] {
                on[q] = true;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for t in self.transitions_from(q) {
                if !on[t.dst] {
                    on[t.dst] = true;
                    queue.push_back(t.dst);
                }
            }
        }
        on
    }

    /// An automaton is limit deterministic when its states split into an
    /// initial part and a final part such that all accepting transitions stay
    /// in the final part, the final part is deterministic and closed under
    /// transitions, and every initial state lies in the initial part.
    ///
    /// The final part is taken as the forward closure of the endpoints of the
    /// accepting transitions — the smallest closed candidate — so the check is
    /// exact: if that split fails, no split works. When an initial state is
    /// already inside the candidate final part the split degenerates and the
    /// automaton qualifies only if it is deterministic outright.
    pub fn is_limit_deterministic(&self) -> bool {
        let seeds: Vec<StateId> = self
            .transitions
            .iter()
            .filter(|t| t.accepting)
            .flat_map(|t| [t.src, t.dst])
            .collect();
        if seeds.is_empty() {
            // No accepting transitions: the empty final part works.
            return true;
        }
        let final_part = self.forward_closure(seeds);
        if self.initial.iter().any(|&q| final_part[q]) {
            return self.is_deterministic();
        }
        self.transitions.windows(2).all(|w| {
            (w[0].src, w[0].letter) != (w[1].src, w[1].letter) || !final_part[w[0].src]
        })
    }

    /// Image of a state set under one letter.
    pub fn letter_image(&self, set: &BTreeSet<StateId>, letter: Letter) -> BTreeSet<StateId> {
        let mut out = BTreeSet::new();
        for &q in set {
            for t in self.transitions_on(q, letter) {
                out.insert(t.dst);
            }
        }
        out
    }

    /// Image of a state set under a finite word.
    pub fn word_image(&self, set: &BTreeSet<StateId>, word: &[Letter]) -> BTreeSet<StateId> {
        let mut cur = set.clone();
        for &l in word {
            cur = self.letter_image(&cur, l);
            if cur.is_empty() {
                break;
            }
        }
        cur
    }

    /// Whether the automaton accepts the ultimately periodic word `w`.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let mut engine = LassoAcceptance::new(self);
        engine.accepts(&w.prefix, &w.period)
    }

    /// Renders a letter as a conjunction of literals over this AP list,
    /// e.g. `a&!b`. With no APs the letter renders as `t`.
    pub fn letter_to_string(&self, letter: Letter) -> String {
        if self.ap_list.is_empty() {
            return "t".to_string();
        }
        let mut parts = Vec::with_capacity(self.ap_list.len());
        for (i, ap) in self.ap_list.iter().enumerate() {
            if letter & (1 << i) != 0 {
                parts.push(ap.clone());
            } else {
                parts.push(format!("!{ap}"));
            }
        }
        parts.join("&")
    }
}

/// Lasso-word membership with memoization of the per-period winning sets.
///
/// For a fixed period `v`, the set `W(v)` contains exactly the states `p`
/// such that the run DAG of `v^ω` started in `p` reaches an accepting cycle;
/// the automaton accepts `u · v^ω` iff the subset image of the initial set
/// under `u` intersects `W(v)`.
pub struct LassoAcceptance<'a> {
    aut: &'a BuchiAutomaton,
    winning: HashMap<Vec<Letter>, Vec<bool>>,
}

impl<'a> LassoAcceptance<'a> {
    /// Creates an engine for one automaton.
    pub fn new(aut: &'a BuchiAutomaton) -> Self {
        LassoAcceptance {
            aut,
            winning: HashMap::new(),
        }
    }

    /// Whether the automaton accepts `prefix · period^ω`.
    pub fn accepts(&mut self, prefix: &[Letter], period: &[Letter]) -> bool {
        assert!(!period.is_empty(), "lasso period must be non-empty");
        let reached = self.aut.word_image(self.aut.initial(), prefix);
        if reached.is_empty() {
            return false;
        }
        if !self.winning.contains_key(period) {
            let w = self.compute_winning(period);
            self.winning.insert(period.to_vec(), w);
        }
        let w = &self.winning[period];
        reached.iter().any(|&q| w[q])
    }

    /// Computes `W(period)` over the product graph of automaton states with
    /// positions in the period: nodes `(q, i)`, edges on `period[i]`. A state
    /// wins iff `(q, 0)` reaches an accepting transition whose endpoints lie
    /// in one strongly connected component (i.e. an accepting cycle).
    fn compute_winning(&self, period: &[Letter]) -> Vec<bool> {
        let n = self.aut.num_states();
        let m = period.len();
        let node = |q: usize, i: usize| q * m + i;
        let total = n * m;

        let mut adj: Vec<Vec<(u32, bool)>> = vec![Vec::new(); total];
        for q in 0..n {
            for (i, &l) in period.iter().enumerate() {
                let j = (i + 1) % m;
                for t in self.aut.transitions_on(q, l) {
                    adj[node(q, i)].push((node(t.dst, j) as u32, t.accepting));
                }
            }
        }

        let scc = tarjan_scc(total, |v, out| {
            out.extend(adj[v].iter().map(|&(d, _)| d as usize))
        });

        // Nodes that sit on an accepting cycle: source of an accepting edge
        // closing inside one SCC.
        let mut good = vec![false; total];
        for v in 0..total {
            for &(d, acc) in &adj[v] {
                if acc && scc[v] == scc[d as usize] {
                    good[v] = true;
                }
            }
        }
        // Backward closure: nodes that can reach a good node.
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); total];
        for v in 0..total {
            for &(d, _) in &adj[v] {
                rev[d as usize].push(v as u32);
            }
        }
        let mut can = good.clone();
        let mut queue: VecDeque<usize> = (0..total).filter(|&v| can[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &p in &rev[v] {
                if !can[p as usize] {
                    can[p as usize] = true;
                    queue.push_back(p as usize);
                }
            }
        }
        (0..n).map(|q| can[node(q, 0)]).collect()
    }
}

/// Iterative Tarjan SCC; returns the component index of each node, numbered
/// in reverse topological order of discovery (indices are only used for
/// same-component tests here).
pub(crate) fn tarjan_scc(n: usize, mut neighbors: impl FnMut(usize, &mut Vec<usize>)) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSET; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut next_comp = 0usize;
    let mut scratch: Vec<usize> = Vec::new();

    // Explicit DFS stack: (node, neighbor list, position in it).
    let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        scratch.clear();
        neighbors(root, &mut scratch);
        call.push((root, std::mem::take(&mut scratch), 0));

        while let Some(&mut (v, ref succs, ref mut pos)) = call.last_mut() {
            if *pos < succs.len() {
                let w = succs[*pos];
                *pos += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    scratch.clear();
                    neighbors(w, &mut scratch);
                    call.push((w, std::mem::take(&mut scratch), 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&mut (p, _, _)) = call.last_mut() {
                    lowlink[p] = lowlink[p].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Outcome of a bounded language comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LanguageComparison {
    /// No distinguishing lasso word exists within the bound.
    EqualUpToBound {
        /// The effective bound on prefix and period length.
        bound: usize,
        /// How many lasso words were checked.
        words_checked: u64,
    },
    /// A lasso word accepted by exactly one automaton.
    Counterexample {
        /// The distinguishing word.
        word: LassoWord,
        /// Whether the *left* automaton accepts it.
        accepted_by_left: bool,
    },
}

/// Compares two automata on all lasso words `u · v^ω` with `|u| ≤ B`,
/// `1 ≤ |v| ≤ B`, where `B = min(|Q_a| · |Q_b|, cap)`.
///
/// Words are enumerated by ascending total length `|u| + |v|`, then ascending
/// `|u|`, then lexicographically (letters ascending), and the first
/// distinguishing word is returned. Languages of Büchi automata are equal iff
/// they agree on all lasso words with prefix and period bounded by the product
/// of the state counts, so with a cap of at least `|Q_a| · |Q_b|` the result
/// is definitive; smaller caps give a sound but bounded check. Refuses to
/// enumerate more than [`MAX_LASSO_WORDS`] words.
pub fn bounded_language_equal(
    a: &BuchiAutomaton,
    b: &BuchiAutomaton,
    cap: usize,
) -> Result<LanguageComparison> {
    a.require_same_alphabet(b)?;
    let bound = (a.num_states() * b.num_states()).min(cap);
    let k = a.num_letters() as u128;

    let mut count: u128 = 0;
    for lu in 0..=bound {
        for lv in 1..=bound {
            count = count.saturating_add(k.saturating_pow((lu + lv) as u32));
        }
    }
    if count > MAX_LASSO_WORDS as u128 {
        return Err(Error::LassoBoundExceeded {
            count,
            limit: MAX_LASSO_WORDS,
        });
    }

    let mut eng_a = LassoAcceptance::new(a);
    let mut eng_b = LassoAcceptance::new(b);
    let mut checked = 0u64;
    let num_letters = a.num_letters();

    for total in 1..=2 * bound {
        for lu in 0..=bound.min(total.saturating_sub(1)) {
            let lv = total - lu;
            if lv < 1 || lv > bound {
                continue;
            }
            let mut u = vec![0 as Letter; lu];
            loop {
                let mut v = vec![0 as Letter; lv];
                loop {
                    checked += 1;
                    let in_a = eng_a.accepts(&u, &v);
                    let in_b = eng_b.accepts(&u, &v);
                    if in_a != in_b {
                        return Ok(LanguageComparison::Counterexample {
                            word: LassoWord::new(u, v),
                            accepted_by_left: in_a,
                        });
                    }
                    if !next_word(&mut v, num_letters) {
                        break;
                    }
                }
                if !next_word(&mut u, num_letters) {
                    break;
                }
            }
        }
    }
    Ok(LanguageComparison::EqualUpToBound {
        bound,
        words_checked: checked,
    })
}

/// Advances a fixed-length word to its lexicographic successor; false on wrap.
fn next_word(w: &mut [Letter], num_letters: u32) -> bool {
    for slot in w.iter_mut().rev() {
        if *slot + 1 < num_letters {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}
