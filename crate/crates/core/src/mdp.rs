//! Finite labeled Markov decision processes, the explicit text format, and
//! the MDP × automaton product.
//!
//! Every MDP transition carries the [`Letter`] the automaton reads when the
//! transition is taken. The product synchronizes an MDP with a Büchi
//! automaton by extending each MDP action with a guessed automaton successor;
//! probability mass whose letter the automaton cannot follow to that
//! successor is dropped, so product actions may be substochastic (the missing
//! mass behaves as an immediate loss). A product transition is *marked* when
//! the automaton step it embeds is accepting.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automata::{BuchiAutomaton, Letter, StateId, MAX_APS};
use crate::{Error, Result};

/// Tolerance for distribution sums.
pub const DISTRIBUTION_TOL: f64 = 1e-9;

/// One probabilistic branch of an MDP action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdpTransition {
    /// Probability of this branch, in (0, 1].
    pub prob: f64,
    /// Successor MDP state.
    pub dst: StateId,
    /// Letter the automaton reads when this branch is taken.
    pub letter: Letter,
}

/// A named action: a probability distribution over labeled successors.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpAction {
    /// Display name (PRISM command label or explicit-format action name).
    pub name: String,
    /// Branches; probabilities sum to 1.
    pub transitions: Vec<MdpTransition>,
}

/// A finite MDP whose transitions emit letters over a set of atomic
/// propositions.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMDP {
    ap_list: Vec<String>,
    initial: StateId,
    /// Actions per state; every state has at least one.
    actions: Vec<Vec<MdpAction>>,
    state_names: Vec<Option<String>>,
}

impl LabeledMDP {
    /// Validates and builds an MDP.
    ///
    /// Requirements: at least one state, initial in range, at least one
    /// action per state, probabilities in (0, 1] summing to 1 within
    /// [`DISTRIBUTION_TOL`] per action, successor states in range, letters
    /// within the alphabet, and at most [`MAX_APS`] distinct propositions.
    pub fn new(
        ap_list: Vec<String>,
        initial: StateId,
        actions: Vec<Vec<MdpAction>>,
        state_names: Vec<Option<String>>,
    ) -> Result<Self> {
        if ap_list.len() > MAX_APS {
            return Err(Error::TooManyAps(ap_list.len()));
        }
        for (i, ap) in ap_list.iter().enumerate() {
            if ap_list[..i].contains(ap) {
                return Err(Error::InvalidMdp(format!("duplicate proposition {ap:?}")));
            }
        }
        let n = actions.len();
        if n == 0 {
            return Err(Error::InvalidMdp("no states".into()));
        }
        if initial >= n {
            return Err(Error::InvalidMdp(format!(
                "initial state {initial} out of range (have {n} states)"
            )));
        }
        let num_letters = 1u32 << ap_list.len();
        for (s, acts) in actions.iter().enumerate() {
            if acts.is_empty() {
                return Err(Error::InvalidMdp(format!("state {s} has no actions")));
            }
            for act in acts {
                let mut sum = 0.0f64;
                for t in &act.transitions {
                    if !(t.prob > 0.0 && t.prob <= 1.0) {
                        return Err(Error::InvalidMdp(format!(
                            "state {s} action {:?}: probability {} not in (0,1]",
                            act.name, t.prob
                        )));
                    }
                    if t.dst >= n {
                        return Err(Error::InvalidMdp(format!(
                            "state {s} action {:?}: successor {} out of range",
                            act.name, t.dst
                        )));
                    }
                    if t.letter >= num_letters {
                        return Err(Error::InvalidMdp(format!(
                            "state {s} action {:?}: letter {} outside alphabet",
                            act.name, t.letter
                        )));
                    }
                    sum += t.prob;
                }
                if (sum - 1.0).abs() > DISTRIBUTION_TOL {
                    return Err(Error::DistributionSum {
                        state: s,
                        action: act.name.clone(),
                        sum,
                    });
                }
            }
        }
        let state_names = if state_names.is_empty() {
            vec![None; n]
        } else if state_names.len() == n {
            state_names
        } else {
            return Err(Error::InvalidMdp("state name list length mismatch".into()));
        };
        Ok(LabeledMDP {
            ap_list,
            initial,
            actions,
            state_names,
        })
    }

    /// Atomic propositions, bit `i` of a letter is `ap_list()[i]`.
    pub fn ap_list(&self) -> &[String] {
        &self.ap_list
    }

    /// Number of states.
    pub fn num_states(&self) -> usize {
        self.actions.len()
    }

    /// Size of the alphabet.
    pub fn num_letters(&self) -> u32 {
        1u32 << self.ap_list.len()
    }

    /// The single initial state.
    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// Actions available in `s`.
    pub fn actions(&self, s: StateId) -> &[MdpAction] {
        &self.actions[s]
    }

    /// Optional display name of `s`.
    pub fn state_name(&self, s: StateId) -> Option<&str> {
        self.state_names[s].as_deref()
    }
}

/// Parses the explicit text format:
///
/// ```text
/// mdp-explicit 1
/// ap a b
/// init 0
/// trans 0 flip 0.5 0 10
/// trans 0 flip 0.5 1 10
/// trans 1 flip 0.5 0 01
/// trans 1 flip 0.5 1 01
/// ```
///
/// One record per line: the header, one `ap` line naming the propositions
/// (may name none), one `init` line, then `trans <src> <action> <prob>
/// <dst> <letter-bits>` records, where `letter-bits` assigns a 0/1 value to
/// each proposition in `ap` order (`-` when there are no propositions).
/// Blank lines and lines starting with `#` are ignored. States are numbered
/// densely from 0; the largest index mentioned determines the state count,
/// and every state must end up with at least one action. Actions of a state
/// are kept in order of first mention, branches in file order; a repeated
/// `(src, action, dst)` triple is rejected as a likely mistake.
pub fn parse_explicit(text: &str) -> Result<LabeledMDP> {
    let mut ap_list: Option<Vec<String>> = None;
    let mut initial: Option<StateId> = None;
    let mut seen_header = false;
    // Per state: action order plus name → index lookup.
    let mut actions: Vec<Vec<MdpAction>> = Vec::new();
    let mut max_state = 0usize;
    let err = |line: usize, msg: String| Error::MalformedModel { line, msg };
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = s.split_whitespace().collect();
        if !seen_header {
            if fields == ["mdp-explicit", "1"] {
                seen_header = true;
                continue;
            }
            return Err(err(line, "expected header `mdp-explicit 1`".into()));
        }
        match fields[0] {
            "ap" => {
                if ap_list.is_some() {
                    return Err(err(line, "repeated ap line".into()));
                }
                ap_list = Some(fields[1..].iter().map(|f| f.to_string()).collect());
            }
            "init" => {
                if initial.is_some() {
                    return Err(err(line, "repeated init line".into()));
                }
                if fields.len() != 2 {
                    return Err(err(line, "expected `init <state>`".into()));
                }
                let s0: usize = fields[1]
                    .parse()
                    .map_err(|_| err(line, format!("bad state index {:?}", fields[1])))?;
                max_state = max_state.max(s0);
                initial = Some(s0);
            }
            "trans" => {
                let aps = ap_list
                    .as_ref()
                    .ok_or_else(|| err(line, "trans before ap line".into()))?;
                if fields.len() != 6 {
                    return Err(err(
                        line,
                        "expected `trans <src> <action> <prob> <dst> <letter-bits>`".into(),
                    ));
                }
                let src: usize = fields[1]
                    .parse()
                    .map_err(|_| err(line, format!("bad state index {:?}", fields[1])))?;
                let name = fields[2].to_string();
                let prob: f64 = fields[3]
                    .parse()
                    .map_err(|_| err(line, format!("bad probability {:?}", fields[3])))?;
                let dst: usize = fields[4]
                    .parse()
                    .map_err(|_| err(line, format!("bad state index {:?}", fields[4])))?;
                let bits = fields[5];
                let letter = if aps.is_empty() && bits == "-" {
                    0
                } else if bits.len() == aps.len()
                    && bits.chars().all(|c| c == '0' || c == '1')
                {
                    bits.chars()
                        .enumerate()
                        .fold(0u32, |l, (i, c)| l | (((c == '1') as u32) << i))
                } else {
                    return Err(err(
                        line,
                        format!("letter bits {bits:?} do not match the {} propositions", aps.len()),
                    ));
                };
                max_state = max_state.max(src).max(dst);
                if actions.len() <= src {
                    actions.resize_with(src + 1, Vec::new);
                }
                let acts = &mut actions[src];
                let ai = match acts.iter().position(|a| a.name == name) {
                    Some(i) => i,
                    None => {
                        acts.push(MdpAction {
                            name,
                            transitions: Vec::new(),
                        });
                        acts.len() - 1
                    }
                };
                if acts[ai].transitions.iter().any(|t| t.dst == dst) {
                    return Err(err(
                        line,
                        format!("duplicate branch {} -> {} under action {:?}", src, dst, acts[ai].name),
                    ));
                }
                acts[ai].transitions.push(MdpTransition { prob, dst, letter });
            }
            other => return Err(err(line, format!("unknown record {other:?}"))),
        }
    }
    if !seen_header {
        return Err(err(0, "empty model".into()));
    }
    let ap_list = ap_list.ok_or_else(|| err(0, "missing ap line".into()))?;
    let initial = initial.ok_or_else(|| err(0, "missing init line".into()))?;
    actions.resize_with(max_state + 1, Vec::new);
    for (s, acts) in actions.iter().enumerate() {
        if acts.is_empty() {
            return Err(err(0, format!("state {s} is mentioned but has no actions")));
        }
    }
    LabeledMDP::new(ap_list, initial, actions, vec![])
}

/// Serializes an MDP in the explicit text format understood by
/// [`parse_explicit`].
pub fn write_explicit(m: &LabeledMDP) -> String {
    let mut out = String::from("mdp-explicit 1\n");
    out.push_str("ap");
    for ap in m.ap_list() {
        let _ = write!(out, " {ap}");
    }
    out.push('\n');
    let _ = writeln!(out, "init {}", m.initial());
    for s in 0..m.num_states() {
        for act in m.actions(s) {
            for t in &act.transitions {
                let bits: String = if m.ap_list().is_empty() {
                    "-".into()
                } else {
                    (0..m.ap_list().len())
                        .map(|i| if t.letter >> i & 1 == 1 { '1' } else { '0' })
                        .collect()
                };
                let _ = writeln!(out, "trans {} {} {} {} {}", s, act.name, t.prob, t.dst, bits);
            }
        }
    }
    out
}

/// A product action: an MDP action together with the guessed automaton
/// successor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductAction {
    /// Index into the MDP state's action list.
    pub mdp_action: usize,
    /// Automaton state the guess commits to.
    pub aut_successor: StateId,
}

/// One branch of a product action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductTransition {
    /// Probability inherited from the MDP branch.
    pub prob: f64,
    /// Successor product state index.
    pub dst: usize,
    /// Whether the embedded automaton step is accepting.
    pub accepting: bool,
}

/// The synchronized product of an MDP and a Büchi automaton, restricted to
/// its reachable part.
#[derive(Debug, Clone)]
pub struct ProductMDP {
    states: Vec<(StateId, StateId)>,
    index: HashMap<(StateId, StateId), usize>,
    initial: usize,
    actions: Vec<Vec<(ProductAction, Vec<ProductTransition>)>>,
    action_names: Vec<String>,
}

impl ProductMDP {
    /// Number of reachable product states.
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// The product states, index-aligned.
    pub fn states(&self) -> &[(StateId, StateId)] {
        &self.states
    }

    /// The (MDP state, automaton state) pair behind index `i`.
    pub fn state(&self, i: usize) -> (StateId, StateId) {
        self.states[i]
    }

    /// Index of a pair, if reachable.
    pub fn find(&self, s: StateId, q: StateId) -> Option<usize> {
        self.index.get(&(s, q)).copied()
    }

    /// Index of the initial product state.
    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Available actions of product state `i`; may be empty when the
    /// automaton cannot follow any of the state's outgoing letters.
    pub fn actions(&self, i: usize) -> &[(ProductAction, Vec<ProductTransition>)] {
        &self.actions[i]
    }

    /// Name of the MDP action behind the product action, for reports.
    pub fn action_name(&self, i: usize, a: usize) -> &str {
        &self.action_names[self.name_index(i, a)]
    }

    fn name_index(&self, i: usize, a: usize) -> usize {
        // action_names is indexed in lockstep with the flattened action
        // lists; see `product`.
        let mut idx = 0;
        for j in 0..i {
            idx += self.actions[j].len();
        }
        idx + a
    }

    /// Whether any action of any state carries a mark.
    pub fn has_marks(&self) -> bool {
        self.actions
            .iter()
            .flatten()
            .any(|(_, ts)| ts.iter().any(|t| t.accepting))
    }
}

/// Builds the reachable synchronized product of `m` and `a`.
///
/// The automaton must read the MDP's propositions and have a single initial
/// state. Each product action pairs an MDP action with an automaton
/// successor `q'`; a branch `(prob, s', letter)` survives exactly when the
/// automaton has a transition `(q, letter, q')`, and it is marked when that
/// transition is accepting. Actions whose branches all die are dropped, so
/// some product states may end up action-less (the run is stuck, which
/// model checking treats as rejecting).
pub fn product(m: &LabeledMDP, a: &BuchiAutomaton) -> Result<ProductMDP> {
    if m.ap_list() != a.ap_list() {
        return Err(Error::AlphabetMismatch {
            left: m.ap_list().to_vec(),
            right: a.ap_list().to_vec(),
        });
    }
    if a.initial().len() != 1 {
        return Err(Error::MultipleInitialStates(a.initial().len()));
    }
    let q0 = *a.initial().first().unwrap();
    let mut states: Vec<(StateId, StateId)> = Vec::new();
    let mut index: HashMap<(StateId, StateId), usize> = HashMap::new();
    let intern = |states: &mut Vec<(StateId, StateId)>,
                      index: &mut HashMap<(StateId, StateId), usize>,
                      pair: (StateId, StateId)| {
        *index.entry(pair).or_insert_with(|| {
            states.push(pair);
            states.len() - 1
        })
    };
    let initial = intern(&mut states, &mut index, (m.initial(), q0));
    let mut actions: Vec<Vec<(ProductAction, Vec<ProductTransition>)>> = Vec::new();
    let mut action_names: Vec<String> = Vec::new();
    let mut next = 0usize;
    while next < states.len() {
        let (s, q) = states[next];
        let mut acts: Vec<(ProductAction, Vec<ProductTransition>)> = Vec::new();
        let mut names: Vec<String> = Vec::new();
        for (ai, act) in m.actions(s).iter().enumerate() {
            // Automaton successors with at least one surviving branch, in
            // ascending state order for deterministic action indexing.
            let mut succs: Vec<StateId> = act
                .transitions
                .iter()
                .flat_map(|t| a.transitions_on(q, t.letter))
                .map(|at| at.dst)
                .collect();
            succs.sort_unstable();
            succs.dedup();
            for qp in succs {
                let mut branches = Vec::new();
                for t in &act.transitions {
                    if let Some(accepting) = a.lookup(q, t.letter, qp) {
                        let dst = intern(&mut states, &mut index, (t.dst, qp));
                        branches.push(ProductTransition {
                            prob: t.prob,
                            dst,
                            accepting,
                        });
                    }
                }
                debug_assert!(!branches.is_empty());
                acts.push((
                    ProductAction {
                        mdp_action: ai,
                        aut_successor: qp,
                    },
                    branches,
                ));
                names.push(act.name.clone());
            }
        }
        actions.push(acts);
        action_names.extend(names);
        next += 1;
    }
    Ok(ProductMDP {
        states,
        index,
        initial,
        actions,
        action_names,
    })
}

/// A positional strategy on a product: one action index per state, where
/// defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalStrategy {
    /// Index into `actions(i)` for each product state `i`.
    pub choice: Vec<Option<usize>>,
}

impl PositionalStrategy {
    /// A strategy defined nowhere.
    pub fn empty(num_states: usize) -> Self {
        PositionalStrategy {
            choice: vec![None; num_states],
        }
    }
}

/// A Markov chain with marked transitions, as induced by a strategy on a
/// product. State `reject` is absorbing and unmarked; substochastic rows are
/// padded with it.
#[derive(Debug, Clone)]
pub struct MarkedChain {
    /// Rows of `(probability, successor, marked)`, index-aligned with the
    /// product states; the last row is the reject state.
    pub rows: Vec<Vec<(f64, usize, bool)>>,
    /// Initial state.
    pub initial: usize,
    /// The absorbing reject state (`rows.len() - 1`).
    pub reject: usize,
}

/// Restricts the product to the strategy's choices.
///
/// Action-less states and missing probability mass move to the absorbing
/// reject state. The strategy must be defined on every state with actions
/// that the chain can reach; reaching an undefined one is an error.
pub fn induced_chain(p: &ProductMDP, strategy: &PositionalStrategy) -> Result<MarkedChain> {
    let n = p.num_states();
    if strategy.choice.len() != n {
        return Err(Error::InvalidMdp(format!(
            "strategy covers {} states, product has {n}",
            strategy.choice.len()
        )));
    }
    let reject = n;
    let mut rows: Vec<Vec<(f64, usize, bool)>> = vec![Vec::new(); n + 1];
    rows[reject].push((1.0, reject, false));
    // Fill rows for all states; verify definedness along reachability below.
    for i in 0..n {
        match strategy.choice[i] {
            Some(c) => {
                let (_, branches) = p
                    .actions(i)
                    .get(c)
                    .ok_or_else(|| Error::InvalidMdp(format!("strategy picks action {c} at state {i}, which has {} actions", p.actions(i).len())))?;
                let mut mass = 0.0;
                for b in branches {
                    rows[i].push((b.prob, b.dst, b.accepting));
                    mass += b.prob;
                }
                if mass < 1.0 - DISTRIBUTION_TOL {
                    rows[i].push((1.0 - mass, reject, false));
                }
            }
            None => rows[i].push((1.0, reject, false)),
        }
    }
    // A reachable state that has actions but no choice is a strategy hole.
    let mut seen = vec![false; n + 1];
    let mut stack = vec![p.initial()];
    seen[p.initial()] = true;
    while let Some(i) = stack.pop() {
        if i != reject && strategy.choice[i].is_none() && !p.actions(i).is_empty() {
            return Err(Error::InvalidMdp(format!(
                "strategy undefined at reachable state {i}"
            )));
        }
        for &(_, dst, _) in &rows[i] {
            if !seen[dst] {
                seen[dst] = true;
                stack.push(dst);
            }
        }
    }
    Ok(MarkedChain {
        rows,
        initial: p.initial(),
        reject,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Transition;
    use std::collections::BTreeSet;

    fn tr(src: StateId, letter: Letter, dst: StateId, accepting: bool) -> Transition {
        Transition {
            src,
            letter,
            dst,
            accepting,
        }
    }

    /// Two-state encoding of a fair coin: state 0 emits the `a`-letter,
    /// state 1 the `b`-letter, and each step moves to a uniformly random
    /// state.
    const COIN: &str = "\
mdp-explicit 1
ap a b
init 0
trans 0 flip 0.5 0 10
trans 0 flip 0.5 1 10
trans 1 flip 0.5 0 01
trans 1 flip 0.5 1 01
";

    /// Three states over [a, b]: guess from the middle whether the recurring
    /// letter is `a` (state 1) or `b` (state 2); a wrong guess dead-ends.
    fn guess_nba() -> BuchiAutomaton {
        BuchiAutomaton::new(
            vec!["a".into(), "b".into()],
            3,
            BTreeSet::from([0]),
            vec![
                tr(0, 1, 1, false),
                tr(0, 2, 1, false),
                tr(0, 1, 2, false),
                tr(0, 2, 2, false),
                tr(1, 1, 0, true),
                tr(2, 2, 0, true),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn explicit_round_trip() {
        let m = parse_explicit(COIN).unwrap();
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.initial(), 0);
        assert_eq!(m.ap_list(), ["a", "b"]);
        assert_eq!(m.actions(0).len(), 1);
        assert_eq!(m.actions(0)[0].name, "flip");
        assert_eq!(m.actions(0)[0].transitions.len(), 2);
        // Letter bits are read in ap order: "10" sets only bit 0 (a).
        assert_eq!(m.actions(0)[0].transitions[0].letter, 1);
        assert_eq!(m.actions(1)[0].transitions[0].letter, 2);
        let again = parse_explicit(&write_explicit(&m)).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn absorbing_single_state_is_valid() {
        let m = parse_explicit("mdp-explicit 1\nap a\ninit 0\ntrans 0 stay 1 0 1\n").unwrap();
        assert_eq!(m.num_states(), 1);
        assert_eq!(m.actions(0)[0].transitions[0].prob, 1.0);
    }

    #[test]
    fn distribution_must_sum_to_one() {
        let text = "mdp-explicit 1\nap a\ninit 0\ntrans 0 x 0.5 0 1\ntrans 0 x 0.6 1 1\ntrans 1 x 1 1 0\n";
        let err = parse_explicit(text).unwrap_err();
        match err {
            Error::DistributionSum { state, sum, .. } => {
                assert_eq!(state, 0);
                assert!((sum - 1.1).abs() < 1e-12);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_branch_is_rejected() {
        let text = "mdp-explicit 1\nap a\ninit 0\ntrans 0 x 0.5 0 1\ntrans 0 x 0.5 0 1\n";
        let err = parse_explicit(text).unwrap_err();
        assert!(err.to_string().contains("duplicate branch"));
    }

    #[test]
    fn mentioned_state_without_actions_is_rejected() {
        let text = "mdp-explicit 1\nap a\ninit 0\ntrans 0 x 1 1 1\n";
        let err = parse_explicit(text).unwrap_err();
        assert!(err.to_string().contains("state 1"));
    }

    #[test]
    fn malformed_lines_are_rejected_with_line_numbers() {
        for (text, needle) in [
            ("ap a\n", "mdp-explicit"),
            ("mdp-explicit 1\nap a\nap b\ninit 0\ntrans 0 x 1 0 1\n", "repeated ap"),
            ("mdp-explicit 1\nap a\ninit 0\ninit 1\ntrans 0 x 1 0 1\n", "repeated init"),
            ("mdp-explicit 1\ninit 0\ntrans 0 x 1 0 1\n", "trans before ap"),
            ("mdp-explicit 1\nap a\ninit 0\ntrans 0 x 1 0 11\n", "letter bits"),
            ("mdp-explicit 1\nap a\ninit 0\ntrans 0 x one 0 1\n", "bad probability"),
            ("mdp-explicit 1\nap a\ninit 0\nedge 0 1\n", "unknown record"),
            ("mdp-explicit 1\nap a\ntrans 0 x 1 0 1\n", "missing init"),
        ] {
            let err = parse_explicit(text).unwrap_err();
            assert!(
                err.to_string().contains(needle),
                "{text:?} gave {err} (wanted {needle})"
            );
        }
    }

    #[test]
    fn probability_zero_is_rejected() {
        let text = "mdp-explicit 1\nap a\ninit 0\ntrans 0 x 0 0 1\ntrans 0 x 1 0 1\n";
        assert!(parse_explicit(text).is_err());
    }

    #[test]
    fn product_explores_exactly_the_reachable_pairs() {
        let m = parse_explicit(COIN).unwrap();
        let a = guess_nba();
        let p = product(&m, &a).unwrap();
        // From either coin state the automaton may guess state 1 or 2; wrong
        // guesses strand the automaton, so all six pairs appear.
        assert_eq!(p.num_states(), 6);
        assert_eq!(p.state(p.initial()), (0, 0));
        let root_actions = p.actions(p.initial());
        assert_eq!(root_actions.len(), 2);
        assert_eq!(
            root_actions[0].0,
            ProductAction {
                mdp_action: 0,
                aut_successor: 1
            }
        );
        assert_eq!(
            root_actions[1].0,
            ProductAction {
                mdp_action: 0,
                aut_successor: 2
            }
        );
        // Both guesses keep the full mass: the automaton can read the
        // emitted letter into either successor.
        for (_, branches) in root_actions {
            let mass: f64 = branches.iter().map(|b| b.prob).sum();
            assert!((mass - 1.0).abs() < 1e-12);
            assert!(branches.iter().all(|b| !b.accepting));
        }
        // A wrong guess has no actions at all: state (1, 1) emits the
        // b-letter, which automaton state 1 cannot read.
        let stuck = p.find(1, 1).unwrap();
        assert!(p.actions(stuck).is_empty());
        // A right guess returns to the middle with a mark.
        let good = p.find(0, 1).unwrap();
        let acts = p.actions(good);
        assert_eq!(acts.len(), 1);
        assert!(acts[0].1.iter().all(|b| b.accepting));
        assert_eq!(p.action_name(good, 0), "flip");
    }

    #[test]
    fn product_branches_match_automaton_lookups() {
        let m = parse_explicit(COIN).unwrap();
        let a = guess_nba();
        let p = product(&m, &a).unwrap();
        for i in 0..p.num_states() {
            let (s, q) = p.state(i);
            for (pa, branches) in p.actions(i) {
                for b in branches {
                    let (sp, qp) = p.state(b.dst);
                    assert_eq!(qp, pa.aut_successor);
                    let letter = m.actions(s)[pa.mdp_action]
                        .transitions
                        .iter()
                        .find(|t| t.dst == sp)
                        .unwrap()
                        .letter;
                    assert_eq!(a.lookup(q, letter, qp), Some(b.accepting));
                }
            }
        }
    }

    #[test]
    fn deterministic_complete_automaton_keeps_full_mass() {
        let m = parse_explicit(COIN).unwrap();
        let a = BuchiAutomaton::new(
            vec!["a".into(), "b".into()],
            1,
            BTreeSet::from([0]),
            (0..4).map(|l| tr(0, l, 0, l == 1)).collect(),
            vec![],
        )
        .unwrap();
        let p = product(&m, &a).unwrap();
        assert_eq!(p.num_states(), 2);
        for i in 0..p.num_states() {
            assert_eq!(p.actions(i).len(), 1);
            let mass: f64 = p.actions(i)[0].1.iter().map(|b| b.prob).sum();
            assert!((mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_requires_single_initial_and_same_alphabet() {
        let m = parse_explicit(COIN).unwrap();
        let two_initial = BuchiAutomaton::new(
            vec!["a".into(), "b".into()],
            2,
            BTreeSet::from([0, 1]),
            vec![tr(0, 0, 0, false), tr(1, 0, 1, false)],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            product(&m, &two_initial),
            Err(Error::MultipleInitialStates(2))
        ));
        let wrong_aps = BuchiAutomaton::new(
            vec!["a".into()],
            1,
            BTreeSet::from([0]),
            vec![tr(0, 0, 0, false)],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            product(&m, &wrong_aps),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn committed_guess_dies_with_probability_half_per_step() {
        let m = parse_explicit(COIN).unwrap();
        let a = guess_nba();
        let p = product(&m, &a).unwrap();
        // Always guess automaton state 1 (the a-checker).
        let mut strategy = PositionalStrategy::empty(p.num_states());
        for i in 0..p.num_states() {
            let pick = p
                .actions(i)
                .iter()
                .position(|(pa, _)| pa.aut_successor == 1 || p.actions(i).len() == 1);
            strategy.choice[i] = pick;
        }
        let chain = induced_chain(&p, &strategy).unwrap();
        // The middle states split their mass over right and wrong guesses;
        // the wrong pair (coin 1, automaton 1) has no action and dies.
        let stuck = p.find(1, 1).unwrap();
        assert_eq!(chain.rows[stuck], vec![(1.0, chain.reject, false)]);
        let good = p.find(0, 1).unwrap();
        assert!(chain.rows[good].iter().all(|&(_, _, marked)| marked));
        assert_eq!(chain.rows[chain.reject], vec![(1.0, chain.reject, false)]);
    }

    #[test]
    fn strategy_holes_on_reachable_states_error() {
        let m = parse_explicit(COIN).unwrap();
        let a = guess_nba();
        let p = product(&m, &a).unwrap();
        let strategy = PositionalStrategy::empty(p.num_states());
        let err = induced_chain(&p, &strategy).unwrap_err();
        assert!(err.to_string().contains("undefined"));
    }
}
