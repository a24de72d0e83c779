//! Subset and breakpoint constructions that turn an arbitrary NBA into an
//! automaton that is good for MDPs.
//!
//! Both constructions track runs of the source automaton `A = ⟨Σ, Q, Q₀, Δ, Γ⟩`
//! with set-valued states:
//!
//! * a *subset* state `S ⊆ Q` tracks all runs;
//! * a *breakpoint* state `(S, S')` with `S' ⊊ S` additionally remembers in
//!   `S'` which tracked runs have passed an accepting transition since the
//!   last breakpoint.
//!
//! One letter advances a breakpoint state to the raw pair
//! `(δ(S,σ), δ(S',σ) ∪ γ(S,σ))` where `δ` is the transition image and `γ` the
//! image under accepting transitions only. The *breakpoint step* normalizes
//! the raw pair: when the second component catches up with the first, every
//! tracked run has accepted, the step is accepting, and the memory resets to
//! `∅`. The *promotion step* instead restarts tracking from the runs that
//! just accepted (or had accepted earlier): it moves to `(δ(S',σ) ∪ γ(S,σ), ∅)`
//! and is always accepting.
//!
//! [`build_sldba`] combines a subset phase with nondeterministic jumps into
//! the breakpoint phase and is suitable limit deterministic; [`build_slim`]
//! uses breakpoint and promotion steps only, giving branching degree at most
//! two. Both recognize the language of the source automaton and are good for
//! MDPs.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::automata::{BuchiAutomaton, Letter, StateId, Transition};
use crate::{Error, Result};

/// Largest subset image whose power set jumps may enumerate.
pub const JUMP_IMAGE_LIMIT: usize = 16;

/// Image of `set` under all transitions on `letter`.
pub fn subset_image(
    aut: &BuchiAutomaton,
    set: &BTreeSet<StateId>,
    letter: Letter,
) -> BTreeSet<StateId> {
    aut.letter_image(set, letter)
}

/// Image of `set` under the accepting transitions on `letter`.
pub fn accepting_image(
    aut: &BuchiAutomaton,
    set: &BTreeSet<StateId>,
    letter: Letter,
) -> BTreeSet<StateId> {
    let mut out = BTreeSet::new();
    for &q in set {
        for t in aut.transitions_on(q, letter) {
            if t.accepting {
                out.insert(t.dst);
            }
        }
    }
    out
}

/// A breakpoint state `(S, S')` with `S' ⊆ S`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BreakpointState {
    tracked: BTreeSet<StateId>,
    accepted: BTreeSet<StateId>,
}

impl BreakpointState {
    /// Builds a breakpoint state; panics unless `accepted ⊆ tracked` and
    /// `tracked` is non-empty.
    pub fn new(tracked: BTreeSet<StateId>, accepted: BTreeSet<StateId>) -> Self {
        assert!(!tracked.is_empty(), "breakpoint state tracks no runs");
        assert!(
            accepted.is_subset(&tracked),
            "breakpoint memory {accepted:?} not contained in tracked set {tracked:?}"
        );
        BreakpointState { tracked, accepted }
    }

    /// The full set `S` of tracked states.
    pub fn tracked(&self) -> &BTreeSet<StateId> {
        &self.tracked
    }

    /// The memory `S'` of states whose runs have accepted since the last reset.
    pub fn accepted(&self) -> &BTreeSet<StateId> {
        &self.accepted
    }
}

impl fmt::Display for BreakpointState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{})",
            render_set(&self.tracked),
            render_set(&self.accepted)
        )
    }
}

/// Renders a state set as `{0,1,3}`.
pub fn render_set(set: &BTreeSet<StateId>) -> String {
    let inner = set
        .iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("{{{inner}}}")
}

/// The raw one-letter advance `(δ(S,σ), δ(S',σ) ∪ γ(S,σ))` of a breakpoint
/// state, before normalization. `None` iff the first component is empty; the
/// second component is always contained in the first, but may equal it.
pub fn raw_breakpoint(
    aut: &BuchiAutomaton,
    st: &BreakpointState,
    letter: Letter,
) -> Option<(BTreeSet<StateId>, BTreeSet<StateId>)> {
    let r = subset_image(aut, &st.tracked, letter);
    if r.is_empty() {
        return None;
    }
    let mut rp = subset_image(aut, &st.accepted, letter);
    rp.extend(accepting_image(aut, &st.tracked, letter));
    debug_assert!(rp.is_subset(&r));
    Some((r, rp))
}

/// The normalized breakpoint step: advance raw, then reset the memory on a
/// breakpoint. Returns the successor and whether the step is accepting;
/// `None` iff the tracked set dies.
///
/// * memory strictly behind the tracked set → keep `(R, R')`, not accepting;
/// * memory caught up (`R' = R`) → breakpoint: move to `(R, ∅)`, accepting.
pub fn breakpoint_step(
    aut: &BuchiAutomaton,
    st: &BreakpointState,
    letter: Letter,
) -> Option<(BreakpointState, bool)> {
    let (r, rp) = raw_breakpoint(aut, st, letter)?;
    if rp == r {
        Some((BreakpointState::new(r, BTreeSet::new()), true))
    } else {
        Some((BreakpointState::new(r, rp), false))
    }
}

/// The promotion step: restart tracking from the runs that have accepted,
/// `(S, S') ↦ (δ(S',σ) ∪ γ(S,σ), ∅)`. Defined (and then always accepting)
/// iff that set is non-empty.
pub fn promote(
    aut: &BuchiAutomaton,
    st: &BreakpointState,
    letter: Letter,
) -> Option<BreakpointState> {
    let mut x = subset_image(aut, &st.accepted, letter);
    x.extend(accepting_image(aut, &st.tracked, letter));
    if x.is_empty() {
        None
    } else {
        Some(BreakpointState::new(x, BTreeSet::new()))
    }
}

/// Targets of the jump transitions from subset state `S` on `letter`: every
/// non-empty `T ⊆ δ(S,σ)` (or only the singletons, with `singletons_only`),
/// each entered as the breakpoint state `(T, ∅)`.
///
/// Targets are ordered canonically: elements of the image ascending, subsets
/// by ascending characteristic bitmask over that order. Refuses images larger
/// than [`JUMP_IMAGE_LIMIT`].
pub fn jump_targets(
    aut: &BuchiAutomaton,
    subset: &BTreeSet<StateId>,
    letter: Letter,
    singletons_only: bool,
) -> Result<Vec<BTreeSet<StateId>>> {
    let image: Vec<StateId> = subset_image(aut, subset, letter).into_iter().collect();
    if singletons_only {
        return Ok(image.into_iter().map(|q| BTreeSet::from([q])).collect());
    }
    if image.len() > JUMP_IMAGE_LIMIT {
        return Err(Error::JumpBlowup {
            size: image.len(),
            limit: JUMP_IMAGE_LIMIT,
        });
    }
    let mut out = Vec::with_capacity((1usize << image.len()).saturating_sub(1));
    for mask in 1u32..(1u32 << image.len()) {
        let t: BTreeSet<StateId> = image
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &q)| q)
            .collect();
        out.push(t);
    }
    Ok(out)
}

/// Options for [`build_sldba`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SldbaOptions {
    /// Jump only to singleton subsets of the image instead of all subsets.
    pub singleton_jumps: bool,
    /// Add a rejecting sink so the result is complete.
    pub complete: bool,
}

/// Options for [`build_slim`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SlimOptions {
    /// Add a rejecting sink so the result is complete.
    pub complete: bool,
}

/// A state of either construction, used for interning during the build.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum ComponentState {
    Subset(BTreeSet<StateId>),
    Breakpoint(BreakpointState),
    Sink,
}

impl ComponentState {
    fn name(&self) -> String {
        match self {
            ComponentState::Subset(s) => render_set(s),
            ComponentState::Breakpoint(bp) => bp.to_string(),
            ComponentState::Sink => "sink".to_string(),
        }
    }
}

struct Builder {
    index: HashMap<ComponentState, StateId>,
    states: Vec<ComponentState>,
    queue: VecDeque<StateId>,
    transitions: Vec<Transition>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            index: HashMap::new(),
            states: Vec::new(),
            queue: VecDeque::new(),
            transitions: Vec::new(),
        }
    }

    fn intern(&mut self, st: ComponentState) -> StateId {
        if let Some(&id) = self.index.get(&st) {
            return id;
        }
        let id = self.states.len();
        self.states.push(st.clone());
        self.index.insert(st, id);
        self.queue.push_back(id);
        id
    }

    fn edge(&mut self, src: StateId, letter: Letter, dst: StateId, accepting: bool) {
        self.transitions.push(Transition {
            src,
            letter,
            dst,
            accepting,
        });
    }

    /// Adds a rejecting sink and routes every missing `(state, letter)` pair
    /// to it; no-op when the automaton is already complete.
    fn complete_with_sink(&mut self, num_letters: u32) {
        let mut has: Vec<Vec<bool>> =
            vec![vec![false; num_letters as usize]; self.states.len()];
        for t in &self.transitions {
            has[t.src][t.letter as usize] = true;
        }
        if has.iter().all(|row| row.iter().all(|&b| b)) {
            return;
        }
        let sink = self.states.len();
        self.states.push(ComponentState::Sink);
        for (q, row) in has.iter().enumerate() {
            for (l, &present) in row.iter().enumerate() {
                if !present {
                    self.edge(q, l as Letter, sink, false);
                }
            }
        }
        for l in 0..num_letters {
            self.edge(sink, l, sink, false);
        }
    }

    fn finish(self, aut: &BuchiAutomaton, initial: StateId) -> BuchiAutomaton {
        let names = self.states.iter().map(|s| Some(s.name())).collect();
        BuchiAutomaton::new(
            aut.ap_list().to_vec(),
            self.states.len(),
            BTreeSet::from([initial]),
            self.transitions,
            names,
        )
        .expect("set construction produces a valid automaton")
    }
}

/// Builds the suitable limit-deterministic automaton for `aut`.
///
/// States are the subset states (initial phase, starting from the full
/// initial set) plus the breakpoint states (final phase). On each letter a
/// subset state moves deterministically to its image and may alternatively
/// *jump* to `(T, ∅)` for any non-empty subset `T` of the image; breakpoint
/// states advance with the normalized breakpoint step. Only breakpoint steps
/// can be accepting, and the breakpoint phase is deterministic and closed, so
/// the result is limit deterministic. Its language equals the source
/// language, and the construction is good for MDPs.
pub fn build_sldba(aut: &BuchiAutomaton, opts: SldbaOptions) -> Result<BuchiAutomaton> {
    let mut b = Builder::new();
    let initial = b.intern(ComponentState::Subset(aut.initial().clone()));
    debug_assert_eq!(initial, 0);
    while let Some(id) = b.queue.pop_front() {
        let state = b.states[id].clone();
        for letter in 0..aut.num_letters() {
            match &state {
                ComponentState::Subset(s) => {
                    let image = subset_image(aut, s, letter);
                    if image.is_empty() {
                        continue;
                    }
                    let dst = b.intern(ComponentState::Subset(image));
                    b.edge(id, letter, dst, false);
                    for t in jump_targets(aut, s, letter, opts.singleton_jumps)? {
                        let bp = BreakpointState::new(t, BTreeSet::new());
                        let dst = b.intern(ComponentState::Breakpoint(bp));
                        b.edge(id, letter, dst, false);
                    }
                }
                ComponentState::Breakpoint(bp) => {
                    if let Some((next, accepting)) = breakpoint_step(aut, bp, letter) {
                        let dst = b.intern(ComponentState::Breakpoint(next));
                        b.edge(id, letter, dst, accepting);
                    }
                }
                ComponentState::Sink => unreachable!("sink added after exploration"),
            }
        }
    }
    if opts.complete {
        b.complete_with_sink(aut.num_letters());
    }
    Ok(b.finish(aut, 0))
}

/// Builds the slim automaton for `aut`: breakpoint states only, starting from
/// `(Q₀, ∅)`, with the normalized breakpoint step and the promotion step as
/// the only (at most two) choices per state and letter.
///
/// When both steps exist and coincide — on a breakpoint the promotion target
/// `(δ(S',σ) ∪ γ(S,σ), ∅)` equals the reset target and both are accepting —
/// they form a single transition, so the branching degree is at most two.
/// The result recognizes the source language and is good for MDPs.
pub fn build_slim(aut: &BuchiAutomaton, opts: SlimOptions) -> BuchiAutomaton {
    let mut b = Builder::new();
    let start = BreakpointState::new(aut.initial().clone(), BTreeSet::new());
    let initial = b.intern(ComponentState::Breakpoint(start));
    while let Some(id) = b.queue.pop_front() {
        let ComponentState::Breakpoint(bp) = b.states[id].clone() else {
            unreachable!("slim construction only interns breakpoint states");
        };
        for letter in 0..aut.num_letters() {
            let stepped = breakpoint_step(aut, &bp, letter);
            let promoted = promote(aut, &bp, letter);
            if let Some((next, accepting)) = &stepped {
                let dst = b.intern(ComponentState::Breakpoint(next.clone()));
                b.edge(id, letter, dst, *accepting);
            }
            if let Some(next) = promoted {
                let coincides = matches!(
                    &stepped,
                    Some((target, accepting)) if *accepting && *target == next
                );
                if !coincides {
                    let dst = b.intern(ComponentState::Breakpoint(next));
                    b.edge(id, letter, dst, true);
                }
            }
        }
    }
    if opts.complete {
        b.complete_with_sink(aut.num_letters());
    }
    b.finish(aut, initial)
}

/// The branching degree: the largest number of transitions any state has on
/// any single letter.
pub fn branching_degree(aut: &BuchiAutomaton) -> usize {
    let mut max = 0;
    let mut run = 0;
    let mut prev: Option<(StateId, Letter)> = None;
    for t in aut.transitions() {
        if prev == Some((t.src, t.letter)) {
            run += 1;
        } else {
            run = 1;
            prev = Some((t.src, t.letter));
        }
        max = max.max(run);
    }
    max
}
