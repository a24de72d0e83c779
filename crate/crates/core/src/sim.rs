//! Simulation games between Büchi automata, and the GFM certifier built on
//! top of them.
//!
//! All three games pit a *spoiler* automaton against a *duplicator* automaton
//! over a shared alphabet. The spoiler picks transitions of its automaton one
//! at a time (thereby choosing the next input letter); the duplicator must
//! answer each move with a transition of its own automaton on the same
//! letter. The resulting max-parity game is won by player Even (the
//! duplicator) iff the duplicator can match the spoiler forever in the sense
//! of the chosen level:
//!
//! * [`SimLevel::Sim0`] — direct simulation: every spoiler accepting move
//!   (color 1) must be answered by duplicator accepting moves infinitely
//!   often (color 2).
//! * [`SimLevel::Sim1`] — the spoiler must additionally commit to one of its
//!   accepting transitions (the *claim*). Colors only start to matter after
//!   the claim: retaking the claimed transition emits color 1, so the spoiler
//!   is forced to reveal a transition it will repeat forever, and the
//!   duplicator only needs to accept when that particular transition recurs.
//! * [`SimLevel::Sim2`] — like `Sim1`, but after every spoiler move the
//!   duplicator may *update* the claim to the transition the spoiler just
//!   took, letting it refine the information it extracts from the spoiler.
//!
//! A duplicator win at any level witnesses that the duplicator automaton
//! simulates (and therefore language-contains) the spoiler. Because the
//! good-for-MDPs property is preserved downwards along simulation of a
//! language-equivalent GFM automaton, [`certify_gfm`] escalates through the
//! levels with a known-GFM reference automaton as the spoiler.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::time::Instant;

use crate::automata::{BuchiAutomaton, Letter, StateId};
use crate::constructions::{build_sldba, build_slim, SldbaOptions, SlimOptions};
use crate::parity::{ParityGame, Player, Solution};
use crate::{Error, Result};

/// Default cap on simulation-game positions before giving up.
pub const DEFAULT_GAME_BUDGET: usize = 5_000_000;

/// Strength of the simulation game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimLevel {
    /// Direct simulation.
    Sim0,
    /// Claim-based simulation with a fixed claim.
    Sim1,
    /// Claim-based simulation where the duplicator may update the claim.
    Sim2,
}

impl SimLevel {
    /// All levels, weakest information content first.
    pub const ALL: [SimLevel; 3] = [SimLevel::Sim0, SimLevel::Sim1, SimLevel::Sim2];

    /// Level from its numeric index 0, 1 or 2.
    pub fn from_index(i: usize) -> Option<SimLevel> {
        match i {
            0 => Some(SimLevel::Sim0),
            1 => Some(SimLevel::Sim1),
            2 => Some(SimLevel::Sim2),
            _ => None,
        }
    }
}

impl fmt::Display for SimLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimLevel::Sim0 => write!(f, "sim0"),
            SimLevel::Sim1 => write!(f, "sim1"),
            SimLevel::Sim2 => write!(f, "sim2"),
        }
    }
}

/// A position of the simulation game.
///
/// `qs`/`qd` are the current spoiler/duplicator automaton states. `claim` and
/// `just` are indices into the spoiler's transition array. In `Duplicator`
/// positions the spoiler has already moved to `qs` and the duplicator still
/// owes a response on `letter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    /// Spoiler to move, no claim made yet (the only kind of spoiler position
    /// in the direct game).
    Spoiler { qs: u32, qd: u32 },
    /// Duplicator must answer `letter` before any claim was made.
    Duplicator { qs: u32, qd: u32, letter: Letter },
    /// Spoiler to move with a standing claim.
    SpoilerClaimed { qs: u32, qd: u32, claim: u32 },
    /// Duplicator must answer `letter`; the claim is fixed.
    DupClaimed {
        qs: u32,
        qd: u32,
        letter: Letter,
        claim: u32,
    },
    /// Duplicator must answer the letter of the spoiler transition `just`,
    /// and may either keep `claim` or update it to `just`.
    DupClaimed2 { qs: u32, qd: u32, just: u32, claim: u32 },
}

impl Node {
    fn owner(&self) -> Player {
        match self {
            Node::Spoiler { .. } | Node::SpoilerClaimed { .. } => Player::Odd,
            Node::Duplicator { .. } | Node::DupClaimed { .. } | Node::DupClaimed2 { .. } => {
                Player::Even
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Node::Spoiler { qs, qd } => write!(f, "S({qs},{qd})"),
            Node::Duplicator { qs, qd, letter } => write!(f, "D({qs},{qd}|l{letter})"),
            Node::SpoilerClaimed { qs, qd, claim } => write!(f, "S({qs},{qd}|c{claim})"),
            Node::DupClaimed {
                qs,
                qd,
                letter,
                claim,
            } => write!(f, "D({qs},{qd}|l{letter},c{claim})"),
            Node::DupClaimed2 { qs, qd, just, claim } => {
                write!(f, "D({qs},{qd}|j{just},c{claim})")
            }
        }
    }
}

/// The solved simulation game together with its verdict.
#[derive(Debug, Clone)]
pub struct DecideOutcome {
    /// Whether every spoiler initial state is simulated by some duplicator
    /// initial state.
    pub simulates: bool,
    /// One entry per spoiler initial state: the duplicator initial states it
    /// was paired with and whether the duplicator wins that pairing.
    pub roots: Vec<(StateId, Vec<(StateId, bool)>)>,
    /// The underlying parity game.
    pub game: ParityGame,
    /// Game position of each parity-game state.
    pub nodes: Vec<Node>,
    /// Winning regions and positional strategies of the game.
    pub solution: Solution,
}

impl DecideOutcome {
    /// Number of game positions.
    pub fn game_states(&self) -> usize {
        self.game.num_states()
    }

    /// Number of game moves.
    pub fn game_edges(&self) -> usize {
        self.game.num_edges()
    }

    /// Writes a readable dump of the game: positions with owner and winner,
    /// then moves with colors.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "positions {} moves {}",
            self.game.num_states(),
            self.game.num_edges()
        )?;
        for (q, node) in self.nodes.iter().enumerate() {
            writeln!(
                w,
                "position {q} {node} owner={} winner={}",
                self.game.owner(q),
                self.solution.winner(q)
            )?;
        }
        for e in 0..self.game.num_edges() {
            let (src, dst, color) = self.game.edge(e);
            writeln!(w, "move {} -> {} : {color}", self.nodes[src], self.nodes[dst])?;
        }
        Ok(())
    }
}

struct GameBuilder<'a> {
    spoiler: &'a BuchiAutomaton,
    duplicator: &'a BuchiAutomaton,
    level: SimLevel,
    budget: usize,
    index: HashMap<Node, u32>,
    nodes: Vec<Node>,
    queue: Vec<u32>,
    edges: Vec<(usize, usize, u8)>,
}

impl<'a> GameBuilder<'a> {
    fn intern(&mut self, node: Node) -> Result<usize> {
        if let Some(&id) = self.index.get(&node) {
            return Ok(id as usize);
        }
        if self.nodes.len() >= self.budget {
            return Err(Error::GameBudgetExceeded {
                budget: self.budget,
            });
        }
        let id = self.nodes.len() as u32;
        self.index.insert(node, id);
        self.nodes.push(node);
        self.queue.push(id);
        Ok(id as usize)
    }

    fn edge(&mut self, src: usize, dst: Node, color: u8) -> Result<()> {
        let dst = self.intern(dst)?;
        self.edges.push((src, dst, color));
        Ok(())
    }

    /// One spoiler transition as a move: plain moves drop any claim state
    /// change; claimed spoiler moves color 1 exactly on retakes.
    fn expand(&mut self, id: usize) -> Result<()> {
        let node = self.nodes[id];
        match node {
            Node::Spoiler { qs, qd } => {
                for ti in self.spoiler.transition_range(qs as StateId) {
                    let t = self.spoiler.transitions()[ti];
                    match self.level {
                        SimLevel::Sim0 => {
                            let color = if t.accepting { 1 } else { 0 };
                            self.edge(
                                id,
                                Node::Duplicator {
                                    qs: t.dst as u32,
                                    qd,
                                    letter: t.letter,
                                },
                                color,
                            )?;
                        }
                        SimLevel::Sim1 => {
                            self.edge(
                                id,
                                Node::Duplicator {
                                    qs: t.dst as u32,
                                    qd,
                                    letter: t.letter,
                                },
                                0,
                            )?;
                            if t.accepting {
                                self.edge(
                                    id,
                                    Node::DupClaimed {
                                        qs: t.dst as u32,
                                        qd,
                                        letter: t.letter,
                                        claim: ti as u32,
                                    },
                                    0,
                                )?;
                            }
                        }
                        SimLevel::Sim2 => {
                            self.edge(
                                id,
                                Node::Duplicator {
                                    qs: t.dst as u32,
                                    qd,
                                    letter: t.letter,
                                },
                                0,
                            )?;
                            if t.accepting {
                                self.edge(
                                    id,
                                    Node::DupClaimed2 {
                                        qs: t.dst as u32,
                                        qd,
                                        just: ti as u32,
                                        claim: ti as u32,
                                    },
                                    0,
                                )?;
                            }
                        }
                    }
                }
            }
            Node::Duplicator { qs, qd, letter } => {
                let pre_claim = self.level != SimLevel::Sim0;
                for u in self.duplicator.transitions_on(qd as StateId, letter) {
                    let u = *u;
                    let color = if pre_claim || !u.accepting { 0 } else { 2 };
                    self.edge(
                        id,
                        Node::Spoiler {
                            qs,
                            qd: u.dst as u32,
                        },
                        color,
                    )?;
                }
            }
            Node::SpoilerClaimed { qs, qd, claim } => {
                for ti in self.spoiler.transition_range(qs as StateId) {
                    let t = self.spoiler.transitions()[ti];
                    let color = if ti as u32 == claim { 1 } else { 0 };
                    match self.level {
                        SimLevel::Sim1 => self.edge(
                            id,
                            Node::DupClaimed {
                                qs: t.dst as u32,
                                qd,
                                letter: t.letter,
                                claim,
                            },
                            color,
                        )?,
                        SimLevel::Sim2 => self.edge(
                            id,
                            Node::DupClaimed2 {
                                qs: t.dst as u32,
                                qd,
                                just: ti as u32,
                                claim,
                            },
                            color,
                        )?,
                        SimLevel::Sim0 => unreachable!("no claims in the direct game"),
                    }
                }
            }
            Node::DupClaimed {
                qs,
                qd,
                letter,
                claim,
            } => {
                for u in self.duplicator.transitions_on(qd as StateId, letter) {
                    let u = *u;
                    let color = if u.accepting { 2 } else { 0 };
                    self.edge(
                        id,
                        Node::SpoilerClaimed {
                            qs,
                            qd: u.dst as u32,
                            claim,
                        },
                        color,
                    )?;
                }
            }
            Node::DupClaimed2 { qs, qd, just, claim } => {
                let letter = self.spoiler.transitions()[just as usize].letter;
                for u in self.duplicator.transitions_on(qd as StateId, letter) {
                    let u = *u;
                    let color = if u.accepting { 2 } else { 0 };
                    self.edge(
                        id,
                        Node::SpoilerClaimed {
                            qs,
                            qd: u.dst as u32,
                            claim,
                        },
                        color,
                    )?;
                    if just != claim {
                        self.edge(
                            id,
                            Node::SpoilerClaimed {
                                qs,
                                qd: u.dst as u32,
                                claim: just,
                            },
                            color,
                        )?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds and solves the level-`level` simulation game with `spoiler` moving
/// first, exploring only positions reachable from the initial pairings.
///
/// The duplicator simulates the spoiler when for every spoiler initial state
/// there is a duplicator initial state from which the duplicator wins: then
/// every run of the spoiler can be shadowed, so the duplicator accepts at
/// least the spoiler's language.
///
/// Fails with [`Error::AlphabetMismatch`] when the automata read different
/// atomic propositions and with [`Error::GameBudgetExceeded`] when the game
/// grows past `budget` positions.
pub fn decide_with_budget(
    level: SimLevel,
    spoiler: &BuchiAutomaton,
    duplicator: &BuchiAutomaton,
    budget: usize,
) -> Result<DecideOutcome> {
    spoiler.require_same_alphabet(duplicator)?;
    let mut b = GameBuilder {
        spoiler,
        duplicator,
        level,
        budget,
        index: HashMap::new(),
        nodes: Vec::new(),
        queue: Vec::new(),
        edges: Vec::new(),
    };
    let mut root_ids: Vec<(StateId, Vec<(StateId, usize)>)> = Vec::new();
    for &qs0 in spoiler.initial() {
        let mut row = Vec::new();
        for &qd0 in duplicator.initial() {
            let id = b.intern(Node::Spoiler {
                qs: qs0 as u32,
                qd: qd0 as u32,
            })?;
            row.push((qd0, id));
        }
        root_ids.push((qs0, row));
    }
    let mut next = 0usize;
    while next < b.queue.len() {
        let id = b.queue[next] as usize;
        next += 1;
        b.expand(id)?;
    }
    let owners: Vec<Player> = b.nodes.iter().map(Node::owner).collect();
    let game = ParityGame::new(owners, &b.edges)?;
    let solution = game.solve();
    let mut simulates = true;
    let roots: Vec<(StateId, Vec<(StateId, bool)>)> = root_ids
        .into_iter()
        .map(|(qs0, row)| {
            let row: Vec<(StateId, bool)> = row
                .into_iter()
                .map(|(qd0, id)| (qd0, solution.winner(id) == Player::Even))
                .collect();
            if !row.iter().any(|&(_, w)| w) {
                simulates = false;
            }
            (qs0, row)
        })
        .collect();
    Ok(DecideOutcome {
        simulates,
        roots,
        game,
        nodes: b.nodes,
        solution,
    })
}

/// [`decide_with_budget`] with the default budget.
pub fn decide(
    level: SimLevel,
    spoiler: &BuchiAutomaton,
    duplicator: &BuchiAutomaton,
) -> Result<DecideOutcome> {
    decide_with_budget(level, spoiler, duplicator, DEFAULT_GAME_BUDGET)
}

/// Reference automaton the certifier plays the input against.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// Subset/breakpoint construction with jump transitions.
    Sldba,
    /// Slim construction (branching degree at most two).
    Slim,
    /// A caller-supplied automaton already known to be good for MDPs and
    /// language-equivalent to the input.
    Explicit(&'a BuchiAutomaton),
}

impl Reference<'_> {
    fn name(&self) -> &'static str {
        match self {
            Reference::Sldba => "sldba",
            Reference::Slim => "slim",
            Reference::Explicit(_) => "explicit",
        }
    }
}

/// Outcome of the GFM certification pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimVerdict {
    /// The input is deterministic, hence trivially good for MDPs.
    Det,
    /// The input simulates the reference at this level.
    Sim(SimLevel),
    /// No level produced a simulation; the GFM property remains unknown.
    NoSim,
    /// The game at this level outgrew the position budget.
    Timeout(SimLevel),
}

impl SimVerdict {
    /// Whether the verdict certifies the good-for-MDPs property.
    pub fn certified(&self) -> bool {
        matches!(self, SimVerdict::Det | SimVerdict::Sim(_))
    }
}

impl fmt::Display for SimVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimVerdict::Det => write!(f, "det"),
            SimVerdict::Sim(l) => write!(f, "{l}"),
            SimVerdict::NoSim => write!(f, "nosim"),
            SimVerdict::Timeout(l) => write!(f, "timeout({l})"),
        }
    }
}

/// Size and result of one attempted level.
#[derive(Debug, Clone)]
pub struct LevelReport {
    /// Game level that was attempted.
    pub level: SimLevel,
    /// Positions of the solved game (0 when the budget was exceeded).
    pub game_states: usize,
    /// Moves of the solved game (0 when the budget was exceeded).
    pub game_edges: usize,
    /// Whether the input simulates the reference at this level.
    pub simulates: bool,
    /// Whether the game outgrew the budget before it could be solved.
    pub timed_out: bool,
    /// Wall-clock time spent on this level.
    pub wall_ms: u64,
}

/// Report of [`certify_gfm`].
#[derive(Debug, Clone)]
pub struct CertifyReport {
    /// Final verdict.
    pub verdict: SimVerdict,
    /// States of the certified automaton.
    pub input_states: usize,
    /// States of the reference automaton (`None` for deterministic inputs,
    /// which need no reference).
    pub reference_states: Option<usize>,
    /// Which reference was played against.
    pub reference: &'static str,
    /// One entry per attempted level, in escalation order.
    pub levels: Vec<LevelReport>,
    /// Total wall-clock time.
    pub total_ms: u64,
}

/// Certifies that `aut` is good for MDPs by checking, with escalating game
/// strength, that it simulates a language-equivalent reference automaton that
/// is good for MDPs by construction.
///
/// Deterministic inputs are certified directly. Otherwise the reference is
/// built (or taken verbatim for [`Reference::Explicit`]) and the levels
/// sim0, sim1, sim2 are tried in order with the reference as the spoiler; the
/// first success is the verdict. A game that exceeds `budget` positions stops
/// the escalation with [`SimVerdict::Timeout`], since the stronger games are
/// strictly larger.
pub fn certify_gfm(
    aut: &BuchiAutomaton,
    reference: Reference<'_>,
    budget: usize,
) -> Result<CertifyReport> {
    let start = Instant::now();
    if aut.is_deterministic() {
        return Ok(CertifyReport {
            verdict: SimVerdict::Det,
            input_states: aut.num_states(),
            reference_states: None,
            reference: "det",
            levels: Vec::new(),
            total_ms: start.elapsed().as_millis() as u64,
        });
    }
    let built;
    let reference_aut = match reference {
        Reference::Sldba => {
            built = build_sldba(aut, SldbaOptions::default())?;
            &built
        }
        Reference::Slim => {
            built = build_slim(aut, SlimOptions::default());
            &built
        }
        Reference::Explicit(b) => b,
    };
    let mut levels = Vec::new();
    let mut verdict = SimVerdict::NoSim;
    for level in SimLevel::ALL {
        let level_start = Instant::now();
        match decide_with_budget(level, reference_aut, aut, budget) {
            Ok(outcome) => {
                levels.push(LevelReport {
                    level,
                    game_states: outcome.game_states(),
                    game_edges: outcome.game_edges(),
                    simulates: outcome.simulates,
                    timed_out: false,
                    wall_ms: level_start.elapsed().as_millis() as u64,
                });
                if outcome.simulates {
                    verdict = SimVerdict::Sim(level);
                    break;
                }
            }
            Err(Error::GameBudgetExceeded { .. }) => {
                levels.push(LevelReport {
                    level,
                    game_states: 0,
                    game_edges: 0,
                    simulates: false,
                    timed_out: true,
                    wall_ms: level_start.elapsed().as_millis() as u64,
                });
                verdict = SimVerdict::Timeout(level);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(CertifyReport {
        verdict,
        input_states: aut.num_states(),
        reference_states: Some(reference_aut.num_states()),
        reference: reference.name(),
        levels,
        total_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{LassoWord, Transition};
    use std::collections::BTreeSet;

    fn tr(src: StateId, letter: Letter, dst: StateId, accepting: bool) -> Transition {
        Transition {
            src,
            letter,
            dst,
            accepting,
        }
    }

    fn aut(
        aps: &[&str],
        num_states: usize,
        initial: &[StateId],
        ts: Vec<Transition>,
    ) -> BuchiAutomaton {
        BuchiAutomaton::new(
            aps.iter().map(|s| s.to_string()).collect(),
            num_states,
            initial.iter().copied().collect::<BTreeSet<_>>(),
            ts,
            vec![],
        )
        .unwrap()
    }

    /// Two states over one proposition: accepts words with infinitely many
    /// `a`-letters (state 1 is reached by the accepting read of `a`).
    fn gfa() -> BuchiAutomaton {
        aut(
            &["a"],
            2,
            &[0],
            vec![
                tr(0, 0, 0, false),
                tr(0, 1, 0, false),
                tr(0, 0, 1, false),
                tr(0, 1, 1, false),
                tr(1, 1, 0, true),
            ],
        )
    }

    /// Accepts words that are eventually always `a`.
    fn fgp() -> BuchiAutomaton {
        aut(
            &["a"],
            2,
            &[0],
            vec![
                tr(0, 0, 0, false),
                tr(0, 1, 0, false),
                tr(0, 1, 1, false),
                tr(1, 1, 1, true),
            ],
        )
    }

    /// One state accepting every word over one proposition.
    fn universal() -> BuchiAutomaton {
        aut(
            &["a"],
            1,
            &[0],
            vec![tr(0, 0, 0, true), tr(0, 1, 0, true)],
        )
    }

    /// One complete state that never accepts.
    fn empty_lang() -> BuchiAutomaton {
        aut(
            &["a"],
            1,
            &[0],
            vec![tr(0, 0, 0, false), tr(0, 1, 0, false)],
        )
    }

    fn check(level: SimLevel, spoiler: &BuchiAutomaton, duplicator: &BuchiAutomaton) -> bool {
        decide(level, spoiler, duplicator).unwrap().simulates
    }

    #[test]
    fn every_automaton_simulates_itself() {
        for a in [gfa(), fgp(), universal(), empty_lang()] {
            for level in SimLevel::ALL {
                assert!(check(level, &a, &a), "identity failed at {level}");
            }
        }
    }

    #[test]
    fn universal_duplicator_simulates_everything() {
        let u = universal();
        for spoiler in [gfa(), fgp(), empty_lang(), u.clone()] {
            for level in SimLevel::ALL {
                assert!(check(level, &spoiler, &u));
            }
        }
    }

    #[test]
    fn empty_language_duplicator_fails_against_universal() {
        let u = universal();
        let e = empty_lang();
        for level in SimLevel::ALL {
            assert!(!check(level, &u, &e));
        }
    }

    #[test]
    fn spoiler_without_accepting_transitions_is_always_simulated() {
        // With nothing to claim (sim1/sim2) or color (sim0), the duplicator
        // only has to keep matching letters, which one complete state can do.
        let e = empty_lang();
        let d = fgp();
        for level in SimLevel::ALL {
            assert!(check(level, &e, &d));
        }
    }

    #[test]
    fn duplicator_dead_end_loses() {
        // The duplicator cannot answer letter 1 and loses immediately, even
        // though neither automaton accepts anything.
        let spoiler = empty_lang();
        let stuck = aut(&["a"], 1, &[0], vec![tr(0, 0, 0, false)]);
        for level in SimLevel::ALL {
            assert!(!check(level, &spoiler, &stuck));
        }
    }

    #[test]
    fn finite_language_spoiler_dead_end_wins_for_duplicator() {
        // The spoiler dead-ends after one move; dying is losing for the
        // player who must move.
        let spoiler = aut(&["a"], 2, &[0], vec![tr(0, 1, 1, true)]);
        let d = empty_lang();
        for level in SimLevel::ALL {
            assert!(check(level, &spoiler, &d));
        }
    }

    /// Direct simulation implies the claim games, and fixed claims imply
    /// updatable claims: each level only weakens the spoiler.
    #[test]
    fn levels_are_monotone_on_a_battery() {
        let battery = [gfa(), fgp(), universal(), empty_lang()];
        for s in &battery {
            for d in &battery {
                let s0 = check(SimLevel::Sim0, s, d);
                let s1 = check(SimLevel::Sim1, s, d);
                let s2 = check(SimLevel::Sim2, s, d);
                assert!(!s0 || s1, "sim0 held but sim1 failed");
                assert!(!s1 || s2, "sim1 held but sim2 failed");
            }
        }
    }

    #[test]
    fn direct_simulation_is_transitive_on_a_battery() {
        let battery = [gfa(), fgp(), universal(), empty_lang()];
        let n = battery.len();
        let mut m = vec![vec![false; n]; n];
        for (i, s) in battery.iter().enumerate() {
            for (j, d) in battery.iter().enumerate() {
                m[i][j] = check(SimLevel::Sim0, s, d);
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if m[i][j] && m[j][k] {
                        assert!(m[i][k], "transitivity broke at {i},{j},{k}");
                    }
                }
            }
        }
    }

    #[test]
    fn simulation_implies_bounded_language_containment() {
        let battery = [gfa(), fgp(), universal(), empty_lang()];
        for s in &battery {
            for d in &battery {
                if !check(SimLevel::Sim0, s, d) {
                    continue;
                }
                // Every short lasso word accepted by the spoiler must be
                // accepted by the duplicator.
                for total in 1..=4usize {
                    for plen in 1..=total {
                        let ulen = total - plen;
                        let mut word = vec![0u32; total];
                        loop {
                            let lasso = LassoWord::new(
                                word[..ulen].to_vec(),
                                word[ulen..].to_vec(),
                            );
                            if s.accepts_lasso(&lasso) {
                                assert!(
                                    d.accepts_lasso(&lasso),
                                    "spoiler word {lasso} not matched"
                                );
                            }
                            let mut i = 0;
                            loop {
                                if i == total {
                                    break;
                                }
                                word[i] += 1;
                                if word[i] < 2 {
                                    break;
                                }
                                word[i] = 0;
                                i += 1;
                            }
                            if i == total {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }

    /// The three-state automaton that guesses whether `a` or `b` recurs, and
    /// the deterministic two-state automaton for the same language
    /// (infinitely many letters satisfying `a` or `b`).
    ///
    /// Letters over propositions [a, b]: 0 = neither, 1 = a, 2 = b, 3 = both.
    fn guess_nba() -> BuchiAutomaton {
        let mut ts = Vec::new();
        for l in 0..4 {
            ts.push(tr(0, l, 0, false));
            ts.push(tr(0, l, 1, false));
            ts.push(tr(0, l, 2, false));
        }
        // State 1 waits for letters containing a, state 2 for b.
        ts.push(tr(1, 1, 1, true));
        ts.push(tr(1, 3, 1, true));
        ts.push(tr(1, 0, 1, false));
        ts.push(tr(1, 2, 1, false));
        ts.push(tr(2, 2, 2, true));
        ts.push(tr(2, 3, 2, true));
        ts.push(tr(2, 0, 2, false));
        ts.push(tr(2, 1, 2, false));
        aut(&["a", "b"], 3, &[0], ts)
    }

    fn guess_dba() -> BuchiAutomaton {
        aut(
            &["a", "b"],
            2,
            &[0],
            vec![
                tr(0, 0, 0, false),
                tr(0, 1, 1, true),
                tr(0, 2, 1, true),
                tr(0, 3, 1, true),
                tr(1, 0, 0, true),
                tr(1, 1, 0, true),
                tr(1, 2, 0, true),
                tr(1, 3, 0, true),
            ],
        )
    }

    /// The guessing automaton cannot shadow the deterministic one move for
    /// move, and a fixed claim can hide which letter recurs (the spoiler
    /// claims its return edge on the empty letter); only updating the claim
    /// onto the spoiler's a/b edges reveals enough to commit to a guess.
    #[test]
    fn claim_updates_separate_the_three_games() {
        let spoiler = guess_dba();
        let dup = guess_nba();
        assert!(!check(SimLevel::Sim0, &spoiler, &dup));
        assert!(!check(SimLevel::Sim1, &spoiler, &dup));
        assert!(check(SimLevel::Sim2, &spoiler, &dup));
    }

    /// Letters over propositions [x, y]: 0 = neither, 1 = x, 2 = y, 3 = both.
    /// Deterministic-in-the-limit automaton for "eventually always x, or
    /// infinitely often y": jump to state 1 to check the former, to state 2
    /// to check the latter.
    fn fgx_gfy_jumping() -> BuchiAutomaton {
        let mut ts = Vec::new();
        for l in 0..4 {
            ts.push(tr(0, l, 0, false));
        }
        ts.push(tr(0, 1, 1, true));
        ts.push(tr(0, 3, 1, true));
        ts.push(tr(0, 2, 2, true));
        ts.push(tr(0, 3, 2, true));
        ts.push(tr(1, 1, 1, true));
        ts.push(tr(1, 3, 1, true));
        ts.push(tr(2, 2, 2, true));
        ts.push(tr(2, 3, 2, true));
        ts.push(tr(2, 0, 2, false));
        ts.push(tr(2, 1, 2, false));
        aut(&["x", "y"], 3, &[0], ts)
    }

    /// Same language, but wrong guesses for "infinitely often y" can be
    /// revised: state 1 returns to state 0 on y.
    fn fgx_gfy_forgiving() -> BuchiAutomaton {
        aut(
            &["x", "y"],
            3,
            &[0],
            vec![
                tr(0, 2, 0, true),
                tr(0, 3, 0, true),
                tr(0, 0, 0, false),
                tr(0, 1, 0, false),
                tr(0, 1, 1, true),
                tr(1, 1, 1, true),
                tr(1, 2, 0, true),
                tr(1, 3, 0, true),
                tr(1, 0, 2, false),
                tr(2, 0, 2, false),
                tr(2, 1, 2, false),
                tr(2, 2, 0, true),
                tr(2, 3, 0, true),
            ],
        )
    }

    #[test]
    fn forgiving_simulates_jumping_but_not_conversely() {
        let jumping = fgx_gfy_jumping();
        let forgiving = fgx_gfy_forgiving();
        assert!(check(SimLevel::Sim0, &jumping, &forgiving));
        assert!(!check(SimLevel::Sim0, &forgiving, &jumping));
    }

    #[test]
    fn alphabets_must_match() {
        let a = gfa();
        let b = aut(&["q"], 1, &[0], vec![tr(0, 0, 0, false)]);
        assert!(matches!(
            decide(SimLevel::Sim0, &a, &b),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let a = gfa();
        assert!(matches!(
            decide_with_budget(SimLevel::Sim0, &a, &a, 3),
            Err(Error::GameBudgetExceeded { budget: 3 })
        ));
    }

    #[test]
    fn deterministic_inputs_certify_directly() {
        let report = certify_gfm(&guess_dba(), Reference::Sldba, 1000).unwrap();
        assert_eq!(report.verdict, SimVerdict::Det);
        assert!(report.levels.is_empty());
        assert_eq!(report.reference_states, None);
    }

    #[test]
    fn certifier_escalates_to_the_first_successful_level() {
        let report =
            certify_gfm(&guess_nba(), Reference::Explicit(&guess_dba()), 1_000_000).unwrap();
        assert_eq!(report.verdict, SimVerdict::Sim(SimLevel::Sim2));
        assert_eq!(report.levels.len(), 3);
        assert!(!report.levels[0].simulates);
        assert!(!report.levels[1].simulates);
        assert!(report.levels[2].simulates);
        assert_eq!(report.reference, "explicit");
    }

    #[test]
    fn certifier_reports_budget_exhaustion_as_timeout() {
        let report = certify_gfm(&gfa(), Reference::Sldba, 5).unwrap();
        assert_eq!(report.verdict, SimVerdict::Timeout(SimLevel::Sim0));
        assert!(report.levels[0].timed_out);
    }

    #[test]
    fn constructed_automata_are_certifiable_references() {
        // The slim automaton simulates the subset/breakpoint automaton for
        // the same language at some level; the certifier must never answer
        // nosim when handed a slim construction with its sibling reference.
        for a in [gfa(), fgp()] {
            let slim = build_slim(&a, SlimOptions::default());
            let sldba = build_sldba(&a, SldbaOptions::default()).unwrap();
            let report = certify_gfm(&slim, Reference::Explicit(&sldba), 1_000_000).unwrap();
            assert!(
                report.verdict.certified(),
                "slim construction not certified: {}",
                report.verdict
            );
        }
    }

    #[test]
    fn verdicts_render_for_reports() {
        assert_eq!(SimVerdict::Det.to_string(), "det");
        assert_eq!(SimVerdict::Sim(SimLevel::Sim1).to_string(), "sim1");
        assert_eq!(SimVerdict::NoSim.to_string(), "nosim");
        assert_eq!(SimVerdict::Timeout(SimLevel::Sim2).to_string(), "timeout(sim2)");
    }

    #[test]
    fn game_dump_lists_positions_and_moves() {
        let e = empty_lang();
        let out = decide(SimLevel::Sim0, &e, &e).unwrap();
        let mut buf = Vec::new();
        out.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("positions 3 moves 4\n"));
        assert!(text.contains("position 0 S(0,0) owner=1 winner=0"));
        assert!(text.contains("move S(0,0) -> D(0,0|l0) : 0"));
    }
}
