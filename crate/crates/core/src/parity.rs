//! Transition-labelled max-parity games and their solution.
//!
//! Two players move a token along edges; player Even owns some states, player
//! Odd the rest. Every *edge* carries a color, and an infinite play is won by
//! Even iff the highest color occurring infinitely often is even. A state
//! with no outgoing edge loses for its owner.
//!
//! [`ParityGame::solve`] is a Zielonka-style recursion adapted to edge
//! colors: the attractor to the maximal color `d` collects the states from
//! which the `d`-parity player can force the play through a color-`d` edge,
//! and the subgame removes those states *and* the remaining color-`d` edges.
//! Removing all color-`d` edges strictly decreases the maximal color of the
//! nested subgame, so the recursion depth is bounded by the number of colors;
//! the same-color shrink step (removing the opponent's winning attractor) is
//! a loop. Dead ends are handled by augmenting the game internally with two
//! winning sinks. The solver returns positional strategies for both players
//! on their winning regions.
//!
//! [`ParityGame::brute_force_solve`] independently computes exact regions and
//! strategies for games with at most nine states by enumerating all
//! positional strategy profiles and evaluating the unique eventual cycle of
//! each pair.

use std::collections::VecDeque;
use std::fmt;

use crate::{Error, Result};

/// The two players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    /// Wins when the highest infinitely recurring color is even.
    Even,
    /// Wins when it is odd.
    Odd,
}

impl Player {
    /// The other player.
    pub fn opponent(self) -> Player {
        match self {
            Player::Even => Player::Odd,
            Player::Odd => Player::Even,
        }
    }

    /// 0 for Even, 1 for Odd.
    pub fn index(self) -> usize {
        match self {
            Player::Even => 0,
            Player::Odd => 1,
        }
    }

    /// The player whose parity matches `color`.
    pub fn of_color(color: u8) -> Player {
        if color % 2 == 0 {
            Player::Even
        } else {
            Player::Odd
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Largest game [`ParityGame::brute_force_solve`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 9;

/// A transition-labelled max-parity game. Edges keep their construction
/// order, so an edge index refers to a position in the original edge list.
#[derive(Debug, Clone)]
pub struct ParityGame {
    owners: Vec<Player>,
    esrc: Vec<u32>,
    edst: Vec<u32>,
    ecolor: Vec<u8>,
    /// Outgoing edge indices per state.
    out: Vec<Vec<u32>>,
}

/// Winning regions and positional strategies.
///
/// `strategy_even[q]` is the edge player Even commits to at `q`; it is
/// `Some` exactly when Even owns `q`, wins `q`, and `q` has an edge (a
/// winning dead end cannot be owner-won, so strategies on winning regions are
/// total). Likewise for Odd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Whether player Even wins from each state.
    pub winning_even: Vec<bool>,
    /// Even's positional strategy (edge index) on Even's winning region.
    pub strategy_even: Vec<Option<usize>>,
    /// Odd's positional strategy on Odd's winning region.
    pub strategy_odd: Vec<Option<usize>>,
}

impl Solution {
    /// Winner of state `q`.
    pub fn winner(&self, q: usize) -> Player {
        if self.winning_even[q] {
            Player::Even
        } else {
            Player::Odd
        }
    }
}

impl ParityGame {
    /// Builds a game from state owners and `(src, dst, color)` edges with
    /// colors at most 2.
    pub fn new(owners: Vec<Player>, edges: &[(usize, usize, u8)]) -> Result<Self> {
        let n = owners.len();
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut esrc = Vec::with_capacity(edges.len());
        let mut edst = Vec::with_capacity(edges.len());
        let mut ecolor = Vec::with_capacity(edges.len());
        for (i, &(src, dst, color)) in edges.iter().enumerate() {
            if src >= n || dst >= n {
                return Err(Error::InvalidAutomaton(format!(
                    "game edge {src} -> {dst} out of range ({n} states)"
                )));
            }
            if color > 2 {
                return Err(Error::InvalidAutomaton(format!(
                    "edge color {color} out of range (colors are at most 2)"
                )));
            }
            out[src].push(i as u32);
            esrc.push(src as u32);
            edst.push(dst as u32);
            ecolor.push(color);
        }
        Ok(ParityGame {
            owners,
            esrc,
            edst,
            ecolor,
            out,
        })
    }

    /// Number of states.
    pub fn num_states(&self) -> usize {
        self.owners.len()
    }

    /// Number of edges.
    pub fn num_edges(&self) -> usize {
        self.esrc.len()
    }

    /// Owner of a state.
    pub fn owner(&self, q: usize) -> Player {
        self.owners[q]
    }

    /// The `(src, dst, color)` triple of an edge index.
    pub fn edge(&self, e: usize) -> (usize, usize, u8) {
        (self.esrc[e] as usize, self.edst[e] as usize, self.ecolor[e])
    }

    /// Outgoing edge indices of a state.
    pub fn edges_from(&self, q: usize) -> &[u32] {
        &self.out[q]
    }

    /// Renders the game, one `src owner -> dst : color` line per edge in
    /// index order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for e in 0..self.num_edges() {
            let (src, dst, color) = self.edge(e);
            s.push_str(&format!("{src} {} -> {dst} : {color}\n", self.owners[src]));
        }
        s
    }

    /// Solves the game exactly, returning regions and positional strategies.
    pub fn solve(&self) -> Solution {
        let n = self.num_states();
        let real_edges = self.num_edges();

        // Augment with two sinks so every state has an edge: a play entering
        // sink_odd cycles through color 1 forever (the owner of a dead-end
        // Even state thereby loses), symmetrically sink_even with color 0.
        let sink_odd = n;
        let sink_even = n + 1;
        let mut owners = self.owners.clone();
        owners.push(Player::Even);
        owners.push(Player::Even);
        let mut esrc: Vec<u32> = self.esrc.clone();
        let mut edst: Vec<u32> = self.edst.clone();
        let mut ecolor: Vec<u8> = self.ecolor.clone();
        let mut out: Vec<Vec<u32>> = self.out.clone();
        out.push(Vec::new());
        out.push(Vec::new());
        let push_edge = |out: &mut Vec<Vec<u32>>,
                             esrc: &mut Vec<u32>,
                             edst: &mut Vec<u32>,
                             ecolor: &mut Vec<u8>,
                             src: usize,
                             dst: usize,
                             color: u8| {
            let idx = esrc.len() as u32;
            esrc.push(src as u32);
            edst.push(dst as u32);
            ecolor.push(color);
            out[src].push(idx);
        };
        push_edge(&mut out, &mut esrc, &mut edst, &mut ecolor, sink_odd, sink_odd, 1);
        push_edge(&mut out, &mut esrc, &mut edst, &mut ecolor, sink_even, sink_even, 0);
        for q in 0..n {
            if self.out[q].is_empty() {
                let sink = match self.owners[q] {
                    Player::Even => sink_odd,
                    Player::Odd => sink_even,
                };
                let color = if sink == sink_odd { 1 } else { 0 };
                push_edge(&mut out, &mut esrc, &mut edst, &mut ecolor, q, sink, color);
            }
        }

        let mut rin: Vec<Vec<u32>> = vec![Vec::new(); owners.len()];
        for e in 0..esrc.len() {
            rin[edst[e] as usize].push(e as u32);
        }
        let ctx = Ctx {
            owners: &owners,
            esrc: &esrc,
            edst: &edst,
            ecolor: &ecolor,
            out: &out,
            rin: &rin,
        };
        let alive = vec![true; owners.len()];
        let banned = vec![false; esrc.len()];
        let (win_even, strat) = zielonka(&ctx, alive, &banned);

        let mut strategy_even = vec![None; n];
        let mut strategy_odd = vec![None; n];
        for q in 0..n {
            if let Some(e) = strat[q] {
                let e = e as usize;
                if e < real_edges {
                    match self.owners[q] {
                        Player::Even => strategy_even[q] = Some(e),
                        Player::Odd => strategy_odd[q] = Some(e),
                    }
                }
            }
        }
        Solution {
            winning_even: win_even[..n].to_vec(),
            strategy_even,
            strategy_odd,
        }
    }

    /// Solves a game of at most [`BRUTE_FORCE_LIMIT`] states by enumerating
    /// every positional strategy of both players and evaluating the unique
    /// eventual cycle of each pair.
    pub fn brute_force_solve(&self) -> Result<Solution> {
        let n = self.num_states();
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::GameTooLargeForEnumeration {
                states: n,
                limit: BRUTE_FORCE_LIMIT,
            });
        }

        // States each player choses at (owned, with at least one edge).
        let chooser = |p: Player| -> Vec<usize> {
            (0..n)
                .filter(|&q| self.owners[q] == p && !self.out[q].is_empty())
                .collect()
        };
        let even_states = chooser(Player::Even);
        let odd_states = chooser(Player::Odd);

        // A profile assigns each choosing state a local edge choice; `advance`
        // steps through all profiles like an odometer.
        let advance = |profile: &mut [usize], states: &[usize]| -> bool {
            for (slot, &q) in profile.iter_mut().zip(states) {
                *slot += 1;
                if *slot < self.out[q].len() {
                    return true;
                }
                *slot = 0;
            }
            false
        };

        // choice[q] = edge index selected at q, usize::MAX when q is a dead
        // end (the walk stops there).
        let set_choices = |choice: &mut [usize], profile: &[usize], states: &[usize]| {
            for (&local, &q) in profile.iter().zip(states) {
                choice[q] = self.out[q][local] as usize;
            }
        };

        let play_winner = |choice: &[usize], start: usize| -> Player {
            let mut visited_at = vec![usize::MAX; n];
            let mut path: Vec<usize> = Vec::new(); // edge taken at each step
            let mut q = start;
            loop {
                if visited_at[q] != usize::MAX {
                    let cycle_start = visited_at[q];
                    let max_color = path[cycle_start..]
                        .iter()
                        .map(|&e| self.ecolor[e])
                        .max()
                        .expect("cycle has at least one edge");
                    return Player::of_color(max_color);
                }
                visited_at[q] = path.len();
                let e = choice[q];
                if e == usize::MAX {
                    return self.owners[q].opponent();
                }
                path.push(e);
                q = self.edst[e] as usize;
            }
        };

        // For one fixed profile of `player`, the set of states it wins
        // against every opposing profile.
        let wins_against_all = |choice: &mut Vec<usize>, player: Player| -> Vec<bool> {
            let opp_states = match player {
                Player::Even => &odd_states,
                Player::Odd => &even_states,
            };
            let mut wins = vec![true; n];
            let mut opp_profile = vec![0usize; opp_states.len()];
            loop {
                set_choices(choice, &opp_profile, opp_states);
                for q in 0..n {
                    if wins[q] && play_winner(choice, q) != player {
                        wins[q] = false;
                    }
                }
                if !advance(&mut opp_profile, opp_states) {
                    break;
                }
            }
            wins
        };

        let solve_for = |player: Player| -> (Vec<bool>, Vec<Option<usize>>) {
            let own_states = match player {
                Player::Even => &even_states,
                Player::Odd => &odd_states,
            };
            let mut region = vec![false; n];
            let mut profile = vec![0usize; own_states.len()];
            let mut choice = vec![usize::MAX; n];
            loop {
                set_choices(&mut choice, &profile, own_states);
                let wins = wins_against_all(&mut choice, player);
                for q in 0..n {
                    region[q] |= wins[q];
                }
                if !advance(&mut profile, own_states) {
                    break;
                }
            }
            // A single positional strategy wins on the whole region; find the
            // first profile achieving it.
            let mut strategy = vec![None; n];
            let mut profile = vec![0usize; own_states.len()];
            loop {
                let mut choice = vec![usize::MAX; n];
                set_choices(&mut choice, &profile, own_states);
                let wins = wins_against_all(&mut choice, player);
                if wins == region {
                    for &q in own_states {
                        if region[q] {
                            strategy[q] = Some(choice[q]);
                        }
                    }
                    return (region, strategy);
                }
                if !advance(&mut profile, own_states) {
                    break;
                }
            }
            unreachable!("positional determinacy: some profile wins the whole region");
        };

        let (win_even, strategy_even) = solve_for(Player::Even);
        let (win_odd, strategy_odd) = solve_for(Player::Odd);
        for q in 0..n {
            debug_assert!(
                win_even[q] != win_odd[q],
                "strategy enumeration must partition the states"
            );
        }
        Ok(Solution {
            winning_even: win_even,
            strategy_even,
            strategy_odd,
        })
    }
}

/// Borrowed view of the (augmented) game passed through the solver.
struct Ctx<'a> {
    owners: &'a [Player],
    esrc: &'a [u32],
    edst: &'a [u32],
    ecolor: &'a [u8],
    out: &'a [Vec<u32>],
    rin: &'a [Vec<u32>],
}

impl Ctx<'_> {
    fn usable(&self, e: u32, alive: &[bool], banned: &[bool]) -> bool {
        !banned[e as usize]
            && alive[self.esrc[e as usize] as usize]
            && alive[self.edst[e as usize] as usize]
    }
}

/// The edge attractor for `player`: states from which `player` can force the
/// next traversal of a target edge. A `player` state is attracted when some
/// usable edge is a target or enters the attractor (that edge becomes its
/// strategy); an opponent state when all its usable edges do.
fn attr_edges(
    ctx: &Ctx<'_>,
    alive: &[bool],
    banned: &[bool],
    player: Player,
    target_edge: &[bool],
) -> (Vec<bool>, Vec<Option<u32>>) {
    let n = ctx.owners.len();
    let mut in_a = vec![false; n];
    let mut strat: Vec<Option<u32>> = vec![None; n];
    let mut cnt = vec![0usize; n];
    let mut queue: VecDeque<usize> = VecDeque::new();

    for u in 0..n {
        if !alive[u] {
            continue;
        }
        if ctx.owners[u] == player {
            if let Some(&e) = ctx.out[u]
                .iter()
                .find(|&&e| ctx.usable(e, alive, banned) && target_edge[e as usize])
            {
                in_a[u] = true;
                strat[u] = Some(e);
                queue.push_back(u);
            }
        } else {
            cnt[u] = ctx.out[u]
                .iter()
                .filter(|&&e| ctx.usable(e, alive, banned) && !target_edge[e as usize])
                .count();
            if cnt[u] == 0 {
                in_a[u] = true;
                queue.push_back(u);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &e in &ctx.rin[v] {
            if !ctx.usable(e, alive, banned) {
                continue;
            }
            let u = ctx.esrc[e as usize] as usize;
            if in_a[u] {
                continue;
            }
            if ctx.owners[u] == player {
                in_a[u] = true;
                strat[u] = Some(e);
                queue.push_back(u);
            } else if !target_edge[e as usize] {
                cnt[u] -= 1;
                if cnt[u] == 0 {
                    in_a[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    (in_a, strat)
}

/// The state attractor for `player` to a target set.
fn attr_states(
    ctx: &Ctx<'_>,
    alive: &[bool],
    banned: &[bool],
    player: Player,
    targets: &[bool],
) -> (Vec<bool>, Vec<Option<u32>>) {
    let n = ctx.owners.len();
    let mut in_a = vec![false; n];
    let mut strat: Vec<Option<u32>> = vec![None; n];
    let mut cnt = vec![0usize; n];
    let mut queue: VecDeque<usize> = VecDeque::new();

    for u in 0..n {
        if !alive[u] {
            continue;
        }
        if targets[u] {
            in_a[u] = true;
            queue.push_back(u);
        } else if ctx.owners[u] != player {
            cnt[u] = ctx.out[u]
                .iter()
                .filter(|&&e| ctx.usable(e, alive, banned))
                .count();
        }
    }
    while let Some(v) = queue.pop_front() {
        for &e in &ctx.rin[v] {
            if !ctx.usable(e, alive, banned) {
                continue;
            }
            let u = ctx.esrc[e as usize] as usize;
            if in_a[u] {
                continue;
            }
            if ctx.owners[u] == player {
                in_a[u] = true;
                strat[u] = Some(e);
                queue.push_back(u);
            } else {
                cnt[u] -= 1;
                if cnt[u] == 0 {
                    in_a[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    (in_a, strat)
}

/// Core recursion. The same-maximal-color case (carving out the opponent's
/// winning attractor and re-solving the rest) runs as a loop, so genuine
/// recursion only happens on subgames with strictly smaller maximal color:
/// the depth is bounded by the number of colors.
///
/// Every alive state is required to have a usable edge; the attractor-based
/// removals preserve that invariant, and the public entry point establishes
/// it by augmentation.
fn zielonka(
    ctx: &Ctx<'_>,
    mut alive: Vec<bool>,
    banned: &[bool],
) -> (Vec<bool>, Vec<Option<u32>>) {
    let n = ctx.owners.len();
    let num_edges = ctx.esrc.len();
    let mut win_even = vec![false; n];
    let mut strat: Vec<Option<u32>> = vec![None; n];

    loop {
        if !alive.iter().any(|&b| b) {
            return (win_even, strat);
        }
        let mut d = 0u8;
        let mut any = false;
        for e in 0..num_edges as u32 {
            if ctx.usable(e, &alive, banned) {
                any = true;
                d = d.max(ctx.ecolor[e as usize]);
            }
        }
        debug_assert!(any, "alive subgame without usable edges");
        let pi = Player::of_color(d);
        let opp = pi.opponent();

        let mut target_edge = vec![false; num_edges];
        for e in 0..num_edges as u32 {
            if ctx.usable(e, &alive, banned) && ctx.ecolor[e as usize] == d {
                target_edge[e as usize] = true;
            }
        }
        let (in_a, astrat) = attr_edges(ctx, &alive, banned, pi, &target_edge);

        // Subgame without the attractor and without the remaining maximal
        // color edges; its maximal color is strictly smaller.
        let mut sub_alive = alive.clone();
        let mut sub_banned = banned.to_vec();
        for u in 0..n {
            if in_a[u] {
                sub_alive[u] = false;
            }
        }
        for e in 0..num_edges {
            if target_edge[e] {
                sub_banned[e] = true;
            }
        }
        let (sub_win_even, sub_strat) = zielonka(ctx, sub_alive.clone(), &sub_banned);

        let opp_wins_sub: Vec<bool> = (0..n)
            .map(|u| {
                sub_alive[u]
                    && match opp {
                        Player::Even => sub_win_even[u],
                        Player::Odd => !sub_win_even[u],
                    }
            })
            .collect();

        if opp_wins_sub.iter().all(|&b| !b) {
            // π wins everywhere: attractor strategy on A, subgame strategy
            // elsewhere.
            for u in 0..n {
                if !alive[u] {
                    continue;
                }
                win_even[u] = pi == Player::Even;
                if in_a[u] {
                    if ctx.owners[u] == pi {
                        strat[u] = astrat[u];
                    }
                } else {
                    strat[u] = sub_strat[u];
                }
            }
            return (win_even, strat);
        }

        // The opponent keeps its subgame region plus its attractor to it;
        // remove both and re-solve the remainder at the same color level.
        let (in_b, bstrat) = attr_states(ctx, &alive, banned, opp, &opp_wins_sub);
        for u in 0..n {
            if !in_b[u] {
                continue;
            }
            win_even[u] = opp == Player::Even;
            if ctx.owners[u] == opp {
                strat[u] = if opp_wins_sub[u] { sub_strat[u] } else { bstrat[u] };
            } else {
                strat[u] = None;
            }
            alive[u] = false;
        }
    }
}
