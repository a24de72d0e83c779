//! Seeded generators for random test instances.
//!
//! Conformance suites and the bundled corpus are built on reproducible random
//! automata, games, and MDPs. Every generator here is a pure function of its
//! seed (ChaCha8), so the instances are bit-identical across runs, platforms,
//! and crate versions that keep these functions unchanged.

use std::collections::BTreeSet;
use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automata::{BuchiAutomaton, StateId, Transition};
use crate::mdp::{LabeledMDP, MdpAction, MdpTransition};
use crate::parity::{ParityGame, Player};

/// Proposition names shared by all generated instances (`a`, `b`, `c`, …) so
/// that automata and MDPs drawn with the same arity can be paired.
pub fn ap_names(num_aps: usize) -> Vec<String> {
    assert!(num_aps <= 26, "at most 26 generated propositions");
    (0..num_aps)
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect()
}

/// A random nondeterministic Büchi automaton with between 1 and `max_states`
/// states over `num_aps` propositions. Per state and letter the out-degree is
/// 0–3 (mostly 1), and roughly a third of the transitions are accepting.
/// State 0 is the single initial state. Dead ends and empty languages are
/// possible on purpose; consumers must cope with them.
pub fn random_nba(seed: u64, max_states: usize, num_aps: usize) -> BuchiAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_states);
    let letters = 1u32 << num_aps;
    let mut transitions = Vec::new();
    let mut seen: HashSet<(StateId, u32, StateId)> = HashSet::new();
    for src in 0..n {
        for letter in 0..letters {
            let out = match rng.random_range(0..10u32) {
                0..=1 => 0,
                2..=6 => 1,
                7..=8 => 2,
                _ => 3,
            };
            for _ in 0..out {
                let dst = rng.random_range(0..n);
                let accepting = rng.random_range(0..10u32) < 3;
                // Drawing the same triple twice with a different flag would be
                // rejected by the constructor; keep the first draw.
                if seen.insert((src, letter, dst)) {
                    transitions.push(Transition {
                        src,
                        letter,
                        dst,
                        accepting,
                    });
                }
            }
        }
    }
    BuchiAutomaton::new(
        ap_names(num_aps),
        n,
        BTreeSet::from([0]),
        transitions,
        Vec::new(),
    )
    .expect("generated automaton is structurally valid")
}

/// A random automaton that is deterministic and complete by construction:
/// exactly one successor per state and letter, accepting with probability
/// roughly a third. State 0 is initial.
pub fn random_det_complete(seed: u64, max_states: usize, num_aps: usize) -> BuchiAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_states);
    let letters = 1u32 << num_aps;
    let mut transitions = Vec::new();
    for src in 0..n {
        for letter in 0..letters {
            let dst = rng.random_range(0..n);
            let accepting = rng.random_range(0..10u32) < 3;
            transitions.push(Transition {
                src,
                letter,
                dst,
                accepting,
            });
        }
    }
    BuchiAutomaton::new(
        ap_names(num_aps),
        n,
        BTreeSet::from([0]),
        transitions,
        Vec::new(),
    )
    .expect("generated automaton is structurally valid")
}

/// A random labeled MDP over the given propositions with between 1 and
/// `max_states` states, 1–3 actions per state, and 1–3 branches per action.
/// Branch probabilities come from small integer weights; the last branch
/// takes the exact remainder so each distribution sums to 1 up to
/// floating-point addition. Letters are drawn per branch (the label lives on
/// the transition, not the state). Passing an automaton's own `ap_list`
/// yields instances that can be paired with it directly.
pub fn random_mdp(seed: u64, max_states: usize, aps: &[String]) -> LabeledMDP {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_states);
    let letters = 1u32 << aps.len();
    let mut actions = Vec::with_capacity(n);
    for _ in 0..n {
        let num_actions = rng.random_range(1..=3usize);
        let mut acts = Vec::with_capacity(num_actions);
        for a in 0..num_actions {
            let branches = rng.random_range(1..=3usize);
            let weights: Vec<u32> = (0..branches).map(|_| rng.random_range(1..=4u32)).collect();
            let total: u32 = weights.iter().sum();
            let mut transitions = Vec::with_capacity(branches);
            let mut acc = 0.0f64;
            for (i, &w) in weights.iter().enumerate() {
                let prob = if i + 1 == branches {
                    1.0 - acc
                } else {
                    f64::from(w) / f64::from(total)
                };
                acc += prob;
                transitions.push(MdpTransition {
                    prob,
                    dst: rng.random_range(0..n),
                    letter: rng.random_range(0..letters),
                });
            }
            acts.push(MdpAction {
                name: format!("a{a}"),
                transitions,
            });
        }
        actions.push(acts);
    }
    LabeledMDP::new(aps.to_vec(), 0, actions, Vec::new())
        .expect("generated MDP is structurally valid")
}

/// A random transition-labelled max-parity game with between 1 and
/// `max_states` states and edge colors up to `max_color` (at most 2). States
/// have 0–3 outgoing edges; dead ends are rare but deliberate.
pub fn random_parity_game(seed: u64, max_states: usize, max_color: u8) -> ParityGame {
    assert!(max_color <= 2, "edge colors are at most 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_states);
    let owners: Vec<Player> = (0..n)
        .map(|_| {
            if rng.random::<bool>() {
                Player::Even
            } else {
                Player::Odd
            }
        })
        .collect();
    let mut edges = Vec::new();
    for src in 0..n {
        let deg = match rng.random_range(0..10u32) {
            0 => 0,
            1..=5 => 1,
            6..=8 => 2,
            _ => 3,
        };
        for _ in 0..deg {
            let dst = rng.random_range(0..n);
            let color = rng.random_range(0..=max_color);
            edges.push((src, dst, color));
        }
    }
    ParityGame::new(owners, &edges).expect("generated game is structurally valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_in_the_seed() {
        assert_eq!(random_nba(7, 6, 2), random_nba(7, 6, 2));
        assert_eq!(
            random_det_complete(7, 5, 2),
            random_det_complete(7, 5, 2)
        );
        assert_eq!(
            random_mdp(7, 15, &ap_names(2)),
            random_mdp(7, 15, &ap_names(2))
        );
        let g1 = random_parity_game(7, 9, 2);
        let g2 = random_parity_game(7, 9, 2);
        assert_eq!(g1.dump(), g2.dump());
        assert_ne!(random_nba(7, 6, 2), random_nba(8, 6, 2));
    }

    #[test]
    fn generated_instances_respect_their_bounds() {
        for seed in 0..50 {
            let a = random_nba(seed, 6, 2);
            assert!(a.num_states() <= 6);
            assert_eq!(a.ap_list(), ["a", "b"]);
            let d = random_det_complete(seed, 5, 2);
            assert!(d.is_deterministic() && d.is_complete());
            let m = random_mdp(seed, 15, &ap_names(2));
            assert!(m.num_states() <= 15);
            let g = random_parity_game(seed, 9, 2);
            assert!(g.num_states() <= 9);
        }
    }
}
