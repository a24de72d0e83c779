//! Episodic product environment and tabular Q-learning for ω-regular
//! objectives, with exact policy evaluation.
//!
//! The agent controls both the model's actions and the automaton's
//! nondeterminism: an environment state is a pair `(s, q)` and an action is a
//! pair `(mdp action, automaton successor)` valid for the letter the current
//! model state emits. Crossing a marked automaton transition pays reward 1
//! and ends the episode with probability `1 − ζ`; otherwise the run
//! continues, so maximizing the expected (undiscounted, episodic) return
//! maximizes the probability of satisfying the Büchi condition.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automata::{BuchiAutomaton, Letter, StateId};
use crate::mdp::LabeledMDP;
use crate::model_check::chain_accepting_prob;
use crate::mdp::MarkedChain;
use crate::{Error, Result};

/// How often learning curves record an evaluated probability.
pub const CURVE_EVAL_EVERY: usize = 50;

/// Learning hyperparameters.
///
/// `zeta` is one minus the probability that a marked transition pays out and
/// ends the episode; `tol` is the threshold under which two Q-values count
/// as equal for greedy tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub zeta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub tol: f64,
    pub ep_len: usize,
    pub ep_count: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    /// Mirrors the counter-model experiments: ζ=0.9, ε=0.01, α=0.3,
    /// tol=0.01, 200-step episodes, 1200 episodes.
    fn default() -> Self {
        Hyperparams {
            zeta: 0.9,
            epsilon: 0.01,
            alpha: 0.3,
            tol: 0.01,
            ep_len: 200,
            ep_count: 1200,
            seed: 0,
        }
    }
}

impl Hyperparams {
    /// Checks the documented ranges: all rates in (0, 1], episode length and
    /// count at least 1.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("zeta", self.zeta),
            ("epsilon", self.epsilon),
            ("alpha", self.alpha),
            ("tol", self.tol),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        if self.ep_len < 1 {
            return Err(Error::Config("ep_len must be at least 1".into()));
        }
        if self.ep_count < 1 {
            return Err(Error::Config("ep_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses a `key = value` configuration (one pair per line, `#` comments).
///
/// Recognized keys: `zeta`, `epsilon`, `alpha`, `tol`, `ep_len`, `ep_count`,
/// `seed`. Missing keys keep their defaults; unknown keys are errors.
pub fn parse_config(text: &str) -> Result<Hyperparams> {
    let mut hp = Hyperparams::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected key = value, got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| {
            Error::Config(format!(
                "line {}: {key} needs {what}, got {value:?}",
                lineno + 1
            ))
        };
        match key {
            "zeta" => hp.zeta = value.parse().map_err(|_| bad("a number"))?,
            "epsilon" => hp.epsilon = value.parse().map_err(|_| bad("a number"))?,
            "alpha" => hp.alpha = value.parse().map_err(|_| bad("a number"))?,
            "tol" => hp.tol = value.parse().map_err(|_| bad("a number"))?,
            "ep_len" => hp.ep_len = value.parse().map_err(|_| bad("a positive integer"))?,
            "ep_count" => hp.ep_count = value.parse().map_err(|_| bad("a positive integer"))?,
            "seed" => hp.seed = value.parse().map_err(|_| bad("an integer"))?,
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key {other:?}",
                    lineno + 1
                )))
            }
        }
    }
    hp.validate()?;
    Ok(hp)
}

/// An environment state: (model state, automaton state).
pub type EnvState = (StateId, StateId);

/// An environment action: (model action index, automaton successor).
pub type EnvAction = (usize, StateId);

/// The episodic product environment.
#[derive(Debug)]
pub struct Env<'a> {
    m: &'a LabeledMDP,
    aut: &'a BuchiAutomaton,
    hp: Hyperparams,
    /// The one letter each model state emits.
    letters: Vec<Letter>,
    q0: StateId,
}

/// Builds the environment, validating that the model's labels factor through
/// the source state (every transition leaving a state carries the same
/// letter) so the automaton can move before the successor is sampled.
pub fn make_env<'a>(
    m: &'a LabeledMDP,
    aut: &'a BuchiAutomaton,
    hp: Hyperparams,
) -> Result<Env<'a>> {
    hp.validate()?;
    if m.ap_list() != aut.ap_list() {
        return Err(Error::AlphabetMismatch {
            left: m.ap_list().to_vec(),
            right: aut.ap_list().to_vec(),
        });
    }
    if aut.initial().len() != 1 {
        return Err(Error::MultipleInitialStates(aut.initial().len()));
    }
    let letters = state_letters(m)?;
    Ok(Env {
        m,
        aut,
        hp,
        letters,
        q0: *aut.initial().first().unwrap(),
    })
}

/// The single letter per state, or a label-convention violation.
fn state_letters(m: &LabeledMDP) -> Result<Vec<Letter>> {
    let mut letters = Vec::with_capacity(m.num_states());
    for s in 0..m.num_states() {
        let mut found: Option<Letter> = None;
        for act in m.actions(s) {
            for t in &act.transitions {
                match found {
                    None => found = Some(t.letter),
                    Some(l) if l == t.letter => {}
                    Some(l) => {
                        return Err(Error::InvalidMdp(format!(
                            "label-convention violation: state {s} emits both \
                             letter {l:#b} and letter {:#b}",
                            t.letter
                        )))
                    }
                }
            }
        }
        // A state without transitions cannot occur (validated by the MDP),
        // but default defensively.
        letters.push(found.unwrap_or(0));
    }
    Ok(letters)
}

impl<'a> Env<'a> {
    /// The initial environment state.
    pub fn initial(&self) -> EnvState {
        (self.m.initial(), self.q0)
    }

    /// Hyperparameters the environment was built with.
    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    /// The model and automaton behind the environment.
    pub fn parts(&self) -> (&'a LabeledMDP, &'a BuchiAutomaton) {
        (self.m, self.aut)
    }

    /// Valid actions at `state`, sorted by (model action, successor). Empty
    /// when the automaton cannot follow the state's letter (the run died).
    pub fn available(&self, state: EnvState) -> Vec<EnvAction> {
        let (s, q) = state;
        let succs: Vec<StateId> = self
            .aut
            .transitions_on(q, self.letters[s])
            .iter()
            .map(|t| t.dst)
            .collect();
        let mut out = Vec::with_capacity(self.m.actions(s).len() * succs.len());
        for ai in 0..self.m.actions(s).len() {
            for &qp in &succs {
                out.push((ai, qp));
            }
        }
        out
    }

    /// Takes one step: the automaton moves to the chosen successor on the
    /// current letter, the model samples a branch, and a marked automaton
    /// step pays reward 1 and terminates with probability `1 − ζ`.
    ///
    /// Random draws, in order: the model successor, then (only on a marked
    /// step) the termination coin.
    pub fn step(
        &self,
        state: EnvState,
        action: EnvAction,
        rng: &mut ChaCha8Rng,
    ) -> Result<(EnvState, f64, bool)> {
        let (s, q) = state;
        let (ai, qp) = action;
        let accepting = self
            .aut
            .lookup(q, self.letters[s], qp)
            .ok_or_else(|| {
                Error::InvalidAutomaton(format!(
                    "invalid automaton successor {qp} from state {q} on letter {:#b}",
                    self.letters[s]
                ))
            })?;
        let transitions = &self
            .m
            .actions(s)
            .get(ai)
            .ok_or_else(|| Error::InvalidMdp(format!("state {s} has no action {ai}")))?
            .transitions;
        let mut u: f64 = rng.random();
        let mut dst = transitions.last().map(|t| t.dst).unwrap_or(s);
        for t in transitions {
            if u < t.prob {
                dst = t.dst;
                break;
            }
            u -= t.prob;
        }
        if accepting {
            let coin: f64 = rng.random();
            if coin >= self.hp.zeta {
                return Ok(((dst, qp), 1.0, true));
            }
        }
        Ok(((dst, qp), 0.0, false))
    }
}

/// A learned action-value table with its greedy readout rule.
#[derive(Debug, Clone, Default)]
pub struct QPolicy {
    /// Action values; absent entries count as 0.
    pub q: HashMap<(EnvState, EnvAction), f64>,
    /// Values within `tol` of the maximum tie; ties and unvisited states
    /// resolve to the lowest action index.
    pub tol: f64,
}

impl QPolicy {
    /// The stored value of a pair (0 when never updated).
    pub fn value(&self, state: EnvState, action: EnvAction) -> f64 {
        self.q.get(&(state, action)).copied().unwrap_or(0.0)
    }

    /// Greedy choice among `available` (which must be non-empty): the first
    /// action whose value is within `tol` of the best.
    pub fn greedy(&self, state: EnvState, available: &[EnvAction]) -> EnvAction {
        let best = available
            .iter()
            .map(|&a| self.value(state, a))
            .fold(f64::NEG_INFINITY, f64::max);
        available
            .iter()
            .copied()
            .find(|&a| self.value(state, a) >= best - self.tol)
            .expect("greedy needs at least one available action")
    }
}

/// One row of the learning trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based episode number.
    pub episode: usize,
    /// Total reward collected in the episode (0 or 1 under this scheme).
    pub ret: f64,
    /// Exact satisfaction probability of the greedy policy, when evaluated
    /// at this episode.
    pub evaluated: Option<f64>,
}

/// Result of a learning run.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub policy: QPolicy,
    pub trace: Vec<EpisodeRecord>,
    /// Exact satisfaction probability of the final greedy policy.
    pub final_value: f64,
}

/// Tabular Q-learning on the environment.
///
/// Behavior is ε-greedy from a PRNG seeded with the hyperparameter seed, so
/// a fixed seed reproduces the trace and table bit for bit. Draws happen in
/// a fixed order per step: the exploration coin, a uniform action draw only
/// when exploring, then the environment's draws. The exploit branch uses
/// the same deterministic tie rule as the greedy readout (lowest action
/// index within `tol` of the best), which keeps the visited corridor and
/// the evaluated corridor aligned. Updates use
/// `Q ← Q + α(r + γ_d·max Q(next) − Q)` with `γ_d = 1` on continuing
/// steps and `γ_d = 0` when the episode ends — by payout, by the automaton
/// dying, or by the step limit. When `eval_every` is set, the greedy policy
/// is evaluated exactly every that many episodes (and after the last).
pub fn q_learning(env: &Env, eval_every: Option<usize>) -> Result<LearnOutcome> {
    let hp = *env.hyperparams();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut policy = QPolicy {
        q: HashMap::new(),
        tol: hp.tol,
    };
    let mut trace = Vec::with_capacity(hp.ep_count);
    let (m, aut) = env.parts();
    for episode in 1..=hp.ep_count {
        let mut state = env.initial();
        let mut ret = 0.0;
        for step in 0..hp.ep_len {
            let available = env.available(state);
            if available.is_empty() {
                break;
            }
            let explore: f64 = rng.random();
            let action = if explore < hp.epsilon {
                available[rng.random_range(0..available.len())]
            } else {
                policy.greedy(state, &available)
            };
            let (next, reward, paid_out) = env.step(state, action, &mut rng)?;
            ret += reward;
            let next_available = env.available(next);
            let died = next_available.is_empty();
            let truncated = step + 1 == hp.ep_len;
            let terminal = paid_out || died || truncated;
            let bootstrap = if terminal {
                0.0
            } else {
                next_available
                    .iter()
                    .map(|&a| policy.value(next, a))
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let old = policy.value(state, action);
            let updated = old + hp.alpha * (reward + bootstrap - old);
            policy.q.insert((state, action), updated);
            if paid_out || died {
                break;
            }
            state = next;
        }
        let evaluated = match eval_every {
            Some(k) if k > 0 && (episode % k == 0 || episode == hp.ep_count) => {
                Some(evaluate_policy(m, aut, &policy)?)
            }
            _ => None,
        };
        trace.push(EpisodeRecord {
            episode,
            ret,
            evaluated,
        });
    }
    let final_value = evaluate_policy(m, aut, &policy)?;
    Ok(LearnOutcome {
        policy,
        trace,
        final_value,
    })
}

/// Convenience wrapper: build the environment, learn, and evaluate.
pub fn learn(
    m: &LabeledMDP,
    a: &BuchiAutomaton,
    hp: Hyperparams,
    eval_every: Option<usize>,
) -> Result<LearnOutcome> {
    let env = make_env(m, a, hp)?;
    q_learning(&env, eval_every)
}

/// Exact satisfaction probability of the policy's greedy strategy: the
/// probability that the induced chain reaches a bottom component with a
/// marked transition, at tolerance 1e-9.
///
/// The chain is built over the product states the greedy strategy actually
/// reaches; unvisited states fall back to the lowest-index action, and
/// states where the automaton is stuck fall to an absorbing rejecting sink.
pub fn evaluate_policy(m: &LabeledMDP, aut: &BuchiAutomaton, policy: &QPolicy) -> Result<f64> {
    if m.ap_list() != aut.ap_list() {
        return Err(Error::AlphabetMismatch {
            left: m.ap_list().to_vec(),
            right: aut.ap_list().to_vec(),
        });
    }
    if aut.initial().len() != 1 {
        return Err(Error::MultipleInitialStates(aut.initial().len()));
    }
    let letters = state_letters(m)?;
    let q0 = *aut.initial().first().unwrap();
    let mut index: HashMap<EnvState, usize> = HashMap::new();
    let mut states: Vec<EnvState> = Vec::new();
    let mut rows: Vec<Vec<(f64, usize, bool)>> = Vec::new();
    let start = (m.initial(), q0);
    index.insert(start, 0);
    states.push(start);
    let mut next = 0usize;
    while next < states.len() {
        let (s, q) = states[next];
        // Recompute the action menu exactly as the environment offers it.
        let succs: Vec<StateId> = aut
            .transitions_on(q, letters[s])
            .iter()
            .map(|t| t.dst)
            .collect();
        let mut available: Vec<EnvAction> = Vec::new();
        for ai in 0..m.actions(s).len() {
            for &qp in &succs {
                available.push((ai, qp));
            }
        }
        let mut row = Vec::new();
        if !available.is_empty() {
            let (ai, qp) = policy.greedy((s, q), &available);
            let accepting = aut
                .lookup(q, letters[s], qp)
                .expect("greedy returned an offered action");
            for t in &m.actions(s)[ai].transitions {
                let dst_pair = (t.dst, qp);
                let dst = *index.entry(dst_pair).or_insert_with(|| {
                    states.push(dst_pair);
                    states.len() - 1
                });
                row.push((t.prob, dst, accepting));
            }
        }
        rows.push(row);
        next += 1;
    }
    // Dead states (and any missing mass) absorb into a rejecting sink.
    let reject = rows.len();
    for row in rows.iter_mut() {
        let mass: f64 = row.iter().map(|&(p, _, _)| p).sum();
        if mass < 1.0 - crate::mdp::DISTRIBUTION_TOL {
            row.push((1.0 - mass, reject, false));
        }
    }
    rows.push(vec![(1.0, reject, false)]);
    let chain = MarkedChain {
        rows,
        initial: 0,
        reject,
    };
    Ok(chain_accepting_prob(&chain, 1e-9))
}

/// Renders a learning trace as CSV: `episode,return,evaluated_probability`,
/// with the third column filled only where an evaluation ran.
pub fn render_curve(trace: &[EpisodeRecord]) -> String {
    let mut out = String::from("episode,return,evaluated_probability\n");
    for r in trace {
        match r.evaluated {
            Some(v) => out.push_str(&format!("{},{},{}\n", r.episode, r.ret, v)),
            None => out.push_str(&format!("{},{},\n", r.episode, r.ret)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Transition;
    use crate::constructions::{build_sldba, build_slim, SldbaOptions, SlimOptions};
    use crate::mdp::parse_explicit;
    use crate::model_check::psat;
    use crate::prism::parse_prism_subset;
    use std::collections::BTreeSet;

    fn tr(src: usize, letter: u32, dst: usize, accepting: bool) -> Transition {
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
        initial: &[usize],
        transitions: Vec<Transition>,
    ) -> BuchiAutomaton {
        BuchiAutomaton::new(
            aps.iter().map(|s| s.to_string()).collect(),
            num_states,
            initial.iter().copied().collect::<BTreeSet<_>>(),
            transitions,
            vec![],
        )
        .unwrap()
    }

    /// "Eventually always p" over one proposition: wait at 0, jump to the
    /// accepting p-loop when betting the suffix is all-p.
    fn fgp(ap: &str) -> BuchiAutomaton {
        aut(
            &[ap],
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

    fn universal(ap: &str) -> BuchiAutomaton {
        aut(&[ap], 1, &[0], vec![tr(0, 0, 0, true), tr(0, 1, 0, true)])
    }

    const ODD_COUNTERS_SMALL: &str = "\
mdp
const int M = 2;
module pluck
  b0 : [0..M] init M;
  b1 : [0..M] init M;
  b2 : [0..M] init M;
  b3 : [0..M] init M;
  b4 : [0..M] init M;
  [a0] true -> (b0' = b0 > 0 ? b0-1 : b0);
  [a1] true -> (b1' = b1 > 0 ? b1-1 : b1);
  [a2] true -> (b2' = b2 > 0 ? b2-1 : b2);
  [a3] true -> (b3' = b3 > 0 ? b3-1 : b3);
  [a4] true -> (b4' = b4 > 0 ? b4-1 : b4);
endmodule
label \"odd\" = mod(b0+b1+b2+b3+b4,2) = 1;
";

    #[test]
    fn hyperparameter_ranges_are_enforced() {
        assert!(Hyperparams::default().validate().is_ok());
        for bad in [
            Hyperparams {
                zeta: 0.0,
                ..Default::default()
            },
            Hyperparams {
                epsilon: 1.5,
                ..Default::default()
            },
            Hyperparams {
                alpha: -0.1,
                ..Default::default()
            },
            Hyperparams {
                ep_len: 0,
                ..Default::default()
            },
            Hyperparams {
                ep_count: 0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn config_files_parse_with_comments_and_defaults() {
        let hp = parse_config(
            "# experiment settings\n\
             zeta = 0.99\n\
             epsilon = 0.05  # exploration\n\
             ep_count = 300\n\
             seed = 7\n",
        )
        .unwrap();
        assert_eq!(hp.zeta, 0.99);
        assert_eq!(hp.epsilon, 0.05);
        assert_eq!(hp.ep_count, 300);
        assert_eq!(hp.seed, 7);
        // Untouched keys keep their defaults.
        assert_eq!(hp.alpha, Hyperparams::default().alpha);
        assert!(parse_config("gamma = 0.5\n").is_err());
        assert!(parse_config("zeta\n").is_err());
        assert!(parse_config("zeta = heaps\n").is_err());
        assert!(parse_config("zeta = 0\n").is_err());
    }

    #[test]
    fn environments_reject_labels_that_depend_on_the_branch() {
        // One state whose two branches emit different letters: the letter
        // read by the automaton would not be known at decision time.
        let m = parse_explicit(
            "mdp-explicit 1\nap p\ninit 0\n\
             trans 0 go 0.5 0 1\ntrans 0 go 0.5 1 0\ntrans 1 stay 1 1 1\n",
        )
        .unwrap();
        let e = make_env(&m, &universal("p"), Hyperparams::default()).unwrap_err();
        assert!(e.to_string().contains("label-convention violation"), "{e}");
    }

    #[test]
    fn action_menus_pair_model_actions_with_automaton_successors() {
        let m = parse_explicit(
            "mdp-explicit 1\nap p\ninit 0\n\
             trans 0 x 1 0 1\ntrans 0 y 1 0 1\n",
        )
        .unwrap();
        // On the p-letter the automaton offers two successors.
        let a = aut(
            &["p"],
            3,
            &[0],
            vec![tr(0, 1, 1, false), tr(0, 1, 2, true), tr(1, 1, 1, true), tr(2, 1, 2, false)],
        );
        let env = make_env(&m, &a, Hyperparams::default()).unwrap();
        assert_eq!(
            env.available(env.initial()),
            vec![(0, 1), (0, 2), (1, 1), (1, 2)]
        );
        // A state whose letter the automaton cannot read offers nothing.
        let b = aut(&["p"], 1, &[0], vec![tr(0, 0, 0, true)]);
        let env = make_env(&m, &b, Hyperparams::default()).unwrap();
        assert!(env.available(env.initial()).is_empty());
    }

    #[test]
    fn markless_automata_earn_nothing() {
        let m = parse_explicit("mdp-explicit 1\nap p\ninit 0\ntrans 0 s 1 0 1\n").unwrap();
        let a = aut(&["p"], 1, &[0], vec![tr(0, 0, 0, false), tr(0, 1, 0, false)]);
        let hp = Hyperparams {
            ep_count: 50,
            ep_len: 20,
            ..Default::default()
        };
        let out = learn(&m, &a, hp, None).unwrap();
        assert!(out.trace.iter().all(|r| r.ret == 0.0));
        assert_eq!(out.final_value, 0.0);
    }

    #[test]
    fn a_single_accepting_loop_converges_to_value_one() {
        let m = parse_explicit("mdp-explicit 1\nap p\ninit 0\ntrans 0 s 1 0 1\n").unwrap();
        let a = universal("p");
        let hp = Hyperparams {
            zeta: 0.5,
            epsilon: 0.1,
            alpha: 0.5,
            ep_count: 400,
            ep_len: 50,
            ..Default::default()
        };
        let out = learn(&m, &a, hp, None).unwrap();
        let q = out.policy.value((0, 0), (0, 0));
        assert!(q > 0.9, "Q stayed at {q}");
        assert_eq!(out.final_value, 1.0);
        // Rewards arrive in (almost) every 50-step episode at ζ = 0.5.
        let hits = out.trace.iter().filter(|r| r.ret > 0.0).count();
        assert!(hits > 350, "only {hits} episodes paid out");
    }

    #[test]
    fn identical_seeds_reproduce_traces_and_tables_exactly() {
        let m = parse_prism_subset(ODD_COUNTERS_SMALL).unwrap();
        let slim = build_slim(&fgp("odd"), SlimOptions::default());
        let hp = Hyperparams {
            ep_count: 120,
            ep_len: 60,
            seed: 42,
            ..Default::default()
        };
        let a = learn(&m, &slim, hp, Some(40)).unwrap();
        let b = learn(&m, &slim, hp, Some(40)).unwrap();
        assert_eq!(a.trace, b.trace);
        let sort = |p: &QPolicy| {
            let mut v: Vec<_> = p.q.iter().map(|(&k, &val)| (k, val.to_bits())).collect();
            v.sort();
            v
        };
        assert_eq!(sort(&a.policy), sort(&b.policy));
        assert_eq!(a.final_value.to_bits(), b.final_value.to_bits());
        let c = learn(
            &m,
            &slim,
            Hyperparams {
                seed: 43,
                ..hp
            },
            None,
        )
        .unwrap();
        assert_ne!(sort(&a.policy), sort(&c.policy));
    }

    #[test]
    fn learned_policies_never_beat_the_optimum() {
        // The guessing game has optimum zero: no policy can evaluate higher.
        let m = parse_explicit(
            "mdp-explicit 1\nap b\ninit 0\n\
             trans 0 flip 0.5 0 0\ntrans 0 flip 0.5 1 0\n\
             trans 1 flip 0.5 0 1\ntrans 1 flip 0.5 1 1\n",
        )
        .unwrap();
        let guess = aut(
            &["b"],
            3,
            &[0],
            vec![
                tr(0, 0, 1, false),
                tr(0, 1, 1, false),
                tr(0, 0, 2, false),
                tr(0, 1, 2, false),
                tr(1, 0, 0, true),
                tr(2, 1, 0, true),
            ],
        );
        let optimum = psat(&m, &guess, 1e-9).unwrap().value();
        assert_eq!(optimum, 0.0);
        for seed in 0..5 {
            let hp = Hyperparams {
                ep_count: 100,
                ep_len: 30,
                seed,
                ..Default::default()
            };
            let out = learn(&m, &guess, hp, None).unwrap();
            assert!(out.final_value <= optimum + 1e-9);
        }
        // And on the small counter grid the optimum is one; learned policies
        // must stay below it (and a good run reaches it).
        let m = parse_prism_subset(ODD_COUNTERS_SMALL).unwrap();
        let slim = build_slim(&fgp("odd"), SlimOptions::default());
        let optimum = psat(&m, &slim, 1e-9).unwrap().value();
        assert_eq!(optimum, 1.0);
        let hp = Hyperparams {
            ep_count: 600,
            ep_len: 60,
            seed: 1,
            ..Default::default()
        };
        let out = learn(&m, &slim, hp, None).unwrap();
        assert!(out.final_value <= optimum + 1e-9);
        assert!(out.final_value >= 0.95, "learned only {}", out.final_value);
    }

    #[test]
    fn premature_jumps_into_a_cautious_component_reject() {
        // p alternates forever, so betting on "p from now on" always dies.
        let m = parse_explicit(
            "mdp-explicit 1\nap p\ninit 0\n\
             trans 0 s 1 1 0\ntrans 1 s 1 0 1\n",
        )
        .unwrap();
        let jumpy = fgp("p");
        // A hand-made table that always prefers jumping to state 1.
        let mut policy = QPolicy {
            q: HashMap::new(),
            tol: 0.01,
        };
        policy.q.insert(((0, 0), (0, 1)), 1.0);
        policy.q.insert(((1, 0), (0, 1)), 1.0);
        let v = evaluate_policy(&m, &jumpy, &policy).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn evaluation_matches_the_product_route() {
        // Cross-check the lazily built chain against the full product and
        // the model checker's chain analysis.
        let m = parse_prism_subset(ODD_COUNTERS_SMALL).unwrap();
        let slim = build_slim(&fgp("odd"), SlimOptions::default());
        let hp = Hyperparams {
            ep_count: 200,
            ep_len: 60,
            seed: 3,
            ..Default::default()
        };
        let out = learn(&m, &slim, hp, None).unwrap();
        let p = crate::mdp::product(&m, &slim).unwrap();
        let mut choice = vec![None; p.num_states()];
        for (i, &(s, q)) in p.states().iter().enumerate() {
            let available: Vec<EnvAction> = p
                .actions(i)
                .iter()
                .map(|(pa, _)| (pa.mdp_action, pa.aut_successor))
                .collect();
            if !available.is_empty() {
                let pick = out.policy.greedy((s, q), &available);
                choice[i] = available.iter().position(|&a| a == pick);
            }
        }
        let chain = crate::mdp::induced_chain(&p, &crate::mdp::PositionalStrategy { choice })
            .unwrap();
        let via_product = chain_accepting_prob(&chain, 1e-9);
        assert!(
            (out.final_value - via_product).abs() < 1e-9,
            "{} vs {via_product}",
            out.final_value
        );
    }

    #[test]
    fn branching_stays_small_for_slim_and_wide_for_subset_jumps() {
        // The counter-depletion model against both constructions of the
        // "eventually one proposition holds forever" objective over five
        // propositions: per decision point, the slim automaton offers at
        // most two automaton successors, the jumping one strictly more.
        let text = "\
mdp
const int M = 12;
module m
  b : [0..M] init M;
  [a] true -> (b' = b > 0 ? b-1 : b);
endmodule
label \"p0\" = b > 0;
label \"p1\" = b > 1;
label \"p2\" = b > 2;
label \"p3\" = b > 3;
label \"p4\" = b = 0;
";
        let m = parse_prism_subset(text).unwrap();
        // One automaton state per proposition to stabilize on, plus a hub.
        let aps = ["p0", "p1", "p2", "p3", "p4"];
        let mut ts = Vec::new();
        for l in 0..32u32 {
            ts.push(tr(0, l, 0, false));
            for (i, _) in aps.iter().enumerate() {
                if l & (1 << i) != 0 {
                    ts.push(tr(0, l, i + 1, false));
                    ts.push(tr(i + 1, l, i + 1, true));
                }
            }
        }
        let nba = aut(&aps, 6, &[0], ts);
        let slim = build_slim(&nba, SlimOptions::default());
        let wide = build_sldba(&nba, SldbaOptions::default()).unwrap();
        let hp = Hyperparams::default();
        let max_succ = |a: &BuchiAutomaton| -> usize {
            let env = make_env(&m, a, hp).unwrap();
            let mut queue = vec![env.initial()];
            let mut seen: std::collections::HashSet<EnvState> = queue.iter().copied().collect();
            let mut widest = 0;
            let mut i = 0;
            while i < queue.len() {
                let state = queue[i];
                i += 1;
                let avail = env.available(state);
                let succs: BTreeSet<StateId> = avail.iter().map(|&(_, q)| q).collect();
                widest = widest.max(succs.len());
                for &(ai, qp) in &avail {
                    for t in &m.actions(state.0)[ai].transitions {
                        if seen.insert((t.dst, qp)) {
                            queue.push((t.dst, qp));
                        }
                    }
                }
            }
            widest
        };
        assert!(max_succ(&slim) <= 2);
        assert!(max_succ(&wide) >= 3);
    }

    #[test]
    fn curves_render_the_frozen_csv_shape() {
        let trace = vec![
            EpisodeRecord {
                episode: 1,
                ret: 0.0,
                evaluated: None,
            },
            EpisodeRecord {
                episode: 2,
                ret: 1.0,
                evaluated: Some(0.5),
            },
        ];
        assert_eq!(
            render_curve(&trace),
            "episode,return,evaluated_probability\n1,0,\n2,1,0.5\n"
        );
    }

    #[test]
    fn evaluation_interval_populates_the_trace() {
        let m = parse_explicit("mdp-explicit 1\nap p\ninit 0\ntrans 0 s 1 0 1\n").unwrap();
        let hp = Hyperparams {
            ep_count: 10,
            ep_len: 5,
            ..Default::default()
        };
        let out = learn(&m, &universal("p"), hp, Some(4)).unwrap();
        let evaluated: Vec<usize> = out
            .trace
            .iter()
            .filter(|r| r.evaluated.is_some())
            .map(|r| r.episode)
            .collect();
        assert_eq!(evaluated, vec![4, 8, 10]);
    }
}
