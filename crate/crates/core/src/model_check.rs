//! End-component analysis and probabilistic model checking on products.
//!
//! The pipeline: decompose a product into maximal end components, keep the
//! accepting ones, and compute the maximal probability of reaching their
//! union. That probability is the maximal probability of satisfying the
//! product's Büchi condition, and an optimal positional strategy combines a
//! reachability strategy outside the accepting components with a recurrent
//! sweep inside each of them.

use crate::automata::{bounded_language_equal, BuchiAutomaton, LanguageComparison};
use crate::mdp::{
    product, LabeledMDP, MarkedChain, PositionalStrategy, ProductMDP, DISTRIBUTION_TOL,
};
use crate::{Error, Result};

/// Default convergence tolerance for value iteration.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A set of product states closed and strongly connected under a set of
/// allowed state-action pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndComponent {
    /// Member product states, ascending.
    pub states: Vec<usize>,
    /// Allowed action indices per member, parallel to `states`, ascending.
    /// Every allowed action has full probability mass and all its successors
    /// inside `states`.
    pub allowed: Vec<Vec<usize>>,
}

impl EndComponent {
    /// Whether `s` belongs to this component.
    pub fn contains(&self, s: usize) -> bool {
        self.states.binary_search(&s).is_ok()
    }

    /// Whether some allowed pair carries a mark.
    pub fn is_accepting(&self, p: &ProductMDP) -> bool {
        self.states.iter().zip(&self.allowed).any(|(&s, acts)| {
            acts.iter()
                .any(|&a| p.actions(s)[a].1.iter().any(|t| t.accepting))
        })
    }
}

/// Iterative Tarjan over a local adjacency list; returns the components as
/// vectors of local node ids.
fn sccs(adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = adj.len();
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut comps: Vec<Vec<u32>> = Vec::new();
    let mut counter = 0u32;
    // (node, next edge cursor) frames replace recursion.
    let mut frames: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        frames.push((root, 0));
        loop {
            let (v, cursor) = match frames.last() {
                Some(&f) => (f.0 as usize, f.1),
                None => break,
            };
            if cursor < adj[v].len() {
                frames.last_mut().unwrap().1 += 1;
                let w = adj[v][cursor] as usize;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    frames.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(u, _)) = frames.last() {
                    low[u as usize] = low[u as usize].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w as usize] = false;
                        comp.push(w);
                        if w as usize == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

fn full_mass(branches: &[crate::mdp::ProductTransition]) -> bool {
    branches.iter().map(|t| t.prob).sum::<f64>() >= 1.0 - DISTRIBUTION_TOL
}

/// Computes the maximal-end-component decomposition.
///
/// Only full-mass actions can participate: a substochastic action loses mass
/// to the implicit rejecting sink, which no end component contains. The
/// result is the unique set of pairwise-disjoint maximal end components,
/// ordered by their smallest state.
pub fn max_end_components(p: &ProductMDP) -> Vec<EndComponent> {
    let n = p.num_states();
    let candidate: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            p.actions(i)
                .iter()
                .enumerate()
                .filter(|(_, (_, ts))| full_mass(ts))
                .map(|(ai, _)| ai)
                .collect()
        })
        .collect();
    let mut inside = vec![false; n];
    let mut local = vec![u32::MAX; n];
    let mut mecs: Vec<EndComponent> = Vec::new();
    let mut work: Vec<Vec<usize>> = vec![(0..n).collect()];
    while let Some(mut blob) = work.pop() {
        for &s in &blob {
            inside[s] = true;
        }
        // Drop states whose candidate actions all leave the blob, to a
        // fixpoint (each pass shrinks the blob or stops).
        loop {
            let before = blob.len();
            blob.retain(|&s| {
                let live = candidate[s].iter().any(|&a| {
                    p.actions(s)[a].1.iter().all(|t| inside[t.dst])
                });
                if !live {
                    inside[s] = false;
                }
                live
            });
            if blob.len() == before {
                break;
            }
        }
        if blob.is_empty() {
            continue;
        }
        // Strongly connected components of the surviving subgraph.
        for (k, &s) in blob.iter().enumerate() {
            local[s] = k as u32;
        }
        let adj: Vec<Vec<u32>> = blob
            .iter()
            .map(|&s| {
                let mut out: Vec<u32> = candidate[s]
                    .iter()
                    .filter(|&&a| p.actions(s)[a].1.iter().all(|t| inside[t.dst]))
                    .flat_map(|&a| p.actions(s)[a].1.iter().map(|t| local[t.dst]))
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        let comps = sccs(&adj);
        if comps.len() == 1 && comps[0].len() == blob.len() {
            let mut states = blob.clone();
            states.sort_unstable();
            let allowed = states
                .iter()
                .map(|&s| {
                    candidate[s]
                        .iter()
                        .copied()
                        .filter(|&a| p.actions(s)[a].1.iter().all(|t| inside[t.dst]))
                        .collect()
                })
                .collect();
            mecs.push(EndComponent { states, allowed });
        } else {
            for comp in comps {
                work.push(comp.iter().map(|&k| blob[k as usize]).collect());
            }
        }
        for &s in &blob {
            inside[s] = false;
            local[s] = u32::MAX;
        }
    }
    mecs.sort_by_key(|c| c.states[0]);
    mecs
}

/// The maximal end components containing a marked allowed pair.
pub fn accepting_mecs(p: &ProductMDP) -> Vec<EndComponent> {
    max_end_components(p)
        .into_iter()
        .filter(|c| c.is_accepting(p))
        .collect()
}

/// Result of a quantitative check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    /// Value at the initial state.
    pub value: f64,
    /// Value per product state.
    pub values: Vec<f64>,
    /// A positional strategy attaining the values.
    pub strategy: PositionalStrategy,
    /// Sup-norm of the last value-iteration step.
    pub residual: f64,
    /// Number of value-iteration sweeps.
    pub iterations: usize,
}

/// States from which the target is reachable at all (under some strategy).
fn can_reach(p: &ProductMDP, target: &[bool]) -> Vec<bool> {
    let n = p.num_states();
    // Reverse adjacency over every branch with positive probability.
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for (_, ts) in p.actions(i) {
            for t in ts {
                rev[t.dst].push(i as u32);
            }
        }
    }
    let mut can = target.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&i| can[i]).collect();
    while let Some(i) = stack.pop() {
        for &s in &rev[i] {
            if !can[s as usize] {
                can[s as usize] = true;
                stack.push(s as usize);
            }
        }
    }
    can
}

/// States with a strategy reaching the target with probability one
/// (the standard double fixpoint; only full-mass actions are safe, since
/// missing mass escapes to the rejecting sink).
fn almost_sure_reach(p: &ProductMDP, target: &[bool]) -> Vec<bool> {
    let n = p.num_states();
    let mut u = vec![true; n];
    loop {
        // Least fixpoint: v grows from the target through actions staying in
        // `u` that touch `v`.
        let mut v = target.to_vec();
        loop {
            let mut grew = false;
            for s in 0..n {
                if v[s] || !u[s] {
                    continue;
                }
                let ok = p.actions(s).iter().any(|(_, ts)| {
                    full_mass(ts)
                        && ts.iter().all(|t| u[t.dst])
                        && ts.iter().any(|t| v[t.dst])
                });
                if ok {
                    v[s] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if v == u {
            return u;
        }
        u = v;
    }
}

/// Maximal probability of reaching `target`, by Gauss–Seidel value iteration
/// after qualitative precomputation (so probabilities 0 and 1 are exact).
///
/// The returned strategy is greedy on the converged values with ties broken
/// by the lowest action index, assigned in layers growing backward from the
/// target so that value-preserving cycles are never selected.
pub fn max_reach_prob(p: &ProductMDP, target: &[bool], tol: f64) -> CheckResult {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = p.num_states();
    assert_eq!(target.len(), n, "target mask must cover the product");
    let can = can_reach(p, target);
    let sure = almost_sure_reach(p, target);
    let mut x = vec![0.0f64; n];
    for s in 0..n {
        if sure[s] {
            x[s] = 1.0;
        }
    }
    let middle: Vec<usize> = (0..n).filter(|&s| can[s] && !sure[s]).collect();
    let backup = |x: &[f64], s: usize, a: usize| -> f64 {
        p.actions(s)[a]
            .1
            .iter()
            .map(|t| t.prob * x[t.dst])
            .sum::<f64>()
    };
    let mut residual = 0.0;
    let mut iterations = 0;
    if !middle.is_empty() {
        loop {
            iterations += 1;
            let mut delta = 0.0f64;
            for &s in &middle {
                let best = (0..p.actions(s).len())
                    .map(|a| backup(&x, s, a))
                    .fold(0.0f64, f64::max);
                delta = delta.max((best - x[s]).abs());
                x[s] = best;
            }
            residual = delta;
            if delta < tol {
                break;
            }
        }
    }
    // Strategy extraction: layers grow backward from the target through
    // near-greedy actions that step into an already-assigned layer, so the
    // induced chain always makes progress toward the target.
    let mut choice: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut remaining: Vec<usize> = Vec::new();
    for s in 0..n {
        if target[s] || x[s] <= 0.0 {
            if !p.actions(s).is_empty() {
                choice[s] = Some(0);
            }
            done[s] = target[s];
        } else {
            remaining.push(s);
        }
    }
    while !remaining.is_empty() {
        let mut assigned_any = false;
        let mut next_remaining = Vec::new();
        let mut newly = Vec::new();
        for &s in &remaining {
            let best = (0..p.actions(s).len())
                .map(|a| backup(&x, s, a))
                .fold(0.0f64, f64::max);
            let pick = (0..p.actions(s).len()).find(|&a| {
                backup(&x, s, a) >= best - 1e-12
                    && p.actions(s)[a].1.iter().any(|t| done[t.dst])
            });
            match pick {
                Some(a) => {
                    choice[s] = Some(a);
                    newly.push(s);
                    assigned_any = true;
                }
                None => next_remaining.push(s),
            }
        }
        for s in newly {
            done[s] = true;
        }
        remaining = next_remaining;
        if !assigned_any {
            // Numerical noise can hide every progressing action; fall back to
            // plain greedy for the leftovers rather than looping forever.
            for &s in &remaining {
                let best = (0..p.actions(s).len())
                    .map(|a| backup(&x, s, a))
                    .fold(0.0f64, f64::max);
                choice[s] =
                    (0..p.actions(s).len()).find(|&a| backup(&x, s, a) >= best - 1e-12);
            }
            break;
        }
    }
    CheckResult {
        value: x[p.initial()],
        values: x,
        strategy: PositionalStrategy { choice },
        residual,
        iterations,
    }
}

/// Overlays the recurrent strategy for one accepting end component: states
/// owning a marked allowed action take it (lowest index first), everyone
/// else steps toward them through allowed actions, assigned in backward
/// layers. The induced chain stays inside the component and fires marks
/// forever, almost surely.
fn overlay_component_strategy(
    p: &ProductMDP,
    ec: &EndComponent,
    prefer_high: bool,
    choice: &mut [Option<usize>],
) {
    let order = |acts: &[usize]| -> Vec<usize> {
        let mut v = acts.to_vec();
        if prefer_high {
            v.reverse();
        }
        v
    };
    let mut done = vec![false; ec.states.len()];
    for (k, &s) in ec.states.iter().enumerate() {
        if let Some(a) = order(&ec.allowed[k])
            .into_iter()
            .find(|&a| p.actions(s)[a].1.iter().any(|t| t.accepting))
        {
            choice[s] = Some(a);
            done[k] = true;
        }
    }
    loop {
        let mut progressed = false;
        for k in 0..ec.states.len() {
            if done[k] {
                continue;
            }
            let s = ec.states[k];
            let into_done = |a: usize| {
                p.actions(s)[a]
                    .1
                    .iter()
                    .any(|t| ec.states.binary_search(&t.dst).map_or(false, |j| done[j]))
            };
            if let Some(a) = order(&ec.allowed[k]).into_iter().find(|&a| into_done(a)) {
                choice[s] = Some(a);
                done[k] = true;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    // Strong connectivity under allowed pairs guarantees full coverage.
    debug_assert!(done.iter().all(|&d| d));
}

/// A maximal-satisfaction analysis of one product.
#[derive(Debug, Clone)]
pub struct PsatAnalysis {
    /// Reachability values, residual, iterations, and the combined strategy.
    pub check: CheckResult,
    /// The analyzed product.
    pub product: ProductMDP,
    /// Number of maximal end components.
    pub num_mecs: usize,
    /// Number of accepting maximal end components.
    pub num_aecs: usize,
}

impl PsatAnalysis {
    /// The satisfaction probability at the initial state.
    pub fn value(&self) -> f64 {
        self.check.value
    }
}

/// Maximal probability that a run of the product satisfies its Büchi
/// condition, starting from an already-built product.
pub fn psat_product(p: ProductMDP, tol: f64) -> PsatAnalysis {
    let mecs = max_end_components(&p);
    let accepting: Vec<&EndComponent> = mecs.iter().filter(|c| c.is_accepting(&p)).collect();
    let mut target = vec![false; p.num_states()];
    for c in &accepting {
        for &s in &c.states {
            target[s] = true;
        }
    }
    let mut check = max_reach_prob(&p, &target, tol);
    for c in &accepting {
        overlay_component_strategy(&p, c, false, &mut check.strategy.choice);
    }
    let num_aecs = accepting.len();
    PsatAnalysis {
        check,
        product: p,
        num_mecs: mecs.len(),
        num_aecs,
    }
}

/// Maximal probability that `m`, controlled adversarially together with the
/// automaton's nondeterminism, produces a word and run accepted by `a`
/// (the syntactic satisfaction value).
pub fn psat(m: &LabeledMDP, a: &BuchiAutomaton, tol: f64) -> Result<PsatAnalysis> {
    Ok(psat_product(product(m, a)?, tol))
}

/// Guards a reference automaton: it must agree with the input on all lasso
/// words up to a small bound. Starts generously and shrinks the bound when
/// the enumeration would be too large; a genuine disagreement is reported as
/// a reference mismatch with the distinguishing word.
fn check_reference_language(a: &BuchiAutomaton, reference: &BuchiAutomaton) -> Result<()> {
    for cap in [3usize, 2, 1] {
        match bounded_language_equal(a, reference, cap) {
            Ok(LanguageComparison::EqualUpToBound { .. }) => return Ok(()),
            Ok(LanguageComparison::Counterexample {
                word,
                accepted_by_left,
            }) => {
                let (accepted, rejected) = if accepted_by_left {
                    ("the input automaton", "the reference")
                } else {
                    ("the reference", "the input automaton")
                };
                return Err(Error::ReferenceMismatch {
                    word: word.to_string(),
                    accepted: accepted.to_string(),
                    rejected: rejected.to_string(),
                });
            }
            Err(Error::LassoBoundExceeded { .. }) if cap > 1 => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!("cap 1 either returns a comparison or a hard error")
}

/// The semantic satisfaction value of `a` on `m`, computed through a
/// language-equivalent reference whose syntactic and semantic values agree
/// (deterministic, or one of the constructions that certify as such).
///
/// Language equivalence is the caller's obligation; a bounded lasso
/// comparison runs as a guard and a disagreement is an error naming the
/// distinguishing word.
pub fn psemsat_via_reference(
    m: &LabeledMDP,
    a: &BuchiAutomaton,
    reference: &BuchiAutomaton,
    tol: f64,
) -> Result<PsatAnalysis> {
    a.require_same_alphabet(reference)?;
    check_reference_language(a, reference)?;
    psat(m, reference, tol)
}

/// Outcome of testing one MDP instance against an automaton and a reference.
#[derive(Debug, Clone)]
pub struct RefutationOutcome {
    /// Semantic minus syntactic value.
    pub gap: f64,
    /// Whether the gap exceeds the decision threshold.
    pub refuted: bool,
    /// The syntactic analysis (product with `a` itself).
    pub syntactic: PsatAnalysis,
    /// The semantic analysis (product with the reference).
    pub semantic: PsatAnalysis,
}

/// Tests whether `m` witnesses that `a` under-achieves its semantic value,
/// i.e. refutes the property that syntactic and semantic satisfaction agree
/// on every MDP. The instance refutes when the semantic value exceeds the
/// syntactic one by more than `max(10·tol, 1e-6)`.
pub fn refute_gfm_on_instance(
    m: &LabeledMDP,
    a: &BuchiAutomaton,
    reference: &BuchiAutomaton,
    tol: f64,
) -> Result<RefutationOutcome> {
    let syntactic = psat(m, a, tol)?;
    let semantic = psemsat_via_reference(m, a, reference, tol)?;
    let gap = semantic.value() - syntactic.value();
    let refuted = gap > (10.0 * tol).max(1e-6);
    Ok(RefutationOutcome {
        gap,
        refuted,
        syntactic,
        semantic,
    })
}

/// Probability that a run of the chain takes marked transitions infinitely
/// often: the probability of reaching a bottom component that contains a
/// marked edge. Exact 0/1 cases are resolved graph-theoretically; the rest
/// converges by Gauss–Seidel iteration below `tol`.
pub fn chain_accepting_prob(chain: &MarkedChain, tol: f64) -> f64 {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = chain.rows.len();
    let adj: Vec<Vec<u32>> = chain
        .rows
        .iter()
        .map(|row| {
            let mut out: Vec<u32> = row
                .iter()
                .filter(|&&(p, _, _)| p > 0.0)
                .map(|&(_, d, _)| d as u32)
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let comps = sccs(&adj);
    let mut comp_of = vec![usize::MAX; n];
    for (ci, comp) in comps.iter().enumerate() {
        for &s in comp {
            comp_of[s as usize] = ci;
        }
    }
    let mut target = vec![false; n];
    for comp in &comps {
        let bottom = comp
            .iter()
            .all(|&s| adj[s as usize].iter().all(|&d| comp_of[d as usize] == comp_of[s as usize]));
        if !bottom {
            continue;
        }
        let marked = comp.iter().any(|&s| {
            chain.rows[s as usize]
                .iter()
                .any(|&(p, _, m)| p > 0.0 && m)
        });
        if marked {
            for &s in comp {
                target[s as usize] = true;
            }
        }
    }
    // Reverse reachability for the exact-zero states.
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (s, row) in adj.iter().enumerate() {
        for &d in row {
            rev[d as usize].push(s as u32);
        }
    }
    let mut can = target.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&s| can[s]).collect();
    while let Some(s) = stack.pop() {
        for &u in &rev[s] {
            if !can[u as usize] {
                can[u as usize] = true;
                stack.push(u as usize);
            }
        }
    }
    // Exact-one states: those that cannot reach a zero state without first
    // passing through the target (the target absorbs).
    let mut reaches_zero = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&s| !can[s]).collect();
    for &s in &stack {
        reaches_zero[s] = true;
    }
    while let Some(s) = stack.pop() {
        for &u in &rev[s] {
            let u = u as usize;
            if !reaches_zero[u] && !target[u] {
                reaches_zero[u] = true;
                stack.push(u);
            }
        }
    }
    let mut x = vec![0.0f64; n];
    let mut middle = Vec::new();
    for s in 0..n {
        if can[s] && !reaches_zero[s] || target[s] {
            x[s] = 1.0;
        } else if can[s] {
            middle.push(s);
        }
    }
    if !middle.is_empty() {
        loop {
            let mut delta = 0.0f64;
            for &s in &middle {
                let v: f64 = chain.rows[s].iter().map(|&(p, d, _)| p * x[d]).sum();
                delta = delta.max((v - x[s]).abs());
                x[s] = v;
            }
            if delta < tol {
                break;
            }
        }
    }
    x[chain.initial]
}
