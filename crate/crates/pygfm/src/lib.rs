//! Python bindings for the gfmkit toolkit.
//!
//! The module exposes the toolkit's main types and operations: Büchi
//! automata with HOA I/O, the slim and limit-deterministic constructions,
//! simulation games and good-for-MDPs certification, labeled MDPs with the
//! PRISM-subset and explicit formats, satisfaction probabilities, refutation
//! on instances, and tabular Q-learning.

use std::collections::BTreeSet;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use gfmkit::automata::{bounded_language_equal, BuchiAutomaton, LanguageComparison, LassoWord};
use gfmkit::constructions::{self, SldbaOptions, SlimOptions};
use gfmkit::hoa::{parse_hoa, read_hoa_file, write_hoa, write_hoa_file};
use gfmkit::mdp::{parse_explicit, write_explicit, LabeledMDP};
use gfmkit::model_check::{self, PsatAnalysis};
use gfmkit::prism::parse_prism_subset;
use gfmkit::rl::{self, Hyperparams};
use gfmkit::sim::{certify_gfm, decide_with_budget, Reference, SimLevel, DEFAULT_GAME_BUDGET};

fn err(e: gfmkit::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A transition-based nondeterministic Büchi automaton.
#[pyclass(frozen)]
struct Automaton {
    inner: BuchiAutomaton,
}

#[pymethods]
impl Automaton {
    /// Parses an automaton from HOA text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Automaton> {
        Ok(Automaton {
            inner: parse_hoa(text).map_err(err)?,
        })
    }

    /// Reads an automaton from a HOA file.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Automaton> {
        Ok(Automaton {
            inner: read_hoa_file(&path).map_err(err)?,
        })
    }

    /// Renders the automaton as HOA text.
    fn to_hoa(&self) -> String {
        write_hoa(&self.inner)
    }

    /// Writes the automaton to a HOA file.
    fn write(&self, path: PathBuf) -> PyResult<()> {
        write_hoa_file(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    /// Atomic propositions; bit `i` of a letter is `aps[i]`.
    #[getter]
    fn aps(&self) -> Vec<String> {
        self.inner.ap_list().to_vec()
    }

    #[getter]
    fn initial(&self) -> Vec<usize> {
        self.inner.initial().iter().copied().collect()
    }

    #[getter]
    fn num_transitions(&self) -> usize {
        self.inner.transitions().len()
    }

    #[getter]
    fn num_accepting(&self) -> usize {
        self.inner.num_accepting()
    }

    /// Largest number of distinct successors over all state–letter pairs.
    #[getter]
    fn branching_degree(&self) -> usize {
        constructions::branching_degree(&self.inner)
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }

    fn is_complete(&self) -> bool {
        self.inner.is_complete()
    }

    fn is_limit_deterministic(&self) -> bool {
        self.inner.is_limit_deterministic()
    }

    /// All transitions as `(src, letter, dst, accepting)` tuples.
    fn transitions(&self) -> Vec<(usize, u32, usize, bool)> {
        self.inner
            .transitions()
            .iter()
            .map(|t| (t.src, t.letter, t.dst, t.accepting))
            .collect()
    }

    /// The display name of a state, if the HOA source named it.
    fn state_name(&self, q: usize) -> Option<String> {
        self.inner.state_name(q).map(str::to_string)
    }

    /// Whether the automaton accepts the ultimately periodic word
    /// `prefix · period^ω` (letters as bitmasks over `aps`).
    fn accepts(&self, prefix: Vec<u32>, period: Vec<u32>) -> PyResult<bool> {
        if period.is_empty() {
            return Err(PyValueError::new_err("period must be non-empty"));
        }
        Ok(self.inner.accepts_lasso(&LassoWord::new(prefix, period)))
    }

    fn __repr__(&self) -> String {
        format!(
            "<Automaton states={} aps={:?} transitions={}>",
            self.inner.num_states(),
            self.inner.ap_list(),
            self.inner.transitions().len()
        )
    }
}

/// A finite MDP whose transitions emit letters over atomic propositions.
#[pyclass(frozen)]
struct Mdp {
    inner: LabeledMDP,
}

#[pymethods]
impl Mdp {
    /// Parses a model written in the guarded-command (PRISM-style) subset.
    #[staticmethod]
    fn from_prism(text: &str) -> PyResult<Mdp> {
        Ok(Mdp {
            inner: parse_prism_subset(text).map_err(err)?,
        })
    }

    /// Parses a model in the explicit `mdp-explicit` text format.
    #[staticmethod]
    fn from_explicit(text: &str) -> PyResult<Mdp> {
        Ok(Mdp {
            inner: parse_explicit(text).map_err(err)?,
        })
    }

    /// Reads a model file, dispatching on the `.prism` / `.mdpx` extension.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Mdp> {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| PyValueError::new_err(format!("{}: {e}", path.display())))?;
        let inner = match path.extension().and_then(|e| e.to_str()) {
            Some("prism") => parse_prism_subset(&text).map_err(err)?,
            Some("mdpx") => parse_explicit(&text).map_err(err)?,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unsupported model extension {other:?}: expected .prism or .mdpx"
                )))
            }
        };
        Ok(Mdp { inner })
    }

    /// Renders the model in the explicit text format.
    fn to_explicit(&self) -> String {
        write_explicit(&self.inner)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn aps(&self) -> Vec<String> {
        self.inner.ap_list().to_vec()
    }

    #[getter]
    fn initial(&self) -> usize {
        self.inner.initial()
    }

    fn __repr__(&self) -> String {
        format!(
            "<Mdp states={} aps={:?}>",
            self.inner.num_states(),
            self.inner.ap_list()
        )
    }
}

/// Builds the slim automaton (branching degree at most two, good for MDPs).
#[pyfunction]
#[pyo3(signature = (aut, complete = false))]
fn build_slim(aut: PyRef<'_, Automaton>, complete: bool) -> Automaton {
    Automaton {
        inner: constructions::build_slim(&aut.inner, SlimOptions { complete }),
    }
}

/// Builds the jump-style limit-deterministic automaton (good for MDPs).
#[pyfunction]
#[pyo3(signature = (aut, singleton_jumps = false, complete = false))]
fn build_sldba(
    aut: PyRef<'_, Automaton>,
    singleton_jumps: bool,
    complete: bool,
) -> PyResult<Automaton> {
    Ok(Automaton {
        inner: constructions::build_sldba(
            &aut.inner,
            SldbaOptions {
                singleton_jumps,
                complete,
            },
        )
        .map_err(err)?,
    })
}

/// Compares the languages of two automata on all lasso words up to the
/// bound `min(|a|·|b|, cap)`. Returns `None` when they agree, otherwise a
/// `(word, accepted_by_first)` pair describing a distinguishing word.
#[pyfunction]
#[pyo3(signature = (a, b, cap = 3))]
fn compare_languages(
    a: PyRef<'_, Automaton>,
    b: PyRef<'_, Automaton>,
    cap: usize,
) -> PyResult<Option<(String, bool)>> {
    match bounded_language_equal(&a.inner, &b.inner, cap).map_err(err)? {
        LanguageComparison::EqualUpToBound { .. } => Ok(None),
        LanguageComparison::Counterexample {
            word,
            accepted_by_left,
        } => Ok(Some((word.to_string(), accepted_by_left))),
    }
}

fn sim_level(level: u8) -> PyResult<SimLevel> {
    SimLevel::from_index(level as usize)
        .ok_or_else(|| PyValueError::new_err(format!("level must be 0, 1, or 2, got {level}")))
}

/// Decides whether `duplicator` simulates `spoiler` at the given game level
/// (0 plain, 1 with accepting-transition claims, 2 with claim updates).
/// Returns a dict with `simulates`, `game_positions`, and `game_moves`.
#[pyfunction]
#[pyo3(signature = (level, spoiler, duplicator, budget = None))]
fn simulate<'py>(
    py: Python<'py>,
    level: u8,
    spoiler: PyRef<'_, Automaton>,
    duplicator: PyRef<'_, Automaton>,
    budget: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let outcome = decide_with_budget(
        sim_level(level)?,
        &spoiler.inner,
        &duplicator.inner,
        budget.unwrap_or(DEFAULT_GAME_BUDGET),
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("simulates", outcome.simulates)?;
    d.set_item("game_positions", outcome.game_states())?;
    d.set_item("game_moves", outcome.game_edges())?;
    Ok(d)
}

/// The reference a certification plays against: `"slim"`, `"sldba"`, or an
/// explicit language-equivalent automaton already known to be good for MDPs.
#[derive(FromPyObject)]
enum RefArg<'py> {
    Name(String),
    Explicit(PyRef<'py, Automaton>),
}

/// Certifies the good-for-MDPs property by simulation against a reference.
/// Returns a dict with the verdict (`det`, `sim0`, `sim1`, `sim2`, `nosim`,
/// or `timeout(level)`), whether that verdict certifies, and per-level game
/// statistics.
#[pyfunction]
#[pyo3(signature = (aut, reference = None, budget = None))]
fn certify<'py>(
    py: Python<'py>,
    aut: PyRef<'_, Automaton>,
    reference: Option<RefArg<'_>>,
    budget: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let explicit_ref;
    let reference = match reference {
        None => Reference::Slim,
        Some(RefArg::Name(name)) => match name.as_str() {
            "slim" => Reference::Slim,
            "sldba" => Reference::Sldba,
            other => {
                return Err(PyValueError::new_err(format!(
                    "reference must be \"slim\", \"sldba\", or an Automaton, got {other:?}"
                )))
            }
        },
        Some(RefArg::Explicit(a)) => {
            explicit_ref = a;
            Reference::Explicit(&explicit_ref.inner)
        }
    };
    let report = certify_gfm(&aut.inner, reference, budget.unwrap_or(DEFAULT_GAME_BUDGET))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("verdict", report.verdict.to_string())?;
    d.set_item("certified", report.verdict.certified())?;
    d.set_item("input_states", report.input_states)?;
    d.set_item("reference", report.reference)?;
    d.set_item("reference_states", report.reference_states)?;
    let levels = PyList::empty(py);
    for l in &report.levels {
        let e = PyDict::new(py);
        e.set_item("level", l.level.to_string())?;
        e.set_item("simulates", l.simulates)?;
        e.set_item("timed_out", l.timed_out)?;
        e.set_item("game_positions", l.game_states)?;
        e.set_item("game_moves", l.game_edges)?;
        e.set_item("wall_ms", l.wall_ms)?;
        levels.append(e)?;
    }
    d.set_item("levels", levels)?;
    d.set_item("total_ms", report.total_ms)?;
    Ok(d)
}

fn analysis_dict<'py>(py: Python<'py>, a: &PsatAnalysis) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", a.value())?;
    d.set_item("product_states", a.product.num_states())?;
    d.set_item("mecs", a.num_mecs)?;
    d.set_item("aecs", a.num_aecs)?;
    d.set_item("iterations", a.check.iterations)?;
    d.set_item("residual", a.check.residual)?;
    Ok(d)
}

/// Maximal probability that the MDP, controlled together with the
/// automaton's nondeterminism, satisfies the product Büchi condition.
#[pyfunction]
#[pyo3(signature = (mdp, aut, tol = model_check::DEFAULT_TOL))]
fn psat<'py>(
    py: Python<'py>,
    mdp: PyRef<'_, Mdp>,
    aut: PyRef<'_, Automaton>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let analysis = model_check::psat(&mdp.inner, &aut.inner, tol).map_err(err)?;
    analysis_dict(py, &analysis)
}

/// Tests one MDP instance for a gap between the automaton's syntactic value
/// and its semantic value computed through a language-equivalent reference.
/// Returns a dict with both analyses, the gap, and whether it refutes.
#[pyfunction]
#[pyo3(signature = (mdp, aut, reference, tol = model_check::DEFAULT_TOL))]
fn refute_gfm<'py>(
    py: Python<'py>,
    mdp: PyRef<'_, Mdp>,
    aut: PyRef<'_, Automaton>,
    reference: PyRef<'_, Automaton>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let outcome =
        model_check::refute_gfm_on_instance(&mdp.inner, &aut.inner, &reference.inner, tol)
            .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("syntactic", analysis_dict(py, &outcome.syntactic)?)?;
    d.set_item("semantic", analysis_dict(py, &outcome.semantic)?)?;
    d.set_item("gap", outcome.gap)?;
    d.set_item("refuted", outcome.refuted)?;
    Ok(d)
}

/// Tabular Q-learning on the product environment with the
/// reward-on-accept scheme. Marked transitions pay reward 1 and end the
/// episode with probability `1 - zeta`. Returns a dict with the exact
/// satisfaction probability of the final greedy policy and the episode
/// trace as `(episode, return, evaluated | None)` tuples.
#[pyfunction]
#[pyo3(signature = (mdp, aut, *, zeta = 0.9, epsilon = 0.01, alpha = 0.3, tol = 0.01,
                    ep_len = 200, ep_count = 1200, seed = 0, eval_every = None))]
#[allow(clippy::too_many_arguments)]
fn learn<'py>(
    py: Python<'py>,
    mdp: PyRef<'_, Mdp>,
    aut: PyRef<'_, Automaton>,
    zeta: f64,
    epsilon: f64,
    alpha: f64,
    tol: f64,
    ep_len: usize,
    ep_count: usize,
    seed: u64,
    eval_every: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let hp = Hyperparams {
        zeta,
        epsilon,
        alpha,
        tol,
        ep_len,
        ep_count,
        seed,
    };
    let outcome = rl::learn(&mdp.inner, &aut.inner, hp, eval_every).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("final_value", outcome.final_value)?;
    d.set_item("episodes", outcome.trace.len())?;
    let trace: Vec<(usize, f64, Option<f64>)> = outcome
        .trace
        .iter()
        .map(|r| (r.episode, r.ret, r.evaluated))
        .collect();
    d.set_item("trace", trace)?;
    Ok(d)
}

/// Letters of an automaton's alphabet that satisfy a set of propositions,
/// as a convenience for building lasso words: returns the bitmask with the
/// named propositions set.
#[pyfunction]
fn letter(aut: PyRef<'_, Automaton>, set_aps: Vec<String>) -> PyResult<u32> {
    let mut bits = 0u32;
    let aps = aut.inner.ap_list();
    let wanted: BTreeSet<&str> = set_aps.iter().map(String::as_str).collect();
    for name in &wanted {
        let Some(i) = aps.iter().position(|ap| ap == name) else {
            return Err(PyValueError::new_err(format!(
                "unknown proposition {name:?}: alphabet is {aps:?}"
            )));
        };
        bits |= 1 << i;
    }
    Ok(bits)
}

#[pymodule]
fn pygfm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Automaton>()?;
    m.add_class::<Mdp>()?;
    m.add_function(wrap_pyfunction!(build_slim, m)?)?;
    m.add_function(wrap_pyfunction!(build_sldba, m)?)?;
    m.add_function(wrap_pyfunction!(compare_languages, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(psat, m)?)?;
    m.add_function(wrap_pyfunction!(refute_gfm, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(letter, m)?)?;
    m.add("DEFAULT_GAME_BUDGET", DEFAULT_GAME_BUDGET)?;
    Ok(())
}
