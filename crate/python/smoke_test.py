#!/usr/bin/env python3
"""End-to-end smoke test of the pygfm extension module.

Build and install the module first:

    pip install -e crates/pygfm --no-build-isolation

then run this script from anywhere:

    python3 python/smoke_test.py
"""

from pathlib import Path

import pygfm

FIXTURES = Path(__file__).resolve().parents[1] / "crates" / "core" / "fixtures"

# A two-state automaton for "eventually the letter is always `p`": state 0
# guesses when the tail starts, state 1 checks it. The slim construction of
# this automaton is the standard four-state example.
PERSISTENCE = """\
HOA: v1
States: 2
Start: 0
AP: 1 "p"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[t] 0
[0] 1
State: 1
[0] 1 {0}
--END--
"""


def check_automata() -> None:
    a = pygfm.Automaton.parse(PERSISTENCE)
    assert a.num_states == 2
    assert a.aps == ["p"]
    assert a.initial == [0]
    assert not a.is_deterministic()
    assert a.is_limit_deterministic()
    assert a.branching_degree == 2
    assert len(a.transitions()) == a.num_transitions == 4
    assert a.num_accepting == 1

    # Round-trip through HOA text.
    again = pygfm.Automaton.parse(a.to_hoa())
    assert again.transitions() == a.transitions()

    # Lasso membership: p^w is accepted, (¬p p)^w is not.
    p = pygfm.letter(a, ["p"])
    assert a.accepts([], [p])
    assert not a.accepts([], [0, p])

    # The slim construction has four states, branching degree two, and the
    # same language up to the bounded check.
    slim = pygfm.build_slim(a)
    assert slim.num_states == 4
    assert slim.branching_degree == 2
    assert pygfm.compare_languages(a, slim) is None

    # The subset construction is limit deterministic and language-equal too.
    sldba = pygfm.build_sldba(a)
    assert sldba.is_limit_deterministic()
    assert pygfm.compare_languages(a, sldba) is None

    # The slim automaton simulates the subset construction outright.
    game = pygfm.simulate(0, sldba, slim)
    assert game["simulates"]
    assert game["game_positions"] > 0

    # Certification: the guessing automaton needs no level at all beyond
    # sim0, and a deterministic automaton certifies trivially.
    report = pygfm.certify(a)
    assert report["verdict"] == "sim0" and report["certified"]
    det = pygfm.Automaton.read(FIXTURES / "lookahead_det.hoa")
    assert pygfm.certify(det)["verdict"] == "det"

    # The claim-update game is strictly stronger than the claim game: the
    # lookahead pair separates the levels.
    guesser = pygfm.Automaton.read(FIXTURES / "lookahead_guesser.hoa")
    assert not pygfm.simulate(0, det, guesser)["simulates"]
    assert not pygfm.simulate(1, det, guesser)["simulates"]
    assert pygfm.simulate(2, det, guesser)["simulates"]
    assert pygfm.certify(guesser, det)["verdict"] == "sim2"


def check_model_checking() -> None:
    m = pygfm.Mdp.read(FIXTURES / "fair_bit.mdpx")
    assert m.num_states == 2 and m.aps == ["b"] and m.initial == 0
    assert "mdp-explicit" in m.to_explicit()

    guessing = pygfm.Automaton.read(FIXTURES / "guessing_nba.hoa")
    universal = pygfm.Automaton.read(FIXTURES / "universal_b.hoa")

    # Guessing the next fair bit wins with probability 0 syntactically,
    # although the language is everything: the canonical probability gap.
    assert pygfm.psat(m, guessing)["value"] == 0.0
    outcome = pygfm.refute_gfm(m, guessing, universal)
    assert outcome["refuted"]
    assert outcome["gap"] == 1.0
    assert outcome["semantic"]["value"] == 1.0

    # A certified automaton shows no gap on the same instance.
    slim = pygfm.build_slim(guessing)
    clean = pygfm.refute_gfm(m, slim, universal)
    assert not clean["refuted"]
    assert clean["gap"] == 0.0

    # The guarded-command frontend agrees with the explicit one.
    prism = pygfm.Mdp.from_prism(
        (FIXTURES / "milk.prism").read_text()
    )
    nba = pygfm.Automaton.read(FIXTURES / "milk_nba.hoa")
    assert pygfm.psat(prism, nba)["value"] == 1.0


def check_learning() -> None:
    m = pygfm.Mdp.read(FIXTURES / "fair_bit.mdpx")
    universal = pygfm.Automaton.read(FIXTURES / "universal_b.hoa")
    out = pygfm.learn(
        m, universal, zeta=0.5, ep_len=20, ep_count=60, seed=7, eval_every=30
    )
    assert out["final_value"] == 1.0
    assert out["episodes"] == 60
    evaluated = [t for t in out["trace"] if t[2] is not None]
    assert [t[0] for t in evaluated] == [30, 60]

    # Identical seeds reproduce the trace exactly.
    again = pygfm.learn(
        m, universal, zeta=0.5, ep_len=20, ep_count=60, seed=7, eval_every=30
    )
    assert again["trace"] == out["trace"]


def main() -> None:
    check_automata()
    check_model_checking()
    check_learning()
    print("pygfm smoke test: all checks passed")


if __name__ == "__main__":
    main()
