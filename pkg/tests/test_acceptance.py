"""Long statistical runs; `pytest -m slow` selects them."""

import pytest

from qsa_lab.config import parse_config
from qsa_lab.mdp.model import load_mdp
from qsa_lab.regret import theoretical_regret_exponent
from qsa_lab.studies import concentration_study, regret_study

pytestmark = pytest.mark.slow

STEPS = 100_000
WINDOW = (1_000, 100_000)


def _study(runner, data):
    cfg = parse_config({"grid": {"fit_window": list(WINDOW)}, **data})
    return runner(cfg, load_mdp(cfg.mdp), cfg.seeds.resolve(), workers=4).verdict


def test_seg_zero_exponents_decay_like_root_n():
    verdict = _study(
        concentration_study,
        {"mdp": "bench:four_state", "qlearn": {"algo": "seg", "d": 0.0, "e": 0.0, "steps": STEPS}},
    )
    assert -0.65 <= verdict["slope"] <= -0.35
    converged = int(verdict["converged"].split("/")[0])
    assert converged >= 28


def test_boltzmann_small_temperature_slope():
    verdict = _study(
        concentration_study,
        {"mdp": "bench:four_state", "qlearn": {"algo": "boltzmann", "kappa1": 0.02, "steps": STEPS}},
    )
    assert verdict["slope"] <= -0.29


def test_seg_regret_is_sublinear():
    verdict = _study(
        regret_study,
        {
            "mdp": "bench:scaled_gap",
            "qlearn": {
                "algo": "seg",
                "a": 0.1,
                "d": 0.1,
                "e": 0.01,
                "beta": 5.0,
                "n0": 10_000,
                "q0": [[0.0, 20.0], [0.0, 20.0]],
                "steps": STEPS,
            },
            "regret": {"method": "frozen"},
        },
    )
    assert verdict["fitted_exponent"] <= 0.97
    assert verdict["frozen_decay"] <= 0.5
    assert theoretical_regret_exponent("seg", a=0.1, d=0.1, e=0.01).value == pytest.approx(0.92)


def test_smaller_gap_costs_more_regret():
    exponents = {}
    for name in ("gap_small", "gap_large"):
        verdict = _study(
            regret_study,
            {"mdp": f"bench:{name}", "qlearn": {"algo": "boltzmann", "b": 0.8, "steps": STEPS}, "regret": {"method": "frozen"}},
        )
        exponents[name] = verdict["fitted_exponent"]
    assert exponents["gap_small"] >= exponents["gap_large"] + 0.05
