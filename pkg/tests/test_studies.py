import pytest

from qsa_lab.errors import SeedFailed
from qsa_lab.events import SeedDone, SeedError
from qsa_lab.mdp.model import mdp_to_dict
from qsa_lab.studies import SeedTask, fan_out
from qsa_lab.tui import NoopStudyTUI


def _task(mdp, seed, **qlearn):
    return SeedTask("concentration", mdp, {"algo": "boltzmann", "steps": 100, **qlearn}, seed, (0, 100))


def test_fan_out_reports_each_seed(two_by_two):
    mdp = mdp_to_dict(two_by_two)
    events = []
    outcomes = fan_out([_task(mdp, 1), _task(mdp, 2)], on_event=events.append)
    assert [o.seed for o in outcomes] == [1, 2]
    assert all(isinstance(e, SeedDone) for e in events)
    assert [(e.seed, e.index, e.total) for e in events] == [(1, 0, 2), (2, 1, 2)]


def test_failing_seed_emits_error_before_abort(two_by_two):
    good = mdp_to_dict(two_by_two)
    bad = {**good, "gamma": 1.5}
    events = []
    with pytest.raises(SeedFailed) as info:
        fan_out([_task(good, 1), _task(bad, 2), _task(good, 3)], on_event=events.append)
    assert info.value.seed == 2
    assert isinstance(events[0], SeedDone)
    error = events[-1]
    assert isinstance(error, SeedError)
    assert error.seed == 2
    assert error.message
    assert error.message in str(info.value)


def test_view_follows_seed_events(two_by_two):
    good = mdp_to_dict(two_by_two)
    view = NoopStudyTUI()
    fan_out([_task(good, 4)], on_event=view.on_seed_event)
    assert view.state.seeds_done == 1
    assert view.state.current_seed == 4
    with pytest.raises(SeedFailed):
        fan_out([_task({**good, "gamma": 1.5}, 5)], on_event=view.on_seed_event)
    assert view.state.last_error.startswith("seed 5: ")
    assert view.state.seeds_done == 1
