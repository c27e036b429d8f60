import math

import numpy as np
import pytest

from eplab.errors import DataError
from eplab.experiments import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_PRECONDITION,
    CrossCheck,
    PreconditionError,
    cross_check,
    kg_decay,
    shock_demo,
)
from eplab.io_diag import parse_config

SHOCK = """
[physics]
gamma = 3.0
[grid]
num_cells = 1024
r_max = 200.0
[run]
t_end = {t_end}
diagnostics_stride = 20
[initial]
amplitude = {amp}
width = 2.5
center = 25.0
velocity_amplitude = {amp}
"""

SMALL = """
[physics]
gamma = 3.0
{extra}
[grid]
num_cells = 256
r_max = 60.0
[run]
t_end = 2.0
[initial]
amplitude = 1e-3
width = 2.0
velocity_amplitude = 1e-3
"""


@pytest.fixture(scope="module")
def demo():
    return shock_demo(parse_config(SHOCK.format(t_end=40.0, amp=0.1)))


class TestShockDemo:
    def test_contrast(self, demo):
        assert demo.field_off.status == "blowup_detected"
        assert demo.trip_time < 40.0
        assert demo.field_on.status == "completed"
        assert demo.bounded
        assert demo.contrast and demo.exit_code() == EXIT_OK

    def test_summary_mentions_both_runs(self, demo):
        text = demo.summary()
        assert "field off: blow-up monitor tripped" in text
        assert "contrast: shown" in text

    def test_zero_amplitude_rejected(self):
        with pytest.raises(PreconditionError):
            shock_demo(parse_config(SHOCK.format(t_end=5.0, amp=0.0)))

    def test_short_run_is_inconclusive(self):
        d = shock_demo(parse_config(SHOCK.format(t_end=0.5, amp=0.1)))
        assert d.trip_time is None and not d.contrast
        assert d.exit_code() == EXIT_PRECONDITION


class TestCrossCheck:
    def test_paper_units_agree(self):
        res = cross_check(parse_config(SMALL.format(extra="")), checkpoints=2)
        assert len(res.times) == 2 and res.times[-1] == pytest.approx(2.0)
        assert res.max_difference <= 1e-5
        assert res.exit_code() == EXIT_OK

    def test_literal_kappa_is_flagged(self):
        res = cross_check(parse_config(SMALL.format(extra="units = si-like")), checkpoints=2)
        assert not res.paper_units
        assert res.max_difference > 1e-5
        assert res.exit_code() == EXIT_PRECONDITION

    def test_exit_codes(self):
        assert CrossCheck([1.0], [1e-3], paper_units=True).exit_code() == EXIT_NUMERICAL
        assert CrossCheck([1.0], [1e-3], paper_units=False).exit_code() == EXIT_PRECONDITION
        assert CrossCheck([], [], statuses=("vacuum", "completed")).exit_code() == EXIT_PRECONDITION
        assert math.isnan(CrossCheck().max_difference)


class TestKgDecay:
    def test_small_grid(self):
        res = kg_decay(n=256, box=160.0, t_max=60.0, window=(10.0, 60.0), samples=48)
        assert res.in_range
        assert np.all(np.diff(res.times) > 0)

    def test_window_outside_data(self):
        with pytest.raises(DataError):
            kg_decay(n=64, box=160.0, t_max=60.0, window=(10.0, 100.0))
