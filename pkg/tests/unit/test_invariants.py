from types import SimpleNamespace

import pytest

from errors import BoundViolation, PreconditionViolation
from models.design import PacketEnergyDensity
from models.domain import BoxDomain, GridField
from models.report import CheckReport, CheckStatus
from numerics import invariants
from numerics.invariants import SuiteName, exhaustive_value, run_suites


def test_exhaustive_value_on_four_cells():
    box = BoxDomain([0.0], [1.0])
    densities = [PacketEnergyDensity((k,), 1.0, GridField(box, (4,), row))
                 for k, row in enumerate([[4.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 4.0]])]
    assert exhaustive_value(densities, 0.5) == pytest.approx(1.0)
    assert exhaustive_value(densities, 0.25) == pytest.approx(0.0)


def test_every_suite_is_registered():
    assert set(invariants.SUITES) == set(SuiteName.ALL)


def test_run_suites_classifies_outcomes(monkeypatch):
    def passing(runner, inject=False):
        return CheckReport('anything', True, metrics={'inject': inject})

    def unusable(runner, inject=False):
        raise PreconditionViolation('no observation set')

    def broken(runner, inject=False):
        raise BoundViolation('lower bound exceeded', ratio=1.2)

    monkeypatch.setitem(invariants.SUITES, SuiteName.FRAME, passing)
    monkeypatch.setitem(invariants.SUITES, SuiteName.SANDWICH, unusable)
    monkeypatch.setitem(invariants.SUITES, SuiteName.GRAMIAN, broken)
    reports, timings = run_suites(SimpleNamespace(), [SuiteName.FRAME, SuiteName.SANDWICH,
                                                      SuiteName.GRAMIAN], inject=True)
    assert [r.name for r in reports] == ['frame', 'sandwich', 'gramian']
    assert [r.status for r in reports] == [CheckStatus.PASSED, CheckStatus.SKIPPED,
                                           CheckStatus.FAILED]
    assert reports[0]['inject'] is True
    assert reports[2]['details'] == {'ratio': 1.2}
    assert [t['suite'] for t in timings] == ['frame', 'sandwich', 'gramian']
    assert all(t['seconds'] >= 0 for t in timings)
