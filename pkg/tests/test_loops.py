"""
Tests for open-cycle ensembles and the double-dimer projection
"""

import numpy as np
import pytest

from srpsim.core.lattice import LatticeSpec
from srpsim.exceptions import EnumerationBudgetError, InfeasibleDomainError
from srpsim.validation import loops

DOMAIN = [0, 1, 2, 3, 6]


class TestOpenCycles:
    """Self-avoiding paths from x through the complement of A"""

    @pytest.fixture
    def ensemble(self):
        return loops.open_cycle_ensemble(LatticeSpec.square(3), DOMAIN, 1, 1.0)

    def test_probabilities(self, ensemble):
        assert ensemble.probs.sum() == pytest.approx(1.0)
        assert ensemble.domain == (1, 4, 5, 7, 8)

    def test_paths_end_in_domain(self, ensemble):
        for i in range(len(ensemble.maps)):
            path = ensemble.path(i)
            assert path[0] == 1
            assert path[-1] in ensemble.A and path[-1] != 1
            assert all(z not in ensemble.A for z in path[1:-1])

    def test_exactly_one_exit(self, ensemble):
        targets = ensemble.maps
        in_domain = np.isin(targets, list(ensemble.A)).sum(axis=1)
        assert np.all(in_domain == 1)

    def test_start_outside_domain(self):
        with pytest.raises(InfeasibleDomainError):
            loops.open_cycle_ensemble(LatticeSpec.square(3), DOMAIN, 4, 1.0)

    def test_budget(self):
        with pytest.raises(EnumerationBudgetError):
            loops.open_cycle_ensemble(LatticeSpec.square(4), [0], 0, 1.0)


class TestDomainMarkov:
    """Conditioning on a path prefix equals growing the domain"""

    @pytest.mark.parametrize("prefix", [[4], [4, 5], [4, 7]])
    def test_identity_holds(self, prefix):
        report = loops.check_domain_markov(LatticeSpec.square(3), DOMAIN, 1, 1.0, prefix)
        assert report.passed()
        assert report.discrepancy <= 1e-13
        assert 0.0 < report.prefix_probability <= 1.0

    def test_prefix_must_avoid_domain(self):
        with pytest.raises(InfeasibleDomainError):
            loops.check_domain_markov(LatticeSpec.square(3), DOMAIN, 1, 1.0, [2])


class TestDoubleDimer:
    """Nearest-neighbour permutations project to loops with multiplicity 2^k"""

    def test_two_by_two(self):
        report = loops.double_dimer_projection(LatticeSpec.square(2))
        assert report.permutations == 4
        assert report.configurations == 3
        assert report.passed
        assert sorted(report.table["multiplicity"]) == [1, 1, 2]

    def test_two_by_four(self):
        report = loops.double_dimer_projection(LatticeSpec.square(2, 4))
        assert report.passed
        assert report.table["multiplicity"].sum() == report.permutations

    def test_loop_measure(self):
        measure = loops.loop_measure(loops.double_dimer_projection(LatticeSpec.square(2)))
        assert measure.sum() == pytest.approx(1.0)
        assert measure.max() == pytest.approx(0.5)

    def test_budget(self):
        with pytest.raises(EnumerationBudgetError):
            loops.double_dimer_projection(LatticeSpec.square(3))
