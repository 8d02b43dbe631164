from __future__ import annotations

import pytest

from quatvar.class_graph import ClassSet, EigenFns, default_class_set, eigenfunctions
from quatvar.theta_q import MuMeasure, mu_measure

MU_DMAX = 450


@pytest.fixture(scope="session")
def class_set() -> ClassSet:
    return default_class_set()


@pytest.fixture(scope="session")
def eig(class_set: ClassSet) -> EigenFns:
    return eigenfunctions(class_set)


@pytest.fixture(scope="session")
def mu(class_set: ClassSet, eig: EigenFns) -> MuMeasure:
    return mu_measure(MU_DMAX, class_set, eig)
