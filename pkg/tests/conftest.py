"""Shared fixtures.

The expensive objects (the 729-state spectrum, the saddle analysis) are
session scoped so the suite pays for them once.
"""

import numpy as np
import pytest

import triscar as ts


@pytest.fixture(scope="session")
def params():
    """Default parameter set, scaled reporting."""
    return ts.ModelParams()


@pytest.fixture(scope="session")
def raw_params():
    return ts.ModelParams(scaling=ts.Scaling.RAW)


@pytest.fixture(scope="session")
def sector729(params):
    return ts.enumerate_basis_1d(params, 0)


@pytest.fixture(scope="session")
def operator729(params, sector729):
    return ts.HamiltonianOperator1D(sector729, ts.MatrixElementRule1D(params))


@pytest.fixture(scope="session")
def spectrum729(operator729):
    return ts.solve_dense(operator729)


@pytest.fixture(scope="session")
def bands729(spectrum729):
    return ts.assemble_bands(spectrum729.eigenvalues, 2.0)


@pytest.fixture(scope="session")
def saddle(params):
    result = ts.find_critical_points(params)
    point = next(p for p in result.points if p.kind == "saddle")
    analysis = ts.hessian_analysis(point, ts.ModelParams(scaling=ts.Scaling.RAW))
    return analysis.scaled(params.box_length)


@pytest.fixture(scope="session")
def sector3d_c2(params):
    return ts.sector_3d(params, (0, 0, 0), cutoff_sq=2)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
