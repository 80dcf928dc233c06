import numpy as np
import pytest

from htcmhd.thermo import GasParams, primitive_to_conserved


def random_primitive(rng, n, phi_fraction=0.9):
    """Admissible primitive states; |phi| stays below phi_fraction * sqrt(p/rho) so E is convex."""
    w = np.empty((9, n))
    w[0] = rng.uniform(0.2, 5.0, n)
    w[1:4] = rng.uniform(-2.0, 2.0, (3, n))
    w[4] = rng.uniform(0.1, 10.0, n)
    w[5:8] = rng.uniform(-2.0, 2.0, (3, n))
    w[8] = phi_fraction * rng.uniform(-1.0, 1.0, n) * np.sqrt(w[4] / w[0])
    return w


def random_states(rng, n, gas=None, **kw):
    return primitive_to_conserved(random_primitive(rng, n, **kw), gas or GasParams())


def random_pairs(rng, n, gas=None, **kw):
    return random_states(rng, n, gas, **kw), random_states(rng, n, gas, **kw)


def single(rho=1.0, v=(0.0, 0.0, 0.0), p=1.0, B=(0.0, 0.0, 0.0), phi=0.0, gas=None):
    w = np.array([rho, *v, p, *B, phi], dtype=float)
    return primitive_to_conserved(w, gas or GasParams())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gas():
    return GasParams()


def random_face_pairs(rng, n, gas=None, jump=0.5):
    """Neighbour-like pairs: a random state and a perturbed copy (density and pressure within e**±jump)."""
    gas = gas or GasParams()
    wl = random_primitive(rng, n)
    wr = wl.copy()
    wr[0] *= np.exp(rng.uniform(-jump, jump, n))
    wr[4] *= np.exp(rng.uniform(-jump, jump, n))
    wr[1:4] += rng.uniform(-1.0, 1.0, (3, n))
    wr[5:8] += rng.uniform(-1.0, 1.0, (3, n))
    wr[8] = 0.9 * rng.uniform(-1.0, 1.0, n) * np.sqrt(wr[4] / wr[0])
    return primitive_to_conserved(wl, gas), primitive_to_conserved(wr, gas)


def leggauss_rule(n):
    """Independent Gauss rule on [0, 1] for oracle integrals."""
    from htcmhd.numflux import QuadratureRule
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w)


def fd_gradient(f, q, h=1e-6):
    """Central differences of a scalar field f over the 9 components of q."""
    g = np.empty_like(q)
    for k in range(q.shape[0]):
        step = h * np.maximum(1.0, np.abs(q[k]))
        qp, qm = q.copy(), q.copy()
        qp[k] += step
        qm[k] -= step
        g[k] = (f(qp) - f(qm)) / (2.0 * step)
    return g


# acceptance verdicts, one line per criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
