import numpy as np
import pytest

from pseudoherm import linalg as la


def random_complex(n, rng):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_unitary(n, rng):
    Q, R = np.linalg.qr(random_complex(n, rng))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def multiset_distance(a, b):
    """Largest mismatch under the best one-to-one pairing.

    With ``len(a) < len(b)`` every entry of ``a`` is paired with a distinct
    entry of ``b``.
    """
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c])) if a.size else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_instance(index):
    """Seeded ``(H, G)`` with ``G = diag(+-1)`` of random inertia, ``n = 2 + index % 7``."""
    from pseudoherm.models import random_pseudo_hermitian

    n = 2 + index % 7
    rng = np.random.default_rng(index)
    p = int(rng.integers(1, n + 1))
    G = np.diag(np.r_[np.ones(p), -np.ones(n - p)]).astype(complex)
    return random_pseudo_hermitian(G, seed=index), G


def embed_indefinite_pair(H, G, index):
    """Append an indefinite double eigenvalue to ``(H, G)`` and scramble the basis.

    Even ``index`` gives a diabolic block ``lam * I`` under ``diag(1, -1)``,
    odd ``index`` an exceptional two-level block. The result is
    ``(T^{-1} H' T, T^H G' T)`` for a random near-identity ``T``, which keeps
    the intertwining relation.
    """
    from pseudoherm.krein import boundary_normal_form

    rng = np.random.default_rng(10_000 + index)
    n = H.shape[0]
    lam = 3.0 + rng.uniform()
    if index % 2 == 0:
        Hb, Gb = lam * np.eye(2, dtype=complex), np.diag([1.0, -1.0]).astype(complex)
    else:
        Hb, Gb = boundary_normal_form(0.5, 1.0, 1.0, lam, 0.0)
    Hf = np.zeros((n + 2, n + 2), dtype=complex)
    Gf = np.zeros_like(Hf)
    Hf[:n, :n], Hf[n:, n:] = H, Hb
    Gf[:n, :n], Gf[n:, n:] = G, Gb
    T = np.eye(n + 2) + 0.3 * random_complex(n + 2, rng) / np.sqrt(n + 2)
    Gt = la.dagger(T) @ Gf @ T
    return np.linalg.solve(T, Hf @ T), 0.5 * (Gt + la.dagger(Gt)), lam


def structured_perturbation(H, G, rng, size=1e-3):
    """``H' = G'^{-1} S'`` near ``H`` with ``||H' - H||`` and ``||G' - G||`` at most ``size``."""
    from pseudoherm.models import random_hermitian

    n = H.shape[0]
    S = G @ H
    dG = random_hermitian(n, rng)
    dS = random_hermitian(n, rng)
    dG *= 0.1 * size / la.norm(dG)
    dS *= 0.1 * size / la.norm(dS)
    while True:
        Gp, Sp = G + dG, S + dS
        Hp = np.linalg.solve(Gp, Sp)
        if la.norm(Hp - H) <= size:
            return Hp, Gp
        dG, dS = dG / 2, dS / 2


ACCEPTANCE_LINES = []


def report(label, ok, detail):
    line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
