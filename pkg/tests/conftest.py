import numpy as np
import pytest

import quadinv as qi


def top_singular_values(a, k, iters=500, seed=12345):
    """Oracle: top-k singular values by power iteration plus deflation.

    Deliberately independent of the library's generators; used to
    cross-check the sigma values they report.
    """
    a = np.array(a, dtype=float)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(k):
        v = rng.standard_normal(a.shape[1])
        v /= np.linalg.norm(v)
        for _ in range(iters):
            u = a.T @ (a @ v)
            nu = np.linalg.norm(u)
            if nu == 0.0:
                break
            v = u / nu
        sigma = np.linalg.norm(a @ v)
        out.append(sigma)
        if sigma == 0.0:
            break
        u = (a @ v) / sigma
        a = a - sigma * np.multiply.outer(u, v)
    return out


@pytest.fixture(scope="session")
def inv_problem_n10():
    spec = qi.RandomMatrixSpec(n=10, seed=42, condition_cap=100.0)
    return qi.gen_invertible(spec)


@pytest.fixture
def rng():
    return qi.make_rng(0)
