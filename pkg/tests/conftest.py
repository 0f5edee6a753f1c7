import numpy as np
import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()

EPS = np.finfo(float).eps


def random_stiefel(rng, n, p):
    Q, R = np.linalg.qr(rng.standard_normal((n, p)))
    return Q * np.sign(np.diag(R))


def random_lift(rng, U):
    D = rng.standard_normal(U.shape)
    return D - U @ (U.T @ D)


def fd_convergence(f, x0, exact, steps=(1e-4, 1e-5)):
    """Central-difference check of ``exact`` against ``f'(x0)``.

    Passes when the error falls by 100 +- 20 between the two step sizes, or,
    once the coarse-step error is already within reach of rounding noise, when
    the fine-step error is at most 1e-7. Returns ``(ok, e_coarse, e_fine, ratio)``.
    """
    exact = np.asarray(exact, dtype=float)
    errs = []
    for h in steps:
        d = (np.asarray(f(x0 + h)) - np.asarray(f(x0 - h))) / (2 * h)
        errs.append(float(np.linalg.norm(d - exact)))
    scale = max(1.0, float(np.linalg.norm(f(x0))))
    # predicted rounding error of the fine-step difference, with headroom
    noise = 100 * EPS * scale / steps[1]
    ratio = errs[0] / errs[1] if errs[1] > 0 else np.inf
    if errs[0] / 100 > 10 * noise:
        ok = 80 <= ratio <= 120
    else:
        ok = errs[1] <= 1e-7
    return ok, errs[0], errs[1], ratio


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance(request):
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(label, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  {label}  {detail}".rstrip()
        lines.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
