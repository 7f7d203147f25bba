"""Super-Gaussian density models in variational form.

Each model is described by G(y) = -log d(y) (up to an additive constant,
normalizing constants are dropped throughout) together with its derivative
G', the weight function ustar(y) = G'(y) / y, and the conjugate f such that

    G(y) = min_{u in (0, 1]}  u * y**2 / 2 + f(u),

the minimum being attained at u = ustar(y).  All callables are vectorized
over numpy arrays and accept plain scalars.
"""

import numpy as np

from .exceptions import DomainError, UnsupportedConjugate

__all__ = ["Density", "Huber", "Student", "LogCosh", "get_density", "DENSITIES"]


class Density:
    """Base class; concrete models implement G, gprime, ustar (and f)."""

    name = ""
    has_closed_form_f = False

    def G(self, y):
        raise NotImplementedError

    def gprime(self, y):
        raise NotImplementedError

    def ustar(self, y):
        """Minimizer u*(y) of u*y^2/2 + f(u); equals G'(y)/y, extended by
        continuity to u*(0) = 1 for all models shipped here."""
        raise NotImplementedError

    def f(self, u):
        """Conjugate f(u) on the domain (0, 1]."""
        if not self.has_closed_form_f:
            raise UnsupportedConjugate(
                f"{self.name}: no closed-form conjugate; use f_at_ustar"
            )
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0.0) or np.any(u > 1.0):
            raise DomainError("conjugate argument must lie in (0, 1]")
        return self._f(u)

    def _f(self, u):
        raise NotImplementedError

    def f_at_ustar(self, y):
        """Return (u, f(u)) at u = ustar(y).

        Uses the tightness identity f(u*(y)) = G(y) - u*(y) * y^2 / 2, which
        holds for every model, so log-cosh is supported as well even though
        its conjugate has no closed form.
        """
        y = np.asarray(y, dtype=float)
        u = self.ustar(y)
        return u, self.G(y) - 0.5 * u * y * y

    def __repr__(self):
        return f"{type(self).__name__}()"


class Huber(Density):
    """G(y) = y^2/2 for |y| < 1 and |y| - 1/2 otherwise; f(u) = 1/(2u) - 1/2."""

    name = "huber"
    has_closed_form_f = True

    def G(self, y):
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        return np.where(ay < 1.0, 0.5 * y * y, ay - 0.5)

    def gprime(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y) < 1.0, y, np.sign(y))

    def ustar(self, y):
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        inv = np.divide(1.0, ay, out=np.ones_like(ay), where=ay >= 1.0)
        return np.where(ay < 1.0, 1.0, inv)

    def _f(self, u):
        return 0.5 / u - 0.5


class Student(Density):
    """G(y) = log(1 + y^2)/2; f(u) = -log(u)/2 - (1 - u)/2."""

    name = "student"
    has_closed_form_f = True

    def G(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * np.log1p(y * y)

    def gprime(self, y):
        y = np.asarray(y, dtype=float)
        return y / (1.0 + y * y)

    def ustar(self, y):
        y = np.asarray(y, dtype=float)
        return 1.0 / (1.0 + y * y)

    def _f(self, u):
        return -0.5 * np.log(u) - 0.5 * (1.0 - u)


class LogCosh(Density):
    """G(y) = log cosh(y); no closed-form conjugate (stored f-values only)."""

    name = "logcosh"
    has_closed_form_f = False

    def G(self, y):
        # log cosh y = |y| + log1p(exp(-2|y|)) - log 2, overflow-safe
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        return ay + np.log1p(np.exp(-2.0 * ay)) - np.log(2.0)

    def gprime(self, y):
        y = np.asarray(y, dtype=float)
        return np.tanh(y)

    def ustar(self, y):
        # tanh(y)/y -> 1 as y -> 0; the series below keeps full precision
        y = np.asarray(y, dtype=float)
        small = np.abs(y) < 1e-4
        ysafe = np.where(small, 1.0, y)
        ratio = np.tanh(ysafe) / ysafe
        return np.where(small, 1.0 - y * y / 3.0, ratio)


DENSITIES = {cls.name: cls for cls in (Huber, Student, LogCosh)}


def get_density(name):
    """Look up a density model by name ("huber" | "student" | "logcosh")."""
    if isinstance(name, Density):
        return name
    try:
        return DENSITIES[name]()
    except KeyError:
        raise DomainError(
            f"unknown density {name!r}; choose from {sorted(DENSITIES)}"
        ) from None
