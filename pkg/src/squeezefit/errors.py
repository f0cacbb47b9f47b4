"""Exception types shared across the package."""


class SqueezeFitError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(SqueezeFitError, ValueError):
    """An argument failed validation (shape, dtype, range, or symmetry).

    Also a ValueError so sklearn-style callers can catch it conventionally.
    """


class NotPsd(SqueezeFitError):
    """A matrix required to be positive semidefinite is not, beyond tolerance."""


class FormatError(SqueezeFitError):
    """A file could not be parsed (bad magic, truncation, malformed row...)."""


class DegenerateData(SqueezeFitError):
    """Two points with different labels coincide, so no margin can separate them."""


class StratifyError(SqueezeFitError):
    """A class has too few points for a stratified split."""


class NoConstraints(SqueezeFitError):
    """An operation that needs at least one cross-class pair received none."""


class DegenerateLda(SqueezeFitError):
    """The class centroids coincide; the discriminant direction is undefined."""


class DegenerateContacts(SqueezeFitError):
    """All contact vectors are numerically zero; no spectral gap to measure."""


class Infeasible(SqueezeFitError):
    """The separation target exceeds what the data allows.

    Carries the requested margin and, when known, the minimum cross-class
    distance that rules it out.
    """

    def __init__(self, delta: float, min_distance: float | None = None):
        self.delta = delta
        self.min_distance = min_distance
        msg = f"no feasible metric at delta={delta!r}"
        if min_distance is not None:
            msg += f" (minimum cross-class distance is {min_distance!r})"
        super().__init__(msg)


class Inconclusive(SqueezeFitError):
    """A diagnostic could not be trusted because a solve was not certified."""


class CertificateSearchFailed(SqueezeFitError):
    """The alternating-projection search did not reach the residual target.

    Carries the best residuals seen so the caller can report or retry, and —
    when the search got anywhere at all — a rescaled dual-feasible point
    built from its best iterate. That point no longer satisfies the
    slackness equations, but it is exactly feasible, so its value still
    lower-bounds the optimum and can bound the gap on its own.
    """

    def __init__(self, residuals: dict[str, float], iterations: int, fallback=None):
        self.residuals = dict(residuals)
        self.iterations = iterations
        self.fallback = fallback
        worst = max(residuals.values()) if residuals else float("nan")
        super().__init__(
            f"certificate search stalled after {iterations} iterations "
            f"(worst residual {worst:.3e})"
        )
