"""Exception types shared across the package."""


class SplineNasError(Exception):
    """Base class for all errors raised by this package."""


# --- linear algebra ---

class NonFiniteInput(SplineNasError):
    """A matrix or vector contains NaN or infinite entries."""


class RankDeficient(SplineNasError):
    """The factored matrix does not have full column rank."""


# --- parameter space ---

class OutOfBox(SplineNasError):
    """A point lies outside the search box."""


class InvalidConfig(SplineNasError):
    """A space, dimension, or configuration violates its invariants."""


# --- spline fitting ---

class SplineFitError(SplineNasError):
    """Base class for surrogate fitting failures."""


class DegenerateGeometry(SplineFitError):
    """Support points do not span the space affinely."""


class DuplicatePoints(SplineFitError):
    """Two support points coincide (within the duplicate threshold)."""


class NumericallyUnstable(SplineFitError):
    """The solved coefficients fail the residual check."""


# --- sampling / search ---

class DimensionTooLarge(SplineNasError):
    """More dimensions requested than provisioned prime bases."""


# --- driver / study state ---

class FitFailed(SplineNasError):
    """Surrogate fitting failed while producing a suggestion."""


class NoAdmissiblePoint(SplineNasError):
    """Every searched sample violates the minimum-distance rule."""


class UnexpectedPoint(SplineNasError):
    """A measurement was reported for a point that was never suggested."""


class NonFiniteMeasurement(SplineNasError):
    """A reported objective value is NaN or infinite."""


class Inadmissible(SplineNasError):
    """An imported point is too close to an existing support point."""


class ShrinkNotAllowed(SplineNasError):
    """A space extension must contain the previous box dimension-wise."""


class EvaluatorFailed(SplineNasError):
    """The objective evaluator failed after all configured retries."""


class StudyStateError(SplineNasError):
    """An operation is not valid in the study's current phase."""


# --- persistence ---

class IoError(SplineNasError):
    """Reading or writing a study file failed at the OS level."""


class ParseError(SplineNasError):
    """A study file is not structurally valid."""


class VersionMismatch(SplineNasError):
    """A study file was written with an unsupported format version."""


class InvariantViolation(SplineNasError):
    """A study file parses but violates a type invariant."""


class UnknownFixture(SplineNasError):
    """No embedded table with the requested name."""


class StudyLocked(SplineNasError):
    """Another process holds the study's advisory lock."""


class BadDimensionNames(SplineNasError):
    """Free/fixed dimension names do not cover the space exactly once."""


# --- external evaluators ---

class EvalTimeout(SplineNasError):
    """The evaluator process exceeded its time limit."""


class EvalNonZeroExit(SplineNasError):
    """The evaluator process exited with a non-zero status."""


class EvalUnparseable(SplineNasError):
    """The evaluator's output does not end in a finite number."""


class UnknownBenchmark(SplineNasError):
    """No built-in benchmark with the requested name."""
