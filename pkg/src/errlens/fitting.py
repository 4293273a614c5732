"""Model-family fitting for sample data: y = a*x + b, y = a*x**p, y = a*d**x.

Each family is fitted by closed-form least squares (the power and
exponential families on log-transformed coordinates), but goodness of fit
is always scored in the original y space so the transform does not bias
the comparison. Selection prefers the linear family when it comes within
`tie_epsilon` of the best normalized error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

LINEAR = "LINEAR"
POWER = "POWER"
EXP = "EXP"

FAMILIES = (LINEAR, POWER, EXP)

DEFAULT_TIE_EPSILON = 0.01
DEFAULT_MIN_POINTS = 3


class FitError(Exception):
    """A family cannot be fitted to the given points.

    kind is one of: too_few_points, degenerate, constraint_violation,
    unknown_family.
    """

    def __init__(self, kind: str, message: str, point: tuple[float, float] | None = None):
        super().__init__(message)
        self.kind = kind
        self.point = point


@dataclass(frozen=True)
class ModelFit:
    family: str
    params: dict
    nrmse: float

    def predict(self, x: float) -> float:
        if self.family == LINEAR:
            return self.params["a"] * x + self.params["b"]
        if self.family == POWER:
            return self.params["a"] * (x ** self.params["p"])
        return self.params["a"] * (self.params["d"] ** x)

    def label(self) -> str:
        p = {k: f"{v:.6g}" for k, v in self.params.items()}
        if self.family == LINEAR:
            return f"LINEAR{{a={p['a']}, b={p['b']}}}"
        if self.family == POWER:
            return f"POWER{{a={p['a']}, p={p['p']}}}"
        return f"EXP{{a={p['a']}, d={p['d']}}}"

    def to_json(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "nrmse": self.nrmse}


@dataclass
class FamilySelection:
    best: ModelFit
    fits: dict = field(default_factory=dict)        # family -> ModelFit
    excluded: dict = field(default_factory=dict)    # family -> reason string
    decisive: bool = True

    def to_json(self) -> dict:
        return {
            "best": self.best.to_json(),
            "fits": {k: v.to_json() for k, v in self.fits.items()},
            "excluded": dict(self.excluded),
            "decisive": self.decisive,
        }


def _check_points(points: list[tuple[float, float]], min_points: int) -> None:
    if len(points) < min_points:
        raise FitError("too_few_points",
                       f"need at least {min_points} points, got {len(points)}")
    if len({x for x, _ in points}) < min(3, min_points):
        raise FitError("degenerate", "all x values coincide")


def _lsq_line(xs: list[float], ys: list[float]) -> tuple[float, float]:
    """Slope and intercept of the least-squares line through (xs, ys)."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0.0:
        raise FitError("degenerate", "all x values coincide")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    return slope, intercept


def _nrmse(points: list[tuple[float, float]], predict) -> float:
    n = len(points)
    sq = sum((predict(x) - y) ** 2 for x, y in points)
    rmse = math.sqrt(sq / n)
    denom = sum(abs(y) for _, y in points) / n
    if denom == 0.0:
        return 0.0 if rmse == 0.0 else math.inf
    return rmse / denom


def fit_family(points: list[tuple[float, float]], family: str,
               min_points: int = DEFAULT_MIN_POINTS) -> ModelFit:
    """Fit one family; raises FitError when the family is inadmissible."""
    _check_points(points, min_points)
    if family == LINEAR:
        xs = [x for x, _ in points]
        ys = [y for _, y in points]
        a, b = _lsq_line(xs, ys)
        fit = ModelFit(LINEAR, {"a": a, "b": b}, 0.0)
        return ModelFit(LINEAR, fit.params, _nrmse(points, fit.predict))
    if family == POWER:
        for x, y in points:
            if x <= 0:
                raise FitError("constraint_violation",
                               f"power family needs x > 0, got x = {x:g}", (x, y))
            if y <= 0:
                raise FitError("constraint_violation",
                               f"power family needs y > 0, got y = {y:g} at x = {x:g}", (x, y))
        lx = [math.log(x) for x, _ in points]
        ly = [math.log(y) for _, y in points]
        p, la = _lsq_line(lx, ly)
        fit = ModelFit(POWER, {"a": math.exp(la), "p": p}, 0.0)
        return ModelFit(POWER, fit.params, _nrmse(points, fit.predict))
    if family == EXP:
        for x, y in points:
            if y <= 0:
                raise FitError("constraint_violation",
                               f"exponential family needs y > 0, got y = {y:g} at x = {x:g}",
                               (x, y))
        xs = [x for x, _ in points]
        ly = [math.log(y) for _, y in points]
        ld, la = _lsq_line(xs, ly)
        fit = ModelFit(EXP, {"a": math.exp(la), "d": math.exp(ld)}, 0.0)
        return ModelFit(EXP, fit.params, _nrmse(points, fit.predict))
    raise FitError("unknown_family", f"unknown family {family!r}")


def select_family(points: list[tuple[float, float]],
                  tie_epsilon: float = DEFAULT_TIE_EPSILON,
                  min_points: int = DEFAULT_MIN_POINTS) -> FamilySelection:
    """Fit every admissible family and pick the lowest-nrmse one.

    The linear family wins ties: if its nrmse is within tie_epsilon
    (absolute) of the minimum, it is selected and the result is marked
    not decisive. Inadmissible families are recorded with their reason
    rather than aborting the selection.
    """
    fits: dict[str, ModelFit] = {}
    excluded: dict[str, str] = {}
    fits[LINEAR] = fit_family(points, LINEAR, min_points)  # must be fittable
    for family in (POWER, EXP):
        try:
            fits[family] = fit_family(points, family, min_points)
        except FitError as e:
            excluded[family] = str(e)

    best_family = min(fits, key=lambda f: (fits[f].nrmse, FAMILIES.index(f)))
    ranked = sorted(fits.values(), key=lambda m: m.nrmse)
    if len(ranked) == 1:
        return FamilySelection(best=fits[best_family], fits=fits,
                               excluded=excluded, decisive=True)

    tie_break_fired = False
    if best_family != LINEAR and fits[LINEAR].nrmse <= fits[best_family].nrmse + tie_epsilon:
        best_family = LINEAR
        tie_break_fired = True
    runner_up = min((m.nrmse for f, m in fits.items() if f != best_family), default=math.inf)
    decisive = (not tie_break_fired) and (runner_up - fits[best_family].nrmse > tie_epsilon)
    return FamilySelection(best=fits[best_family], fits=fits,
                           excluded=excluded, decisive=decisive)


def is_superlinear(selection: FamilySelection, margin: float = 0.2) -> bool:
    """True when the selected family grows faster than any straight line."""
    best = selection.best
    if best.family == POWER:
        return best.params["p"] >= 1.0 + margin
    if best.family == EXP:
        return best.params["d"] > 1.0
    return False
