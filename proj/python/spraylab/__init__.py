"""Spray and Finsler curvature with forward-mode jets.

The heavy lifting happens in the native ``_spraylab`` module; this package
decodes its canonical JSON reports into plain dictionaries.
"""

import json

from ._spraylab import (  # noqa: F401
    DegenerateMetric,
    DomainError,
    Error,
    InputError,
    OrderError,
    ParseError,
    __version__,
)
from . import _spraylab as _core


def families():
    """Built-in spray families with their parameters."""
    return json.loads(_core.list_json())["families"]


def _run(fn, spray, file, sigmas, points, seed, order, tol):
    text, code = fn(spray, file, list(sigmas), points, seed, order, list(tol), "json")
    report = json.loads(text)
    report["exit_code"] = code
    return report


def evaluate(spray="flat", *, file=None, sigmas=(), points=0, seed=1, order=5, tol=()):
    """Curvature quantities at seeded points, as a report dictionary."""
    return _run(_core.evaluate, spray, file, sigmas, points, seed, order, tol)


def verify(spray="flat", *, file=None, sigmas=(), points=0, seed=1, order=5, tol=()):
    """Identity suite at seeded points, as a report dictionary."""
    return _run(_core.verify, spray, file, sigmas, points, seed, order, tol)


def report_json(command, spray="flat", **kwargs):
    """Canonical JSON text of a report, byte-identical across runs."""
    fn = {"evaluate": _core.evaluate, "verify": _core.verify}[command]
    text, _ = fn(
        spray,
        kwargs.get("file"),
        list(kwargs.get("sigmas", ())),
        kwargs.get("points", 0),
        kwargs.get("seed", 1),
        kwargs.get("order", 5),
        list(kwargs.get("tol", ())),
        "json",
    )
    return text
