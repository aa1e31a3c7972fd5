"""JSON and CSV serialization with 17 significant digits.

The stdlib encoder writes the shortest round-trip repr of each float; the
file formats here fix the width at ``%.17g`` instead, so a tiny recursive
writer is used. Non-finite floats are written as ``null``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from enum import Enum
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from .chain import ProbDist, TransitionKernel, validate_kernel
from .conditioning import ConditionalTrajectory, SeparationProfile
from .dynamics import CycleReport
from .errors import ValidationError
from .spectral import GAUGE, SpectralData
from .sst import SstProfile
from .yaglom import BasinMap, YaglomReport


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    text = format(x + 0.0, ".17g")
    return text if any(ch in text for ch in ".e") else text + ".0"


def _plain(obj: Any) -> Any:
    if isinstance(obj, ProbDist):
        return obj.p
    if isinstance(obj, Enum):
        return obj.value
    return obj


def dumps(obj: Any, indent: Optional[int] = 2, _level: int = 0) -> str:
    """Serialize ``obj`` (dicts, sequences, numpy arrays, scalars) to JSON text."""
    obj = _plain(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # numeric rows stay on one line
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v, indent) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_text(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        import sys

        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


# kernels and distributions


def kernel_to_dict(kernel: TransitionKernel) -> dict:
    out = {"n": kernel.n, "P": kernel.P}
    if kernel.labels is not None:
        out["labels"] = list(kernel.labels)
    return out


def kernel_from_dict(d: dict) -> TransitionKernel:
    if not isinstance(d, dict) or "P" not in d:
        raise ValidationError('kernel JSON must be an object with a "P" field')
    P = np.array(d["P"], dtype=float)
    if "n" in d and int(d["n"]) != P.shape[0]:
        raise ValidationError(f'"n" = {d["n"]} does not match P with {P.shape[0]} rows')
    return validate_kernel(P, d.get("labels"))


def load_kernel(path: str) -> TransitionKernel:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read kernel file {path}: {exc}") from None
    return kernel_from_dict(data)


def dist_from_json(data) -> ProbDist:
    if isinstance(data, dict):
        data = data.get("p", data.get("phi_star"))
    try:
        return ProbDist(np.array(data, dtype=float))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"not a distribution: {exc}") from None


def load_dist(path: str) -> ProbDist:
    try:
        with open(path, encoding="utf-8") as fh:
            return dist_from_json(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read distribution file {path}: {exc}") from None


def parse_alpha(spec: str, n: int) -> ProbDist:
    """``"uniform"``, ``"dirac:k"`` (0-based) or a path to a JSON vector."""
    if spec == "uniform":
        return ProbDist.uniform(n)
    if spec.startswith("dirac:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"bad dirac spec {spec!r}") from None
        return ProbDist.dirac(n, k)
    alpha = load_dist(spec)
    if alpha.n != n:
        raise ValidationError(f"alpha has {alpha.n} states, kernel has {n}")
    return alpha


# report objects


def spectral_to_dict(spec: SpectralData) -> dict:
    return {
        "gauge": GAUGE,
        "eigenvalues": spec.eigenvalues,
        "left": spec.left,
        "right": spec.right,
        "pi": spec.pi,
        "lazy_gamma": spec.lazy_gamma,
    }


def yaglom_to_dict(report: YaglomReport) -> dict:
    return {
        "lambda_alpha": report.lambda_alpha,
        "index_set": list(report.index_set),
        "ell_alpha": report.ell_alpha,
        "phi_star": report.phi_star,
        "halting_state": report.halting_state,
        "dominant_vector": report.dominant_vector,
        "used_simplified": report.used_simplified,
        "lazy": report.lazy_gamma is not None,
        "lazy_gamma": report.lazy_gamma,
        "residuals": dict(report.residuals),
    }


def yaglom_from_dict(d: dict) -> YaglomReport:
    return YaglomReport(
        lambda_alpha=float(d["lambda_alpha"]),
        index_set=tuple(int(i) for i in d["index_set"]),
        ell_alpha=float(d["ell_alpha"]),
        phi_star=ProbDist(np.array(d["phi_star"], dtype=float)),
        halting_state=int(d["halting_state"]),
        dominant_vector=np.array(d.get("dominant_vector", []), dtype=float),
        used_simplified=bool(d.get("used_simplified", False)),
        lazy_gamma=d.get("lazy_gamma"),
        residuals={k: (float("nan") if v is None else v) for k, v in d.get("residuals", {}).items()},
    )


def cycle_to_dict(report: CycleReport) -> dict:
    return {
        "status": report.status,
        "period": report.period,
        "representatives": report.representatives,
        "burn_in": report.burn_in,
        "max_dev": report.max_dev,
    }


def sst_to_dict(profile: SstProfile) -> dict:
    return {
        "pmf": profile.pmf,
        "tail": profile.tail,
        "survival": profile.survival,
        "survival_ratios": profile.survival_ratios,
        "kill_probs": profile.kill_probs,
    }


# CSV


def _csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def trajectory_csv(traj: ConditionalTrajectory, profile: SeparationProfile) -> str:
    n = traj.phi.shape[1]
    header = ["t", "s_t"] + [f"mu_{i + 1}" for i in range(n)] + [f"phi_{i + 1}" for i in range(n)]
    rows = ([t, float(profile.s[t])] + list(traj.mu[t]) + list(traj.phi[t]) for t in range(len(traj)))
    return _csv(header, rows)


def sst_csv(profile: SstProfile) -> str:
    kill = profile.kill_probs
    rows = (
        [t, float(profile.pmf[t]), float(profile.survival[t]), float(kill[t]) if t < kill.size else ""]
        for t in range(profile.pmf.size)
    )
    return _csv(["t", "pmf", "survival", "kill_prob"], rows)


def basins_csv(bm: BasinMap) -> str:
    rows = (list(bm.probes[k]) + [int(bm.class_ids[k]), float(bm.lambdas[k])] for k in range(len(bm.class_ids)))
    return _csv(["w1", "w2", "w3", "class_id", "lambda_alpha"], rows)


def read_csv(text: str) -> List[dict]:
    """Parse one of the CSV exports back into a list of row dicts of floats."""
    out = []
    for row in csv.DictReader(_io.StringIO(text)):
        out.append({k: (float(v) if v not in ("", "null") else float("nan")) for k, v in row.items()})
    return out
