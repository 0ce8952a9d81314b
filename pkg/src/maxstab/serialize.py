"""Document schemas shared by the library and the command line.

All configuration documents are JSON with a versioned ``schema: 1`` field.
Unknown fields are warned about by default and rejected under strict mode.
Numeric rendering is fixed (6 decimals in tables, 12 significant digits in
CSV/JSON) so identical inputs and seeds produce byte-identical output.
"""

from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .models import (MaxStableModel, make_brown_resnick, make_comonotone,
                     make_discrete_spectral, make_husler_reiss,
                     make_independent, make_logistic)
from .norms import NormSpec
from .spectral import AngularMeasure

SCHEMA_VERSION = 1

CSV_COLUMNS = ("pair_id", "quantity", "value", "certified_lower", "method",
               "constants_json", "seed")

_MODEL_FIELDS = {
    "logistic": {"family", "dim", "alpha", "theta"},
    "independent": {"family", "dim", "alpha"},
    "comonotone": {"family", "dim", "alpha"},
    "discrete_spectral": {"family", "spectral_measure"},
    "husler_reiss": {"family", "lambda_matrix"},
    "brown_resnick": {"family", "covariance"},
}

_PAIR_FIELDS = {"schema", "pair_id", "model1", "model2", "compute", "search",
                "norms", "output"}
_SEARCH_FIELDS = {"grid", "umax", "seed"}


def _check_fields(doc: dict, allowed: set, what: str, strict: bool) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        msg = f"unknown fields in {what}: {', '.join(unknown)}"
        if strict:
            raise ValidationError(msg)
        warnings.warn(msg, UserWarning, stacklevel=3)


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def model_from_dict(doc: dict, base_dir=None, strict: bool = False) -> MaxStableModel:
    if "family" not in doc:
        raise ValidationError("model document is missing the 'family' field")
    family = doc["family"]
    if family not in _MODEL_FIELDS:
        raise ValidationError(f"unknown model family {family!r}")
    _check_fields(doc, _MODEL_FIELDS[family], f"{family} model", strict)
    if family == "logistic":
        return make_logistic(int(doc["dim"]), float(doc["theta"]),
                             float(doc.get("alpha", 1.0)))
    if family == "independent":
        return make_independent(int(doc["dim"]), float(doc.get("alpha", 1.0)))
    if family == "comonotone":
        return make_comonotone(int(doc["dim"]), float(doc.get("alpha", 1.0)))
    if family == "discrete_spectral":
        measure = doc["spectral_measure"]
        if isinstance(measure, str):
            base = Path(base_dir) if base_dir is not None else Path(".")
            measure = load_json(base / measure)
        return make_discrete_spectral(AngularMeasure.from_dict(measure))
    if family == "husler_reiss":
        return make_husler_reiss(np.asarray(doc["lambda_matrix"], dtype=float))
    return make_brown_resnick(np.asarray(doc["covariance"], dtype=float))


def model_to_dict(model: MaxStableModel) -> dict:
    family = model.family
    if family == "logistic":
        return {"family": family, "dim": model.dim, "alpha": model.alpha,
                "theta": model.theta}
    if family in ("independent", "comonotone"):
        return {"family": family, "dim": model.dim, "alpha": model.alpha}
    if family == "discrete_spectral":
        return {"family": family, "spectral_measure": model.measure.to_dict()}
    if family == "husler_reiss":
        return {"family": family, "lambda_matrix": model.lam.tolist()}
    if family == "brown_resnick":
        return {"family": family, "covariance": model.covariance.tolist()}
    raise ValidationError(f"cannot serialize model family {family!r}")


@dataclass(frozen=True)
class ExperimentSpec:
    """A pair of model specifications plus requested computations."""

    pair_id: str
    model1: MaxStableModel
    model2: MaxStableModel
    compute: tuple[str, ...] = ("exact",)
    grid: int | None = None
    u_max: float = 50.0
    seed: int = 0
    norms: tuple[float, ...] | None = None
    output: str = "table"

    def __post_init__(self) -> None:
        if not self.compute:
            raise ValidationError("at least one computation must be requested")
        if self.model1.dim != self.model2.dim:
            raise ValidationError("pair models have different dimensions")


def pair_from_dict(doc: dict, base_dir=None, strict: bool = False) -> ExperimentSpec:
    _check_fields(doc, _PAIR_FIELDS, "pair document", strict)
    if doc.get("schema") != SCHEMA_VERSION:
        raise ValidationError(
            f"pair document must declare schema: {SCHEMA_VERSION} (got {doc.get('schema')!r})")
    for key in ("model1", "model2"):
        if key not in doc:
            raise ValidationError(f"pair document is missing {key!r}")
    search = doc.get("search", {})
    _check_fields(search, _SEARCH_FIELDS, "search options", strict)
    norms = doc.get("norms")
    return ExperimentSpec(
        pair_id=str(doc.get("pair_id", "pair")),
        model1=model_from_dict(doc["model1"], base_dir, strict),
        model2=model_from_dict(doc["model2"], base_dir, strict),
        compute=tuple(doc.get("compute", ("exact",))),
        grid=search.get("grid"),
        u_max=float(search.get("umax", 50.0)),
        seed=int(search.get("seed", 0)),
        norms=None if norms is None else tuple(norms),
        output=str(doc.get("output", "table")),
    )


def parse_norm_list(spec: str | None, alpha: float) -> list[NormSpec] | None:
    """Parse a CLI gauge list like ``"1,2,inf,alpha"`` into NormSpecs."""
    if spec is None:
        return None
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == "inf":
            out.append(NormSpec.lp(math.inf))
        elif tok == "alpha":
            out.append(NormSpec.lp(alpha))
        else:
            out.append(NormSpec.lp(float(tok)))
    if not out:
        raise ValidationError("empty gauge list")
    return out


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def fmt_value(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def fmt_g(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def constants_json(constants: dict) -> str:
    clean = {k: (float(v) if isinstance(v, (int, float, np.floating)) else str(v))
             for k, v in sorted(constants.items())}
    return json.dumps(clean, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ReportRow:
    """One output line of a CLI computation in the fixed CSV schema."""

    pair_id: str
    quantity: str
    value: float
    certified_lower: float | None = None
    method: str = ""
    constants: dict = field(default_factory=dict)
    seed: int | None = None


def render_rows(rows: list[ReportRow], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            cells = [r.pair_id, r.quantity, fmt_g(r.value), fmt_g(r.certified_lower),
                     r.method, '"' + constants_json(r.constants).replace('"', '""') + '"',
                     "" if r.seed is None else str(r.seed)]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()
    if fmt == "json-like":
        docs = []
        for r in rows:
            doc = {"pair_id": r.pair_id, "quantity": r.quantity, "value": r.value,
                   "certified_lower": r.certified_lower, "method": r.method,
                   "constants": {k: float(v) if isinstance(v, (int, float, np.floating))
                                 else str(v) for k, v in sorted(r.constants.items())},
                   "seed": r.seed}
            docs.append(doc)
        return json.dumps(docs, sort_keys=True, indent=2) + "\n"
    if fmt == "table":
        header = f"{'pair':<22}{'quantity':<26}{'value':>12}{'cert.lower':>12}  method"
        lines = [header, "-" * len(header)]
        for r in rows:
            lines.append(f"{r.pair_id:<22}{r.quantity:<26}{fmt_value(r.value):>12}"
                         f"{fmt_value(r.certified_lower):>12}  {r.method}")
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown output format {fmt!r}")
