"""Self-describing JSON reports that pair theoretical and empirical dimensions."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import asdict, dataclass, field, is_dataclass

import numpy as np

from . import __version__
from .system import system_to_dict

BOX_CONVENTION = "balls of radius floor(L/2), box diameter <= L, ties to smallest node id"


def system_id(spec) -> str:
    """sha256 of the canonical JSON form of a system (expectations excluded)."""
    text = json.dumps(system_to_dict(spec, include_expect=False), sort_keys=True,
                      separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _plain(x):
    if is_dataclass(x):
        return _plain(asdict(x))
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    return x


@dataclass
class DimensionReport:
    command: str
    parameters: dict
    system_id: str | None = None
    system: str | None = None
    theoretical: dict | None = None
    empirical: dict | None = None
    created: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )
    tool_version: str = __version__

    def to_dict(self):
        return _plain(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")


def spectral_section(theory) -> dict:
    rm = theory.rho_min
    return {
        "method": "spectral",
        "value": theory.dimension,
        "rho_M": theory.rho_m,
        "rho_min": rm.value,
        "D_min": [np.asarray(m).tolist() for m in rm.members],
        "arc_matrix": theory.arc_matrix.tolist(),
        "path_chi_sets": [[list(c) for c in s] for s in theory.path_chi_sets],
    }


def lyapunov_section(rt) -> dict:
    from .lyapunov import format_label

    return {
        "method": "lyapunov",
        "value": rt.dimension,
        "stderr": rt.stderr,
        "L_M": _plain(rt.l_m),
        "L_min": _plain(rt.lmin.estimate),
        "L_min_label": format_label(rt.lmin.label),
        "ties": [format_label(rt.lmin.labels[i]) for i in rt.lmin.ties],
        "expectation_bound": rt.bound.value,
        "per_set": [
            {"label": format_label(lab), "value": e.value, "stderr": e.stderr}
            for lab, e in zip(rt.lmin.labels, rt.lmin.estimates)
        ],
    }


def empirical_section(results, seeds, steps) -> dict:
    fits = [r.fit for r in results]
    dims = [f.dimension for f in fits]
    out = {
        "method": "vgbc",
        "convention": BOX_CONVENTION,
        "steps": steps,
        "seeds": list(seeds),
        "runs": [
            {
                "seed": s,
                "dimension": r.estimate,
                "stderr": r.stderr,
                "fit": _plain(r.fit),
                "num_nodes": r.curve.num_nodes,
                "num_arcs": r.curve.num_arcs,
                "diameter": r.curve.diameter,
                "repaired": r.curve.repaired,
            }
            for s, r in zip(seeds, results)
        ],
        "value": float(np.mean(dims)),
    }
    if len(dims) > 1:
        out["stderr"] = float(np.std(dims, ddof=1) / np.sqrt(len(dims)))
    else:
        out["stderr"] = results[0].stderr
    return out
