"""
Classification reports

A report gathers every certificate for one operator file into a nested
dictionary of plain JSON types. Given the same file, seed and sample
counts the serialized report is byte-identical, whatever the worker count.
"""
from __future__ import annotations
import os
import json
import logging
import math
from dataclasses import asdict, is_dataclass
from typing import Any, Dict, Optional

import numpy as np

from .config import Settings, get_settings
from .dynamics import certificates, dynamics_class, find_fixed_points, tilde_orbit_probe
from .families import (
    abc_regime,
    abc_to_diagonal,
    check_bb3,
    check_bb4,
    check_bb5,
    not_ks_predicate,
)
from .ks_cert import CHANNELS, KsWitness, ks_scan
from .models import PauliElement
from .operator import (
    check_coassociativity,
    check_dstar1,
    check_dstar3,
    check_flip_symmetry,
    haar_check,
    search_positivity_violation,
    triple_norm,
)
from .operator_file import ParsedOperator
from .sampling import ball_grid

# Configure logging
logger = logging.getLogger(__name__)

REPORT_VERSION = "qqo-report/1"
FLOAT_FORMAT = "%.17g"


class ReportError(Exception):
    """Base exception for report assembly and output"""
    pass


def format_float(value: float) -> str:
    """FLOAT_FORMAT text that still reads back as a float; non-finite values as json writes them"""
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    text = FLOAT_FORMAT % value
    if "." not in text and "e" not in text:
        text += ".0"
    return text


class ReportEncoder(json.JSONEncoder):
    """JSON encoder that writes every float with format_float"""

    def iterencode(self, o: Any, _one_shot: bool = False):
        encode_str = json.encoder.encode_basestring_ascii if self.ensure_ascii else json.encoder.encode_basestring
        return json.encoder._make_iterencode(
            {} if self.check_circular else None,
            self.default,
            encode_str,
            self.indent,
            format_float,
            self.key_separator,
            self.item_separator,
            self.sort_keys,
            self.skipkeys,
            _one_shot,
        )(o, 0)


def to_jsonable(value: Any) -> Any:
    """
    Convert numpy values, complex numbers and dataclasses to JSON types

    Complex numbers become [real, imag] pairs; arrays become nested lists.
    """
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def witness_block(witness: KsWitness) -> Dict[str, Any]:
    block: Dict[str, Any] = {"margin": witness.margin, "w": witness.w}
    if witness.f is not None:
        block["f"] = witness.f
    else:
        block["w0"] = witness.w0
    return block


def _positivity_block(parsed: ParsedOperator, settings: Settings) -> Dict[str, Any]:
    t = parsed.tensor
    tol = settings.tolerances
    dstar1 = check_dstar1(t, settings=settings)
    dstar3 = check_dstar3(t, settings=settings)
    norm = triple_norm(t, settings=settings)
    search = search_positivity_violation(t, settings=settings)

    violation = search.min_eigenvalue < -tol.witness
    inconclusive = norm.value > 1.0 + tol.triple_norm and not violation
    if inconclusive:
        logger.warning(
            "Triple norm %.6g exceeds 1 but no positivity violation was found on %d boundary points",
            norm.value, search.points,
        )

    return {
        "dstar1": {
            "verdict": dstar1.verdict,
            "worst": dstar1.worst,
            "margin": dstar1.margin,
            "f": dstar1.f,
            "p": dstar1.p,
            "pairs": dstar1.pairs_evaluated,
        },
        "dstar3": {"verdict": dstar3.verdict, "value": dstar3.value, "margin": dstar3.margin},
        "triple_norm": {
            "value": norm.value,
            "argmax": norm.argmax,
            "grid_value": norm.grid_value,
            "gap_estimate": norm.gap_estimate,
            "verdict": norm.value <= 1.0 + tol.triple_norm,
            "margin": 1.0 - norm.value,
        },
        "boundary_search": {
            "min_eigenvalue": search.min_eigenvalue,
            "w": search.w,
            "points": search.points,
            "violation_found": violation,
        },
        "inconclusive": inconclusive,
    }


def _structure_block(parsed: ParsedOperator, positivity: Dict[str, Any], settings: Settings) -> Dict[str, Any]:
    t = parsed.tensor
    basis = [PauliElement.identity()] + [PauliElement.sigma(k) for k in (1, 2, 3)]
    haar = max(haar_check(t, x) for x in basis)
    flip = check_flip_symmetry(t, settings=settings)
    coassoc = check_coassociativity(t)
    return {
        "haar_deviation": haar,
        "flip_symmetric": flip,
        "coassociativity_deviation": coassoc,
        "stochastic": flip,
        "convolution_candidate": (
            coassoc <= settings.tolerances.equality
            and not positivity["boundary_search"]["violation_found"]
        ),
    }


def _dynamics_block(parsed: ParsedOperator, settings: Settings) -> Dict[str, Any]:
    t = parsed.tensor
    certs = certificates(t, settings=settings)
    orbit = tilde_orbit_probe(t, settings=settings)
    fixed = find_fixed_points(t, ball_grid(settings.fixed_point_grid), settings=settings)
    return {
        "alpha_k": certs.alpha_k,
        "alpha": certs.alpha,
        "delta_k": certs.delta_k,
        "alfa_contraction": certs.alfa_contraction,
        "bb2": certs.bb2,
        "bb33_n0": certs.bb33_n0,
        "bb_main": certs.bb_main,
        "class": dynamics_class(certs),
        "tilde_orbit": {
            "bounded_up_to_horizon": orbit.bounded_up_to_horizon,
            "sup_seen": orbit.sup_seen,
            "converged_to_zero": orbit.converged_to_zero,
            "steps": orbit.steps,
        },
        "fixed_points": fixed,
    }


def _family_block(parsed: ParsedOperator, settings: Settings) -> Optional[Dict[str, Any]]:
    diagonal = parsed.diagonal
    block: Dict[str, Any] = {}
    if parsed.abc is not None:
        p = parsed.abc
        diagonal = abc_to_diagonal(p)
        bb5 = check_bb5(p, settings=settings)
        not_ks = not_ks_predicate(p, settings=settings)
        block.update({
            "family": "abc",
            "params": {"a": p.a, "b": p.b, "c": p.c},
            "bb5": {"verdict": bb5.verdict, "value": bb5.value, "margin": bb5.margin},
            "e14": not_ks.e14,
            "e15": not_ks.e15,
            "not_ks": not_ks.label,
            "regime": abc_regime(p, settings=settings),
        })
    elif diagonal is not None:
        block["family"] = "diagonal"
    else:
        return None

    bb3 = check_bb3(diagonal, settings=settings)
    bb4 = check_bb4(diagonal, settings=settings)
    block["bb3"] = {"verdict": bb3.verdict, "value": bb3.value, "margin": bb3.margin}
    block["bb4"] = {"verdict": bb4.verdict, "value": bb4.value, "margin": bb4.margin}
    return block


def build_report(parsed: ParsedOperator, settings: Optional[Settings] = None) -> Dict[str, Any]:
    """
    Run every applicable certificate on a parsed operator

    Args:
        parsed: Parsed operator file
        settings: Settings carrying seed and sample counts

    Returns:
        JSON-ready dictionary

    Raises:
        ConventionFault: If the Kadison-Schwarz closed forms disagree with their conventions
    """
    settings = settings or get_settings()
    positivity = _positivity_block(parsed, settings)
    ks = ks_scan(parsed.tensor, settings=settings)

    report = {
        "report": REPORT_VERSION,
        "operator": {"file": parsed.path, "format": parsed.format, "sha256": parsed.sha256},
        "run": {
            "seed": settings.seed,
            "samples": settings.ks_pairs,
            "sphere_points": settings.sphere_points,
            "oracle_samples": settings.oracle_samples,
            "dstar1_random_pairs": settings.dstar1_random_pairs,
        },
        "positivity": positivity,
        "structure": _structure_block(parsed, positivity, settings),
        "ks": {
            "violation_found": ks.violation_found,
            "best_channel": ks.best.channel,
            **{channel: witness_block(ks.worst[channel]) for channel in CHANNELS},
            "oracle_min_eigenvalue": ks.oracle_min_eigenvalue,
            "pairs": ks.pairs_evaluated,
            "oracle_elements": ks.oracle_samples,
        },
        "dynamics": _dynamics_block(parsed, settings),
    }
    family = _family_block(parsed, settings)
    if family is not None:
        report["family"] = family
    return to_jsonable(report)


def dumps_report(report: Dict[str, Any]) -> str:
    """Serialize with 17 significant digit floats and a trailing newline"""
    return json.dumps(to_jsonable(report), cls=ReportEncoder, ensure_ascii=False, indent=2) + "\n"


def write_report(path: str, report: Dict[str, Any]) -> None:
    """
    Write a report through a temporary file and an atomic replace

    Raises:
        ReportError: If the file cannot be written
    """
    directory = os.path.dirname(path)
    tmp_path = path + ".tmp"
    try:
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(tmp_path, "w", encoding="utf-8") as f:
            f.write(dumps_report(report))
        os.replace(tmp_path, path)
    except OSError as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise ReportError(f"Failed to write report {path}: {e}")
