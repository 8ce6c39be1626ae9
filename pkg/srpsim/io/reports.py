"""
Fit reports as ``key=value`` text

    model=kt_power
    converged=true
    param.a=0.2501
    stderr.a=0.0012
    extra.correlation_length=3.2

Values are written with 17 significant digits so that reading a report
back gives the same floats.
"""

import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from ..analysis.fits import FitModel, FitResult
from ..exceptions import TableParseError

logger = logging.getLogger(__name__)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def format_fit_report(result: FitResult, header: Optional[Mapping[str, object]] = None) -> str:
    lines = [f"# {k}={v}" for k, v in (header or {}).items()]
    lines += [
        f"model={result.model.value}",
        f"converged={_fmt(result.converged)}",
        f"iterations={result.iterations}",
        f"n_points={result.n_points}",
        f"rss={_fmt(float(result.residual_sum_squares))}",
    ]
    lines += [f"param.{k}={_fmt(float(v))}" for k, v in result.params.items()]
    lines += [f"stderr.{k}={_fmt(float(v))}" for k, v in (result.param_stderr or {}).items()]
    lines += [f"extra.{k}={_fmt(float(v))}" for k, v in result.extra.items()]
    return "\n".join(lines) + "\n"


def write_fit_report(result: FitResult, path: Union[str, Path],
                     header: Optional[Mapping[str, object]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_fit_report(result, header))
    logger.info(f"{result.model.value} fit report written to {path}")
    return path


def parse_fit_report(text: str) -> FitResult:
    values: Dict[str, str] = {}
    for n, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise TableParseError(f"expected key=value, got {line!r}", n)
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()

    def section(prefix: str) -> Dict[str, float]:
        return {k[len(prefix):]: float(v) for k, v in values.items() if k.startswith(prefix)}

    try:
        stderr = section("stderr.")
        return FitResult(
            model=FitModel(values["model"]),
            params=section("param."),
            residual_sum_squares=float(values["rss"]),
            param_stderr=stderr or None,
            converged=values.get("converged", "true") == "true",
            iterations=int(values.get("iterations", 0)),
            n_points=int(values.get("n_points", 0)),
            extra=section("extra."),
        )
    except (KeyError, ValueError) as e:
        raise TableParseError(f"incomplete fit report: {e}", 0) from e


def read_fit_report(path: Union[str, Path]) -> FitResult:
    with open(path, encoding="utf-8") as fh:
        return parse_fit_report(fh.read())
