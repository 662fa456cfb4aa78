"""CSV, JSON and plot-script output for pipeline results."""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from app import __version__
from app.models.reports import (
    EPReport,
    NonlinearTable,
    PotentialSamples,
    RemovalReport,
    SpectrumTable,
    Wavefunction,
)
from app.models.run_config import RunConfig
from app.models.solution import EigenSolution, OracleRoots

logger = logging.getLogger(__name__)

SPECTRUM_HEADER = ["gamma", "re_E0_1", "im_E0_1", "re_E1_1", "im_E1_1", "re_E0_2", "im_E0_2"]
WAVEFUNCTION_HEADER = ["x", "re_phi", "im_phi", "abs_phi"]
POTENTIAL_HEADER = ["x", "re_V", "im_V"]
NONLINEAR_HEADER = ["g", "gamma", "re_E0_2", "im_E0_2", "re_Eid", "im_Eid", "deviation"]

Result = Union[
    SpectrumTable,
    RemovalReport,
    NonlinearTable,
    EPReport,
    EigenSolution,
    OracleRoots,
    Wavefunction,
    Dict[str, float],
]


def format_float(value: float) -> str:
    """17 significant digits; -0.0 is written as 0."""
    return format(float(value) + 0.0, ".17g")


def _json_float(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def _complex_fields(prefix: str, value: complex) -> Dict[str, Optional[float]]:
    value = complex(value)
    return {f"re_{prefix}": _json_float(value.real), f"im_{prefix}": _json_float(value.imag)}


def _spectrum_rows(table: SpectrumTable) -> List[List[float]]:
    return [
        [row.gamma, row.E0_1.real, row.E0_1.imag, row.E1_1.real, row.E1_1.imag, row.E0_2.real, row.E0_2.imag]
        for row in table.rows
    ]


def _wavefunction_rows(wavefunction: Wavefunction) -> List[List[float]]:
    phi = wavefunction.phi
    return np.column_stack([wavefunction.x, phi.real, phi.imag, np.abs(phi)]).tolist()


def _solution_samples(solution: EigenSolution) -> Wavefunction:
    return Wavefunction(x=solution.grid, phi=solution.wavefunction)


def _potential_rows(samples: PotentialSamples) -> List[List[float]]:
    values = np.asarray(samples.values, dtype=complex)
    return np.column_stack([samples.x, values.real, values.imag]).tolist()


def _nonlinear_rows(table: NonlinearTable) -> List[List[float]]:
    return [
        [row.g, row.gamma, row.E0_2.real, row.E0_2.imag, row.E_id.real, row.E_id.imag, row.deviation]
        for row in table.rows
    ]


def render_csv(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    """CSV text with fixed float formatting and '\\n' line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(value) for value in row])
    return buffer.getvalue()


def plot_script(csv_path: Path, header: Sequence[str]) -> str:
    """Gnuplot script plotting every column of a CSV against the first."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{header[0]}'",
    ]
    curves = [f"'{csv_path.name}' using 1:{index} with lines" for index in range(2, len(header) + 1)]
    lines.append("plot " + ", \\\n     ".join(curves))
    return "\n".join(lines) + "\n"


def _wavefunction_payload(wavefunction: Wavefunction) -> Dict[str, list]:
    phi = wavefunction.phi
    return {
        "x": [float(v) for v in wavefunction.x],
        "re_phi": [float(v) for v in phi.real],
        "im_phi": [float(v) for v in phi.imag],
        "abs_phi": [float(v) for v in np.abs(phi)],
    }


def _potential_payload(samples: PotentialSamples) -> Dict[str, list]:
    values = np.asarray(samples.values, dtype=complex)
    return {
        "x": [float(v) for v in samples.x],
        "re_V": [_json_float(v) for v in values.real],
        "im_V": [_json_float(v) for v in values.imag],
    }


def _optional_complex(prefix: str, value: Optional[complex]) -> Dict[str, Optional[float]]:
    if value is None:
        return {f"re_{prefix}": None, f"im_{prefix}": None}
    return _complex_fields(prefix, value)


def scalar_fields(result: Result) -> Dict[str, object]:
    """Flat key/value view of scalar results."""
    if isinstance(result, OracleRoots):
        fields = {"gamma": result.gamma, "a": result.a, "degenerate": result.degenerate}
        fields.update(_complex_fields("kappa0", result.kappa0))
        fields.update(_complex_fields("kappa1", result.kappa1))
        fields.update(_complex_fields("E0_1", result.energies[0]))
        fields.update(_complex_fields("E1_1", result.energies[1]))
        return fields
    if isinstance(result, EPReport):
        fields = {
            "a": result.a,
            "gamma_crit": result.gamma_crit_oracle,
            "gamma_crit_shooting": result.gamma_crit_shooting,
            "difference": result.difference,
            "survivor_asymmetry": result.survivor_asymmetry,
        }
        fields.update(_complex_fields("kappa_ep", result.kappa_ep))
        fields.update(_complex_fields("E0_2", result.survivor_energy))
        return fields
    if isinstance(result, EigenSolution):
        fields = {"norm": result.norm, "residual_norm": result.residual_norm, "iterations": result.iterations}
        fields.update(_complex_fields("kappa", result.kappa))
        fields.update(_complex_fields("E", result.energy))
        return fields
    if isinstance(result, RemovalReport):
        fields = {
            "removed_index": result.removed_index,
            "gamma": result.gamma,
            "a": result.a,
            "g": result.g,
            "deviation": result.deviation,
            "factorization_residual": result.factorization_residual,
            "v2_asymmetry": result.v2_asymmetry,
        }
        fields.update(_complex_fields("E0_2", result.partner_energy))
        fields.update(_complex_fields("Eid", result.ideal_energy))
        for name in ("xi_left", "xi_mid", "xi_right", "xi_mid_reduced", "xi_right_reduced"):
            fields.update(_optional_complex(name, getattr(result, name)))
        return fields
    if isinstance(result, dict):
        return dict(result)
    raise TypeError(f"no scalar view for {type(result).__name__}")


def render_key_values(fields: Dict[str, object]) -> str:
    lines = []
    for key, value in fields.items():
        if isinstance(value, bool) or value is None:
            text = str(value).lower()
        elif isinstance(value, int):
            text = str(value)
        else:
            text = format_float(value)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


class ResultWriter:
    """Writes one pipeline result in the format a RunConfig asks for."""

    def __init__(self, config: RunConfig, command_line: str = ""):
        self.config = config
        self.command_line = command_line

    def meta(self) -> Dict[str, object]:
        return {
            "a": self.config.a,
            "h": self.config.step,
            "tol": self.config.tol,
            "version": __version__,
            "command_line": self.command_line,
        }

    def _write(self, path: Path, text: str) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("wrote %s", path)
        return path

    def _write_csv(self, path: Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> List[Path]:
        written = [self._write(path, render_csv(header, rows))]
        if self.config.emit_plot:
            written.append(self._write(path.with_suffix(".gp"), plot_script(path, header)))
        return written

    def _write_json(self, path: Path, payload: Dict[str, object]) -> List[Path]:
        payload = {"meta": self.meta(), **payload}
        return [self._write(path, json.dumps(payload, indent=2) + "\n")]

    @staticmethod
    def sibling(path: Path, suffix: str) -> Path:
        return path.with_name(f"{path.stem}_{suffix}{path.suffix}")

    def write(self, result: Result, path: Optional[Path] = None) -> List[Path]:
        """Write the result and return every file created."""
        path = Path(path or self.config.out)
        if self.config.format == "json":
            return self._write_json(path, self.payload(result))

        if isinstance(result, SpectrumTable):
            return self._write_csv(path, SPECTRUM_HEADER, _spectrum_rows(result))
        if isinstance(result, NonlinearTable):
            return self._write_csv(path, NONLINEAR_HEADER, _nonlinear_rows(result))
        if isinstance(result, RemovalReport):
            written = self._write_csv(path, WAVEFUNCTION_HEADER, _wavefunction_rows(result.partner_wavefunction))
            written += self._write_csv(
                self.sibling(path, "potential"), POTENTIAL_HEADER, _potential_rows(result.v2_samples)
            )
            written += self._write_csv(
                self.sibling(path, "superpotential"), POTENTIAL_HEADER, _potential_rows(result.w_samples)
            )
            return written
        if isinstance(result, EPReport):
            return self._write_csv(path, WAVEFUNCTION_HEADER, _wavefunction_rows(result.survivor_wavefunction))
        if isinstance(result, Wavefunction):
            return self._write_csv(path, WAVEFUNCTION_HEADER, _wavefunction_rows(result))
        if isinstance(result, EigenSolution):
            return self._write_csv(path, WAVEFUNCTION_HEADER, _wavefunction_rows(_solution_samples(result)))
        return [self._write(path, render_key_values(scalar_fields(result)))]

    def payload(self, result: Result) -> Dict[str, object]:
        """JSON body using the CSV column names."""
        if isinstance(result, SpectrumTable):
            rows = []
            for row in result.rows:
                entry = {"gamma": row.gamma, "gamma_crit_flag": row.gamma_crit_flag}
                entry.update(_complex_fields("E0_1", row.E0_1))
                entry.update(_complex_fields("E1_1", row.E1_1))
                entry.update(_complex_fields("E0_2", row.E0_2))
                rows.append(entry)
            return {"removed_index": result.removed_index, "gamma_crit": result.gamma_crit, "rows": rows}
        if isinstance(result, NonlinearTable):
            rows = []
            for row in result.rows:
                entry = {"g": row.g, "gamma": row.gamma, "deviation": _json_float(row.deviation), "error": row.error}
                entry.update(_complex_fields("E0_2", row.E0_2))
                entry.update(_complex_fields("Eid", row.E_id))
                rows.append(entry)
            return {"rows": rows}
        if isinstance(result, Wavefunction):
            return {"wavefunction": _wavefunction_payload(result)}

        body: Dict[str, object] = scalar_fields(result)
        if isinstance(result, RemovalReport):
            body["pole_markers"] = list(result.pole_markers)
            body["wavefunction"] = _wavefunction_payload(result.partner_wavefunction)
            body["potential"] = _potential_payload(result.v2_samples)
            body["superpotential"] = _potential_payload(result.w_samples)
        elif isinstance(result, EPReport):
            body["wavefunction"] = _wavefunction_payload(result.survivor_wavefunction)
        elif isinstance(result, EigenSolution):
            body["wavefunction"] = _wavefunction_payload(_solution_samples(result))
        return body


def write_outputs(result: Result, config: RunConfig, command_line: str = "") -> List[Path]:
    """Write a result to config.out; nothing is written when out is unset."""
    if config.out is None:
        return []
    return ResultWriter(config, command_line).write(result)
