"""Run manifests and sample serialization for the command-line front end.

Primary artifacts embed a static manifest (command, seed, config snapshot,
tool version) so a run is reproducible from the file alone; volatile fields
(wall time) go to a sidecar ``run_manifest.json`` referenced by name, keeping
primary outputs byte-identical across repeated seeded runs.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .sampling import Case, CensoredSample, classify_case, ExperimentDesign

__all__ = [
    "RunManifest",
    "manifest_dict",
    "json_dumps",
    "sample_to_csv",
    "sample_to_json",
    "parse_sample_csv",
    "write_text",
]

MANIFEST_SIDECAR = "run_manifest.json"


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: dict
    seed: int | None
    tool_version: str = __version__
    wall_time_s: float | None = None


def manifest_dict(m: RunManifest, volatile: bool = False) -> dict:
    out = {
        "command": m.command,
        "config": m.config,
        "seed": m.seed,
        "tool_version": m.tool_version,
        "manifest_ref": MANIFEST_SIDECAR,
    }
    if volatile:
        out["wall_time_s"] = m.wall_time_s
    return out


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, Case):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o)!r}")


def json_dumps(payload) -> str:
    """Deterministic JSON text with round-trip float precision."""
    return json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text)


def sample_to_csv(s: CensoredSample, manifest: RunManifest | None = None) -> str:
    """CSV form: comment header with design metadata, then time,stress_level rows."""
    lines = []
    if manifest is not None:
        lines.append(f"# manifest: {json.dumps(manifest_dict(manifest), sort_keys=True)}")
    lines.append(f"# design: {json.dumps({'n': s.design.n, 'r': s.design.r, 'tau': s.design.tau})}")
    lines.append("time,stress_level")
    for t in s.times:
        level = 1 if t <= s.design.tau else 2
        lines.append(f"{float(t)!r},{level}")
    return "\n".join(lines) + "\n"


def sample_to_json(s: CensoredSample, manifest: RunManifest | None = None, seed=None) -> str:
    payload = {
        "times": s.times,
        "stress_levels": [1 if t <= s.design.tau else 2 for t in s.times],
        "n_pre_tau": s.n_pre_tau,
        "case": s.case,
        "design": {"n": s.design.n, "r": s.design.r, "tau": s.design.tau},
        "seed": seed,
    }
    if manifest is not None:
        payload["manifest"] = manifest_dict(manifest)
    return json_dumps(payload)


class SampleCsvError(ValueError):
    """Malformed or inconsistent sample file."""


def parse_sample_csv(path, tau: float | None = None, n: int | None = None) -> CensoredSample:
    """Read a ``time,stress_level`` CSV back into a censored sample.

    Design metadata comes from the embedded ``# design:`` comment; explicit
    ``tau``/``n`` arguments override it. Validates ordering, positivity, and
    stress-level consistency with tau, reporting the offending line number.
    """
    text = Path(path).read_text()
    times: list[float] = []
    levels: list[int] = []
    meta: dict = {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("design:"):
                try:
                    meta = json.loads(body[len("design:") :])
                except json.JSONDecodeError as e:
                    raise SampleCsvError(f"line {lineno}: bad design metadata: {e}") from e
            continue
        if not header_seen:
            if line.replace(" ", "") != "time,stress_level":
                raise SampleCsvError(f"line {lineno}: expected header 'time,stress_level', got {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise SampleCsvError(f"line {lineno}: expected 'time,stress_level', got {line!r}")
        try:
            t = float(parts[0])
            level = int(parts[1])
        except ValueError as e:
            raise SampleCsvError(f"line {lineno}: {e}") from e
        if t <= 0:
            raise SampleCsvError(f"line {lineno}: time must be > 0, got {t}")
        if level not in (1, 2):
            raise SampleCsvError(f"line {lineno}: stress_level must be 1 or 2, got {level}")
        if times and t <= times[-1]:
            raise SampleCsvError(f"line {lineno}: times out of order ({t} after {times[-1]})")
        times.append(t)
        levels.append(level)
    if not header_seen:
        raise SampleCsvError("no header found: expected 'time,stress_level'")
    if not times:
        raise SampleCsvError("no observations in file")

    tau_eff = tau if tau is not None else meta.get("tau")
    if tau_eff is None:
        raise SampleCsvError("tau not given and not present in the file metadata")
    n_eff = n if n is not None else meta.get("n")
    if n_eff is None:
        raise SampleCsvError("n (units on test) not given and not present in the file metadata")
    for i, (t, level) in enumerate(zip(times, levels), start=1):
        if level == 1 and t > tau_eff:
            raise SampleCsvError(f"observation {i}: stress level 1 but time {t} exceeds tau={tau_eff}")
        if level == 2 and t <= tau_eff:
            raise SampleCsvError(f"observation {i}: stress level 2 but time {t} is at or before tau={tau_eff}")

    arr = np.array(times)
    design = ExperimentDesign(n=int(n_eff), r=arr.size, tau=float(tau_eff))
    n_pre = int(np.count_nonzero(arr <= design.tau))
    return CensoredSample(times=arr, n_pre_tau=n_pre, design=design, case=classify_case(arr, design.tau))
