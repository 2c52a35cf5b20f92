"""CSV and cache serialization for spectra, curves, and length spectra.

All numeric text uses repr() (shortest round-trip decimals), so writes are
byte-identical across runs for identical inputs and reads are lossless.
"""

import json
import math
import os
from typing import Optional

import numpy as np

from .arith import LengthEntry, SpectrumClass, WeightedLengthSpectrum, xm
from .dwcore import ComplexSpectrum, DampingProfile


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


# ---------------------------------------------------------------------------
# spectra

def write_spectrum_csv(path: str, spectrum: ComplexSpectrum) -> None:
    """Header `re,im,kind,hbar,K,profile_hash`; one row per eigenvalue."""
    hbar = "" if spectrum.hbar is None else _fmt(spectrum.hbar)
    K = spectrum.meta.get("K", "")
    phash = spectrum.meta.get("profile_hash", "")
    lines = ["re,im,kind,hbar,K,profile_hash"]
    for z in spectrum.values:
        lines.append(f"{_fmt(z.real)},{_fmt(z.imag)},{spectrum.kind},{hbar},{K},{phash}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_spectrum_csv(path: str) -> ComplexSpectrum:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "re,im,kind,hbar,K,profile_hash":
            raise ValueError(f"unexpected spectrum header: {header!r}")
        vals, kind, hbar, meta = [], None, None, {}
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"malformed spectrum row at line {lineno}")
            vals.append(complex(float(parts[0]), float(parts[1])))
            kind = parts[2]
            hbar = float(parts[3]) if parts[3] else None
            if parts[4]:
                meta["K"] = int(parts[4])
            if parts[5]:
                meta["profile_hash"] = parts[5]
    return ComplexSpectrum(values=np.array(vals), kind=kind or "wave-tau",
                           hbar=hbar, meta=meta)


# ---------------------------------------------------------------------------
# profiles and models (JSON-compatible structured text)

def write_profile(path: str, profile: DampingProfile) -> None:
    with open(path, "w") as fh:
        json.dump(profile.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_profile(path: str) -> DampingProfile:
    with open(path) as fh:
        return DampingProfile.from_dict(json.load(fh))


def write_markov_model(path: str, model) -> None:
    doc = {"states": int(model.n_states),
           "adjacency": model.adjacency.tolist(),
           "q": model.q_edge.tolist(),
           "roof": model.roof_edge.tolist(),
           "d_minus_1": model.d_minus_1}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_markov_model(path: str):
    from .thermo import MarkovModel

    with open(path) as fh:
        doc = json.load(fh)
    return MarkovModel(adjacency=np.array(doc["adjacency"]),
                       q_edge=np.array(doc["q"]),
                       roof_edge=np.array(doc["roof"]),
                       d_minus_1=float(doc.get("d_minus_1", 1.0)))


# ---------------------------------------------------------------------------
# x,value curves

def write_curve_csv(path: str, xs, values) -> None:
    lines = ["x,value"]
    for x, v in zip(xs, values):
        lines.append(f"{_fmt(x)},{_fmt(v)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_curve_csv(path: str):
    xs, vs = [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,value":
            raise ValueError(f"unexpected curve header: {header!r}")
        for line in fh:
            line = line.strip()
            if line:
                a, b = line.split(",")
                xs.append(float(a))
                vs.append(float(b))
    return np.array(xs), np.array(vs)


# ---------------------------------------------------------------------------
# counting reports

def write_counts_csv(path: str, rows) -> None:
    """Rows of (hbar, c, alpha, side, count)."""
    lines = ["hbar,c,alpha,side,count"]
    for hbar, c, alpha, side, count in rows:
        lines.append(f"{_fmt(hbar)},{_fmt(c)},{_fmt(alpha)},{side},{int(count)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def append_exponent_report(path: str, slope: float, residual: float) -> None:
    with open(path, "a") as fh:
        fh.write(f"slope,{_fmt(slope)}\nresidual,{_fmt(residual)}\n")


# ---------------------------------------------------------------------------
# trajectory dumps

def write_trajectory_csv(path: str, table: np.ndarray) -> None:
    lines = ["t,g11,g12,g21,g22,q_value"]
    for row in table:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# length-spectrum cache

_CACHE_COLUMNS = "m,y0,y1,y2,y3,class_id,primitive_length,omega_integral"


def write_length_spectrum_cache(path: str, wls: WeightedLengthSpectrum) -> None:
    """Line-based records, one per enumerated element, class data repeated.

    Header carries (A, p, box, seed, weight_mode); status lines record
    windows with no enumerated classes so emptiness survives the round trip.
    """
    lines = [f"# A={wls.A} p={wls.p} box={wls.box} seed={wls.seed} "
             f"weight_mode={wls.weight_mode}",
             _CACHE_COLUMNS]
    for e in wls.entries:
        if not e.classes:
            lines.append(f"# status m={e.m} {e.status}")
            continue
        for ci, cls in enumerate(e.classes):
            members = getattr(cls, "members", None) or [cls.representative]
            for y in members:
                y0, y1, y2, y3 = y
                lines.append(f"{e.m},{y0},{y1},{y2},{y3},{ci},"
                             f"{_fmt(cls.primitive_length)},{_fmt(cls.omega_integral)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_length_spectrum_cache(path: str, expect: Optional[dict] = None) -> WeightedLengthSpectrum:
    """Rebuild a WeightedLengthSpectrum from its cache file.

    `expect` may pin {"A":..., "p":..., "box":...}; mismatches are rejected.
    Malformed lines are reported with their line number.
    """
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or not raw[0].startswith("# "):
        raise ValueError(f"{path}: missing cache header at line 1")
    header = {}
    for tok in raw[0][2:].split():
        k, _, v = tok.partition("=")
        header[k] = v
    try:
        A, p, box = int(header["A"]), int(header["p"]), int(header["box"])
        seed = int(header.get("seed", 0))
        mode = header["weight_mode"]
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: corrupted cache header at line 1: {raw[0]!r}") from exc
    if expect:
        for key, want in expect.items():
            got = {"A": A, "p": p, "box": box}.get(key)
            if got is not None and got != want:
                raise ValueError(f"{path}: cache has {key}={got}, requested {key}={want}")
    if len(raw) < 2 or raw[1] != _CACHE_COLUMNS:
        raise ValueError(f"{path}: missing column header at line 2")
    status = {}
    per_m = {}
    for lineno, line in enumerate(raw[2:], start=3):
        if not line.strip():
            continue
        if line.startswith("# status"):
            toks = line.split()
            m = int(toks[2].split("=")[1])
            status[m] = toks[3]
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise ValueError(f"{path}: malformed record at line {lineno}: {line!r}")
        try:
            m = int(parts[0])
            rep = tuple(int(v) for v in parts[1:5])
            ci = int(parts[5])
            prim = float(parts[6])
            omega = float(parts[7])
        except ValueError as exc:
            raise ValueError(f"{path}: unparseable record at line {lineno}: {line!r}") from exc
        per_m.setdefault(m, {}).setdefault(ci, {"members": [], "prim": prim,
                                                "omega": omega})
        per_m[m][ci]["members"].append(rep)
    entries = []
    for m in sorted(set(per_m) | set(status)):
        x, length, _ = xm(m)
        if m in per_m:
            classes = []
            for ci in sorted(per_m[m]):
                rec = per_m[m][ci]
                members = tuple(rec["members"])
                classes.append(SpectrumClass(representative=min(members), size=len(members),
                                             primitive_length=rec["prim"],
                                             omega_integral=rec["omega"],
                                             members=members))
            entries.append(LengthEntry(m=m, x=x, length=length, classes=classes))
        else:
            entries.append(LengthEntry(m=m, x=x, length=length, classes=[],
                                       status=status[m]))
    return WeightedLengthSpectrum(entries=entries, weight_mode=mode,
                                  A=A, p=p, box=box, seed=seed)
