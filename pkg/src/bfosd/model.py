"""CSS codes and decoding models.

A :class:`DecodingModel` is the decoder's whole view of the noise: a detector
matrix whose columns are elementary faults, a prior per column, and the
logical effect of each column. X and Z sectors are separate models; the
sector ``"x"`` model is built from ``h_x`` (it detects Z-type errors, whose
logical action is read off ``logicals_x``), and symmetrically for ``"z"``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .gf2 import BitMatrix, BitVector

log = logging.getLogger(__name__)

# Merged priors are kept strictly below 1/2 so every prior LLR stays positive.
PRIOR_CLAMP = 0.5 - 1e-9


class CodeValidationError(ValueError):
    pass


class FaultListError(ValueError):
    pass


class MergeWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class CSSCode:
    h_x: BitMatrix
    h_z: BitMatrix
    logicals_x: BitMatrix
    logicals_z: BitMatrix
    n: int
    k: int
    d: int | None = None
    notes: tuple[str, ...] = ()

    def sector(self, name: str) -> tuple[BitMatrix, BitMatrix]:
        """Check matrix and logical matrix defining one decoding sector."""
        if name == "x":
            return self.h_x, self.logicals_x
        if name == "z":
            return self.h_z, self.logicals_z
        raise ValueError(f"unknown sector {name!r}; expected 'x' or 'z'")


def _first_orthogonality_violation(a: BitMatrix, b: BitMatrix):
    prod = (a.to_dense().astype(np.int64) @ b.to_dense().T.astype(np.int64)) & 1
    bad = np.argwhere(prod)
    return None if bad.size == 0 else (int(bad[0, 0]), int(bad[0, 1]))


def logical_operators(h_x: BitMatrix, h_z: BitMatrix) -> tuple[BitMatrix, BitMatrix]:
    """Bases of ker(h_z)/rowspace(h_x) and ker(h_x)/rowspace(h_z)."""

    def complement(h_same: BitMatrix, h_other: BitMatrix) -> BitMatrix:
        er = gf2.eliminate_ordered(h_other, np.arange(h_other.cols))
        kernel = gf2.null_space_generators(er)
        chosen: list[BitVector] = []
        stack = h_same
        base_rank = gf2.rank(stack)
        for g in kernel:
            trial = stack.vstack(BitMatrix.from_rows([g]))
            r = gf2.rank(trial)
            if r > base_rank:
                chosen.append(g)
                stack, base_rank = trial, r
        return BitMatrix.from_rows(chosen, cols=h_same.cols)

    return complement(h_x, h_z), complement(h_z, h_x)


def validate_css(
    h_x: BitMatrix,
    h_z: BitMatrix,
    logicals: tuple[BitMatrix, BitMatrix] | None = None,
    d: int | None = None,
    notes: Sequence[str] = (),
) -> CSSCode:
    """Check the CSS conditions and return the code with its computed ``k``.

    If ``logicals`` is omitted, a logical basis is computed.

    Raises:
        CodeValidationError: on column mismatch, a failing ``(row_x, row_z)``
            orthogonality pair, or an inconsistent logical-operator row.
    """
    if h_x.cols != h_z.cols:
        raise CodeValidationError(f"h_x has {h_x.cols} columns but h_z has {h_z.cols}")
    n = h_x.cols
    bad = _first_orthogonality_violation(h_x, h_z)
    if bad is not None:
        raise CodeValidationError(
            f"orthogonality violated: row {bad[0]} of h_x and row {bad[1]} of h_z anticommute"
        )
    rank_x, rank_z = gf2.rank(h_x), gf2.rank(h_z)
    k = n - rank_x - rank_z
    if logicals is None:
        lx, lz = logical_operators(h_x, h_z)
    else:
        lx, lz = logicals
        for name, lmat, h_same, h_other in (("x", lx, h_x, h_z), ("z", lz, h_z, h_x)):
            if lmat.cols != n:
                raise CodeValidationError(f"logicals_{name} has {lmat.cols} columns, expected {n}")
            if lmat.rows != k:
                raise CodeValidationError(f"logicals_{name} has {lmat.rows} rows, expected k={k}")
            bad = _first_orthogonality_violation(lmat, h_other)
            if bad is not None:
                other = "z" if name == "x" else "x"
                raise CodeValidationError(
                    f"logicals_{name} row {bad[0]} anticommutes with h_{other} row {bad[1]}"
                )
            stack = h_same
            current = gf2.rank(stack)
            for i in range(lmat.rows):
                stack = stack.vstack(BitMatrix.from_rows([lmat.row(i)]))
                r = gf2.rank(stack)
                if r == current:
                    raise CodeValidationError(
                        f"logicals_{name} row {i} is dependent on rowspace(h_{name}) and earlier logicals"
                    )
                current = r
    return CSSCode(h_x=h_x, h_z=h_z, logicals_x=lx, logicals_z=lz, n=n, k=k, d=d, notes=tuple(notes))


def _shift(size: int, power: int) -> np.ndarray:
    return np.roll(np.eye(size, dtype=np.uint8), power % size, axis=1)


def build_bicycle(
    l: int,
    m: int,
    a_monomials: Sequence[tuple[int, int]],
    b_monomials: Sequence[tuple[int, int]],
    d: int | None = None,
) -> CSSCode:
    """Bivariate bicycle code with ``h_x = [A|B]`` and ``h_z = [B^T|A^T]``.

    Each monomial ``(i, j)`` stands for ``x^i y^j`` with ``x = S_l (x) I_m`` and
    ``y = I_l (x) S_m``. Repeated monomials cancel in pairs; that is reported
    in ``notes`` rather than rejected.
    """
    if l < 1 or m < 1:
        raise ValueError("l and m must be positive")
    notes = []

    def poly(monos, name):
        seen: dict[tuple[int, int], int] = {}
        mat = np.zeros((l * m, l * m), dtype=np.uint8)
        for i, j in monos:
            key = (i % l, j % m)
            seen[key] = seen.get(key, 0) + 1
            mat ^= np.kron(_shift(l, key[0]), _shift(m, key[1]))
        dups = sorted(key for key, c in seen.items() if c > 1)
        if dups:
            msg = f"polynomial {name}: repeated monomials {dups} cancel over GF(2)"
            log.warning(msg)
            notes.append(msg)
        return mat

    A = poly(a_monomials, "A")
    B = poly(b_monomials, "B")
    h_x = BitMatrix.from_dense(np.hstack([A, B]))
    h_z = BitMatrix.from_dense(np.hstack([B.T, A.T]))
    return validate_css(h_x, h_z, d=d, notes=notes)


@dataclass(frozen=True, eq=False)
class Fault:
    detectors: BitVector
    logical: BitVector
    probability: float
    label: str | None = None

    def __post_init__(self):
        if not 0.0 < self.probability < 1.0:
            raise ValueError(f"fault probability must lie in (0, 1), got {self.probability}")


@dataclass(frozen=True, eq=False)
class DecodingModel:
    """Detector matrix, per-column priors and logical effects.

    Priors are accepted in ``[0, 0.5]``; zero priors only arise in hand-built
    test models and behave as faults that never fire.
    """

    h_dec: BitMatrix
    priors: np.ndarray
    logical_effects: BitMatrix
    rounds: int = 1
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        priors = np.array(self.priors, dtype=np.float64)
        if priors.ndim != 1 or priors.shape[0] != self.h_dec.cols:
            raise ValueError(f"expected {self.h_dec.cols} priors, got shape {priors.shape}")
        if self.logical_effects.cols != self.h_dec.cols:
            raise ValueError("logical_effects and h_dec must have the same column count")
        if np.any(priors < 0) or np.any(priors > 0.5):
            raise ValueError("priors must lie in [0, 0.5]")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.labels is not None and len(self.labels) != self.h_dec.cols:
            raise ValueError("labels must have one entry per column")
        priors.setflags(write=False)
        object.__setattr__(self, "priors", priors)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_detectors(self) -> int:
        return self.h_dec.rows

    @property
    def n_columns(self) -> int:
        return self.h_dec.cols

    @property
    def n_observables(self) -> int:
        return self.logical_effects.rows

    @cached_property
    def rank(self) -> int:
        return gf2.rank(self.h_dec)

    @property
    def k(self) -> int:
        """Size of the free set: columns minus rank."""
        return self.n_columns - self.rank

    @cached_property
    def h_dense(self) -> np.ndarray:
        a = self.h_dec.to_dense()
        a.setflags(write=False)
        return a

    @cached_property
    def logical_dense(self) -> np.ndarray:
        a = self.logical_effects.to_dense()
        a.setflags(write=False)
        return a

    def to_dict(self, sparse: bool = True) -> dict:
        return {
            "format": "decoding-model",
            "version": 1,
            "rounds": self.rounds,
            "h_dec": _matrix_to_json(self.h_dec, sparse),
            "priors": [float(p) for p in self.priors],
            "logical_effects": _matrix_to_json(self.logical_effects, sparse),
            "labels": list(self.labels) if self.labels is not None else None,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> DecodingModel:
        if doc.get("format") != "decoding-model":
            raise ValueError("not a decoding-model document")
        labels = doc.get("labels")
        return cls(
            h_dec=_matrix_from_json(doc["h_dec"]),
            priors=np.asarray(doc["priors"], dtype=np.float64),
            logical_effects=_matrix_from_json(doc["logical_effects"]),
            rounds=int(doc.get("rounds", 1)),
            labels=tuple(labels) if labels is not None else None,
        )

    @cached_property
    def digest(self) -> str:
        doc = self.to_dict(sparse=True)
        doc.pop("labels")
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _matrix_to_json(M: BitMatrix, sparse: bool) -> dict:
    dense = M.to_dense()
    if sparse:
        return {"rows": M.rows, "cols": M.cols, "sparse": [np.flatnonzero(r).tolist() for r in dense]}
    return {"rows": M.rows, "cols": M.cols, "dense": ["".join(map(str, r)) for r in dense]}


def _matrix_from_json(doc: dict) -> BitMatrix:
    rows, cols = int(doc["rows"]), int(doc["cols"])
    if "sparse" in doc:
        return BitMatrix.from_sparse(rows, cols, doc["sparse"])
    dense = np.array([[int(c) for c in r] for r in doc["dense"]], dtype=np.uint8).reshape(rows, cols)
    return BitMatrix.from_dense(dense)


def _combine(p: float, q: float, mode: str) -> float:
    if mode == "sum":
        return p + q
    if mode == "xor":
        return p + q - 2.0 * p * q
    raise ValueError(f"unknown merge mode {mode!r}; expected 'sum' or 'xor'")


def merge_faults(
    faults: Sequence[Fault],
    mode: str = "sum",
    rounds: int = 1,
    n_detectors: int | None = None,
    n_observables: int | None = None,
) -> DecodingModel:
    """Merge faults with identical (detectors, logical) tuples into one column.

    Columns appear in order of first occurrence. With ``mode="sum"`` merged
    probabilities add; ``mode="xor"`` combines them as independent odd-parity
    events. A merged probability reaching 1/2 is clamped just below it and a
    :class:`MergeWarning` is emitted.
    """
    if not faults:
        raise FaultListError("no faults")
    d_len = len(faults[0].detectors) if n_detectors is None else n_detectors
    o_len = len(faults[0].logical) if n_observables is None else n_observables
    groups: dict[tuple, int] = {}
    probs: list[float] = []
    cols_d: list[BitVector] = []
    cols_l: list[BitVector] = []
    labels: list[str] = []
    for idx, f in enumerate(faults):
        if len(f.detectors) != d_len or len(f.logical) != o_len:
            raise FaultListError(
                f"fault {idx}: expected {d_len} detectors and {o_len} observables, "
                f"got {len(f.detectors)} and {len(f.logical)}"
            )
        key = (f.detectors, f.logical)
        slot = groups.get(key)
        if slot is None:
            groups[key] = len(probs)
            probs.append(f.probability)
            cols_d.append(f.detectors)
            cols_l.append(f.logical)
            labels.append(f.label if f.label is not None else f"fault {idx}")
        else:
            probs[slot] = _combine(probs[slot], f.probability, mode)
            if f.label is not None:
                labels[slot] = f"{labels[slot]}+{f.label}"
    priors = np.array(probs, dtype=np.float64)
    over = np.flatnonzero(priors >= 0.5)
    if over.size:
        msg = (
            f"{over.size} merged fault probabilities reached 0.5 "
            f"(columns {over[:5].tolist()}...); clamped to {PRIOR_CLAMP}"
        )
        log.warning(msg)
        warnings.warn(msg, MergeWarning, stacklevel=2)
        priors[over] = PRIOR_CLAMP
    h = BitMatrix.from_rows(cols_d).transpose() if d_len else BitMatrix.zeros(0, len(probs))
    lmat = BitMatrix.from_rows(cols_l).transpose() if o_len else BitMatrix.zeros(0, len(probs))
    return DecodingModel(h_dec=h, priors=priors, logical_effects=lmat, rounds=rounds, labels=tuple(labels))


def model_faults(model: DecodingModel) -> list[Fault]:
    """Split a model back into one :class:`Fault` per column."""
    h, lmat = model.h_dense, model.logical_dense
    faults = []
    for j in range(model.n_columns):
        p = float(model.priors[j])
        if p <= 0.0:
            raise ValueError(f"column {j} has zero prior and cannot be expressed as a fault")
        label = model.labels[j] if model.labels is not None else None
        faults.append(Fault(BitVector.from_bits(h[:, j]), BitVector.from_bits(lmat[:, j]), p, label))
    return faults


def phenomenological_sector(
    h: BitMatrix,
    logicals: BitMatrix,
    p_data: float,
    p_meas: float,
    rounds: int,
    merge_mode: str = "sum",
) -> DecodingModel:
    """Spatio-temporal model for one sector under phenomenological noise.

    Detector layer ``t`` is the difference of the syndromes measured in rounds
    ``t`` and ``t - 1``. A data error in round ``t`` fires layer ``t`` only; a
    measurement error in round ``t < rounds`` fires the same check in layers
    ``t`` and ``t + 1``. The last round is measured perfectly.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if not 0.0 < p_data < 0.5:
        raise ValueError(f"p_data must lie in (0, 0.5), got {p_data}")
    if rounds > 1 and not 0.0 < p_meas < 0.5:
        raise ValueError(f"p_meas must lie in (0, 0.5), got {p_meas}")
    hd, ld = h.to_dense(), logicals.to_dense()
    m, n = hd.shape
    n_det = m * rounds
    faults = []
    for t in range(rounds):
        for q in range(n):
            det = np.zeros(n_det, dtype=np.uint8)
            det[t * m : (t + 1) * m] = hd[:, q]
            faults.append(Fault(BitVector.from_bits(det), BitVector.from_bits(ld[:, q]), p_data, f"data q={q} t={t}"))
        if t < rounds - 1:
            zero_l = BitVector.zeros(ld.shape[0])
            for c in range(m):
                faults.append(
                    Fault(
                        BitVector.from_indices(n_det, (t * m + c, (t + 1) * m + c)),
                        zero_l,
                        p_meas,
                        f"meas c={c} t={t}",
                    )
                )
    return merge_faults(faults, mode=merge_mode, rounds=rounds, n_detectors=n_det, n_observables=ld.shape[0])


def build_phenomenological(
    code: CSSCode,
    p_data: float,
    p_meas: float,
    rounds: int,
    sectors: Iterable[str] = ("x", "z"),
) -> dict[str, DecodingModel]:
    return {s: phenomenological_sector(*code.sector(s), p_data, p_meas, rounds) for s in sectors}


def build_code_capacity(code: CSSCode, p: float, sectors: Iterable[str] = ("x", "z")) -> dict[str, DecodingModel]:
    return build_phenomenological(code, p, p, 1, sectors)


# -- fault-list files -------------------------------------------------------


def _parse_indices(token: str, bound: int, what: str, lineno: int) -> list[int]:
    if not token:
        return []
    try:
        idx = [int(t) for t in token.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise FaultListError(f"line {lineno}: bad {what} index list {token!r}") from exc
    for i in idx:
        if not 0 <= i < bound:
            raise FaultListError(f"line {lineno}: {what} index {i} out of range 0..{bound - 1}")
    return idx


def parse_fault_list(text: str, mode: str = "sum", rounds: int = 1) -> DecodingModel:
    """Parse the fault-list text format and merge identical tuples.

    Format: a header ``detectors=D observables=O`` followed by one fault per
    line, ``p=<float> d=<i,j,...> l=<i,...>``. ``#`` starts a comment.
    """
    header = None
    faults: list[Fault] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = {}
        for tok in line.split():
            if "=" not in tok:
                raise FaultListError(f"line {lineno}: expected key=value, got {tok!r}")
            key, val = tok.split("=", 1)
            if key in fields:
                raise FaultListError(f"line {lineno}: duplicate key {key!r}")
            fields[key] = val
        if header is None:
            if set(fields) != {"detectors", "observables"}:
                raise FaultListError(f"line {lineno}: expected header 'detectors=D observables=O'")
            try:
                header = (int(fields["detectors"]), int(fields["observables"]))
            except ValueError as exc:
                raise FaultListError(f"line {lineno}: header counts must be integers") from exc
            if header[0] < 0 or header[1] < 0:
                raise FaultListError(f"line {lineno}: header counts must be non-negative")
            continue
        if set(fields) != {"p", "d", "l"}:
            raise FaultListError(f"line {lineno}: expected fields p=, d=, l=")
        try:
            p = float(fields["p"])
        except ValueError as exc:
            raise FaultListError(f"line {lineno}: bad probability {fields['p']!r}") from exc
        if not 0.0 < p < 1.0:
            raise FaultListError(f"line {lineno}: probability {p} outside (0, 1)")
        det = _parse_indices(fields["d"], header[0], "detector", lineno)
        obs = _parse_indices(fields["l"], header[1], "observable", lineno)
        faults.append(
            Fault(
                BitVector.from_indices(header[0], det),
                BitVector.from_indices(header[1], obs),
                p,
                f"line {lineno}",
            )
        )
    if header is None:
        raise FaultListError("missing header 'detectors=D observables=O'")
    if not faults:
        raise FaultListError("no faults")
    return merge_faults(faults, mode=mode, rounds=rounds, n_detectors=header[0], n_observables=header[1])


def load_fault_list(path, mode: str = "sum", rounds: int = 1) -> DecodingModel:
    return parse_fault_list(Path(path).read_text(), mode=mode, rounds=rounds)


def format_fault_list(model: DecodingModel) -> str:
    lines = [f"detectors={model.n_detectors} observables={model.n_observables}"]
    h, lmat = model.h_dense, model.logical_dense
    for j in range(model.n_columns):
        d = ",".join(map(str, np.flatnonzero(h[:, j])))
        l_ = ",".join(map(str, np.flatnonzero(lmat[:, j])))
        lines.append(f"p={float(model.priors[j])!r} d={d} l={l_}")
    return "\n".join(lines) + "\n"


# -- model and code files ---------------------------------------------------


def save_model(path, model: DecodingModel, sparse: bool = True) -> None:
    Path(path).write_text(json.dumps(model.to_dict(sparse=sparse), indent=1))


def load_model(path) -> DecodingModel:
    return DecodingModel.from_dict(json.loads(Path(path).read_text()))


def save_code(path, code: CSSCode) -> None:
    """Write ``<stem>.hx`` / ``<stem>.hz`` matrix files plus the JSON sidecar at ``path``."""
    path = Path(path)
    hx_path = path.with_suffix(".hx")
    hz_path = path.with_suffix(".hz")
    gf2.write_matrix(hx_path, code.h_x, sparse=True)
    gf2.write_matrix(hz_path, code.h_z, sparse=True)
    doc = {
        "format": "css-code",
        "h_x": hx_path.name,
        "h_z": hz_path.name,
        "n": code.n,
        "k": code.k,
        "d": code.d,
        "logicals_x": _matrix_to_json(code.logicals_x, True),
        "logicals_z": _matrix_to_json(code.logicals_z, True),
    }
    path.write_text(json.dumps(doc, indent=1))


def load_code(path) -> CSSCode:
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("format") != "css-code":
        raise ValueError(f"{path}: not a css-code sidecar")
    h_x = gf2.read_matrix(path.parent / doc["h_x"])
    h_z = gf2.read_matrix(path.parent / doc["h_z"])
    logicals = None
    if doc.get("logicals_x") is not None and doc.get("logicals_z") is not None:
        logicals = (_matrix_from_json(doc["logicals_x"]), _matrix_from_json(doc["logicals_z"]))
    code = validate_css(h_x, h_z, logicals=logicals, d=doc.get("d"))
    if doc.get("n") is not None and doc["n"] != code.n:
        raise CodeValidationError(f"sidecar declares n={doc['n']}, matrices give n={code.n}")
    if doc.get("k") is not None and doc["k"] != code.k:
        raise CodeValidationError(f"sidecar declares k={doc['k']}, matrices give k={code.k}")
    return code
