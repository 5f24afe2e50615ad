"""Benchmark stabilizer codes and code-file ingestion.

Built-in generators are data (standard published constructions); logical
operator representatives are derived by GF(2) linear algebra, taking the
lowest-weight coset member found by bounded search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .tableau import PauliString, StabilizerTableau, TableauError

ZERO_L = "zero_L"
PLUS_L = "plus_L"

PAULI_TEXT = "pauli_text"
PARITY_CHECK_CSS = "parity_check_css"


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class CodeSpec:
    name: str
    n: int
    k: int
    d: int | None
    stabilizers: tuple[PauliString, ...]
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]
    target_state: str = ZERO_L

    def __post_init__(self):
        if self.target_state not in (ZERO_L, PLUS_L):
            raise CodeError(f"unknown target state {self.target_state!r}")
        if len(self.stabilizers) != self.n - self.k:
            raise CodeError(
                f"{self.name}: expected {self.n - self.k} generators, "
                f"got {len(self.stabilizers)}"
            )
        if len(self.logical_x) != self.k or len(self.logical_z) != self.k:
            raise CodeError(f"{self.name}: expected {self.k} logical pairs")
        self.validate()

    def validate(self):
        rows = list(self.stabilizers)
        for i, p in enumerate(rows):
            if p.n != self.n:
                raise CodeError(f"{self.name}: generator {i} has wrong length")
            for j in range(i):
                if not p.commutes_with(rows[j]):
                    raise CodeError(
                        f"{self.name}: generators {j} and {i} anticommute"
                    )
        mat = np.concatenate(
            [np.array([[*p.x, *p.z] for p in rows], dtype=np.uint8)]
        )
        if _gf2_rank(mat) != len(rows):
            raise CodeError(f"{self.name}: generators are dependent")
        for kind, ops in (("X", self.logical_x), ("Z", self.logical_z)):
            for i, p in enumerate(ops):
                for j, s in enumerate(rows):
                    if not p.commutes_with(s):
                        raise CodeError(
                            f"{self.name}: logical {kind}{i} anticommutes "
                            f"with generator {j}"
                        )
        for i, lx in enumerate(self.logical_x):
            for j, lz in enumerate(self.logical_z):
                want = i == j
                if lx.commutes_with(lz) == want:
                    raise CodeError(
                        f"{self.name}: logical pairing broken at X{i}/Z{j}"
                    )

    def is_css(self) -> bool:
        return all(
            not (p.x.any() and p.z.any()) for p in self.stabilizers
        )


def _gf2_rank(mat: np.ndarray) -> int:
    m = mat.astype(np.uint8).copy() % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = next((i for i in range(rank, rows) if m[i, c]), None)
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        for i in range(rows):
            if i != rank and m[i, c]:
                m[i] ^= m[rank]
        rank += 1
    return rank


def _gf2_rref(mat: np.ndarray):
    m = mat.astype(np.uint8).copy() % 2
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i, c]), None)
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def _gf2_nullspace(mat: np.ndarray) -> np.ndarray:
    rref, pivots = _gf2_rref(mat)
    cols = mat.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for bi, f in enumerate(free):
        basis[bi, f] = 1
        for ri, pc in enumerate(pivots):
            if rref[ri, f]:
                basis[bi, pc] = 1
    return basis


def _in_rowspace(v: np.ndarray, mat: np.ndarray) -> bool:
    if mat.size == 0:
        return not v.any()
    return _gf2_rank(np.vstack([mat, v])) == _gf2_rank(mat)


def _min_weight_coset(v: np.ndarray, mat: np.ndarray, cap: int = 1 << 12) -> np.ndarray:
    """Lowest-weight member of v + rowspace(mat) (exhaustive if small)."""
    rows = mat.shape[0]
    if rows == 0 or (1 << rows) > cap:
        return v
    best = v
    best_w = int(v.sum())
    for bits in range(1, 1 << rows):
        w = v.copy()
        b = bits
        i = 0
        while b:
            if b & 1:
                w ^= mat[i]
            b >>= 1
            i += 1
        ww = int(w.sum())
        if ww < best_w or (ww == best_w and tuple(w) < tuple(best)):
            best, best_w = w, ww
    return best


def css_logicals(hx: np.ndarray, hz: np.ndarray):
    """Paired pure-type logical representatives for a CSS code.

    X logicals live in ker(H_Z) modulo rowspace(H_X); Z logicals in
    ker(H_X) modulo rowspace(H_Z); pairs satisfy X_i·Z_j = δ_ij mod 2.
    Representatives are weight-minimized over their stabilizer coset.
    """
    n = hx.shape[1]
    k = n - _gf2_rank(hx) - _gf2_rank(hz)
    # independent X logicals modulo rowspace(hx)
    x_logs = []
    basis = hx
    for v in _gf2_nullspace(hz):
        if len(x_logs) == k:
            break
        if not _in_rowspace(v, basis):
            x_logs.append(v)
            basis = np.vstack([basis, v])
    z_cands = [v for v in _gf2_nullspace(hx) if not _in_rowspace(v, hz)]
    z_space = np.array(z_cands, dtype=np.uint8)
    # pair: for each x_i find z with <x_i, z> = 1, <x_j, z> = 0 for j<i
    x_mat = np.array(x_logs, dtype=np.uint8)
    z_logs = []
    used = np.zeros((0, n), dtype=np.uint8)
    for i in range(k):
        # solve over span(z_cands): pairing vector must be e_i
        target = np.zeros(k, dtype=np.uint8)
        target[i] = 1
        pair = (z_space @ x_mat.T) % 2  # (num_cands, k)
        sol = _solve_gf2(pair.T, target)
        if sol is None:
            raise CodeError("cannot pair CSS logicals")
        z = (sol @ z_space) % 2
        z_logs.append(z.astype(np.uint8))
    x_logs = [_min_weight_coset(v, hx) for v in x_logs]
    z_logs = [_min_weight_coset(v, hz) for v in z_logs]
    return x_logs, z_logs


def _solve_gf2(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution x of a @ x = b over GF(2), or None."""
    rows, cols = a.shape
    aug = np.concatenate([a % 2, (b % 2)[:, None]], axis=1).astype(np.uint8)
    r = 0
    pivots = []
    for c in range(cols):
        piv = next((i for i in range(r, rows) if aug[i, c]), None)
        if piv is None:
            continue
        aug[[r, piv]] = aug[[piv, r]]
        for i in range(rows):
            if i != r and aug[i, c]:
                aug[i] ^= aug[r]
        pivots.append(c)
        r += 1
    for i in range(r, rows):
        if aug[i, -1]:
            return None
    x = np.zeros(cols, dtype=np.uint8)
    for ri, pc in enumerate(pivots):
        x[pc] = aug[ri, -1]
    return x


def _pauli_from_bits(x: np.ndarray, z: np.ndarray) -> PauliString:
    return PauliString(x.astype(bool), z.astype(bool))


def css_spec(
    name: str,
    hx: np.ndarray,
    hz: np.ndarray,
    d: int | None = None,
    target_state: str = ZERO_L,
) -> CodeSpec:
    hx = np.asarray(hx, dtype=np.uint8) % 2
    hz = np.asarray(hz, dtype=np.uint8) % 2
    n = hx.shape[1]
    if hz.shape[1] != n:
        raise CodeError(f"{name}: H_X and H_Z column counts differ")
    if (hx @ hz.T % 2).any():
        raise CodeError(f"{name}: H_X · H_Z^T != 0 over GF(2)")
    hx = _gf2_rref(hx)[0]
    hz = _gf2_rref(hz)[0]
    k = n - hx.shape[0] - hz.shape[0]
    zeros = np.zeros(n, dtype=np.uint8)
    stabs = [_pauli_from_bits(row, zeros) for row in hx]
    stabs += [_pauli_from_bits(zeros, row) for row in hz]
    x_logs, z_logs = css_logicals(hx, hz)
    return CodeSpec(
        name=name,
        n=n,
        k=k,
        d=d,
        stabilizers=tuple(stabs),
        logical_x=tuple(_pauli_from_bits(v, zeros) for v in x_logs),
        logical_z=tuple(_pauli_from_bits(zeros, v) for v in z_logs),
        target_state=target_state,
    )


def target_tableau(spec: CodeSpec) -> StabilizerTableau:
    """Stabilizer generators plus logical Z (zero_L) or X (plus_L) rows."""
    rows = list(spec.stabilizers)
    rows += list(spec.logical_x if spec.target_state == PLUS_L else spec.logical_z)
    try:
        return StabilizerTableau.from_rows(rows)
    except TableauError as exc:
        raise CodeError(f"{spec.name}: target tableau invalid: {exc}") from exc


# -- built-in code data ------------------------------------------------


def _rows_from_supports(n: int, supports) -> np.ndarray:
    mat = np.zeros((len(supports), n), dtype=np.uint8)
    for i, sup in enumerate(supports):
        mat[i, list(sup)] = 1
    return mat


def _surface_9() -> CodeSpec:
    # rotated 3x3 surface code, qubits row-major
    hx = _rows_from_supports(9, [(2, 5), (0, 1, 3, 4), (4, 5, 7, 8), (3, 6)])
    hz = _rows_from_supports(9, [(0, 1), (1, 2, 4, 5), (3, 4, 6, 7), (7, 8)])
    return css_spec("surface_9", hx, hz, d=3)


def _hamming_15() -> CodeSpec:
    # [15,11] Hamming parity check: column j is binary j+1
    h = np.array(
        [[(j + 1) >> b & 1 for j in range(15)] for b in range(4)], dtype=np.uint8
    )
    return css_spec("hamming_15", h, h, d=3)


def _reed_muller_15() -> CodeSpec:
    # punctured Reed-Muller [[15,1,3]]: qubit v <-> integer v+1
    def bit(v, i):
        return (v + 1) >> i & 1

    planes = [[v for v in range(15) if bit(v, i)] for i in range(4)]
    inters = [
        [v for v in range(15) if bit(v, i) and bit(v, j)]
        for i, j in combinations(range(4), 2)
    ]
    hx = _rows_from_supports(15, planes)
    hz = _rows_from_supports(15, planes + inters)
    return css_spec("reed_muller_15", hx, hz, d=3, target_state=PLUS_L)


def _carbon_12() -> CodeSpec:
    # [[12,2,4]]: three [[4,2,2]] blocks concatenated under a [[6,2,2]]
    # outer code (outer qubit pairs split across blocks)
    hx = [
        "111100000000", "000011110000", "000000001111",
        "011011001100", "101010100110",
    ]
    hz = [
        "111100000000", "000011110000", "000000001111",
        "011001010101", "001100110110",
    ]
    to_mat = lambda rows: np.array([[int(c) for c in r] for r in rows], np.uint8)
    return css_spec("carbon_12", to_mat(hx), to_mat(hz), d=4)


# self-dual doubly-even [[17,1,5]]; unique code with these parameters
# (weight enumerator 1 + 17w^4 + 187w^8 + 51w^12), equivalent to the
# distance-5 square-octagon color code
_COLOR_17_H = [
    "00000100000010110",
    "10100000000001001",
    "00001101000000010",
    "10000000110000001",
    "01001001000100000",
    "00001011001000000",
    "00110000010000001",
    "11011110000000101",
]


def _color_17() -> CodeSpec:
    h = np.array([[int(c) for c in row] for row in _COLOR_17_H], dtype=np.uint8)
    return css_spec("color_17", h, h, d=5)


# distance-5 hexagonal color code on a triangular patch; each face is
# both an X and a Z check
_COLOR_19_FACES = [
    (0, 1, 5, 9), (1, 2, 5, 6), (2, 3, 6, 7, 10, 11), (3, 4, 7, 8),
    (5, 6, 9, 10, 12, 13), (7, 8, 11, 14), (10, 11, 13, 14, 15, 16),
    (12, 13, 15, 17), (15, 16, 17, 18),
]


def _color_19() -> CodeSpec:
    h = _rows_from_supports(19, _COLOR_19_FACES)
    return css_spec("color_19", h, h, d=5)


_GOLAY_H = [
    "11111001001010000000000",
    "01111100100101000000000",
    "11000111011000100000000",
    "01100011101100010000000",
    "11001000111100001000000",
    "10011101010100000100000",
    "10110111100000000010000",
    "01011011110000000001000",
    "00101101111000000000100",
    "00010110111100000000010",
    "11110010010100000000001",
]


def _golay_23() -> CodeSpec:
    h = np.array([[int(c) for c in row] for row in _GOLAY_H], dtype=np.uint8)
    return css_spec("golay_23", h, h, d=7)


_BUILTIN_FACTORIES = {
    "surface_9": _surface_9,
    "carbon_12": _carbon_12,
    "hamming_15": _hamming_15,
    "reed_muller_15": _reed_muller_15,
    "color_17": _color_17,
    "color_19": _color_19,
    "golay_23": _golay_23,
}

BUILTIN_NAMES = tuple(sorted(_BUILTIN_FACTORIES))


@lru_cache(maxsize=None)
def builtin(name: str) -> CodeSpec:
    if name not in _BUILTIN_FACTORIES:
        raise CodeError(
            f"unknown builtin code {name!r}; available: {', '.join(BUILTIN_NAMES)}"
        )
    return _BUILTIN_FACTORIES[name]()


# -- serialization -----------------------------------------------------


def save_code(spec: CodeSpec, path: str, format: str = PAULI_TEXT):
    with open(path, "w") as fh:
        fh.write(dump_code(spec, format))


def dump_code(spec: CodeSpec, format: str = PAULI_TEXT) -> str:
    lines = [
        f"# code {spec.name}",
        f"# params {spec.n} {spec.k} {spec.d if spec.d is not None else '?'}",
        f"# target {spec.target_state}",
    ]
    if format == PAULI_TEXT:
        lines.append("# stabilizers")
        lines += [p.to_text() for p in spec.stabilizers]
        lines.append("# logical_x")
        lines += [p.to_text() for p in spec.logical_x]
        lines.append("# logical_z")
        lines += [p.to_text() for p in spec.logical_z]
    elif format == PARITY_CHECK_CSS:
        if not spec.is_css():
            raise CodeError(f"{spec.name} is not CSS; cannot export check matrices")
        lines.append("HX")
        lines += [
            "".join("1" if b else "0" for b in p.x)
            for p in spec.stabilizers
            if p.x.any()
        ]
        lines.append("HZ")
        lines += [
            "".join("1" if b else "0" for b in p.z)
            for p in spec.stabilizers
            if p.z.any()
        ]
    else:
        raise CodeError(f"unknown format {format!r}")
    return "\n".join(lines) + "\n"


def load_code(path: str, format: str = PAULI_TEXT) -> CodeSpec:
    with open(path) as fh:
        text = fh.read()
    return parse_code(text, format)


def parse_code(text: str, format: str = PAULI_TEXT) -> CodeSpec:
    name = "loaded"
    d = None
    target = ZERO_L
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("# code "):
            name = line.split(None, 2)[2]
        elif line.startswith("# params "):
            parts = line.split()
            d = None if parts[4] == "?" else int(parts[4])
        elif line.startswith("# target "):
            target = line.split()[2]

    if format == PARITY_CHECK_CSS:
        section = None
        hx_rows, hz_rows = [], []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == "HX":
                section = hx_rows
                continue
            if line == "HZ":
                section = hz_rows
                continue
            if section is None:
                raise CodeError(f"line {lineno}: row before HX/HZ header")
            if set(line) - {"0", "1"}:
                raise CodeError(f"line {lineno}: not a 0/1 row: {line!r}")
            section.append([int(c) for c in line])
        if not hx_rows or not hz_rows:
            raise CodeError("empty or incomplete parity-check file")
        return css_spec(
            name,
            np.array(hx_rows, dtype=np.uint8),
            np.array(hz_rows, dtype=np.uint8),
            d=d,
            target_state=target,
        )

    if format != PAULI_TEXT:
        raise CodeError(f"unknown format {format!r}")
    section = "stabilizers"
    groups = {"stabilizers": [], "logical_x": [], "logical_z": []}
    count = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            token = line[1:].strip()
            if token in groups:
                section = token
            continue
        try:
            groups[section].append(PauliString.from_text(line))
        except (ValueError, TableauError) as exc:
            raise CodeError(f"line {lineno}: {exc}") from exc
        count += 1
    if count == 0:
        raise CodeError("no Pauli rows found")
    stabs = groups["stabilizers"]
    n = stabs[0].n
    if groups["logical_x"] or groups["logical_z"]:
        lx, lz = groups["logical_x"], groups["logical_z"]
    else:
        lx, lz = generic_logicals(stabs)
    return CodeSpec(
        name=name,
        n=n,
        k=n - len(stabs),
        d=d,
        stabilizers=tuple(stabs),
        logical_x=tuple(lx),
        logical_z=tuple(lz),
        target_state=target,
    )


def generic_logicals(stabs):
    """Paired logicals of any stabilizer code via symplectic algebra."""
    n = stabs[0].n
    s = np.array([[*p.x, *p.z] for p in stabs], dtype=np.uint8)
    # symplectic form: <u, v> = u_x·v_z + u_z·v_x
    flip = np.concatenate([s[:, n:], s[:, :n]], axis=1)
    cent = _gf2_nullspace(flip)  # all ops commuting with every generator
    # logical candidates: centralizer members outside the stabilizer group
    logicals = []
    basis = s.copy()
    for v in cent:
        if not _in_rowspace(v, basis):
            logicals.append(v)
            basis = np.vstack([basis, v])
    k = n - len(stabs)
    # symplectic Gram-Schmidt into anticommuting pairs
    pool = [v.copy() for v in logicals]
    xs, zs = [], []
    while len(xs) < k:
        a = pool.pop(0)
        partner = None
        for idx, b in enumerate(pool):
            if int(a[:n] @ b[n:] + a[n:] @ b[:n]) % 2 == 1:
                partner = idx
                break
        if partner is None:
            continue
        b = pool.pop(partner)
        rest = []
        for c in pool:
            if int(c[:n] @ b[n:] + c[n:] @ b[:n]) % 2:
                c = c ^ a
            if int(c[:n] @ a[n:] + c[n:] @ a[:n]) % 2:
                c = c ^ b
            rest.append(c)
        pool = rest
        xs.append(a)
        zs.append(b)
    if len(xs) < k:
        raise CodeError("failed to pair logicals")
    to_pauli = lambda v: PauliString(v[:n].astype(bool), v[n:].astype(bool))
    return [to_pauli(v) for v in xs], [to_pauli(v) for v in zs]
