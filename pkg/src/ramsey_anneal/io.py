"""Reading and writing the line-oriented colouring and certificate formats.

Colouring files:

    ramsey-colouring v1
    n=<N> colours=<l>
    <row p=0: colours of edges (0,1) .. (0,N-1)>
    ...
    <row p=N-2: colour of edge (N-2,N-1)>

Certificate files carry a ``key: value`` header, a ``---`` separator, and the
canonical colouring block.  The checksum covers the colouring block bytes, so
a certificate can be re-verified by third parties from the file alone.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .errors import ParseError
from .graph import Colouring, Problem, edge_index

COLOURING_MAGIC = "ramsey-colouring v1"
CERTIFICATE_MAGIC = "ramsey-certificate v1"
CHECKSUM_ALGORITHM = "sha256"


def colouring_to_text(c: Colouring) -> str:
    n = c.n_vertices
    lines = [COLOURING_MAGIC, f"n={n} colours={c.n_colours}"]
    for p in range(n - 1):
        row = (c.edges[edge_index(n, p, q)] for q in range(p + 1, n))
        lines.append(" ".join(str(col) for col in row))
    return "\n".join(lines) + "\n"


def canonical_bytes(c: Colouring) -> bytes:
    return colouring_to_text(c).encode("utf-8")


def colouring_checksum(c: Colouring) -> str:
    digest = hashlib.sha256(canonical_bytes(c)).hexdigest()
    return f"{CHECKSUM_ALGORITHM}:{digest}"


def colouring_from_lines(lines: list[str], where: str = "<input>") -> Colouring:
    if not lines:
        raise ParseError(f"{where}: empty input")
    if lines[0].strip() != COLOURING_MAGIC:
        raise ParseError(
            f"{where}: unknown format/version {lines[0].strip()!r}, expected {COLOURING_MAGIC!r}"
        )
    if len(lines) < 2:
        raise ParseError(f"{where}: missing header line 'n=<N> colours=<l>'")
    header = lines[1].split()
    try:
        if len(header) != 2 or not header[0].startswith("n=") or not header[1].startswith("colours="):
            raise ValueError
        n = int(header[0][2:])
        l = int(header[1][8:])
    except ValueError:
        raise ParseError(f"{where}: malformed header {lines[1]!r}") from None
    if n < 2 or l < 2:
        raise ParseError(f"{where}: need n >= 2 and colours >= 2, got n={n} colours={l}")

    rows = [ln for ln in lines[2:] if ln.strip()]
    if len(rows) != n - 1:
        raise ParseError(f"{where}: expected {n - 1} edge rows, found {len(rows)}")
    edges: list[int] = []
    for p, row in enumerate(rows):
        tokens = row.split()
        want = n - 1 - p
        if len(tokens) != want:
            raise ParseError(f"{where}: row {p} has {len(tokens)} entries, expected {want}")
        for tok in tokens:
            try:
                col = int(tok)
            except ValueError:
                raise ParseError(f"{where}: row {p}: {tok!r} is not a colour id") from None
            if not 0 <= col < l:
                raise ParseError(f"{where}: row {p}: colour id {col} not in 0..{l - 1}")
            edges.append(col)
    return Colouring(n, l, tuple(edges))


def read_colouring(path: str | Path) -> Colouring:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return colouring_from_lines(text.splitlines(), where=str(path))


def write_colouring(c: Colouring, path: str | Path) -> None:
    Path(path).write_text(colouring_to_text(c), encoding="utf-8")


def _format_weights(weights: tuple[float, ...]) -> str:
    return ",".join(repr(w) for w in weights)


def certificate_to_text(cert) -> str:
    """Serialize a verifier Certificate; see read_certificate for the layout."""
    prob = cert.problem
    lines = [
        CERTIFICATE_MAGIC,
        "targets: %s" % ",".join(str(x) for x in prob.clique_sizes),
        "weights: %s" % _format_weights(prob.weights),
        f"n-vertices: {cert.colouring.n_vertices}",
        f"implied-bound: {cert.implied_bound}",
        f"statement: {prob.describe()} >= {cert.implied_bound}",
        f"checksum: {cert.checksum}",
        f"verified-at: {cert.verified_at}",
        "---",
    ]
    return "\n".join(lines) + "\n" + colouring_to_text(cert.colouring)


def parse_certificate_text(text: str, where: str = "<input>"):
    """Parse and re-verify a certificate file; returns a Certificate.

    Import happens lazily to keep this module free of verification logic.
    """
    from .verify import make_certificate

    lines = text.splitlines()
    if not lines or lines[0].strip() != CERTIFICATE_MAGIC:
        head = lines[0].strip() if lines else ""
        raise ParseError(f"{where}: unknown format/version {head!r}, expected {CERTIFICATE_MAGIC!r}")
    fields: dict[str, str] = {}
    body_start = None
    for i, ln in enumerate(lines[1:], start=1):
        if ln.strip() == "---":
            body_start = i + 1
            break
        if ":" not in ln:
            raise ParseError(f"{where}: malformed header line {ln!r}")
        key, value = ln.split(":", 1)
        fields[key.strip()] = value.strip()
    if body_start is None:
        raise ParseError(f"{where}: missing '---' separator before colouring block")
    for key in ("targets", "weights", "implied-bound", "checksum", "verified-at"):
        if key not in fields:
            raise ParseError(f"{where}: certificate header missing {key!r}")
    try:
        sizes = tuple(int(t) for t in fields["targets"].split(","))
        weights = tuple(float(t) for t in fields["weights"].split(","))
        bound = int(fields["implied-bound"])
    except ValueError:
        raise ParseError(f"{where}: malformed certificate header values") from None
    prob = Problem(sizes, weights)
    colouring = colouring_from_lines(lines[body_start:], where=where)
    checksum = colouring_checksum(colouring)
    if checksum != fields["checksum"]:
        raise ParseError(
            f"{where}: checksum mismatch: header says {fields['checksum']}, colouring hashes to {checksum}"
        )
    if bound != colouring.n_vertices + 1:
        raise ParseError(
            f"{where}: implied bound {bound} does not match {colouring.n_vertices} vertices"
        )
    return make_certificate(colouring, prob, verified_at=fields["verified-at"])


def read_certificate(path: str | Path):
    path = Path(path)
    return parse_certificate_text(path.read_text(encoding="utf-8"), where=str(path))


def write_certificate(cert, path: str | Path) -> None:
    Path(path).write_text(certificate_to_text(cert), encoding="utf-8")


def is_certificate_file(path: str | Path) -> bool:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.readline().strip() == CERTIFICATE_MAGIC
    except OSError:
        return False
