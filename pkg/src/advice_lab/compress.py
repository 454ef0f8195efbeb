"""Compressing a permutation with the help of an algorithm that inverts it.

The encoder fixes a random subset R of the domain, finds the elements of R the
algorithm inverts while putting almost no query mass on the rest of R, and
writes the permutation as: the advice string, the image set f(R), the bijection
off R, the images of the good elements, and the bijection on the leftover part
of R.  The good elements themselves are never written: the decoder re-derives
them by simulating the algorithm against a fake oracle that is constant on R,
which the good elements cannot distinguish from the real one.  All set and
permutation components are stored as exact combinatorial ranks, so encoding
lengths are measured in bits with no serialization slack.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .qsim import FunctionOracle, PermutationOracle, measurement_distribution, run
from .util import ceil_log2, parse_bitstring

ARGMAX_TOL = 1e-9


class DecodeFailure(RuntimeError):
    """Decoding could not certify the permutation it reconstructed."""


class AmbiguousDecodeError(DecodeFailure):
    """Top two output probabilities within tolerance; no certain answer."""


class CorruptEncodingError(ValueError):
    """A stored rank or count is outside its declared range."""


# ---------------------------------------------------------------------------
# Subset codec (combinatorial number system, colexicographic order)
# ---------------------------------------------------------------------------

def rank_set(elements) -> int:
    """Colex rank of a subset among all subsets of its size: the sorted
    elements s_0 < s_1 < ... contribute sum C(s_i, i+1)."""
    sorted_elems = sorted(int(e) for e in elements)
    if any(b <= a for a, b in zip(sorted_elems, sorted_elems[1:])):
        raise ValueError("elements must be distinct")
    if sorted_elems and sorted_elems[0] < 0:
        raise ValueError("elements must be nonnegative")
    return sum(math.comb(e, i + 1) for i, e in enumerate(sorted_elems))


def unrank_set(rank: int, n: int, k: int) -> np.ndarray:
    """Inverse of rank_set over k-subsets of [n]; rank must lie in [0, C(n,k))."""
    if not 0 <= k <= n:
        raise CorruptEncodingError("subset size out of range")
    if not 0 <= rank < math.comb(n, k):
        raise CorruptEncodingError("subset rank out of range")
    out = []
    c = n - 1
    for i in range(k, 0, -1):
        while math.comb(c, i) > rank:
            c -= 1
        out.append(c)
        rank -= math.comb(c, i)
        c -= 1
    return np.array(sorted(out), dtype=np.int64)


# ---------------------------------------------------------------------------
# Permutation codec (factorial number system / Lehmer code)
# ---------------------------------------------------------------------------

def rank_perm(perm) -> int:
    """Lehmer rank: identity maps to 0, the reversal to M! - 1."""
    g = [int(v) for v in perm]
    m = len(g)
    if sorted(g) != list(range(m)):
        raise ValueError("not a permutation of 0..M-1")
    rank = 0
    for i in range(m):
        smaller_later = sum(1 for j in range(i + 1, m) if g[j] < g[i])
        rank += smaller_later * math.factorial(m - 1 - i)
    return rank


def unrank_perm(rank: int, m: int) -> np.ndarray:
    """Inverse of rank_perm; rank must lie in [0, M!)."""
    if not 0 <= rank < math.factorial(m):
        raise CorruptEncodingError("permutation rank out of range")
    remaining = list(range(m))
    out = []
    for i in range(m):
        f = math.factorial(m - 1 - i)
        digit, rank = divmod(rank, f)
        out.append(remaining.pop(digit))
    return np.array(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# Parameters and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompressionParams:
    """Knobs of the encoder.

    The asymptotic proof wants sqrt(c) < 1/24 (so a good element's output
    distribution stays past the 1/2 certainty line) and delta < c/20 (so the
    good set is large with constant probability).  Those constants empty out R
    at desk scale, so they are checked and reported rather than enforced;
    instances tune delta for nonempty samples and keep c small.
    """

    delta: float
    c: float
    min_good: int = 1
    success_threshold: float = 2.0 / 3.0

    def __post_init__(self):
        if not 0 < self.delta < 1 or not 0 < self.c < 1:
            raise ValueError("delta and c must lie in (0, 1)")
        if self.min_good < 1:
            raise ValueError("min_good must be at least 1")
        if not 0 < self.success_threshold <= 1:
            raise ValueError("bad success threshold")

    @property
    def certainty_margin_ok(self) -> bool:
        return math.sqrt(self.c) < 1.0 / 24.0

    @property
    def claim_positivity_ok(self) -> bool:
        return self.delta / 2 - 10 * self.delta ** 2 / self.c > 0

    @property
    def asymptotic_regime_ok(self) -> bool:
        return self.certainty_margin_ok and self.claim_positivity_ok


def sample_R(n_elements: int, delta: float, num_queries: int, seed) -> np.ndarray:
    """Each element of [N] joins R independently with probability delta/T^2."""
    if num_queries < 1:
        raise ValueError("query count must be positive for subset sampling")
    p = delta / float(num_queries) ** 2
    if not 0 < p <= 1:
        raise ValueError(f"inclusion probability {p} outside (0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return np.flatnonzero(rng.random(n_elements) < p).astype(np.int64)


# ---------------------------------------------------------------------------
# Inverted and good elements
# ---------------------------------------------------------------------------

def _prepared(f: PermutationOracle, family):
    advice = family.preprocess(f)
    return advice, family.spec(advice, f.num_positions)


def inversion_set(f: PermutationOracle, family, threshold: float = 2.0 / 3.0) -> np.ndarray:
    """Elements x whose image the algorithm sends back to x with probability at
    least the threshold, read exactly off the final statevector."""
    advice, alg = _prepared(f, family)
    hits = []
    for x in range(f.num_positions):
        final, _ = run(alg, f, int(f.table[x]))
        if measurement_distribution(final, alg.output_register)[x] >= threshold - 1e-12:
            hits.append(x)
    return np.array(hits, dtype=np.int64)


def _good_elements(f: PermutationOracle, alg, R: np.ndarray, params: CompressionParams) -> list[int]:
    threshold = params.c / alg.num_queries if alg.num_queries > 0 else math.inf
    good = []
    for x in R:
        y = int(f.table[x])
        final, trace = run(alg, f, y)
        if measurement_distribution(final, alg.output_register)[x] < params.success_threshold - 1e-12:
            continue
        stray_mass = float(trace.totals[R].sum() - trace.totals[x])
        if stray_mass <= threshold:
            good.append(int(x))
    return good


def good_set(f: PermutationOracle, family, R, params: CompressionParams) -> np.ndarray:
    """Elements of R that are inverted and whose runs put at most c/T total
    query magnitude on the rest of R."""
    R = np.asarray(sorted(int(v) for v in R), dtype=np.int64)
    _, alg = _prepared(f, family)
    return np.array(_good_elements(f, alg, R, params), dtype=np.int64)


# ---------------------------------------------------------------------------
# The encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Encoding:
    """Six-component compressed permutation; ranks are exact big integers."""

    num_elements: int
    advice: str
    good_count: int
    r_size: int
    fR_rank: int
    outer_rank: int
    fG_rank: int
    inner_rank: int

    def __post_init__(self):
        if not 0 <= self.good_count <= self.r_size <= self.num_elements:
            raise CorruptEncodingError("component counts out of range")

    @property
    def advice_bits(self) -> int:
        return len(self.advice)

    @property
    def header_bits(self) -> int:
        """Accounting charge for the good-element count and |R| fields."""
        return 2 * ceil_log2(self.num_elements + 1)

    def component_bits(self) -> dict[str, int]:
        n, r, g = self.num_elements, self.r_size, self.good_count
        return {
            "advice": self.advice_bits,
            "fR": ceil_log2(max(1, math.comb(n, r))),
            "outer": ceil_log2(max(1, math.factorial(n - r))),
            "fG": ceil_log2(max(1, math.comb(r, g))),
            "inner": ceil_log2(max(1, math.factorial(r - g))),
            "header": self.header_bits,
        }

    @property
    def logical_bits(self) -> int:
        return sum(self.component_bits().values())


def length_bound_bits(enc: Encoding, kappa: float = 4.0) -> float:
    """S + log2 N! - log2 |G|! + kappa * log2 N, the budget the logical length
    must stay under (kappa absorbs ceilings and the header)."""
    n, g = enc.num_elements, enc.good_count
    return (enc.advice_bits
            + math.log2(math.factorial(n))
            - math.log2(math.factorial(g))
            + kappa * math.log2(n))


def build_h(known: dict[int, int], R, y: int) -> FunctionOracle:
    """The hybrid oracle: the known partial mapping off R, constantly y on R.
    It agrees with the original permutation everywhere outside R and at the
    preimage of y."""
    R = sorted(int(v) for v in R)
    n = len(known) + len(R)
    if set(known) != set(range(n)) - set(R):
        raise ValueError("partial mapping must cover exactly the complement of R")
    table = np.empty(n, dtype=np.int64)
    for z, fz in known.items():
        table[z] = fz
    table[R] = int(y)
    return FunctionOracle(table)


def encode(f: PermutationOracle, family, R, params: CompressionParams) -> Optional[Encoding]:
    """Emit the six components, or None when fewer than min_good elements of R
    are good (a counted failure of the randomness, not an error)."""
    n = f.num_positions
    R = np.asarray(sorted(int(v) for v in R), dtype=np.int64)
    advice, alg = _prepared(f, family)
    good = np.array(_good_elements(f, alg, R, params), dtype=np.int64)
    if len(good) < params.min_good:
        return None

    fR = np.sort(f.table[R])
    outside = np.setdiff1d(np.arange(n), R, assume_unique=True)
    outside_images = np.setdiff1d(np.arange(n), fR, assume_unique=True)
    outer = np.searchsorted(outside_images, f.table[outside])

    fG = np.sort(f.table[good])
    leftover = np.setdiff1d(R, good, assume_unique=True)
    leftover_images = np.setdiff1d(fR, fG, assume_unique=True)
    inner = np.searchsorted(leftover_images, f.table[leftover])

    return Encoding(
        num_elements=n,
        advice=advice,
        good_count=len(good),
        r_size=len(R),
        fR_rank=rank_set(fR),
        outer_rank=rank_perm(outer),
        fG_rank=rank_set(np.searchsorted(fR, fG)),
        inner_rank=rank_perm(inner),
    )


def decode(enc: Encoding, R, family, params: CompressionParams) -> np.ndarray:
    """Reconstruct the permutation: unrank the mapping off R, then invert each
    stored image by simulating the algorithm against the hybrid oracle and
    taking its output only when it is an unambiguous winner, then unrank the
    leftover mapping."""
    n = enc.num_elements
    R = np.asarray(sorted(int(v) for v in R), dtype=np.int64)
    if len(R) != enc.r_size:
        raise CorruptEncodingError("sampled set size disagrees with the encoding")
    r, g = enc.r_size, enc.good_count

    fR = unrank_set(enc.fR_rank, n, r)
    outside = np.setdiff1d(np.arange(n), R, assume_unique=True)
    outside_images = np.setdiff1d(np.arange(n), fR, assume_unique=True)
    outer = unrank_perm(enc.outer_rank, n - r)

    table = np.full(n, -1, dtype=np.int64)
    table[outside] = outside_images[outer]

    fG = fR[unrank_set(enc.fG_rank, r, g)]
    alg = family.spec(enc.advice, n)
    known = {int(z): int(table[z]) for z in outside}
    in_R = set(int(v) for v in R)
    recovered = []
    for y in fG:
        h = build_h(known, R, int(y))
        final, _ = run(alg, h, int(y))
        dist = measurement_distribution(final, alg.output_register)
        top_two = np.partition(dist, -2)[-2:]
        if top_two[1] - top_two[0] <= ARGMAX_TOL:
            raise AmbiguousDecodeError(
                f"no clear inverse for image {int(y)}: top probabilities {top_two}")
        x = int(np.argmax(dist))
        if x not in in_R or table[x] != -1:
            raise DecodeFailure(f"simulated inverse {x} of image {int(y)} is not fresh in R")
        table[x] = int(y)
        recovered.append(x)

    leftover = np.setdiff1d(R, np.array(recovered, dtype=np.int64))
    leftover_images = np.setdiff1d(fR, fG, assume_unique=True)
    inner = unrank_perm(enc.inner_rank, r - g)
    table[leftover] = leftover_images[inner]

    if not np.array_equal(np.sort(table), np.arange(n)):
        raise DecodeFailure("reconstruction is not a permutation")
    return table


# ---------------------------------------------------------------------------
# Counting check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountingReport:
    holds: bool
    required_bits: float  # log2(c) + log2 |X|
    available_bits: float
    slack_bits: float


def counting_check(x_size_log2: float, enc_bits_max: float, c: float = 0.8) -> CountingReport:
    """A decoder that succeeds with probability c for every input forces the
    codomain to hold at least c|X| values: log2(c) + log2|X| <= encoding bits."""
    required = math.log2(c) + x_size_log2
    return CountingReport(
        holds=required <= enc_bits_max + 1e-12,
        required_bits=required,
        available_bits=enc_bits_max,
        slack_bits=enc_bits_max - required,
    )


# ---------------------------------------------------------------------------
# JSON envelope
# ---------------------------------------------------------------------------

def _blob(value: int) -> str:
    payload = value.to_bytes(max(1, (value.bit_length() + 7) // 8), "big")
    return base64.b64encode(len(payload).to_bytes(4, "big") + payload).decode("ascii")


def _unblob(text: str) -> int:
    raw = base64.b64decode(text.encode("ascii"))
    length = int.from_bytes(raw[:4], "big")
    if len(raw) != 4 + length:
        raise CorruptEncodingError("bad length prefix in rank blob")
    return int.from_bytes(raw[4:], "big")


def encoding_to_json(enc: Encoding) -> str:
    packed = np.packbits(parse_bitstring(enc.advice)) if enc.advice else np.zeros(0, dtype=np.uint8)
    return json.dumps({
        "S": enc.advice_bits,
        "good_count": enc.good_count,
        "r_size": enc.r_size,
        "ranks": {
            "fR": _blob(enc.fR_rank),
            "outer": _blob(enc.outer_rank),
            "fG": _blob(enc.fG_rank),
            "inner": _blob(enc.inner_rank),
        },
        "advice": base64.b64encode(packed.tobytes()).decode("ascii"),
        "logical_bits": enc.logical_bits,
    }, sort_keys=True)


def encoding_from_json(payload: str, num_elements: int) -> Encoding:
    doc = json.loads(payload)
    s_bits = doc["S"]
    raw = np.frombuffer(base64.b64decode(doc["advice"].encode("ascii")), dtype=np.uint8)
    bits = np.unpackbits(raw)[:s_bits] if s_bits else np.zeros(0, dtype=np.uint8)
    enc = Encoding(
        num_elements=num_elements,
        advice="".join("1" if b else "0" for b in bits),
        good_count=doc["good_count"],
        r_size=doc["r_size"],
        fR_rank=_unblob(doc["ranks"]["fR"]),
        outer_rank=_unblob(doc["ranks"]["outer"]),
        fG_rank=_unblob(doc["ranks"]["fG"]),
        inner_rank=_unblob(doc["ranks"]["inner"]),
    )
    if enc.logical_bits != doc["logical_bits"]:
        raise CorruptEncodingError("stored logical length disagrees with the components")
    return enc
