"""GF(2) side-channel analysis: hash rank leakage and decoder bias.

A compressing Toeplitz hash with rank deficiency r leaks r bits of the
hashed key even when the input is perfectly uniform, and a linear code
whose decision regions are unequal biases the a-priori distribution of
decoded messages.  Both effects are quantified here by exact enumeration
over packed bit matrices.
"""

from __future__ import annotations

import io
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .criteria import variational_distance
from .ensembles import ProbDist, bit_strings
from .errors import BadParams, BadSeedLength, BadShape, TooLarge

#: Seed-space cap for exhaustive singular-fraction enumeration.
EXHAUSTIVE_SEED_CAP = 2**24
#: Block-length cap for decision-region censuses (2^n received words).
CENSUS_BIT_CAP = 20

DECODING_RULES = ("syndrome", "min_distance")


@dataclass(frozen=True)
class Gf2Matrix:
    """Binary matrix with rows packed as Python ints (bit j = column j)."""

    rows: int
    cols: int
    row_bits: tuple[int, ...]

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise BadParams("matrix dimensions must be positive")
        bits = tuple(int(r) for r in self.row_bits)
        if len(bits) != self.rows:
            raise BadParams(f"expected {self.rows} packed rows, got {len(bits)}")
        if any(r < 0 or r >> self.cols for r in bits):
            raise BadParams(f"row bits exceed {self.cols} columns")
        object.__setattr__(self, "row_bits", bits)

    @classmethod
    def from_rows(cls, rows) -> "Gf2Matrix":
        rows = [list(r) for r in rows]
        if not rows or not rows[0]:
            raise BadParams("matrix must have at least one row and column")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise BadParams("rows have unequal lengths")
        if any(b not in (0, 1) for r in rows for b in r):
            raise BadParams("entries must be bits")
        packed = tuple(sum(b << j for j, b in enumerate(r)) for r in rows)
        return cls(len(rows), n, packed)

    def entry(self, i: int, j: int) -> int:
        return (self.row_bits[i] >> j) & 1

    def to_rows(self) -> list[list[int]]:
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]


def toeplitz_from_seed(seed_bits, m: int, n: int) -> Gf2Matrix:
    """m x n Toeplitz matrix with entry(i, j) = seed[i - j + n - 1].

    Diagonals are constant; the seed must supply m + n - 1 bits.
    """
    seed = tuple(int(b) for b in seed_bits)
    if len(seed) != m + n - 1:
        raise BadSeedLength(f"need {m + n - 1} seed bits for {m}x{n}, got {len(seed)}")
    if set(seed) - {0, 1}:
        raise BadParams("seed entries must be bits")
    packed = tuple(
        sum(seed[i - j + n - 1] << j for j in range(n)) for i in range(m)
    )
    return Gf2Matrix(m, n, packed)


def gf2_rank(mat: Gf2Matrix) -> int:
    """Rank over GF(2) by Gaussian elimination on packed rows."""
    work = list(mat.row_bits)
    rank = 0
    for col in range(mat.cols):
        pivot = None
        for r in range(rank, len(work)):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for r in range(len(work)):
            if r != rank and ((work[r] >> col) & 1):
                work[r] ^= work[rank]
        rank += 1
        if rank == len(work):
            break
    return rank


def pac_leakage(mat: Gf2Matrix) -> int:
    """Bits of the hash output revealed by rank deficiency.

    For an m x n compressing hash (m <= n) applied to a uniform input, the
    output is uniform on a subspace of dimension rank, so m - rank bits of
    the nominal output entropy are leaked.
    """
    if mat.rows > mat.cols:
        raise BadShape(f"hash must compress: {mat.rows} rows > {mat.cols} cols")
    return mat.rows - gf2_rank(mat)


def singular_fraction(
    m: int, n: int, mode: str = "exhaustive", samples: int | None = None, seed: int | None = None
) -> float:
    """Fraction of Toeplitz seeds whose matrix has rank below min(m, n).

    ``mode='exhaustive'`` enumerates every seed (capped at 2^24 seeds);
    ``mode='sample'`` draws ``samples`` seeds from a generator seeded with
    ``seed`` so estimates are reproducible.
    """
    bits = m + n - 1
    full = min(m, n)
    if mode == "exhaustive":
        if 2**bits > EXHAUSTIVE_SEED_CAP:
            raise TooLarge(f"2^{bits} seeds exceed the exhaustive cap of {EXHAUSTIVE_SEED_CAP}")
        singular = 0
        for s in range(2**bits):
            seed_bits = [(s >> i) & 1 for i in range(bits)]
            if gf2_rank(toeplitz_from_seed(seed_bits, m, n)) < full:
                singular += 1
        return singular / 2**bits
    if mode == "sample":
        if not samples or samples <= 0:
            raise BadParams("sample mode needs a positive sample count")
        if seed is None:
            raise BadParams("sample mode needs an explicit seed for reproducibility")
        rng = random.Random(seed)
        singular = 0
        for _ in range(samples):
            seed_bits = [rng.randrange(2) for _ in range(bits)]
            if gf2_rank(toeplitz_from_seed(seed_bits, m, n)) < full:
                singular += 1
        return singular / samples
    raise BadParams(f"mode must be 'exhaustive' or 'sample', got {mode!r}")


@dataclass(frozen=True)
class LinearCode:
    """Binary linear [n, k] code given by a full-rank k x n generator."""

    generator: Gf2Matrix

    def __post_init__(self):
        if gf2_rank(self.generator) != self.generator.rows:
            raise BadParams("generator matrix must have full row rank over GF(2)")

    @property
    def n(self) -> int:
        return self.generator.cols

    @property
    def k(self) -> int:
        return self.generator.rows

    def codeword(self, message: int) -> int:
        """Encode a message index; message bit t (leftmost first) selects row t."""
        word = 0
        for t in range(self.k):
            if (message >> (self.k - 1 - t)) & 1:
                word ^= self.generator.row_bits[t]
        return word

    def codewords(self) -> np.ndarray:
        return np.asarray([self.codeword(i) for i in range(2**self.k)], dtype=np.int64)


def code_from_text(text: str) -> LinearCode:
    """Parse a generator matrix from plain text, one row of 0/1 per line.

    Digits may be contiguous ('1011') or whitespace-separated ('1 0 1 1').
    """
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        digits = line.split() if " " in line or "\t" in line else list(line)
        try:
            rows.append([int(d) for d in digits])
        except ValueError:
            raise BadParams(f"bad generator row {line!r}") from None
    if not rows:
        raise BadParams("generator file contains no rows")
    return LinearCode(Gf2Matrix.from_rows(rows))


def _popcount(a: np.ndarray) -> np.ndarray:
    # SWAR popcount; keeps us independent of numpy's bitwise_count availability
    v = a.astype(np.uint64)
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return ((v * np.uint64(0x0101010101010101)) >> np.uint64(56)).astype(np.int64)


def _parity_check_rows(code: LinearCode) -> list[int]:
    """Rows of a parity-check matrix (n-k of them) from the generator's RREF."""
    n, k = code.n, code.k
    work = list(code.generator.row_bits)
    pivots = []
    rank = 0
    for col in range(n):
        pivot = None
        for r in range(rank, k):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for r in range(k):
            if r != rank and ((work[r] >> col) & 1):
                work[r] ^= work[rank]
        pivots.append(col)
        rank += 1
    free = [c for c in range(n) if c not in pivots]
    rows = []
    for f in free:
        h = 1 << f
        for i, p in enumerate(pivots):
            if (work[i] >> f) & 1:
                h ^= 1 << p
        rows.append(h)
    return rows


@dataclass(frozen=True)
class CensusResult:
    region_sizes: dict[str, int]
    message_bias: ProbDist
    bias_delta: float


def decision_region_census(code: LinearCode, rule: str = "syndrome") -> CensusResult:
    """Decode every received word and measure the induced message bias.

    Region sizes always sum to 2^n.  Under syndrome decoding every region
    is a shifted copy of the coset-leader set, so regions are equal; under
    minimum-distance decoding with lowest-index tie-breaking, non-perfect
    codes generally produce unequal regions.  The bias is the variational
    distance of the message distribution (uniform received words) from
    uniform.
    """
    if rule not in DECODING_RULES:
        raise BadParams(f"rule must be one of {DECODING_RULES}, got {rule!r}")
    n, k = code.n, code.k
    if n > CENSUS_BIT_CAP:
        raise TooLarge(f"block length {n} exceeds the census cap of {CENSUS_BIT_CAP} bits")

    words = np.arange(2**n, dtype=np.int64)
    cws = code.codewords()

    if rule == "syndrome":
        h_rows = _parity_check_rows(code)
        col_syndrome = np.zeros(n, dtype=np.int64)
        for j in range(n):
            col_syndrome[j] = sum(((h >> j) & 1) << r for r, h in enumerate(h_rows))
        syndromes = np.zeros(2**n, dtype=np.int64)
        for j in range(n):
            syndromes ^= ((words >> j) & 1) * col_syndrome[j]
        # coset leader: minimum weight, ties broken by smallest word value
        order = np.lexsort((words, _popcount(words)))
        sorted_synd = syndromes[order]
        uniq, first = np.unique(sorted_synd, return_index=True)
        leaders = np.zeros(2 ** (n - k), dtype=np.int64)
        leaders[uniq] = words[order[first]]
        decoded = words ^ leaders[syndromes]
        msg_of_word = np.full(2**n, -1, dtype=np.int64)
        msg_of_word[cws] = np.arange(2**k)
        messages = msg_of_word[decoded]
    else:
        best_dist = np.full(2**n, n + 1, dtype=np.int64)
        messages = np.zeros(2**n, dtype=np.int64)
        for idx in range(2**k):
            dist = _popcount(words ^ cws[idx])
            better = dist < best_dist  # strict: earlier message wins ties
            best_dist = np.where(better, dist, best_dist)
            messages = np.where(better, idx, messages)

    counts = np.bincount(messages, minlength=2**k)
    labels = bit_strings(k)
    bias = ProbDist(labels, tuple(Fraction(int(c), 2**n) for c in counts))
    delta = variational_distance(bias, ProbDist.uniform(labels))
    sizes = {lab: int(c) for lab, c in zip(labels, counts)}
    return CensusResult(sizes, bias, float(delta))


def census_to_csv(result: CensusResult) -> str:
    out = io.StringIO()
    out.write("message,region_size\n")
    for message, size in sorted(result.region_sizes.items()):
        out.write(f"{message},{size}\n")
    return out.getvalue()


def is_perfect_code(code: LinearCode, t: int) -> bool:
    """Sphere-packing equality: sum_{i<=t} C(n, i) == 2^(n-k)."""
    if t < 0:
        raise BadParams(f"radius must be nonnegative, got {t}")
    volume = sum(math.comb(code.n, i) for i in range(t + 1))
    return volume == 2 ** (code.n - code.k)
