"""Half-integers and Maya diagrams.

Half-integers are stored as their doubled value, an odd int, so that
all ordering and arithmetic stays in plain integers.  A Maya diagram of
charge p is stored by its finite deviation from the vacuum pattern:

* ``mus``  -- strictly increasing negative half-integers; the positions
  ``-mu`` are the occupied positive slots ("particles").
* ``nus``  -- strictly increasing negative half-integers; these are the
  empty negative slots ("holes").

The semi-infinite wedge |M> = e_{s1} ^ e_{s2} ^ ... runs over the occupied
set S = {-mu} u (negative half-integers minus nus) in decreasing order.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Sequence


# ---------------------------------------------------------------------------
# half-integers


def to_twice(x) -> int:
    """Doubled value of a half-integer given as HalfInt, Fraction, str or twice-int.

    Plain ints are *not* accepted (ambiguous); use HalfInt.from_twice.
    """
    if isinstance(x, HalfInt):
        return x.twice
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, Fraction):
        t = 2 * x
        if t.denominator != 1 or t.numerator % 2 == 0:
            raise ValueError(f"{x} is not a half-integer")
        return t.numerator
    raise TypeError(f"cannot read a half-integer from {x!r}")


@dataclass(frozen=True, order=True)
class HalfInt:
    """A number in Z + 1/2, stored as ``twice`` (odd)."""

    twice: int

    def __post_init__(self):
        if self.twice % 2 == 0:
            raise ValueError("twice-value of a half-integer must be odd")

    @classmethod
    def from_twice(cls, t: int) -> "HalfInt":
        return cls(t)

    @classmethod
    def parse(cls, x) -> "HalfInt":
        return cls(to_twice(x))

    def as_fraction(self) -> Fraction:
        return Fraction(self.twice, 2)

    def __add__(self, n: int) -> "HalfInt":
        if not isinstance(n, int):
            return NotImplemented
        return HalfInt(self.twice + 2 * n)

    __radd__ = __add__

    def __sub__(self, n: int) -> "HalfInt":
        if not isinstance(n, int):
            return NotImplemented
        return HalfInt(self.twice - 2 * n)

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __str__(self) -> str:
        return f"{self.twice}/2"


def half_str(t: int) -> str:
    return f"{t}/2"


# ---------------------------------------------------------------------------
# Maya diagrams


class MayaDiagram:
    """Canonical (mus, nus) label of a Fock basis vector (twice-values)."""

    __slots__ = ("mus", "nus", "_hash")

    def __init__(self, mus: Sequence[int] = (), nus: Sequence[int] = (), *, check: bool = True):
        mus = tuple(mus)
        nus = tuple(nus)
        if check:
            for seq in (mus, nus):
                for a in seq:
                    if a % 2 == 0 or a >= 0:
                        raise ValueError(f"entries must be negative half-integers, got {a}/2")
                for a, b in zip(seq, seq[1:]):
                    if a >= b:
                        raise ValueError("mus and nus must be strictly increasing")
        self.mus = mus
        self.nus = nus
        self._hash = hash((mus, nus))

    # -- identity ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MayaDiagram)
            and self._hash == other._hash
            and self.mus == other.mus
            and self.nus == other.nus
        )

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "MayaDiagram") -> bool:
        return (self.mus, self.nus) < (other.mus, other.nus)

    def sort_key(self):
        return (self.charge, self.degree, self.mus, self.nus)

    def __repr__(self) -> str:
        if not self.mus and not self.nus:
            return "Maya(vac)"
        return f"Maya(mus={list(self.mus)}, nus={list(self.nus)})"

    # -- grading ----------------------------------------------------------
    @property
    def charge(self) -> int:
        return len(self.mus) - len(self.nus)

    @property
    def degree(self) -> int:
        p = self.charge
        twice_d = -sum(self.mus) - sum(self.nus) - p * p
        return twice_d // 2

    @property
    def energy(self) -> int:
        """L0 eigenvalue d + p(p+1)/2."""
        p = self.charge
        return self.degree + p * (p + 1) // 2

    # -- occupation -------------------------------------------------------
    def particles(self) -> tuple[int, ...]:
        """Occupied positive positions, decreasing (twice-values)."""
        return tuple(-m for m in self.mus)

    def holes(self) -> tuple[int, ...]:
        return self.nus

    def is_occupied(self, x: int) -> bool:
        if x > 0:
            i = bisect_left(self.mus, -x)
            return i < len(self.mus) and self.mus[i] == -x
        i = bisect_left(self.nus, x)
        return not (i < len(self.nus) and self.nus[i] == x)

    def count_above(self, x: int) -> int:
        """Number of occupied positions strictly greater than x."""
        if x > 0:
            return bisect_left(self.mus, -x)
        r = len(self.mus)
        sea = (-x - 1) // 2
        holes_above = len(self.nus) - bisect_right(self.nus, x)
        return r + sea - holes_above

    def occupied_window(self, low: int) -> list[int]:
        """Occupied positions >= low, decreasing."""
        out = list(self.particles())
        hs = set(self.nus)
        x = -1
        while x >= low:
            if x not in hs:
                out.append(x)
            x -= 2
        return out

    def max_particle(self) -> int | None:
        return -self.mus[0] if self.mus else None

    def min_hole(self) -> int | None:
        return self.nus[0] if self.nus else None

    # -- single-slot edits (no signs) -----------------------------------------
    def without(self, x: int) -> "MayaDiagram":
        """Empty the occupied slot x."""
        if x > 0:
            mus = list(self.mus)
            mus.remove(-x)
            return MayaDiagram(mus, self.nus, check=False)
        nus = list(self.nus)
        i = bisect_left(nus, x)
        nus.insert(i, x)
        return MayaDiagram(self.mus, nus, check=False)

    def with_(self, x: int) -> "MayaDiagram":
        """Fill the empty slot x."""
        if x > 0:
            mus = list(self.mus)
            i = bisect_left(mus, -x)
            mus.insert(i, -x)
            return MayaDiagram(mus, self.nus, check=False)
        nus = list(self.nus)
        nus.remove(x)
        return MayaDiagram(self.mus, nus, check=False)

    # -- json -------------------------------------------------------------
    def to_json(self) -> dict:
        return {"mus": list(self.mus), "nus": list(self.nus)}

    @classmethod
    def from_json(cls, obj) -> "MayaDiagram":
        if "mus" in obj or "nus" in obj:
            return cls(obj.get("mus", []), obj.get("nus", []))
        if "charge" in obj:
            moves = [(to_twice(Fraction(str(a))), to_twice(Fraction(str(b)))) for a, b in obj.get("moves", [])]
            return from_characteristic(int(obj["charge"]), moves)
        raise ValueError(f"not a Maya diagram: {obj!r}")


VACUUM = MayaDiagram()


@lru_cache(maxsize=None)
def charge_vacuum(p: int) -> MayaDiagram:
    """|p>: the charge-p diagram of degree 0."""
    if p >= 0:
        return MayaDiagram(tuple(range(-2 * p + 1, 0, 2)), ())
    return MayaDiagram((), tuple(range(2 * p + 1, 0, 2)))


def grading(m: MayaDiagram) -> tuple[int, int]:
    return m.charge, m.degree


# ---------------------------------------------------------------------------
# characteristic-function form (Figure-1 style)


def from_characteristic(p: int, moves: Iterable[tuple[int, int]]) -> MayaDiagram:
    """Build a diagram from mu(nu) values that differ from the identity.

    ``moves`` holds (nu, mu(nu)) pairs in twice-values; nu ranges over the
    domain nu <= p - 1/2 and every unlisted nu is a fixed point.
    """
    top = 2 * p - 1
    table = dict(moves)
    for nu in table:
        if nu > top:
            raise ValueError(f"{nu}/2 is outside the domain nu <= {top}/2 for charge {p}")
    low = min([top, -1] + list(table) + list(table.values())) - 2
    occupied = []
    nu = top
    while nu >= low:
        occupied.append(table.get(nu, nu))
        nu -= 2
    if sorted(set(occupied), reverse=True) != occupied:
        raise ValueError("characteristic function must be strictly increasing")
    # everything below `low` is filled
    particles = [x for x in occupied if x > 0]
    occ = set(occupied)
    holes = [x for x in range(-1, low, -2) if x not in occ]
    m = MayaDiagram(sorted(-x for x in particles), sorted(holes))
    if m.charge != p:
        raise ValueError("moves are inconsistent with the stated charge")
    return m


def to_characteristic(m: MayaDiagram) -> list[tuple[int, int]]:
    """Non-identity (nu, mu(nu)) pairs of the characteristic function."""
    p = m.charge
    low = min((m.nus[0] if m.nus else -1), 2 * p - 1) - 2
    occ = m.occupied_window(low)
    out = []
    nu = 2 * p - 1
    for x in occ:
        if x != nu:
            out.append((nu, x))
        nu -= 2
    return out


def characteristic_degree(m: MayaDiagram) -> int:
    """sum of (mu(nu) - nu), the definition of degree via the characteristic function."""
    return sum(x - nu for nu, x in to_characteristic(m)) // 2


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=None)
def partitions(d: int) -> tuple[tuple[int, ...], ...]:
    """Partitions of d as non-increasing tuples."""
    out: list[tuple[int, ...]] = []

    def rec(rem: int, cap: int, acc: list[int]):
        if rem == 0:
            out.append(tuple(acc))
            return
        for k in range(min(rem, cap), 0, -1):
            acc.append(k)
            rec(rem - k, k, acc)
            acc.pop()

    rec(d, d, [])
    return tuple(out)


def from_partition(p: int, lam: Sequence[int]) -> MayaDiagram:
    """Charge-p diagram whose k-th occupied slot is lam_k - k + p + 1/2."""
    n = len(lam)
    occ = [2 * (lam[k] - (k + 1) + p) + 1 for k in range(n)]
    tail_top = 2 * (p - n) - 1  # slots below this are all filled
    particles = [x for x in occ if x > 0]
    if tail_top > 0:
        particles += list(range(tail_top, 0, -2))
    occ_set = set(occ)
    holes = [x for x in range(-1, tail_top, -2) if x not in occ_set]
    return MayaDiagram(sorted(-x for x in particles), sorted(holes), check=False)


@lru_cache(maxsize=None)
def enumerate_basis(p: int, d: int) -> tuple[MayaDiagram, ...]:
    """All diagrams of charge p and degree d, ordered lexicographically on (mus, nus)."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    return tuple(sorted(from_partition(p, lam) for lam in partitions(d)))


def basis_by_energy(e: int, charges: Iterable[int] | None = None) -> list[MayaDiagram]:
    """All diagrams with L0-eigenvalue e (all charges unless restricted)."""
    out = []
    if charges is None:
        charges = charges_up_to_energy(e)
    for p in charges:
        d = e - p * (p + 1) // 2
        if d >= 0:
            out.extend(enumerate_basis(p, d))
    return out


def charges_up_to_energy(e: int) -> list[int]:
    """Charges p with p(p+1)/2 <= e."""
    out = []
    p = 0
    while p * (p + 1) // 2 <= e:
        out.append(p)
        out.append(-p - 1)
        p += 1
    return sorted(out)


def brute_force_basis(p: int, d: int) -> list[MayaDiagram]:
    """Exhaustive search over (mus, nus) words; an independent oracle for enumerate_basis."""
    out = []
    # |mu| and |nu| entries are bounded by 2d + 2|p| + 1 in twice units
    bound = 2 * (d + abs(p)) + 1
    slots = list(range(-1, -bound - 1, -2))
    for r in range(0, len(slots) + 1):
        s = r - p
        if s < 0 or s > len(slots):
            continue
        for mus in combinations(slots, r):
            sm = -sum(mus)
            if sm > 2 * d + p * p + 1:
                continue
            for nus in combinations(slots, s):
                if sm - sum(nus) - p * p == 2 * d:
                    out.append(MayaDiagram(sorted(mus), sorted(nus)))
    return sorted(out)


# ---------------------------------------------------------------------------
# structural maps


def operator_word(m: MayaDiagram) -> tuple[tuple[int, ...], tuple[int, ...], int]:
    """(mus, nus, sign) with |M> = sign * psibar_mu1..psibar_mur psi_nus..psi_nu1 |0>."""
    exponent = sum(m.nus) + len(m.nus)  # twice (sum nu + s/2)
    sign = -1 if (exponent // 2) % 2 else 1
    return m.mus, m.nus, sign


def reflect(m: MayaDiagram) -> MayaDiagram:
    """Mirror image about 0: particles and holes swap roles."""
    return MayaDiagram(m.nus, m.mus, check=False)


def shift(m: MayaDiagram) -> MayaDiagram:
    """Move every occupied slot up by one; charge goes up by one."""
    parts = [x + 2 for x in m.particles()]
    if m.is_occupied(-1):
        parts.append(1)
    holes = [h + 2 for h in m.nus if h + 2 < 0]
    return MayaDiagram(sorted(-x for x in parts), holes, check=False)


def unshift(m: MayaDiagram) -> MayaDiagram:
    """Inverse of shift."""
    parts = [x - 2 for x in m.particles() if x - 2 > 0]
    holes = [h - 2 for h in m.nus]
    if not m.is_occupied(1):
        holes.append(-1)
    return MayaDiagram(sorted(-x for x in parts), sorted(holes), check=False)


def iter_window(max_energy: int, charges: Iterable[int]) -> Iterator[MayaDiagram]:
    for p in charges:
        for e in range(max_energy + 1):
            d = e - p * (p + 1) // 2
            if d >= 0:
                yield from enumerate_basis(p, d)
