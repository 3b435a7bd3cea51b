"""
Finite Set Category
-------------------
Maps between the finite sets J(n) = {1..n}, their epi-mono factorization and generator
words, and the partition lattice that labels multidiagonals.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import networkx as nx

from corner_calculus.errors import DomainError


@dataclass(frozen=True)
class FinSetMap:
    """A map J(n) -> J(m); `values[i-1]` is the image of i."""

    values: tuple[int, ...]
    codomain_size: int

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise DomainError("FinSetMap domain must be nonempty")
        bad = [v for v in self.values if not 1 <= v <= self.codomain_size]
        if bad:
            raise DomainError(
                f"Values {bad} outside J({self.codomain_size}) in map {self.values}"
            )

    @classmethod
    def of(cls, values: Sequence[int], codomain_size: int | None = None) -> FinSetMap:
        vals = tuple(int(v) for v in values)
        return cls(vals, codomain_size if codomain_size is not None else max(vals))

    @classmethod
    def identity(cls, n: int) -> FinSetMap:
        return cls(tuple(range(1, n + 1)), n)

    @property
    def domain_size(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> int:
        return self.values[i - 1]

    @cached_property
    def is_injective(self) -> bool:
        return len(set(self.values)) == len(self.values)

    @cached_property
    def is_surjective(self) -> bool:
        return set(self.values) == set(range(1, self.codomain_size + 1))

    def to_json(self) -> list[int]:
        return list(self.values)


def compose(f: FinSetMap, g: FinSetMap) -> FinSetMap:
    """f ∘ g for g: J(n) -> J(m) and f: J(m) -> J(l)."""
    if g.codomain_size != f.domain_size:
        raise DomainError(
            f"Cannot compose: codomain J({g.codomain_size}) != domain J({f.domain_size})"
        )
    return FinSetMap(tuple(f(g(i)) for i in range(1, g.domain_size + 1)), f.codomain_size)


def epi_mono_factorize(f: FinSetMap) -> tuple[FinSetMap, FinSetMap]:
    """f = m ∘ e with e surjective and m strictly increasing."""
    image = sorted(set(f.values))
    rank = {v: i + 1 for i, v in enumerate(image)}
    e = FinSetMap(tuple(rank[v] for v in f.values), len(image))
    m = FinSetMap(tuple(image), f.codomain_size)
    return e, m


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Generator:
    """
    One of: sigma (adjacent transposition of i, i+1 on J(n)), iota (J(n) -> J(n+1), j -> j),
    delta (J(n) -> J(n-1), 1, 2 -> 1, j -> j-1).
    """

    kind: str
    n: int
    i: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("sigma", "iota", "delta"):
            raise DomainError(f"Unknown generator kind: {self.kind}")
        if self.kind == "sigma" and not 1 <= self.i < self.n:
            raise DomainError(f"sigma_{self.i} undefined on J({self.n})")
        if self.kind == "delta" and self.n < 2:
            raise DomainError("delta needs n >= 2")

    def as_map(self) -> FinSetMap:
        n = self.n
        if self.kind == "iota":
            return FinSetMap(tuple(range(1, n + 1)), n + 1)
        if self.kind == "delta":
            return FinSetMap((1,) + tuple(range(1, n)), n - 1)
        vals = list(range(1, n + 1))
        vals[self.i - 1], vals[self.i] = vals[self.i], vals[self.i - 1]
        return FinSetMap(tuple(vals), n)

    def __str__(self) -> str:
        if self.kind == "sigma":
            return f"sigma{self.i}[{self.n}]"
        return f"{self.kind}[{self.n}]"


Word = list[Generator]


def compose_word(word: Sequence[Generator], n: int) -> FinSetMap:
    """Composite of a word applied left to right, starting from J(n)."""
    out = FinSetMap.identity(n)
    for g in word:
        out = compose(g.as_map(), out)
    return out


def _permutation_word(p: FinSetMap) -> Word:
    arr = list(p.values)
    word: Word = []
    n = len(arr)
    # arr ∘ σ_a1 ∘ ... ∘ σ_ak = id  =>  p = σ_ak ∘ ... ∘ σ_a1
    for end in range(n - 1, 0, -1):
        for i in range(end):
            if arr[i] > arr[i + 1]:
                arr[i], arr[i + 1] = arr[i + 1], arr[i]
                word.append(Generator("sigma", n, i + 1))
    return word


def _injective_word(f: FinSetMap) -> Word:
    n, m = f.domain_size, f.codomain_size
    word = [Generator("iota", k) for k in range(n, m)]
    rest = sorted(set(range(1, m + 1)) - set(f.values))
    tau = FinSetMap(tuple(f.values) + tuple(rest), m)
    return word + _permutation_word(tau)


def generator_decompose(f: FinSetMap) -> Word:
    """Word over sigma/iota/delta whose left-to-right composite equals f."""
    if f.is_injective:
        word = _injective_word(f)
    else:
        n = f.domain_size
        i, j = next(
            (a, b)
            for a in range(1, n + 1)
            for b in range(a + 1, n + 1)
            if f(a) == f(b)
        )
        others = [x for x in range(1, n + 1) if x not in (i, j)]
        p_vals = [0] * n
        p_vals[i - 1], p_vals[j - 1] = 1, 2
        for pos, x in enumerate(others):
            p_vals[x - 1] = pos + 3
        p = FinSetMap(tuple(p_vals), n)
        rest = FinSetMap((f(i),) + tuple(f(x) for x in others), f.codomain_size)
        # f = rest ∘ delta ∘ p
        word = _permutation_word(p) + [Generator("delta", n)] + generator_decompose(rest)
    if compose_word(word, f.domain_size) != f:
        raise DomainError(f"Generator word does not reproduce {f.values}")
    return word


def alternative_decompose(f: FinSetMap) -> Word:
    """A second word for f built through the epi-mono factorization."""
    e, m = epi_mono_factorize(f)
    word = generator_decompose(e) + generator_decompose(m)
    if compose_word(word, f.domain_size) != f:
        raise DomainError(f"Epi-mono word does not reproduce {f.values}")
    return word


def all_maps(n: int, m: int) -> Iterator[FinSetMap]:
    """Every map J(n) -> J(m) in lexicographic order."""
    if n == 0:
        return
    vals = [1] * n
    while True:
        yield FinSetMap(tuple(vals), m)
        k = n - 1
        while k >= 0 and vals[k] == m:
            vals[k] = 1
            k -= 1
        if k < 0:
            return
        vals[k] += 1


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Partition of J(k); blocks sorted internally and by minimum element."""

    ground_size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        seen = [x for b in self.blocks for x in b]
        if sorted(seen) != list(range(1, self.ground_size + 1)):
            raise DomainError(
                f"Blocks {self.blocks} do not partition J({self.ground_size})"
            )
        if any(len(b) == 0 for b in self.blocks):
            raise DomainError("Partition blocks must be nonempty")
        canon = tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        object.__setattr__(self, "blocks", canon)

    @classmethod
    def of(cls, k: int, blocks: Sequence[Sequence[int]]) -> Partition:
        """Blocks not listed are singletons."""
        listed = {x for b in blocks for x in b}
        full = [tuple(b) for b in blocks] + [(x,) for x in range(1, k + 1) if x not in listed]
        return cls(k, tuple(full))

    @classmethod
    def discrete(cls, k: int) -> Partition:
        return cls(k, tuple((i,) for i in range(1, k + 1)))

    @classmethod
    def indiscrete(cls, k: int) -> Partition:
        return cls(k, (tuple(range(1, k + 1)),))

    @property
    def is_discrete(self) -> bool:
        return len(self.blocks) == self.ground_size

    @property
    def singletons(self) -> tuple[int, ...]:
        return tuple(b[0] for b in self.blocks if len(b) == 1)

    def block_of(self, i: int) -> tuple[int, ...]:
        return next(b for b in self.blocks if i in b)

    def restrict(self, k: int) -> Partition:
        """Partition induced on J(k) for k <= ground_size."""
        blocks = [tuple(x for x in b if x <= k) for b in self.blocks]
        return Partition(k, tuple(b for b in blocks if b))

    def relabel(self, perm: FinSetMap) -> Partition:
        """Image of the partition under a bijection of J(k)."""
        return Partition(self.ground_size, tuple(tuple(perm(x) for x in b) for b in self.blocks))

    def label(self) -> str:
        return "|".join("".join(str(x) for x in b) for b in self.blocks)

    def to_json(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]


def _check_sizes(p: Partition, q: Partition) -> None:
    if p.ground_size != q.ground_size:
        raise DomainError(
            f"Partition sizes differ: {p.ground_size} vs {q.ground_size}"
        )


def partition_join(p: Partition, q: Partition) -> Partition:
    """Finest partition coarser than both."""
    _check_sizes(p, q)
    g = nx.Graph()
    g.add_nodes_from(range(1, p.ground_size + 1))
    for b in p.blocks + q.blocks:
        g.add_edges_from(zip(b, b[1:]))
    return Partition(p.ground_size, tuple(tuple(c) for c in nx.connected_components(g)))


def partition_meet(p: Partition, q: Partition) -> Partition:
    _check_sizes(p, q)
    blocks = [tuple(set(a) & set(b)) for a in p.blocks for b in q.blocks]
    return Partition(p.ground_size, tuple(b for b in blocks if b))


def partition_leq(q: Partition, p: Partition) -> bool:
    """True when every block of q lies in some block of p (q finer than p)."""
    _check_sizes(p, q)
    return all(any(set(b) <= set(c) for c in p.blocks) for b in q.blocks)


def canonical_surjection(p: Partition) -> FinSetMap:
    index = {x: j + 1 for j, b in enumerate(p.blocks) for x in b}
    return FinSetMap(tuple(index[i] for i in range(1, p.ground_size + 1)), len(p.blocks))


def fibre_partition(f: FinSetMap) -> Partition:
    fibres: dict[int, list[int]] = {}
    for i, v in enumerate(f.values, start=1):
        fibres.setdefault(v, []).append(i)
    return Partition(f.domain_size, tuple(tuple(b) for b in fibres.values()))


def enumerate_partitions(k: int) -> list[Partition]:
    """All Bell(k) partitions, generated by restricted-growth strings."""
    if k < 1:
        return []
    out: list[Partition] = []

    def rec(prefix: list[int], top: int) -> None:
        if len(prefix) == k:
            blocks: dict[int, list[int]] = {}
            for i, b in enumerate(prefix, start=1):
                blocks.setdefault(b, []).append(i)
            out.append(Partition(k, tuple(tuple(v) for v in blocks.values())))
            return
        for b in range(top + 2):
            rec(prefix + [b], max(top, b))

    rec([0], 0)
    return out


def non_discrete_partitions(k: int) -> list[Partition]:
    return [p for p in enumerate_partitions(k) if not p.is_discrete]


def bell(k: int) -> int:
    return len(enumerate_partitions(k))
