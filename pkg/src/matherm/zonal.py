"""Exact zonal polynomial tables.

Zonal polynomials C_kappa are built as Jack polynomials with parameter 2 in
the monomial basis, using the dominance-order recurrence with unit leading
coefficient.  Each row is then rescaled so that, degree by degree,

    sum_{kappa |- k} C_kappa = t_1^k.

Everything is kept in exact rationals; floats only appear in
:func:`zonal_eval`.  Generalized binomial coefficients and linearization
coefficients are obtained by exact triangular basis changes.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, prod
from pathlib import Path

from .partitions import Partition, dominates, enumerate_partitions, gen_pochhammer, partitions_up_to
from .symfun import (
    PowerSumPoly,
    SymPoly,
    eval_powersum,
    monomial_to_powersum,
    shift_variables,
    sym_multiply,
)

CACHE_VERSION = 1
CACHE_ENV = "MATHERM_CACHE_DIR"
DEFAULT_MAX_DEGREE = 8


def _rho(kappa) -> int:
    return sum(k * (k - i - 1) for i, k in enumerate(kappa))


def _raise_ops(lam: Partition):
    """Yield (coefficient, mu) for the raising moves of the recurrence."""
    parts = list(lam)
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            for t in range(1, parts[j] + 1):
                mu = parts.copy()
                mu[i] += t
                mu[j] -= t
                yield parts[i] - parts[j] + 2 * t, Partition(sorted((p for p in mu if p), reverse=True))


def _jack2_row(kappa: Partition) -> dict:
    """Monomial coefficients of the unnormalized zonal polynomial (leading term 1)."""
    row = {kappa: Fraction(1)}
    rho_k = _rho(kappa)
    below = [lam for lam in enumerate_partitions(kappa.weight) if lam != kappa and dominates(kappa, lam)]
    for lam in below:  # reverse-lex order: every mu above lam is already known
        acc = Fraction(0)
        for coef, mu in _raise_ops(lam):
            c = row.get(mu)
            if c:
                acc += coef * c
        if acc:
            row[lam] = acc / (rho_k - _rho(lam))
    return row


def _multinomial(lam) -> int:
    return factorial(sum(lam)) // prod(factorial(p) for p in lam)


def _zonal_degree(k: int) -> dict:
    """Normalized rows for every kappa |- k, so the rows sum to t_1^k."""
    rows = {}
    for kappa in enumerate_partitions(k):
        raw = _jack2_row(kappa)
        # coefficient of m_kappa in t_1^k minus what the larger rows already carry
        lead = _multinomial(kappa) - sum(rows[mu].get(kappa, 0) for mu in rows)
        rows[kappa] = {lam: lead * c for lam, c in raw.items()}
    return rows


def _count_arrangements(lam, m: int) -> int:
    """m_lambda(1,...,1) with m ones."""
    if len(lam) > m:
        return 0
    mult = {}
    for p in lam:
        mult[p] = mult.get(p, 0) + 1
    out = factorial(m) // factorial(m - len(lam))
    for v in mult.values():
        out //= factorial(v)
    return out


def identity_value_closed_form(kappa, m: int) -> Fraction:
    """C_kappa(I_m) from the product formula."""
    kappa = Partition(kappa)
    k, p = kappa.weight, len(kappa)
    num = Fraction(4 ** k * factorial(k)) * gen_pochhammer(Fraction(m, 2), kappa)
    for i in range(p):
        for j in range(i + 1, p):
            num *= 2 * kappa[i] - 2 * kappa[j] - (i + 1) + (j + 1)
    den = prod(factorial(2 * kappa[j] + p - (j + 1)) for j in range(p))
    return num / den


@dataclass(eq=False)
class ZonalTable:
    """Zonal polynomials up to ``max_degree`` with lazily filled coefficient tensors.

    ``zonal_in_monomial`` and ``zonal_in_powersum`` are complete on
    construction.  Binomial and linearization coefficients are computed on
    first request and memoized under a lock, so a shared table can be read
    from several threads.
    """

    max_degree: int
    zonal_in_monomial: dict
    zonal_in_powersum: dict
    binomials: dict = field(default_factory=dict)
    linearizations: dict = field(default_factory=dict)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False, compare=False)

    @property
    def partitions(self) -> list[Partition]:
        return list(self.zonal_in_monomial)

    def _check(self, kappa):
        kappa = Partition(kappa)
        if kappa.weight > self.max_degree:
            raise ValueError(f"partition {tuple(kappa)} exceeds table degree {self.max_degree}")
        return kappa

    def zonal(self, kappa) -> SymPoly:
        return self.zonal_in_monomial[self._check(kappa)]

    def zonal_powersum(self, kappa) -> PowerSumPoly:
        return self.zonal_in_powersum[self._check(kappa)]

    def identity_value(self, kappa, m: int) -> Fraction:
        """C_kappa(I_m) by exact evaluation of the table row."""
        return sum(
            (c * _count_arrangements(lam, m) for lam, c in self.zonal(kappa).items()),
            Fraction(0),
        )

    def expand(self, p: SymPoly, ell: int | None = None) -> dict:
        """Coordinates of ``p`` in the zonal basis.

        With ``ell`` given, ``p`` is read as a function of ``ell`` variables,
        so monomials and zonal polynomials with more than ``ell`` parts are
        dropped.
        """
        rem = {lam: c for lam, c in p.items() if ell is None or len(lam) <= ell}
        out = {}
        degrees = sorted({lam.weight for lam in rem})
        for w in degrees:
            for kappa in enumerate_partitions(w, ell if ell is not None else max(w, 1)):
                c = rem.get(kappa, 0)
                if not c:
                    continue
                row = self.zonal(kappa)
                coef = c / row[kappa]
                out[kappa] = coef
                for lam, d in row.items():
                    if ell is not None and len(lam) > ell:
                        continue
                    rem[lam] = rem.get(lam, 0) - coef * d
        leftover = {lam: c for lam, c in rem.items() if c}
        if leftover:
            raise ArithmeticError(f"zonal expansion left a residue: {leftover}")
        return out

    def _binomial_row(self, kappa: Partition, ell: int) -> dict:
        base = self.identity_value(kappa, ell)
        shifted = shift_variables(self.zonal(kappa), ell)
        coords = self.expand(shifted, ell)
        return {sigma: c * self.identity_value(sigma, ell) / base for sigma, c in coords.items()}

    def binomial_row(self, kappa, ell: int | None = None) -> dict:
        """All nonzero generalized binomial coefficients (kappa choose sigma)."""
        kappa = self._check(kappa)
        if ell is not None:
            if ell < max(len(kappa), 1):
                raise ValueError("ell must be at least the length of kappa")
            return self._binomial_row(kappa, ell)
        with self._lock:
            row = self.binomials.get(kappa)
            if row is None:
                row = self._binomial_row(kappa, max(len(kappa), 1))
                self.binomials[kappa] = row
        return row

    def binomial(self, kappa, sigma, ell: int | None = None) -> Fraction:
        return self.binomial_row(kappa, ell).get(Partition(sigma), Fraction(0))

    def linearization(self, tau, sigma) -> dict:
        """Coefficients a^kappa_{tau,sigma} with C_tau C_sigma = sum a C_kappa."""
        tau, sigma = self._check(tau), self._check(sigma)
        if tau.weight + sigma.weight > self.max_degree:
            raise ValueError("product degree exceeds the table degree")
        key = (tau, sigma) if (tau.weight, tuple(tau)) >= (sigma.weight, tuple(sigma)) else (sigma, tau)
        with self._lock:
            out = self.linearizations.get(key)
            if out is None:
                out = self.expand(sym_multiply(self.zonal(tau), self.zonal(sigma)))
                self.linearizations[key] = out
        return out

    def complete(self) -> "ZonalTable":
        """Fill every binomial and linearization entry (used before serializing)."""
        parts = partitions_up_to(self.max_degree)
        for kappa in parts:
            self.binomial_row(kappa)
        for tau in parts:
            for sigma in parts:
                if tau.weight + sigma.weight <= self.max_degree:
                    self.linearization(tau, sigma)
        return self


def build_zonal_table(max_degree: int = DEFAULT_MAX_DEGREE) -> ZonalTable:
    """Construct zonal polynomials of every degree up to ``max_degree``."""
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    monomial, powersum = {}, {}
    for k in range(max_degree + 1):
        for kappa, row in _zonal_degree(k).items():
            poly = SymPoly(row)
            monomial[kappa] = poly
            powersum[kappa] = monomial_to_powersum(poly, max(k, 1))
    return ZonalTable(max_degree, monomial, powersum)


_tables: dict = {}
_tables_lock = threading.Lock()


def get_table(min_degree: int = 4) -> ZonalTable:
    """Shared in-process table covering at least ``min_degree``."""
    with _tables_lock:
        for deg, table in _tables.items():
            if deg >= min_degree:
                return table
        table = build_zonal_table(max(min_degree, 4))
        _tables[table.max_degree] = table
        return table


def zonal_identity_value(kappa, m: int, table: ZonalTable | None = None) -> Fraction:
    """C_kappa(I_m), checked against the closed-form product formula."""
    if m < 1:
        raise ValueError("m must be at least 1")
    kappa = Partition(kappa)
    closed = identity_value_closed_form(kappa, m)
    table = table or get_table(kappa.weight)
    tabled = table.identity_value(kappa, m)
    if closed != tabled:
        raise ArithmeticError(f"identity value mismatch for {tuple(kappa)}: {closed} vs {tabled}")
    return closed


def generalized_binomial(kappa, sigma, table: ZonalTable | None = None, ell: int | None = None) -> Fraction:
    """(kappa choose sigma); zero when sigma is not contained in kappa."""
    kappa, sigma = Partition(kappa), Partition(sigma)
    if sigma.weight > kappa.weight:
        raise ValueError("weight of sigma exceeds weight of kappa")
    table = table or get_table(kappa.weight)
    return table.binomial(kappa, sigma, ell)


def linearization(tau, sigma, table: ZonalTable | None = None) -> dict:
    tau, sigma = Partition(tau), Partition(sigma)
    table = table or get_table(tau.weight + sigma.weight)
    return table.linearization(tau, sigma)


def zonal_eval(kappa, eigenvalues, table: ZonalTable | None = None):
    """C_kappa(S) from the eigenvalues of S (last axis), through power sums."""
    kappa = Partition(kappa)
    table = table or get_table(kappa.weight)
    return eval_powersum(table.zonal_powersum(kappa), eigenvalues)


# --- disk cache -----------------------------------------------------------


def _frac_out(c: Fraction):
    return [str(c.numerator), str(c.denominator)]


def _frac_in(pair) -> Fraction:
    return Fraction(int(pair[0]), int(pair[1]))


def _key(p) -> str:
    return str(Partition(p))


def _unkey(s: str) -> Partition:
    return Partition(()) if s == "0" else Partition(int(x) for x in s.split(","))


def table_to_dict(table: ZonalTable) -> dict:
    return {
        "format": "matherm-zonal-table",
        "version": CACHE_VERSION,
        "max_degree": table.max_degree,
        "partition_order": [_key(p) for p in table.partitions],
        "zonal_in_monomial": {
            _key(k): {_key(l): _frac_out(c) for l, c in poly.items()} for k, poly in table.zonal_in_monomial.items()
        },
        "zonal_in_powersum": {
            _key(k): {_key(l): _frac_out(c) for l, c in poly.items()} for k, poly in table.zonal_in_powersum.items()
        },
        "binomials": {
            _key(k): {_key(s): _frac_out(c) for s, c in row.items()} for k, row in table.binomials.items()
        },
        "linearization": {
            f"{_key(t)}|{_key(s)}": {_key(k): _frac_out(c) for k, c in row.items()}
            for (t, s), row in table.linearizations.items()
        },
    }


def table_from_dict(data: dict) -> ZonalTable:
    if data.get("format") != "matherm-zonal-table" or data.get("version") != CACHE_VERSION:
        raise ValueError("zonal table cache has an incompatible format or version")

    def poly(cls, d):
        return cls({_unkey(l): _frac_in(c) for l, c in d.items()})

    order = [_unkey(s) for s in data["partition_order"]]
    mono = {k: poly(SymPoly, data["zonal_in_monomial"][_key(k)]) for k in order}
    psum = {k: poly(PowerSumPoly, data["zonal_in_powersum"][_key(k)]) for k in order}
    binom = {_unkey(k): {_unkey(s): _frac_in(c) for s, c in row.items()} for k, row in data["binomials"].items()}
    lin = {}
    for pair, row in data["linearization"].items():
        t, s = pair.split("|")
        lin[(_unkey(t), _unkey(s))] = {_unkey(k): _frac_in(c) for k, c in row.items()}
    return ZonalTable(data["max_degree"], mono, psum, binom, lin)


def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "matherm")


def cache_path(max_degree: int, directory: Path | None = None) -> Path:
    return Path(directory or cache_dir()) / f"zonal_v{CACHE_VERSION}_deg{max_degree}.json"


def save_table(table: ZonalTable, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(table_to_dict(table)))
    tmp.replace(path)
    return path


def load_table(path: Path) -> ZonalTable:
    return table_from_dict(json.loads(Path(path).read_text()))


def load_or_build_table(max_degree: int = DEFAULT_MAX_DEGREE, directory: Path | None = None) -> ZonalTable:
    """Read the cached table if present and current, otherwise build and store it."""
    path = cache_path(max_degree, directory)
    if path.exists():
        try:
            return load_table(path)
        except (ValueError, KeyError, json.JSONDecodeError):
            pass  # stale or corrupt cache: rebuild
    table = build_zonal_table(max_degree).complete()
    save_table(table, path)
    return table
