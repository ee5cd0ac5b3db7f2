"""Acceptance criteria 1-10, one test per criterion.

Each test records a PASS/FAIL line, printed in the pytest terminal summary
(see conftest.py).  Run standalone with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import itertools
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from carnotlie import group_law, killing
from carnotlie.algebra import abelian, free_nilpotent, heisenberg, validate
from carnotlie.derivations import isometric_part, strata_derivations
from carnotlie.group_law import NotAutomorphismError, automorphism_to_map, bch, dag_fields, dilation
from carnotlie.john import NormSpec, equivariance_residual, facet_symmetries, inner_john
from carnotlie.killing import identification_defects, killing_basis, killing_filtration
from carnotlie.polynomial import PolyVectorField, field_bracket
from carnotlie.prolongation import bracket_table, prolong

from conftest import CORPUS, DATA, identity_gram

F = Fraction
RESULTS: list[str] = []
ROT = [[F(3, 5), F(-4, 5), 0], [F(4, 5), F(3, 5), 0], [0, 0, 1]]


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title}"
    if detail:
        line += f" [{detail}]"
    RESULTS.append(line)
    print(line)
    assert ok, line


def cold_caches() -> None:
    for fn in (group_law.dynkin_words, group_law.bch_polynomials, group_law._translation_jacobians, killing._frame_inverse):
        fn.cache_clear()


def pipeline(alg):
    d0 = strata_derivations(alg)
    g0 = isometric_part(alg, identity_gram(alg))
    tower = prolong(alg, g0)
    K = killing_basis(alg, g0)
    chain = killing_filtration(K)
    return d0, g0, tower, K, chain


def test_criterion_01_heisenberg_pipeline():
    cold_caches()
    t = time.perf_counter()
    h = heisenberg()
    ok_valid = validate(h) == []
    d0, g0, tower, K, chain = pipeline(h)
    elapsed = time.perf_counter() - t
    dims = tuple(s.dim for s in chain)
    rotation = bool(group_law.is_isometric_automorphism(ROT, h, NormSpec.identity(2)))
    ok = (
        ok_valid
        and len(d0) == 4
        and len(g0) == 1
        and K.dim == 4
        and dims == (3, 1, 0)
        and tower.space_dim(1) == 0
        and h.dim + len(g0) == 4
        and rotation
        and elapsed < 1.0
    )
    record(1, "Heisenberg pipeline", ok, f"Der0={len(d0)} g0={len(g0)} K={K.dim} filtration={dims} {elapsed:.3f}s")


def test_criterion_02_abelian():
    details = []
    ok = True
    for n in (2, 3, 4):
        cold_caches()
        t = time.perf_counter()
        a = abelian(n)
        g0 = isometric_part(a, identity_gram(a))
        tower = prolong(a, g0)
        elapsed = time.perf_counter() - t
        good = n + len(g0) == n + n * (n - 1) // 2 and tower.space_dim(1) == 0 and elapsed < 1.0
        ok &= good
        details.append(f"n={n}: dim {n + len(g0)} {elapsed:.3f}s")
    record(2, "abelian R^n isometry algebra n + n(n-1)/2, g1 = 0", ok, "; ".join(details))


def test_criterion_03_corpus_prolongation_and_filtration():
    cold_caches()
    t = time.perf_counter()
    bad = []
    for name, alg in CORPUS:
        _, g0, tower, K, chain = pipeline(alg)
        if tower.terminated_at != 1 or tower.space_dim(1) != 0:
            bad.append(f"{name}: g1 != 0")
        if tower.dimension != alg.dim + len(g0):
            bad.append(f"{name}: dim Prol mismatch")
        if any(s.dim for s in chain[2:]):
            bad.append(f"{name}: K_j != 0 for some j >= 1")
    elapsed = time.perf_counter() - t
    record(3, "corpus: Prol(g) = g + g0 and K_j = 0 for j >= 1", not bad and elapsed < 10.0, "; ".join(bad) or f"{len(CORPUS)} algebras {elapsed:.2f}s")


def test_criterion_04_identification():
    bad = []
    for name, alg in CORPUS:
        _, g0, tower, K, _ = pipeline(alg)
        defects = identification_defects(K, tower)
        if defects:
            bad.append(f"{name}: {defects[0]}")
    record(4, "Prol(g) and K agree per degree and in bracket tables", not bad, "; ".join(bad) or f"{len(CORPUS)} algebras")


def _combination(fields, coeffs):
    out = PolyVectorField.zero(fields[0].ambient_dim)
    for c, f in zip(coeffs, fields):
        if c:
            out = out + f * c
    return out


def test_criterion_05_anti_homomorphism():
    bad = []
    pairs = 0
    for name, alg in CORPUS:
        dag = dag_fields(alg)
        for i, j in itertools.product(range(alg.dim), repeat=2):
            pairs += 1
            c = alg.bracket(alg.basis_vector(i), alg.basis_vector(j))
            if field_bracket(dag[i], dag[j]) != -_combination(dag, c):
                bad.append(f"{name}: ({alg.basis_names[i]},{alg.basis_names[j]})")
    record(5, "[X,Y]dag = -[Xdag,Ydag] on all basis pairs", not bad, "; ".join(bad[:3]) or f"{pairs} pairs")


def test_criterion_06_k0_normalises_kj():
    bad = []
    checks = 0
    for name, alg in CORPUS:
        K = killing_basis(alg, isometric_part(alg, identity_gram(alg)))
        chain = killing_filtration(K)
        k0 = chain[1]
        for j, kj in enumerate(chain[1:]):
            for a, b in itertools.product(k0.basis, kj.basis):
                checks += 1
                coords = K.coordinates(field_bracket(K.combination(a), K.combination(b)))
                if coords is None or not kj.contains(coords):
                    bad.append(f"{name}: K_{j}")
    record(6, "[K0, Kj] in Kj", not bad, "; ".join(bad[:3]) or f"{checks} memberships")


def test_criterion_07_bch():
    bad = []
    for name, alg in CORPUS:
        rng = random.Random(2024)
        pt = lambda: tuple(F(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(alg.dim))
        for _ in range(100):
            x, y, z = pt(), pt(), pt()
            if bch(bch(x, y, alg), z, alg) != bch(x, bch(y, z, alg), alg):
                bad.append(f"{name}: associativity")
                break
        for _ in range(100):
            x, y = pt(), pt()
            lam = F(rng.choice([-1, 1]) * rng.randint(1, 7), rng.randint(1, 7))
            if dilation(lam, bch(x, y, alg), alg) != bch(dilation(lam, x, alg), dilation(lam, y, alg), alg):
                bad.append(f"{name}: dilation")
                break
    record(7, "BCH associativity and dilation homomorphism, exact", not bad, "; ".join(bad) or "100 triples + 100 pairs per algebra")


def test_criterion_08_john():
    polytopes = {
        "square": NormSpec.from_facets([[1, 0], [0, 1]]),
        "l1": NormSpec.from_facets([[1, 1], [1, -1]]),
        "rectangle": NormSpec.from_facets([[1, 0], [0, F(1, 2)]]),
        "hexagon": NormSpec.from_facets([[1, 0], [0, 1], [1, 1]]),
        "cube": NormSpec.from_facets([[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
    }
    bad = []
    worst = 0.0
    for name, norm in polytopes.items():
        t = time.perf_counter()
        e = inner_john(norm, 1e-9)
        gram = np.linalg.inv(e.Q)
        residual = max(equivariance_residual(norm, e.Q, s) for s in facet_symmetries(norm))
        elapsed = time.perf_counter() - t
        worst = max(worst, residual)
        if residual > 1e-8 or elapsed >= 1.0:
            bad.append(f"{name}: residual {residual:.1e} time {elapsed:.3f}s")
        if name == "square" and np.max(np.abs(gram - np.eye(2))) > 1e-8:
            bad.append("square Gram != I")
        if name == "l1" and np.max(np.abs(gram - 2 * np.eye(2))) > 1e-8:
            bad.append("l1 Gram != 2I")
    record(8, "John ellipsoids: square -> I, l1 -> 2I, equivariant", not bad, "; ".join(bad) or f"max residual {worst:.1e}")


def test_criterion_09_free_3_3_stress():
    cold_caches()
    t = time.perf_counter()
    alg = free_nilpotent(3, 3)
    ok = validate(alg) == []
    d0 = strata_derivations(alg)
    g0 = isometric_part(alg, identity_gram(alg))
    tower = prolong(alg, g0)
    elapsed = time.perf_counter() - t
    ok = ok and alg.dim == 14 and tower.terminated_at is not None and elapsed < 60.0
    record(9, "free_nilpotent(3,3) validate + Der0 + g0 + prolongation", ok, f"dim {alg.dim}, Der0={len(d0)}, g0={len(g0)}, {elapsed:.2f}s")


def test_criterion_10_negative_controls():
    proc = subprocess.run(
        [sys.executable, "-m", "carnotlie", str(DATA / "broken_jacobi.alg")],
        capture_output=True,
        text=True,
    )
    cli_ok = proc.returncode == 1 and "Jacobi fails" in proc.stderr
    try:
        automorphism_to_map([[1, 0, 0], [0, 1, 0], [0, 0, -1]], heisenberg())
        pair = None
    except NotAutomorphismError as exc:
        pair = exc.pair
    record(10, "negative controls rejected", cli_ok and pair == ("X", "Y"), f"cli exit {proc.returncode}, violating pair {pair}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
