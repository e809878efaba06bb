"""Scratch probe: settle remaining design choices before cli/acceptance work.

A. Step-1' on all 6 cases x 9 states: Laurent, multiplicity-free, term count
   matches the pair/singleton prediction from the frozen tables.
B. All 78 columns: table alpha == ce(S1, D:1, e0), alpha' == ce(S2, D:2, e0).
C. Canonical term sort reproduces the frozen column order per state.
D. Backward-recursion integrality: four alpha_r in Z + closed forms on random
   flipped-balanced vectors; quiver-row sanity.
E. Cut-quadrilateral state-sum at the quantum level, cases 3..6 sample states.
F. Pentagon cut-then-flip vs flip-then-cut commuting square.
"""
import random
import sys
import time

sys.path.insert(0, "src")
sys.path.insert(0, "tests")

from qsurf.coeff import OmegaPoly
from qsurf.qtorus import (
    ExponentVector, LaurentPoly, WeylMonomial, commutation_exponent,
    poly_add, poly_mul, is_multiplicity_free,
)
from qsurf.quiver import mutate_sequence, seeds_equal
from qsurf.surface import (
    build_triangulation, build_3triangulation_quiver, flip, cut, cutting_map,
)
from qsurf.balance import random_balanced_vector, transform_exponents
from qsurf.mutation import (
    nu_omega, normalize, is_laurent, theta_flip, relabel_poly,
    QuantumRational,
)
from qsurf.trace import edge_trace, single_triangle_trace, parse_web, WebPath, WebStep, StatePair

from test_trace import CASE_TEXTS, CASE_STEPS, GOLDEN, MERGE_PAIRS
from fixture_surfaces import QUAD_TEXT, QUAD_NODES

T = build_triangulation(QUAD_TEXT)
seed0, L = build_3triangulation_quiver(T)
S1 = mutate_sequence(seed0, ["D:1"])
S2 = mutate_sequence(S1, ["D:2"])
NODE_OF = dict(QUAD_NODES)            # alias -> node name
ALIAS_OF = {n: j for j, n in NODE_OF.items()}

def alias_vec(d):
    return ExponentVector({NODE_OF[j]: z for j, z in d.items()})

def step1prime(tr):
    y = nu_omega(S1, "D:1", tr)
    z = nu_omega(S2, "D:2", y)
    return is_laurent(S2, normalize(S2, z))

# ---------------------------------------------------------------- A + B + C
print("== A/B/C: step-1' counts, alpha wiring, column order ==")
t0 = time.time()
ok = True
for case in sorted(CASE_TEXTS):
    _, path = parse_web(T, CASE_TEXTS[case])
    pairs = {}  # state -> list of (ia, ib) 1-based
    for st, ia, ib, _node in MERGE_PAIRS.get(case, []):
        pairs.setdefault(st, []).append((ia, ib))
    for st, cols in sorted(GOLDEN[case].items()):
        tr = edge_trace(T, L, path, StatePair(*st))
        # B: per-column alpha wiring
        for d, a, ap in cols:
            e0 = alias_vec(d)
            ce_a = commutation_exponent(S1, "D:1", e0)
            ce_ap = commutation_exponent(S2, "D:2", e0)
            if not (ce_a.is_integer and ce_ap.is_integer
                    and ce_a.as_int() == a and ce_ap.as_int() == ap):
                ok = False
                print(f"  case {case} {st}: alpha wiring FAIL {d} "
                      f"({ce_a},{ce_ap}) want ({a},{ap})")
        # C: canonical sort order == frozen order
        def key(col):
            d = col[0]
            return tuple(-d.get(j, 0) for j in range(1, 13))
        if sorted(cols, key=key) != cols:
            ok = False
            print(f"  case {case} {st}: column order FAIL")
        # A: counts
        grouped = set()
        npred = 0
        for ia, ib in pairs.get(st, []):
            a = cols[ia - 1][1]
            ap = cols[ia - 1][2]
            npred += 2 ** (a + ap + 1)
            grouped |= {ia, ib}
            # paired columns share alpha/alpha'; exactly one of them is -1
            if (cols[ia - 1][1:] != cols[ib - 1][1:]
                    or sorted((a, ap))[0] != -1):
                ok = False
                print(f"  case {case} {st}: pair exponents FAIL")
        for i, col in enumerate(cols, start=1):
            if i not in grouped:
                a, ap = col[1], col[2]
                if a < 0 or ap < 0:
                    ok = False
                    print(f"  case {case} {st}: unpaired negative FAIL")
                npred += 2 ** (a + ap)
        lz = step1prime(tr)
        if lz is None:
            ok = False
            print(f"  case {case} {st}: NOT Laurent")
            continue
        nmono = all(len(c.terms) == 1 for c in lz.terms.values())
        if not (is_multiplicity_free(lz) and nmono):
            ok = False
            print(f"  case {case} {st}: not multiplicity-free")
        if len(lz.terms) != npred:
            ok = False
            print(f"  case {case} {st}: count {len(lz.terms)} != pred {npred}")
print(f"  A/B/C {'PASS' if ok else 'FAIL'}  ({time.time()-t0:.2f}s)")

# ---------------------------------------------------------------- D
print("== D: backward recursion integrality + closed forms ==")
flipped, ctx, iota = flip(T, "D")
inv = {w: v for v, w in iota.items()}
stage_nodes = list(ctx.mutation_nodes)
stages = [seed0]
for u in stage_nodes:
    stages.append(mutate_sequence(stages[-1], [u]))

# quiver-row sanity at the four stages (doubled eps)
def row(seed, u):
    return {ALIAS_OF[v]: seed.eps2(u, v) // 2 for v in seed.nodes
            if seed.eps2(u, v)}
exp_rows = {
    (0, "D:1"): {2: 1, 7: -1, 8: -1, 12: 1},
    (1, "D:2"): {5: -1, 12: -1, 7: 1, 11: 1},
    (2, "t7:t"): {1: 1, 4: 1, 3: -1, 6: -1},
    (3, "t12:t"): {3: 1, 10: 1, 4: -1, 9: -1},
}
okD = True
for (si, u), want in exp_rows.items():
    got = row(stages[si], u)
    if got != want:
        okD = False
        print(f"  eps row stage {si} at {u}: {got} want {want}")

rng = random.Random(20240817)
for trial in range(60):
    sample = random_balanced_vector(flipped, rng)
    a4 = ExponentVector({inv[n]: z for n, z in sample.items()})
    ap = {j: a4.z(NODE_OF[j]) for j in range(1, 13)}  # tripled a'_j
    chain = {4: a4}
    alphas = {}
    for r in (4, 3, 2, 1):
        pre = stages[r - 1]
        u = stage_nodes[r - 1]
        chain[r - 1] = transform_exponents(pre, u, chain[r])
        alphas[r] = commutation_exponent(pre, u, chain[r - 1])
    closed = {
        4: ap[3] + ap[10] - ap[4] - ap[9],
        3: ap[1] + ap[4] - ap[3] - ap[6],
        2: -ap[5] - ap[4] - ap[9] + ap[12] - ap[7] + ap[3] + ap[6] + ap[11],
        1: ap[2] + ap[4] + ap[9] - ap[12] + ap[7] - ap[3] - ap[6] - ap[8],
    }
    for r in (1, 2, 3, 4):
        if not alphas[r].is_integer or 3 * alphas[r].as_int() != closed[r]:
            okD = False
            print(f"  trial {trial} alpha_{r}: {alphas[r]} want {closed[r]}/3")
    want03 = -ap[7] + ap[6] + ap[8]
    if chain[0].z("D:1") != want03:
        okD = False
        print(f"  trial {trial} a0_3: {chain[0].z('D:1')} want {want03}")
print(f"  D {'PASS' if okD else 'FAIL'}")

# ---------------------------------------------------------------- E
print("== E: cut-quadrilateral state-sum (quantum) ==")
cut_T, g = cut(T, "D")
cmap = cutting_map(T, "D")
cut_seed, cut_L = build_3triangulation_quiver(cut_T)
okE = True
t0 = time.time()
for case in (3, 4, 5, 6):
    _, path = parse_web(T, CASE_TEXTS[case])
    steps = CASE_STEPS[case]
    for e1 in (1, 2, 3):
        for e2 in (1, 2, 3):
            lhs = cmap(edge_trace(T, L, path, StatePair(e1, e2)))
            rhs = LaurentPoly.zero()
            for m in (1, 2, 3):
                halves = []
                mids = (e1, m, e2)
                for i, (tri, ent, ext, turn) in enumerate(steps):
                    ent_c = ent + (".1" if ent == "D" else "")
                    ent_c = ent_c if ent != "D" else (
                        "D.1" if tri == "t7" else "D.2")
                    halves.append(single_triangle_trace(
                        cut_T, cut_L, tri, turn, StatePair(mids[i], mids[i + 1]),
                        entry=ent_c))
                rhs = poly_add(rhs, poly_mul(cut_seed, halves[0], halves[1]))
            if lhs != rhs:
                okE = False
                print(f"  case {case} ({e1},{e2}): state-sum FAIL")
print(f"  E {'PASS' if okE else 'FAIL'}  ({time.time()-t0:.2f}s)")

# ---------------------------------------------------------------- F
print("== F: pentagon cut/flip commuting square ==")
PENT_TEXT = """triangle u1 P Q G
triangle u2 G R H
triangle u3 H S Tt
boundary P Q R S Tt
"""
TP = build_triangulation(PENT_TEXT)
pent_seed, _ = build_3triangulation_quiver(TP)
TPf, ctxP, iotaP = flip(TP, "H")
TP_cut, gP = cut(TP, "G")
cut_seed0, _ = build_3triangulation_quiver(TP_cut)
TPf_cut, gPf = cut(TPf, "G")
TP_cut_f, ctxC, iotaC = flip(TP_cut, "H")
print(f"  flip-then-cut == cut-then-flip triangulation: "
      f"{TPf_cut.triangles == TP_cut_f.triangles and TPf_cut.boundary == TP_cut_f.boundary}")
print(f"  gluing maps equal: {gP == {k: v for k, v in gPf.items()}}")
print(f"  mutation nodes match: {ctxP.mutation_nodes == ctxC.mutation_nodes}")
iP = cutting_map(TP, "G")
iPf = cutting_map(TPf, "G")
from qsurf.mutation import NormalizationError

stagesP = [pent_seed]
stagesC = [cut_seed0]
for u in ctxP.mutation_nodes:
    stagesP.append(mutate_sequence(stagesP[-1], [u]))
    stagesC.append(mutate_sequence(stagesC[-1], [u]))

def cut_rat(x):
    return QuantumRational([(iP.apply_poly(num), denoms)
                            for num, denoms in x.terms])

def u_balanced_sample(seed, u, rng):
    z = {v: rng.randint(-4, 4) for v in seed.nodes if rng.random() < 0.7}
    e = ExponentVector(z)
    r0 = commutation_exponent(seed, u, e).tripled % 3
    if r0:
        for w in seed.nodes:
            s = seed.eps2(u, w) // 2
            if s in (1, -1):
                e = ExponentVector(dict(e.items()) | {w: e.z(w) - r0 * s})
                break
    assert commutation_exponent(seed, u, e).is_integer
    return e

rngF = random.Random(7)
okF = True
t0 = time.time()
# stage squares: i . nu = nu_cut . i  per mutation, arbitrary balanced input
for r in (4, 3, 2, 1):
    u = ctxP.mutation_nodes[r - 1]
    for trial in range(10):
        e = u_balanced_sample(stagesP[r], u, rngF)
        mono = LaurentPoly.monomial(e)
        lhs = cut_rat(nu_omega(stagesP[r - 1], u, mono))
        rhs = nu_omega(stagesC[r - 1], u, iP.apply_poly(mono))
        if normalize(stagesC[r - 1], lhs) != normalize(stagesC[r - 1], rhs):
            okF = False
            print(f"  stage {r} trial {trial}: stage square FAIL")
print(f"  stage squares {'PASS' if okF else 'FAIL'}  ({time.time()-t0:.2f}s)")

# composite square on balanced monomials whose image normalizes
t0 = time.time()
done = tried = 0
while done < 10 and tried < 400:
    tried += 1
    a = random_balanced_vector(TPf, rngF, integer_span=1)
    mono = LaurentPoly.monomial(a)
    try:
        lhs = cut_rat(theta_flip(TP, ctxP, mono))
        rhs = theta_flip(TP_cut, ctxC, iPf.apply_poly(mono))
        nl = normalize(cut_seed0, lhs)
        nr = normalize(cut_seed0, rhs)
    except NormalizationError:
        continue
    done += 1
    if nl != nr:
        okF = False
        print(f"  composite: square FAIL on {dict(a.items())}")
print(f"  composite {done}/{tried} normalizable, "
      f"{'PASS' if okF else 'FAIL'}  ({time.time()-t0:.2f}s)")
