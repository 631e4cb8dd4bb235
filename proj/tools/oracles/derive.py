#!/usr/bin/env python3
"""Reference values for the unit tests, computed without the C++ code.

Writes tests/derived.hpp. Everything here is re-derived from the model
equations with numpy/scipy: the 64-bit Mersenne Twister, a hand-built 4-bus
toy grid, one Euler step, the linearized model terms, a two-step window stack,
one filter step and a small weighted l1 program.

    python3 tools/oracles/derive.py            # rewrite the header
    python3 tools/oracles/derive.py --check    # fail if the header is stale
"""
import argparse
import math
import pathlib
import sys

import numpy as np
from scipy.optimize import linprog

ROOT = pathlib.Path(__file__).resolve().parents[2]
OUT = ROOT / "tests" / "derived.hpp"

DELTA = 1.0 / 60.0
OMEGA0 = 2.0 * math.pi * 60.0


class MT64:
    """mt19937_64 as specified in the C++ standard library."""

    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & 0xFFFFFFFFFFFFFFFF
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & 0xFFFFFFFFFFFFFFFF
        self.idx = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.idx = 0

    def __call__(self):
        if self.idx >= 312:
            self._twist()
        y = self.mt[self.idx]
        self.idx += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & 0xFFFFFFFFFFFFFFFF

    def uniform(self, lo=0.0, hi=1.0):
        return lo + (hi - lo) * ((self() >> 11) * 2.0**-53)


def feeder_loads():
    rng = MT64(7)
    return [rng.uniform(0.0, 0.5) for _ in range(33)]


def sg_coefficients(M=10.0, D=2.0, R=9.5, tau=5.0, p_set=0.25):
    return {
        "alpha": (M - DELTA * D) / M,
        "beta": DELTA * D * OMEGA0 / M,
        "eta": DELTA / M,
        "nu": R * DELTA / tau,
        "kappa": 1.0 - DELTA / tau,
        "zeta": DELTA * (p_set + R * OMEGA0) / tau,
    }


# Toy grid: 1 generator bus, 2 inverter buses, 1 load bus, lines 1-2, 2-3, 2-4
# (x = 0.5), fictitious links of reactance 0.1 to internal buses 5, 6, 7.
TOY_PD = [0.1, 0.2, 0.15, 0.3]
TOY_PSET = sum(TOY_PD) / 3.0
TOY_EDGES = [(1, 2, 2.0), (2, 3, 2.0), (2, 4, 2.0), (1, 5, 10.0), (2, 6, 10.0), (3, 7, 10.0)]
TOY_D = {1: 2.0, 2: 0.7, 3: 0.7, 4: 0.1, 5: 2.0, 6: 0.7, 7: 0.7}
M, R, TAU = 10.0, 9.5, 5.0
# state: th1 th2 th3 th4 th5 w5 pm5 th6 th7 ; measurements drop pm5
S_TH = {1: 0, 2: 1, 3: 2, 4: 3, 5: 4, 6: 7, 7: 8}
Y_TH = {1: 0, 2: 1, 3: 2, 4: 3, 5: 4, 6: 6, 7: 7}
S_W, S_PM, Y_W = 5, 6, 5
NX, NY, NE = 9, 8, 2 * len(TOY_EDGES)


def toy_state():
    x = np.zeros(NX)
    th = {1: 0.01, 2: -0.02, 3: 0.03, 4: -0.01, 5: 0.05, 6: 0.04, 7: 0.02}
    for b, v in th.items():
        x[S_TH[b]] = v
    x[S_W] = OMEGA0 + 0.1
    x[S_PM] = 0.3
    return x


def neighbours(b):
    for i, j, y in TOY_EDGES:
        if i == b:
            yield j, y
        elif j == b:
            yield i, y


def toy_step(x, speed_err):
    th = {b: x[S_TH[b]] for b in S_TH}
    flow = {b: sum(y * math.sin(th[b] - th[j]) for j, y in neighbours(b)) for b in th}
    n = x.copy()
    w, pm = x[S_W], x[S_PM]
    n[S_TH[5]] = th[5] + DELTA * (w - OMEGA0)
    n[S_W] = w + DELTA / M * (pm - TOY_D[5] * (w - OMEGA0) - flow[5])
    n[S_PM] = pm + DELTA / TAU * (TOY_PSET - pm - R * (w + speed_err - OMEGA0))
    for b in (6, 7):
        n[S_TH[b]] = th[b] + DELTA / TOY_D[b] * (TOY_PSET - flow[b])
    for b in (1, 2, 3, 4):
        n[S_TH[b]] = th[b] + DELTA / TOY_D[b] * (-TOY_PD[b - 1] - flow[b])
    return n


def toy_measure(x, e):
    y = np.zeros(NY)
    for b in S_TH:
        y[Y_TH[b]] = x[S_TH[b]]
    y[Y_W] = x[S_W]
    return y + e


def toy_matrices():
    A = np.eye(NX)
    A[S_TH[5], S_W] = DELTA
    A[S_W, S_W] = (M - DELTA * TOY_D[5]) / M
    A[S_W, S_PM] = DELTA / M
    A[S_PM, S_W] = -R * DELTA / TAU
    A[S_PM, S_PM] = 1.0 - DELTA / TAU
    B = np.zeros((NX, NY))
    B[S_PM, Y_W] = R * DELTA / TAU
    C = np.zeros((NY, NX))
    for b in S_TH:
        C[Y_TH[b], S_TH[b]] = 1.0
    C[Y_W, S_W] = 1.0
    return A, B, C


def coupling_row(b):
    return S_W if b == 5 else S_TH[b]


def coupling_scale(b):
    return DELTA / M if b == 5 else DELTA / TOY_D[b]


def toy_u(y):
    u = np.zeros(NX)
    th = {b: y[Y_TH[b]] for b in Y_TH}
    for b in th:
        s = -coupling_scale(b) * sum(yy * math.sin(th[b] - th[j]) for j, yy in neighbours(b))
        if b == 5:
            u[S_TH[5]] = -DELTA * OMEGA0
            u[S_W] = DELTA * TOY_D[5] * OMEGA0 / M + s
            u[S_PM] = DELTA * (TOY_PSET + R * OMEGA0) / TAU
        elif b in (6, 7):
            u[S_TH[b]] = DELTA * TOY_PSET / TOY_D[b] + s
        else:
            u[S_TH[b]] = -DELTA * TOY_PD[b - 1] / TOY_D[b] + s
    return u


def toy_h(y):
    # true coupling minus measured coupling = -H eps, eps = (1 - cos, sin) of
    # the angle-error difference (lower id) - (higher id)
    H = np.zeros((NX, NE))
    for e, (i, j, yy) in enumerate(TOY_EDGES):
        a = y[Y_TH[i]] - y[Y_TH[j]]
        gi, gj = -coupling_scale(i) * yy, -coupling_scale(j) * yy
        H[coupling_row(i), 2 * e] += gi * math.sin(a)
        H[coupling_row(i), 2 * e + 1] += gi * math.cos(a)
        H[coupling_row(j), 2 * e] += gj * math.sin(-a)
        H[coupling_row(j), 2 * e + 1] -= gj * math.cos(-a)
    return H


def toy_eps(e):
    out = np.zeros(NE)
    for k, (i, j, _) in enumerate(TOY_EDGES):
        d = e[Y_TH[i]] - e[Y_TH[j]]
        out[2 * k], out[2 * k + 1] = 1.0 - math.cos(d), math.sin(d)
    return out


def kf_step(x, P, A, C, drive, y, q, r):
    xp = A @ x + drive
    Pp = A @ P @ A.T + q * np.eye(len(x))
    S = C @ Pp @ C.T + r * np.eye(C.shape[0])
    K = Pp @ C.T @ np.linalg.inv(S)
    xn = xp + K @ (y - C @ xp)
    Pn = (np.eye(len(x)) - K @ C) @ Pp
    return xn, Pn


def weighted_l1():
    A = np.array([[1.0, 2.0, 0.0, -1.0, 0.5], [0.0, 1.0, 3.0, 1.0, -1.0], [2.0, 0.0, 1.0, 0.0, 1.0]])
    b = np.array([1.0, -2.0, 0.5])
    w = np.array([1.0, 2.0, 1.0, 0.5, 3.0])
    n = A.shape[1]
    r = linprog(np.concatenate([w, w]), A_eq=np.hstack([A, -A]), b_eq=b, bounds=(0, None), method="highs")
    assert r.status == 0
    return A, b, w, r.x[:n] - r.x[n:], r.fun


def collect():
    vals = {}
    loads = feeder_loads()
    vals["feeder_load_first"] = loads[:3]
    vals["feeder_load_total"] = [sum(loads)]
    vals["feeder_unit_setpoint"] = [sum(loads) / 28.0]

    c = sg_coefficients()
    vals["sg_coefficients"] = [c[k] for k in ("alpha", "beta", "eta", "nu", "kappa", "zeta")]

    g, b = -0.1 / 0.05, 0.2 / 0.05
    vals["lossy_edge"] = [g, b, math.hypot(g, b), math.atan2(g, b)]

    x0 = toy_state()
    e0 = np.zeros(NY)
    e0[Y_W] = 0.2
    x1 = toy_step(x0, 0.2)
    vals["toy_x0"] = list(x0)
    vals["toy_step"] = list(x1)

    A, B, C = toy_matrices()
    y0 = toy_measure(x0, np.zeros(NY))
    u0 = toy_u(y0)
    vals["toy_u"] = list(u0)
    # with clean angles the linear model reproduces the plant step; the speed
    # reading error enters through -B e
    lin = A @ x0 + u0 - B @ e0
    assert np.max(np.abs(lin - x1)) < 1e-12, "linear model disagrees with the plant step"

    # two-step window with an angle attack on bus 2 at k=0 and bus 6 at k=1
    e_a = np.zeros(NY)
    e_a[Y_TH[2]] = 0.3
    e_b = np.zeros(NY)
    e_b[Y_TH[6]] = -0.2
    ya = toy_measure(x0, e_a)
    x1a = toy_step(x0, 0.0)
    yb = toy_measure(x1a, e_b)
    Ua, Ha = toy_u(ya), toy_h(ya)
    eps_a = toy_eps(e_a)
    assert np.max(np.abs(A @ x0 + Ua - B @ e_a - Ha @ eps_a - x1a)) < 1e-12, "trig expansion does not close"
    vals["toy_h_row_norms"] = list(np.linalg.norm(Ha, axis=1))
    vals["toy_eps"] = list(eps_a)
    ybar = np.concatenate([ya, yb - C @ Ua])
    vals["toy_ybar"] = list(ybar)

    P0 = 1e-2 * np.eye(NX)
    xk = x0 + 0.01
    xn, Pn = kf_step(xk, P0, A, C, u0, y0, 1e-6, 1e-4)
    vals["kf_post_x"] = list(xn)
    vals["kf_post_trace"] = [float(np.trace(Pn))]

    _, _, _, xl1, fl1 = weighted_l1()
    vals["wl1_x"] = list(xl1)
    vals["wl1_obj"] = [fl1]
    return vals


def render(vals):
    lines = [
        "// Generated by tools/oracles/derive.py. Do not edit by hand.",
        "#pragma once",
        "",
        "#include <array>",
        "",
        "namespace derived {",
        "",
    ]
    for k, v in vals.items():
        body = ", ".join(repr(float(x)) for x in v)
        lines.append(f"inline constexpr std::array<double, {len(v)}> {k}{{{body}}};")
    lines += ["", "}  // namespace derived", ""]
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="compare with the checked-in header instead of writing it")
    args = ap.parse_args()
    text = render(collect())
    if args.check:
        if not OUT.exists() or OUT.read_text() != text:
            print(f"{OUT} is stale", file=sys.stderr)
            return 1
        print("derived values up to date")
        return 0
    OUT.write_text(text)
    print(f"wrote {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
