"""Independent reference values for the single-diode tests.

Evaluates the translation formulas and the implicit I-V equation with mpmath
at 40 digits using plain bisection. Nothing here shares code with the C++
solvers; the printed numbers are frozen into tests/unit/test_core_sdm.cpp.
"""
import mpmath as mp

mp.mp.dps = 40

K = mp.mpf("1.380649e-23")
Q = mp.mpf("1.602176634e-19")
K_EV = K / Q
EG_REF = mp.mpf("1.121")
DEG = mp.mpf("0.0002677")
T_REF = mp.mpf("298.15")

# Reference c-Si module used throughout the tests (72 cells).
REF = dict(i_ph=mp.mpf("9.5"), i_0=mp.mpf("3e-10"), r_s=mp.mpf("0.35"),
           r_sh=mp.mpf("450"), n=mp.mpf("1.0"))
NS = 72


def translate(p, g, t_c, alpha=0):
    t = mp.mpf(t_c) + mp.mpf("273.15")
    eg = EG_REF * (1 - DEG * (t - T_REF))
    i0 = p["i_0"] * (t / T_REF) ** 3 * mp.exp(EG_REF / (K_EV * T_REF) - eg / (K_EV * t))
    ratio = mp.mpf(g) / 1000
    return dict(i_ph=ratio * (p["i_ph"] + alpha * (t - T_REF)), i_0=i0, r_s=p["r_s"],
                r_sh=p["r_sh"] / ratio, a=p["n"] * NS * K * t / Q)


def residual(v, i, op):
    vd = v + i * op["r_s"]
    return op["i_ph"] - op["i_0"] * (mp.exp(vd / op["a"]) - 1) - vd / op["r_sh"] - i


def bisect(f, lo, hi, tol=mp.mpf("1e-30")):
    flo = f(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def current(v, op):
    return bisect(lambda i: residual(v, i, op), -op["i_ph"] * 2, op["i_ph"] * 2)


def voltage(i, op):
    return bisect(lambda v: residual(v, i, op), mp.mpf(0), mp.mpf(200))


def mpp(op):
    voc = voltage(0, op)
    # golden-free: maximize via bisection on dP/dV computed by central difference
    def dp(v):
        h = mp.mpf("1e-15")
        return (v + h) * current(v + h, op) - (v - h) * current(v - h, op)
    vm = bisect(dp, mp.mpf("1e-3"), voc - mp.mpf("1e-3"), tol=mp.mpf("1e-20"))
    return vm, current(vm, op)


if __name__ == "__main__":
    op50 = translate(REF, 1000, 50)
    print("i_0 at 50 C:", mp.nstr(op50["i_0"], 17))
    stc = translate(REF, 1000, 25)
    print("i(30 V) at STC:", mp.nstr(current(30, stc), 17))
    isc = current(0, stc)
    print("Isc at STC:", mp.nstr(isc, 17))
    print("Voc at STC:", mp.nstr(voltage(0, stc), 17))
    print("v(0.5 Isc) at STC:", mp.nstr(voltage(isc / 2, stc), 17))
    vm, im = mpp(stc)
    print("MPP at STC: v=", mp.nstr(vm, 17), "i=", mp.nstr(im, 17), "p=", mp.nstr(vm * im, 17))
    # array: 12 modules/string, 8 strings
    print("array MPP at STC: v_dc=", mp.nstr(12 * vm, 17), "i_dc=", mp.nstr(8 * im, 17))
