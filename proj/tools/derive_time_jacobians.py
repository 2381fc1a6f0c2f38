#!/usr/bin/env python3
"""Derive the Jacobians of the time derivatives of the flux, [d^m Phi/dt^m]'(y),
for the shipped nonlinear benchmark problems and emit them as C++.

Along the exact flow d^m Phi/dt^m is a function G_{m+1}(y) of the state alone:
    G_1 = Phi,  G_{m+1} = G_m'(y) Phi(y).
The rec strategy multiplies G_m'(y) by y^(1); the analytic Direct Newton
Jacobian uses G_k' = d y^(k) / d y.

Usage: python3 tools/derive_time_jacobians.py > src/generated/time_jacobians.inc
"""
import sympy as sp

y1, y2, e = sp.symbols("y1 y2 e", real=True)
Y = sp.Matrix([y1, y2])

PROBLEMS = {
    "pr": sp.Matrix([-y2, y1 + e * (sp.sin(y1) - y2)]),
    "kaps": sp.Matrix([-(2 + e) * y1 + e * y2**2, y1 - y2 - y2**2]),
    "vdp": sp.Matrix([y2, e * ((1 - y1**2) * y2 - y1)]),
}

MAX_ORDER = 3  # m = 1..3; m = 0 is the flux Jacobian itself


def emit(name, phi):
    g = phi
    out = []
    for m in range(1, MAX_ORDER + 1):
        g = g.jacobian(Y) * phi
        g = sp.simplify(g)
        jac = g.jacobian(Y)
        subs, (red,) = sp.cse([jac], optimizations="basic")
        out.append(f"// [d^{m} Phi/dt^{m}]' for the '{name}' flux, e = 1/epsilon.")
        out.append(f"inline Matrix {name}_time_jacobian_{m}(const Vector& y, double e) {{")
        out.append("  const double y1 = y(0);")
        out.append("  const double y2 = y(1);")
        for sym, expr in subs:
            out.append(f"  const double {sym} = {sp.cxxcode(expr, standard='c++17')};")
        out.append("  Matrix j(2, 2);")
        for r in range(2):
            for c in range(2):
                out.append(f"  j({r}, {c}) = {sp.cxxcode(red[r, c], standard='c++17')};")
        out.append("  return j;")
        out.append("}")
        out.append("")
    return "\n".join(out)


def main():
    print("// Generated by tools/derive_time_jacobians.py. Do not edit by hand.")
    print("// NOLINTBEGIN")
    print()
    for name, phi in PROBLEMS.items():
        print(emit(name, phi))
    print("// NOLINTEND")


if __name__ == "__main__":
    main()
