"""Analytic oracle for the built-in scenario catalog.

Recomputes every [expected] table from first principles and compares it with
the scenario files:

* critical points from closed forms (spheres) or Newton on an angle
  parametrization (tori), never from the implicit equations the library uses;
* Riemannian Hessians as eigenvalues of G^-1 H in parameter coordinates, or
  via the Lagrange formula for spheres;
* orbit edges by integrating the gradient flow restricted to the
  flow-invariant coordinate circles through each critical point;
* sectional curvature through the Gauss equation on the implicit
  constraints read from the file (second fundamental forms of the
  orthonormalized constraint normals), at random points.

Usage: catalog_oracle.py <scenario dir>
"""

import configparser
import itertools
import math
import sys
from pathlib import Path

import numpy as np
import sympy as sp

TOL_VALUE = 1e-10
TOL_EIG = 1e-8


def read_scenario(path):
    cp = configparser.ConfigParser(comment_prefixes=("#", ";"), inline_comment_prefixes=(" #",))
    cp.optionxform = str
    cp.read_string(path.read_text())
    return cp


def sympy_expr(text, xs):
    local = {f"x{i + 1}": x for i, x in enumerate(xs)}
    local.update(sin=sp.sin, cos=sp.cos, exp=sp.exp, sqrt=sp.sqrt)
    return sp.sympify(text.replace("^", "**"), locals=local)


def parse_edges(text):
    return sorted(tuple(int(v) for v in tok.split(">")) for tok in text.split())


class Parametrized:
    """Surface embedding X(a, b), function f = expr(X)."""

    def __init__(self, embedding, f_of_x, period=(2 * math.pi, 2 * math.pi)):
        a, b = sp.symbols("a b", real=True)
        self.a, self.b = a, b
        self.X = sp.Matrix(embedding(a, b))
        xs = sp.symbols(f"x1:{len(self.X) + 1}", real=True)
        self.f = sp.simplify(f_of_x(xs).subs(dict(zip(xs, self.X))))
        q = (a, b)
        J = self.X.jacobian(q)
        self.G = sp.simplify(J.T * J)
        self.grad = sp.Matrix([sp.diff(self.f, v) for v in q])
        self.H = sp.hessian(self.f, q)
        self.period = period
        lam = lambda m: sp.lambdify(q, m, "numpy")
        self.fn, self.Xn, self.Gn = lam(self.f), lam(self.X), lam(self.G)
        self.gradn, self.Hn = lam(self.grad), lam(self.H)

    def critical_points(self, grid=24):
        found = []
        for i, j in itertools.product(range(grid), repeat=2):
            q = np.array([(i + 0.5) * self.period[0] / grid, (j + 0.5) * self.period[1] / grid])
            for _ in range(100):
                g = np.array(self.gradn(*q), dtype=float).ravel()
                H = np.array(self.Hn(*q), dtype=float)
                try:
                    step = np.linalg.solve(H, g)
                except np.linalg.LinAlgError:
                    break
                q = q - step
                if np.linalg.norm(step) < 1e-14:
                    break
            g = np.array(self.gradn(*q), dtype=float).ravel()
            if np.linalg.norm(g) > 1e-12:
                continue
            q = np.mod(q, self.period)
            x = np.array(self.Xn(*q), dtype=float).ravel()
            if all(np.linalg.norm(x - p["x"]) > 1e-6 for p in found):
                G = np.array(self.Gn(*q), dtype=float)
                H = np.array(self.Hn(*q), dtype=float)
                eig = np.sort(np.linalg.eigvals(np.linalg.solve(G, H)).real)
                found.append({"q": q, "x": x, "value": float(self.fn(*q)), "eig": eig})
        found.sort(key=lambda p: p["value"])
        return found

    def edges(self, crits, eps=1e-3, t_max=80.0, dt=2e-2):
        """Flow along the coordinate circles through each critical point.

        The Hessian must be diagonal in (a, b) there, so each coordinate
        circle carries an eigendirection; the circles are fixed-point sets
        of reflection symmetries and hence flow-invariant.
        """
        edges = set()
        for k, p in enumerate(crits):
            H = np.array(self.Hn(*p["q"]), dtype=float)
            assert abs(H[0, 1]) < 1e-12, "Hessian is not diagonal in the parameters"
            for axis in (0, 1):
                if H[axis, axis] >= 0:
                    continue
                for sign in (1, -1):
                    q = p["q"].copy()
                    q[axis] += sign * eps
                    q = self._flow_axis(q, axis, t_max, dt)
                    x = np.array(self.Xn(*q), dtype=float).ravel()
                    target = min(range(len(crits)), key=lambda i: np.linalg.norm(crits[i]["x"] - x))
                    assert np.linalg.norm(crits[target]["x"] - x) < 1e-6, "restricted flow did not settle"
                    edges.add((k, target))
        return sorted(edges)

    def _flow_axis(self, q, axis, t_max, dt):
        def rhs(q):
            G = np.array(self.Gn(*q), dtype=float)
            g = np.array(self.gradn(*q), dtype=float).ravel()
            v = -np.linalg.solve(G, g)
            out = np.zeros(2)
            out[axis] = v[axis]
            return out

        t = 0.0
        while t < t_max:
            k1 = rhs(q)
            k2 = rhs(q + 0.5 * dt * k1)
            k3 = rhs(q + 0.5 * dt * k2)
            k4 = rhs(q + dt * k3)
            q = q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
        return q


def sphere_oracle(dim_ambient, f_text):
    """Linear f = a.x on the unit sphere: critical points -a/|a| and a/|a|."""
    xs = sp.symbols(f"x1:{dim_ambient + 1}", real=True)
    f = sympy_expr(f_text, xs)
    grad = sp.Matrix([sp.diff(f, x) for x in xs])
    a = np.array([float(g) for g in grad])
    assert all(sp.diff(g, x) == 0 for g in grad for x in xs), "sphere oracle needs a linear f"
    u = a / np.linalg.norm(a)
    crits = []
    for x in (-u, u):
        # Riemannian Hessian: Hess f - lambda Hess F restricted to T_x, with
        # F = |x|^2 - 1, lambda = (grad f . x) / 2, Hess F = 2 I.
        lam = a.dot(x) / 2
        basis = np.linalg.svd(x.reshape(1, -1))[2][1:].T
        W = -lam * 2 * np.eye(dim_ambient)
        eig = np.sort(np.linalg.eigvalsh(basis.T @ W @ basis))
        crits.append({"x": x, "value": float(a.dot(x)), "eig": eig})
    return crits, [(1, 0)]


def gauss_curvature_samples(constraints, xs, points, rng):
    """Sectional curvature of random tangent planes from the Gauss equation."""
    grads = [sp.lambdify(xs, sp.Matrix([sp.diff(F, x) for x in xs]), "numpy") for F in constraints]
    hess = [sp.lambdify(xs, sp.hessian(F, xs), "numpy") for F in constraints]
    out = []
    for x in points:
        J = np.array([np.array(g(*x), dtype=float).ravel() for g in grads])
        Q, _ = np.linalg.qr(J.T)  # orthonormal normals
        N = Q[:, : len(constraints)]
        T = np.linalg.svd(J)[2][len(constraints):].T
        c = rng.standard_normal((T.shape[1], 2))
        u = T @ c[:, 0]
        u /= np.linalg.norm(u)
        v = T @ c[:, 1]
        v -= v.dot(u) * u
        v /= np.linalg.norm(v)
        # grad F_a = sum_k (J N)_ak N_k and <Hess F_a u, v> = -<grad F_a, D_u v>,
        # so II_k(u, v) = -((J N)^-1 raw)_k; the sign cancels in K.
        M = np.linalg.inv(J @ N)
        Hs = [np.array(h(*x), dtype=float) for h in hess]
        def II(w, z):
            raw = np.array([w @ H @ z for H in Hs])
            return M @ raw
        K = II(u, u).dot(II(v, v)) - II(u, v).dot(II(u, v))
        out.append(K)
    return np.array(out)


def catalog_points(param, count, rng):
    qs = rng.uniform(0, 2 * math.pi, size=(count, 2))
    return [np.array(param.Xn(*q), dtype=float).ravel() for q in qs]


def check(name, cp, crits, edges, curvature_points, constraints, xs, failures):
    exp = cp["expected"]
    values = [float(v) for v in exp["critical_values"].split()]
    indices = [int(v) for v in exp["indices"].split()]
    got_values = [p["value"] for p in crits]
    got_indices = [int((p["eig"] < 0).sum()) for p in crits]

    def fail(msg):
        failures.append(f"{name}: {msg}")

    if len(values) != len(crits):
        fail(f"{len(crits)} critical points, file lists {len(values)}")
        return
    for v, g in zip(values, got_values):
        if abs(v - g) > TOL_VALUE * max(1, abs(g)):
            fail(f"critical value {g!r} vs file {v!r}")
    if got_indices != indices:
        fail(f"indices {got_indices} vs file {indices}")
    chi = sum((-1) ** i for i in got_indices)
    if int(exp["euler_characteristic"]) != chi:
        fail(f"euler characteristic {chi} vs file {exp['euler_characteristic']}")
    if "lambda_min" in exp:
        lam_file = [float(v) for v in exp["lambda_min"].split()]
        lam = [float(p["eig"][0]) for p in crits if (p["eig"] >= 0).all()]
        if len(lam) != len(lam_file) or any(abs(a - b) > TOL_EIG for a, b in zip(lam, lam_file)):
            fail(f"lambda_min {lam} vs file {lam_file}")
    if "edges" in exp and edges is not None and parse_edges(exp["edges"]) != edges:
        fail(f"edges {edges} vs file {parse_edges(exp['edges'])}")

    # The file's constraints must vanish on the oracle's critical points.
    Fs = [sp.lambdify(xs, F, "numpy") for F in constraints]
    for p in crits:
        r = max(abs(float(F(*p["x"]))) for F in Fs)
        if r > 1e-12:
            fail(f"critical point {p['x']} is off the file's manifold (|F| = {r:g})")

    K = gauss_curvature_samples(constraints, xs, curvature_points, np.random.default_rng(1))
    curvature = exp.get("curvature", "unspecified")
    if curvature == "flat" and np.max(np.abs(K)) > 1e-10:
        fail(f"declared flat, sectional curvature up to {np.max(np.abs(K)):g}")
    if curvature == "constant-positive":
        k_file = float(exp["sectional_curvature"])
        if np.max(np.abs(K - k_file)) > 1e-10:
            fail(f"sectional curvature in [{K.min():g}, {K.max():g}] vs file {k_file}")


def main():
    directory = Path(sys.argv[1])
    failures = []
    rng = np.random.default_rng(0)
    oracles = 0
    for path in sorted(directory.glob("*.scn")):
        cp = read_scenario(path)
        name = cp["scenario"]["name"]
        n = int(cp["manifold"]["ambient_dim"])
        xs = sp.symbols(f"x1:{n + 1}", real=True)
        constraints = [sympy_expr(cp["manifold"][f"constraint.{k}"], xs)
                       for k in range(1, 1 + sum(1 for key in cp["manifold"] if key.startswith("constraint.")))]
        f_text = cp["function"]["f"]
        f_sym = sympy_expr(f_text, xs)

        if len(constraints) == 1 and sp.expand(constraints[0] - sum(x**2 for x in xs) + 1) == 0:
            crits, edges = sphere_oracle(n, f_text)
            pts = []
            for _ in range(20):
                v = rng.standard_normal(n)
                pts.append(v / np.linalg.norm(v))
        elif name == "torus_upright":
            R, r = 2, 1
            param = Parametrized(lambda a, b: [(R + r * sp.cos(b)) * sp.cos(a), (R + r * sp.cos(b)) * sp.sin(a),
                                               r * sp.sin(b)],
                                 lambda x: f_sym.subs(dict(zip(xs, x))))
            crits = param.critical_points()
            edges = param.edges(crits)
            pts = catalog_points(param, 20, rng)
        elif name == "clifford":
            s = 1 / sp.sqrt(2)
            param = Parametrized(lambda a, b: [s * sp.cos(a), s * sp.sin(a), s * sp.cos(b), s * sp.sin(b)],
                                 lambda x: f_sym.subs(dict(zip(xs, x))))
            crits = param.critical_points()
            edges = param.edges(crits)
            pts = catalog_points(param, 20, rng)
        else:
            failures.append(f"{name}: no oracle")
            continue
        check(name, cp, crits, edges, pts, constraints, xs, failures)
        oracles += 1
        print(f"{name}: {len(crits)} critical points, values {[round(p['value'], 12) for p in crits]}, "
              f"edges {edges}")

    if failures:
        print("\n".join("FAIL " + f for f in failures))
        return 1
    print(f"catalog oracle: {oracles} scenarios reproduced")
    return 0


if __name__ == "__main__":
    sys.exit(main())
