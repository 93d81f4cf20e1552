"""Dense two-phase primal simplex with Bland's rule.

Sizes in this toolkit are a few dozen variables, so the solver keeps a full
tableau and favours transparency over speed. No presolve, no warm starts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IterationLimit

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
_SENSES = ("<=", "=", ">=")


@dataclass
class LpProblem:
    """``direction`` objective . x subject to ``a[i] . x  senses[i]  b[i]`` and per-variable bounds.

    ``bounds`` defaults to ``x >= 0``. Use ``-inf`` / ``inf`` for open sides.
    """

    objective: np.ndarray
    a: np.ndarray
    senses: list
    b: np.ndarray
    direction: str = "min"
    bounds: list = None
    names: list = field(default=None, repr=False)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        self.a = np.asarray(self.a, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.senses = list(self.senses)
        if self.a.shape[0] != self.b.size or len(self.senses) != self.b.size:
            raise ValueError("constraint matrix, senses and rhs disagree in length")
        if any(s not in _SENSES for s in self.senses):
            raise ValueError(f"senses must be among {_SENSES}")
        if not np.all(np.isfinite(self.b)):
            raise ValueError("rhs must be finite")
        if self.direction not in ("min", "max"):
            raise ValueError("direction must be 'min' or 'max'")
        if self.bounds is None:
            self.bounds = [(0.0, np.inf)] * n
        if len(self.bounds) != n:
            raise ValueError("one (lower, upper) pair per variable is required")
        self.bounds = [(float(lo), float(hi)) for lo, hi in self.bounds]

    @property
    def n_vars(self):
        return self.objective.size

    @property
    def n_constraints(self):
        return self.b.size


@dataclass
class LpSolution:
    status: str
    objective_value: float = float("nan")
    point: np.ndarray = None
    duals: np.ndarray = None
    iterations: int = 0


def to_lp_text(problem):
    """Render ``problem`` as a CPLEX-LP-style listing."""
    names = problem.names or [f"x{j}" for j in range(problem.n_vars)]

    def expr(coefs):
        terms = [f"{'-' if c < 0 else '+'} {abs(c):.17g} {n}" for c, n in zip(coefs, names) if c != 0]
        if not terms:
            return "0 " + names[0]
        first = terms[0]
        return (first[2:] if first.startswith("+") else first) + "".join(" " + t for t in terms[1:])

    out = ["Minimize" if problem.direction == "min" else "Maximize", " obj: " + expr(problem.objective), "Subject To"]
    for i, (row, sense, rhs) in enumerate(zip(problem.a, problem.senses, problem.b)):
        out.append(f" c{i}: {expr(row)} {sense} {rhs:.17g}")
    out.append("Bounds")
    for n, (lo, hi) in zip(names, problem.bounds):
        if lo == -np.inf and hi == np.inf:
            out.append(f" {n} free")
        else:
            lo_s = "-inf" if lo == -np.inf else f"{lo:.17g}"
            hi_s = "+inf" if hi == np.inf else f"{hi:.17g}"
            out.append(f" {lo_s} <= {n} <= {hi_s}")
    out.append("End")
    return "\n".join(out) + "\n"


def _to_standard(problem):
    """Rewrite as ``min c.z, A z = b, z >= 0`` with ``x = offset + m z``."""
    n = problem.n_vars
    offset = np.zeros(n)
    cols = []  # (original var, sign)
    extra_rows = []  # (column index, upper bound on that column)
    for j, (lo, hi) in enumerate(problem.bounds):
        if lo > hi:
            return None
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    nz = len(cols)
    m_map = np.zeros((n, nz))
    for k, (j, sgn) in enumerate(cols):
        m_map[j, k] = sgn

    a_rows = problem.a @ m_map
    rhs = problem.b - problem.a @ offset
    senses = list(problem.senses)
    for k, ub in extra_rows:
        row = np.zeros(nz)
        row[k] = 1.0
        a_rows = np.vstack([a_rows, row])
        rhs = np.append(rhs, ub)
        senses.append("<=")

    m = len(senses)
    n_slack = sum(1 for s in senses if s != "=")
    a_std = np.zeros((m, nz + n_slack))
    a_std[:, :nz] = a_rows
    slack_of_row = [-1] * m
    k = nz
    for i, s in enumerate(senses):
        if s == "<=":
            a_std[i, k] = 1.0
        elif s == ">=":
            a_std[i, k] = -1.0
        if s != "=":
            slack_of_row[i] = k
            k += 1
    row_sign = np.where(rhs < 0, -1.0, 1.0)
    a_std *= row_sign[:, None]
    rhs = rhs * row_sign

    c = m_map.T @ problem.objective
    if problem.direction == "max":
        c = -c
    c_std = np.concatenate([c, np.zeros(n_slack)])
    return {
        "a": a_std, "b": rhs, "c": c_std, "offset": offset, "map": m_map, "nz": nz,
        "slack_of_row": slack_of_row, "row_sign": row_sign, "n_orig_rows": problem.n_constraints,
    }


class _Tableau:
    def __init__(self, t, basis, limit):
        self.t = t
        self.basis = basis
        self.pivots = 0
        self.limit = limit

    def pivot(self, r, j):
        self.pivots += 1
        if self.pivots > self.limit:
            raise IterationLimit(f"simplex exceeded {self.limit} pivots")
        t = self.t
        t[r] /= t[r, j]
        col = t[:, j].copy()
        col[r] = 0.0
        t -= np.outer(col, t[r])
        t[np.abs(t) < 1e-14] = 0.0
        self.basis[r] = j

    def run(self, cost, allowed):
        """Bland's-rule phase on the current canonical tableau. Returns 'optimal' or 'unbounded'."""
        t = self.t
        while True:
            cb = cost[self.basis]
            reduced = cost - cb @ t[:, :-1]
            entering = None
            for j in allowed:
                if reduced[j] < -OPT_TOL:
                    entering = j
                    break
            if entering is None:
                return "optimal"
            col = t[:, entering]
            rows = np.nonzero(col > PIVOT_TOL)[0]
            if rows.size == 0:
                return "unbounded"
            ratios = t[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            leave = min(ties, key=lambda i: self.basis[i])
            self.pivot(leave, entering)


def _active(problem, x):
    """Normals of the constraints and bounds tight at ``x``."""
    tol = FEAS_TOL * 10
    rows = []
    r = problem.a @ x - problem.b
    for i, sense in enumerate(problem.senses):
        if sense == "=" or abs(r[i]) <= tol * max(1.0, abs(problem.b[i])):
            rows.append(problem.a[i])
    eye = np.eye(problem.n_vars)
    for j, (lo, hi) in enumerate(problem.bounds):
        at_lo = np.isfinite(lo) and abs(x[j] - lo) <= tol * max(1.0, abs(lo))
        at_hi = np.isfinite(hi) and abs(x[j] - hi) <= tol * max(1.0, abs(hi))
        if at_lo or at_hi:
            rows.append(eye[j])
    return np.array(rows).reshape(-1, problem.n_vars)


def _purify(problem, x):
    """Slide an optimal point to a vertex of the original polyhedron.

    A free variable split into two nonnegative parts can leave the simplex at a
    point that is basic in the split space but not in the original one. Moving
    along the null space of the tight constraints keeps feasibility and, at an
    optimum, the objective, until enough constraints are tight.
    """
    n = problem.n_vars
    lo, hi = np.array(problem.bounds).T
    for _ in range(n + 1):
        act = _active(problem, x)
        if act.shape[0]:
            _, sv, vt = np.linalg.svd(act)
            rank = int(np.sum(sv > 1e-9 * max(1.0, sv[0])))
        else:
            rank, vt = 0, np.eye(n)
        if rank == n:
            break
        d = vt[rank]
        best = None
        for sgn in (1.0, -1.0):
            step = _max_step(problem, x, sgn * d, lo, hi)
            if step is not None and (best is None or step < best[0]):
                best = (step, sgn)
        if best is None:
            break  # the feasible set contains a line; no vertex exists
        x = x + best[1] * best[0] * d
        x = np.clip(x, lo, hi)
    return x


def _max_step(problem, x, d, lo, hi):
    """Largest ``t >= 0`` keeping ``x + t d`` feasible, or None when unlimited."""
    t = np.inf
    ad = problem.a @ d
    slack = problem.b - problem.a @ x
    for i, sense in enumerate(problem.senses):
        if sense == "<=" and ad[i] > PIVOT_TOL:
            t = min(t, max(slack[i], 0.0) / ad[i])
        elif sense == ">=" and ad[i] < -PIVOT_TOL:
            t = min(t, min(slack[i], 0.0) / ad[i])
    for j in range(problem.n_vars):
        if d[j] > PIVOT_TOL and np.isfinite(hi[j]):
            t = min(t, max(hi[j] - x[j], 0.0) / d[j])
        elif d[j] < -PIVOT_TOL and np.isfinite(lo[j]):
            t = min(t, max(x[j] - lo[j], 0.0) / -d[j])
    return None if t == np.inf else t


def solve_lp(problem, max_pivots=None):
    """Solve ``problem`` with a two-phase primal simplex.

    Duals are reported per original constraint as the sensitivity of the
    optimal objective to that constraint's right-hand side.
    """
    limit = max_pivots if max_pivots is not None else 100 * (problem.n_vars + problem.n_constraints)
    std = _to_standard(problem)
    if std is None:
        return LpSolution("infeasible")
    a, b, c = std["a"], std["b"], std["c"]
    m, n = a.shape

    # initial basis: slacks with +1 coefficient where available, artificials elsewhere
    basis = []
    art_rows = []
    for i in range(m):
        k = std["slack_of_row"][i]
        if k >= 0 and a[i, k] == 1.0:
            basis.append(k)
        else:
            art_rows.append(i)
            basis.append(None)
    n_art = len(art_rows)
    t = np.zeros((m, n + n_art + 1))
    t[:, :n] = a
    t[:, -1] = b
    for k, i in enumerate(art_rows):
        t[i, n + k] = 1.0
        basis[i] = n + k
    tab = _Tableau(t, basis, limit)

    if n_art:
        cost1 = np.zeros(n + n_art)
        cost1[n:] = 1.0
        tab.run(cost1, range(n + n_art))
        infeas = float(cost1[tab.basis] @ tab.t[:, -1])
        if infeas > FEAS_TOL * max(1.0, np.max(np.abs(b), initial=0.0)):
            return LpSolution("infeasible", iterations=tab.pivots)
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= n:
                cand = np.nonzero(np.abs(tab.t[i, :n]) > PIVOT_TOL)[0]
                if cand.size:
                    tab.pivot(i, int(cand[0]))
                else:
                    continue
            keep.append(i)
        tab.t = tab.t[keep][:, list(range(n)) + [-1]]
        tab.basis = [tab.basis[i] for i in keep]
        rows_kept = keep
    else:
        tab.t = tab.t[:, list(range(n)) + [-1]]
        rows_kept = list(range(m))

    status = tab.run(c, range(n))
    if status == "unbounded":
        return LpSolution("unbounded", iterations=tab.pivots)

    z = np.zeros(n)
    z[tab.basis] = tab.t[:, -1]
    x = _purify(problem, std["offset"] + std["map"] @ z[: std["nz"]])
    value = float(problem.objective @ x)

    y_std = np.zeros(m)
    if rows_kept:
        bmat = a[np.ix_(rows_kept, tab.basis)]
        y_std[rows_kept] = np.linalg.solve(bmat.T, c[tab.basis])
    y = y_std * std["row_sign"]
    if problem.direction == "max":
        y = -y
    return LpSolution("optimal", value, x, y[: std["n_orig_rows"]], tab.pivots)
