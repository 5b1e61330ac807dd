"""Exact assignment with a single ``>=`` side constraint.

Minimises ``sum_i cost[i, s(i)]`` over permutations ``s`` subject to
``sum_i side_coeff[i, s(i)] >= side_bound - feasibility_tol``.

Positions whose cost and side columns are identical are merged into one class
(a reranking instance has a long tail of zero-attention positions). What is
left is small in one of two ways, and :func:`solve_exact` picks the search
that suits it:

* few places outside the largest class: a label search over rows in index
  order, keyed by the places still open, keeping Pareto fronts of
  (cost, side) for every suffix of rows;
* otherwise: a depth-first branch and bound over rows in index order, bounded
  by the unconstrained min-cost assignment, a max-side feasibility check and
  a Lagrangian bound whose multiplier is searched per node.

Both return the lexicographically first feasible permutation whose objective
is within :func:`tie_tolerance` of the optimum. Objectives and side values of
complete assignments are summed with :func:`math.fsum`, so permutations using
the same multiset of entries score identically.

:func:`brute_force` enumerates permutations and serves as the test oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

FEASIBILITY_TOL = 1e-7
BRUTE_FORCE_LIMIT = 9

# objectives this close (relative) to the optimum are ties, broken lexicographically
TIE_RTOL = 1e-9
# slack on bound comparisons; covers rounding in the relaxed sums only
_BOUND_RTOL = 1e-12
_MAX_DUAL_STEPS = 60
_NODE_DUAL_STEPS = 8
# dominance pruning is skipped when its pairwise table would be larger than this
_DOMINANCE_CELLS = 5_000_000
# instances with at most this many slot states go to the label search
_LABEL_STATES = 1024


@dataclass(frozen=True, eq=False)
class AssignmentProblem:
    """``cost[i, j]`` / ``side_coeff[i, j]``: candidate ``i`` placed at position ``j``."""

    cost: np.ndarray
    side_coeff: np.ndarray | None = None
    side_bound: float = 0.0
    feasibility_tol: float = FEASIBILITY_TOL

    def __post_init__(self) -> None:
        cost = np.array(self.cost, dtype=float)
        if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
            raise ValueError(f"cost must be a square matrix, got shape {cost.shape}")
        side = np.zeros_like(cost) if self.side_coeff is None else np.array(self.side_coeff, dtype=float)
        if side.shape != cost.shape:
            raise ValueError(f"side_coeff shape {side.shape} does not match cost {cost.shape}")
        if not (np.isfinite(cost).all() and np.isfinite(side).all()):
            raise ValueError("cost and side_coeff must be finite")
        if (side < 0).any():
            raise ValueError("side_coeff must be nonnegative")
        if not math.isfinite(self.side_bound) or self.side_bound < 0:
            raise ValueError(f"side_bound must be finite and nonnegative, got {self.side_bound}")
        if self.feasibility_tol < 0:
            raise ValueError("feasibility_tol must be nonnegative")
        cost.flags.writeable = False
        side.flags.writeable = False
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "side_coeff", side)
        object.__setattr__(self, "side_bound", float(self.side_bound))

    @property
    def n(self) -> int:
        return self.cost.shape[0]

    def objective(self, assignment: Sequence[int]) -> float:
        return math.fsum(self.cost[np.arange(self.n), list(assignment)].tolist())

    def side_value(self, assignment: Sequence[int]) -> float:
        return math.fsum(self.side_coeff[np.arange(self.n), list(assignment)].tolist())

    def is_feasible(self, assignment: Sequence[int]) -> bool:
        return self.side_value(assignment) >= self.side_bound - self.feasibility_tol


@dataclass(frozen=True)
class SolveResult:
    """``assignment[i]`` is the position of candidate ``i``; ``None`` when infeasible."""

    assignment: tuple[int, ...] | None
    objective: float
    feasible: bool
    nodes: int = 0


def tie_tolerance(value: float) -> float:
    """Objectives within this distance of the optimum count as ties."""
    return TIE_RTOL * (1.0 + abs(value))


def brute_force(problem: AssignmentProblem) -> SolveResult:
    """Enumerate every permutation; the lexicographically first near-optimum wins."""
    n = problem.n
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to n <= {BRUTE_FORCE_LIMIT}, got n={n}")
    cost = problem.cost.tolist()
    side = problem.side_coeff.tolist()
    threshold = problem.side_bound - problem.feasibility_tol
    feasible = []
    count = 0
    for perm in itertools.permutations(range(n)):
        count += 1
        if math.fsum(side[i][j] for i, j in enumerate(perm)) >= threshold:
            feasible.append((perm, math.fsum(cost[i][j] for i, j in enumerate(perm))))
    if not feasible:
        return SolveResult(None, math.inf, False, count)
    best = min(obj for _, obj in feasible)
    target = best + tie_tolerance(best)
    perm, obj = next(item for item in feasible if item[1] <= target)
    return SolveResult(perm, obj, True, count)


def solve_exact(problem: AssignmentProblem) -> SolveResult:
    """Globally optimal feasible permutation, or ``feasible=False`` if none exists."""
    labels = _SuffixLabels(problem)
    if labels.states <= _LABEL_STATES:
        return labels.run()
    return _BranchAndBound(problem).run()


def _relax(weights: np.ndarray, caps: np.ndarray) -> tuple[float, np.ndarray]:
    """Min-cost assignment of every row to a class, with class capacities.

    The largest open class absorbs whatever the others do not take, so only
    the remaining slots need a (rectangular) assignment solve.
    """
    rows = weights.shape[0]
    open_ = np.flatnonzero(caps)
    big = open_[np.argmax(caps[open_])]
    base = weights[:, big]
    classes = np.full(rows, big)
    if open_.size == 1:
        return float(base.sum()), classes
    small = open_[open_ != big]
    cols = np.repeat(small, caps[small])
    reduced = weights[:, cols] - base[:, None]
    ri, ci = linear_sum_assignment(reduced)
    classes[ri] = cols[ci]
    return float(base.sum() + reduced[ri, ci].sum()), classes


class _Node:
    __slots__ = ("depth", "rows", "caps", "sigma", "fc", "fs", "val0", "arg0", "side_val", "side_arg", "dual")


class _ColumnClasses:
    """Positions with identical cost and side columns merged into classes;
    ``big`` is the largest class."""

    def __init__(self, problem: AssignmentProblem) -> None:
        self.problem = problem
        n = self.n = problem.n
        cost, side = problem.cost, problem.side_coeff

        groups: dict[bytes, int] = {}
        positions: list[list[int]] = []
        for j in range(n):
            key = cost[:, j].tobytes() + side[:, j].tobytes()
            b = groups.setdefault(key, len(positions))
            if b == len(positions):
                positions.append([])
            positions[b].append(j)
        self.positions = positions
        rep = [p[0] for p in positions]
        self.C = cost[:, rep]
        self.S = side[:, rep]
        self.caps = np.array([len(p) for p in positions], dtype=np.intp)
        self.big = int(np.argmax(self.caps)) if n else 0
        self.need = problem.side_bound - problem.feasibility_tol
        self.side_eps = _BOUND_RTOL * (1.0 + abs(problem.side_bound))
        self.nodes = 0

    def _class_of(self, sigma: np.ndarray) -> np.ndarray:
        lookup = np.empty(self.n, dtype=np.intp)
        for b, pos in enumerate(self.positions):
            lookup[pos] = b
        return lookup[sigma]


class _BranchAndBound(_ColumnClasses):
    def __init__(self, problem: AssignmentProblem) -> None:
        super().__init__(problem)
        n = self.n
        cost, side = problem.cost, problem.side_coeff
        last_seen: dict[bytes, int] = {}
        self.twin = np.full(n, -1, dtype=np.intp)
        for i in range(n):
            key = cost[i].tobytes() + side[i].tobytes()
            if key in last_seen:
                self.twin[i] = last_seen[key]
            last_seen[key] = i

        self.dominates: np.ndarray | None = None
        self._pinning = False
        self.best: tuple[int, ...] | None = None
        self.best_obj = math.inf

    def _dominance(self) -> np.ndarray | None:
        """``d[i, j]``: moving row ``i`` from the largest class into row ``j``'s
        place elsewhere never costs more and never loses side value, and the
        rows are not identical."""
        small = [b for b in range(len(self.caps)) if b != self.big]
        if not small or self.n * self.n * len(small) > _DOMINANCE_CELLS:
            return None
        reduced = self.C[:, small] - self.C[:, [self.big]]
        gain = self.S[:, small] - self.S[:, [self.big]]
        weak = (reduced[:, None, :] <= reduced[None, :, :]).all(2) & (gain[:, None, :] >= gain[None, :, :]).all(2)
        return weak & ~weak.T

    # incumbent handling -------------------------------------------------

    def _fill(self, node: _Node, classes: np.ndarray) -> np.ndarray:
        """Complete ``node`` by placing its open rows on the given classes."""
        sigma = node.sigma.copy()
        for b in np.unique(classes).tolist():
            members = node.rows[classes == b]
            pos = self.positions[b]
            used = len(pos) - node.caps[b]
            sigma[members] = pos[used : used + members.size]
        return sigma

    def _score(self, sigma: np.ndarray) -> float | None:
        """Exact objective of a complete assignment, ``None`` if it is infeasible."""
        p = self.problem
        rows = np.arange(self.n)
        if math.fsum(p.side_coeff[rows, sigma].tolist()) < self.need:
            return None
        return math.fsum(p.cost[rows, sigma].tolist())

    # node evaluation -------------------------------------------------------

    def _place_in_big(self, node: _Node, rows: np.ndarray) -> bool:
        pos = self.positions[self.big]
        if rows.size > node.caps[self.big]:
            return False
        used = len(pos) - node.caps[self.big]
        node.sigma[rows] = pos[used : used + rows.size]
        node.caps[self.big] -= rows.size
        node.fc += float(self.C[rows, self.big].sum())
        node.fs += float(self.S[rows, self.big].sum())
        return True

    def _root(self, order: np.ndarray, pinned: np.ndarray) -> _Node:
        node = _Node()
        node.depth = 0
        node.rows = order
        node.caps = self.caps.copy()
        node.sigma = np.full(self.n, -1, dtype=np.intp)
        node.fc = node.fs = 0.0
        node.val0 = node.arg0 = node.side_val = node.side_arg = node.dual = None
        self._place_in_big(node, pinned)
        return node

    def _child(self, parent: _Node, b: int, position: int) -> _Node | None:
        i = parent.rows[0]
        node = _Node()
        node.depth = parent.depth + 1
        node.rows = parent.rows[1:]
        node.caps = parent.caps.copy()
        node.caps[b] -= 1
        node.sigma = parent.sigma.copy()
        node.sigma[i] = position
        node.fc = parent.fc + self.C[i, b]
        node.fs = parent.fs + self.S[i, b]
        keep = None
        if self._pinning and b == self.big:
            # a row left in the largest class drags the rows it dominates along
            beaten = self.dominates[i, node.rows]
            if beaten.any():
                if not self._place_in_big(node, node.rows[beaten]):
                    return None
                keep = ~beaten
                node.rows = node.rows[keep]
        dc, ds = node.fc - parent.fc, node.fs - parent.fs

        def carry(arg: np.ndarray | None) -> np.ndarray | None:
            # a parent relaxation that already agrees with the branch stays optimal
            if arg is None or arg[0] != b:
                return None
            rest = arg[1:]
            if keep is None:
                return rest
            if (rest[~keep] != self.big).any():
                return None
            return rest[keep]

        node.val0 = node.side_val = node.dual = None
        node.arg0 = carry(parent.arg0)
        if node.arg0 is not None:
            node.val0 = parent.val0 - dc
        node.side_arg = carry(parent.side_arg)
        if node.side_arg is not None:
            node.side_val = parent.side_val - ds
        if parent.dual is not None:
            # both multiplier-optimal solutions agree with the branch: the
            # child's dual optimum sits at the same multiplier
            lam, lo, hi, lo_arg, hi_arg = parent.dual
            lo_arg, hi_arg = carry(lo_arg), carry(hi_arg)
            if lo_arg is not None and hi_arg is not None:
                node.dual = (lam, (lo[0] - dc, lo[1] - ds), (hi[0] - dc, hi[1] - ds), lo_arg, hi_arg)
        return node

    def _lagrangian(self, node: _Node, need: float, steps: int) -> float:
        """Best Lagrangian bound found by breakpoint search between the relaxed
        min-cost point (side-infeasible) and the max-side point (feasible)."""
        if node.dual is not None:
            lam, lo, _, _, _ = node.dual
            return node.fc + lo[0] - lam * lo[1] + lam * need
        C, S = self.C[node.rows], self.S[node.rows]
        rows = np.arange(node.rows.size)
        lo_arg, hi_arg = node.arg0, node.side_arg
        lo = (node.val0, float(S[rows, lo_arg].sum()))
        hi = (float(C[rows, hi_arg].sum()), node.side_val)
        lb = node.fc + node.val0
        for _ in range(steps):
            if hi[1] <= lo[1] or lb >= self._threshold() or self._stop:
                break
            lam = max((hi[0] - lo[0]) / (hi[1] - lo[1]), 0.0)
            val, a = _relax(C - lam * S, node.caps)
            lb = max(lb, node.fc + val + lam * need)
            line = lo[0] - lam * lo[1]
            if val >= line - _BOUND_RTOL * (1.0 + abs(line)):
                node.dual = (lam, lo, hi, lo_arg, hi_arg)
                break
            point = (float(C[rows, a].sum()), float(S[rows, a].sum()))
            if point[1] >= need:
                hi, hi_arg = point, a
                self._visit(self._fill(node, a))
            else:
                lo, lo_arg = point, a
        return lb

    def _expand(self, node: _Node) -> bool:
        """Compute the bounds of ``node``; True if its subtree must be searched.

        Feasible completions met on the way are handed to the search's visitor.
        A completion of the unconstrained relaxation that turns out feasible
        is optimal for the subtree, which then needs no branching.
        """
        if node.arg0 is None:
            node.val0, node.arg0 = _relax(self.C[node.rows], node.caps)
        if node.fc + node.val0 >= self._threshold():
            return False
        need = self.need - node.fs
        if node.side_arg is None and need > 0:
            val, node.side_arg = _relax(-self.S[node.rows], node.caps)
            node.side_val = -val
            if node.side_val < need - self.side_eps:
                return False
        if need <= 0 or self.S[node.rows, node.arg0].sum() >= need + self.side_eps:
            return self._visit(self._fill(node, node.arg0)) is None
        if node.side_val < need - self.side_eps:
            return False
        steps = _MAX_DUAL_STEPS if node.depth == 0 else _NODE_DUAL_STEPS
        return self._lagrangian(node, need, steps) < self._threshold()

    def _children(self, node: _Node) -> list[tuple[int, int]]:
        i = node.rows[0]
        open_ = np.flatnonzero(node.caps)
        moves = []
        floor = node.sigma[self.twin[i]] if self.twin[i] >= 0 else -1
        for b in open_.tolist():
            pos = self.positions[b]
            position = pos[len(pos) - node.caps[b]]
            if position > floor:
                moves.append((position, b))
        moves.sort()
        return [(b, position) for position, b in moves]

    def _search(self, root: _Node | None, threshold, visit) -> None:
        """Depth-first search, branching on ``root.rows`` in order and trying
        each row's positions in increasing order.

        ``threshold()`` is the pruning level: subtrees whose bound reaches it
        are skipped. ``visit(sigma)`` receives feasible complete assignments
        and returns a truthy value to end the search.
        """
        self._threshold = threshold
        self._stop = False

        def handle(sigma: np.ndarray):
            obj = self._score(sigma)
            if obj is not None and visit(sigma, obj):
                self._stop = True
            return obj

        self._visit = handle
        stack: list = [] if root is None else [root]
        while stack and not self._stop:
            item = stack.pop()
            node = item if isinstance(item, _Node) else self._child(*item)
            self.nodes += 1
            if node is None:
                continue
            if node.rows.size == 0 or np.count_nonzero(node.caps) == 1:
                sigma = node.sigma
                if node.rows.size:
                    sigma = self._fill(node, np.full(node.rows.size, np.flatnonzero(node.caps)[0]))
                handle(sigma)
                continue
            if not self._expand(node):
                continue
            for b, position in reversed(self._children(node)):
                stack.append((node, b, position))

    def _dominance_root(self, node: _Node) -> _Node | None:
        """Reorder the open rows of ``node`` for a dominance-pruned search.

        Among the open rows some best completion never leaves a row in the
        largest class while a row it dominates sits elsewhere (swapping them
        cannot hurt). Open rows with at least as many open dominators as there
        are open places outside the largest class therefore stay in it, and
        dominators are branched on first.
        """
        root = _Node()
        root.depth = 0
        root.caps = node.caps.copy()
        root.sigma = node.sigma.copy()
        root.fc, root.fs = node.fc, node.fs
        root.val0 = root.arg0 = root.side_val = root.side_arg = root.dual = None
        rows = node.rows
        beaten_by = self.dominates[np.ix_(rows, rows)].sum(axis=0)
        outside = rows.size - node.caps[self.big]
        order = np.lexsort((rows, beaten_by))
        pinned = beaten_by[order] >= outside
        root.rows = rows[order[~pinned]]
        if not self._place_in_big(root, np.sort(rows[order[pinned]])):
            return None
        return root

    def _completion_within(self, node: _Node, target: float) -> np.ndarray | None:
        """Some feasible completion of ``node`` with objective <= ``target``."""
        slack = target + _BOUND_RTOL * (1.0 + abs(target))
        found: list = []

        def accept(sigma: np.ndarray, obj: float) -> bool:
            if obj <= target:
                found.append(sigma)
                return True
            return False

        self._pinning = self.dominates is not None
        root = self._dominance_root(node) if self._pinning else node
        self._search(root, lambda: math.nextafter(slack, math.inf), accept)
        self._pinning = False
        return found[0] if found else None

    def run(self) -> SolveResult:
        if self.n == 0:
            ok = self.need <= 0
            return SolveResult(() if ok else None, 0.0 if ok else math.inf, ok, 1)
        self.dominates = self._dominance()
        full = self._root(np.arange(self.n), np.arange(0))

        # optimal value: only subtrees that could strictly improve are opened
        def level() -> float:
            if self.best is None:
                return math.inf
            return self.best_obj - _BOUND_RTOL * (1.0 + abs(self.best_obj))

        def record(sigma: np.ndarray, obj: float) -> bool:
            if obj < self.best_obj:
                self.best, self.best_obj = tuple(int(s) for s in sigma), obj
            return False

        self._pinning = self.dominates is not None
        root = self._dominance_root(full) if self._pinning else full
        self._search(root, level, record)
        self._pinning = False
        if self.best is None:
            return SolveResult(None, math.inf, False, self.nodes)

        # lexicographically first assignment within the tie tolerance: fix rows
        # in index order, each at the smallest position that still admits a
        # completion within the target; the current witness vouches for its
        # own choice, so only earlier positions need a search
        target = self.best_obj + tie_tolerance(self.best_obj)
        witness = self._class_of(np.array(self.best))
        node = full
        while node.rows.size and np.count_nonzero(node.caps) > 1:
            i = node.rows[0]
            for b, position in self._children(node):
                child = self._child(node, b, position)
                if b == witness[i]:
                    break
                sigma = self._completion_within(child, target)
                if sigma is not None:
                    witness = self._class_of(sigma)
                    break
            else:
                # the witness breaks the twin ordering; finish by plain search
                self.dominates = None
                sigma = self._completion_within(node, target)
                break
            node = child
        else:
            sigma = node.sigma
            if node.rows.size:
                sigma = self._fill(node, np.full(node.rows.size, np.flatnonzero(node.caps)[0]))
        assignment = tuple(int(s) for s in sigma)
        return SolveResult(assignment, self.problem.objective(assignment), True, self.nodes)


class _SuffixLabels(_ColumnClasses):
    """Exact search for instances whose classes other than the largest have
    few places between them (a reranking instance has one such class per
    position above the quality cutoff).

    Rows are placed in index order. A state counts the places still open in
    each smaller class; the largest class takes whatever is left. For every
    row ``d`` and state, ``tables[d][state]`` holds the Pareto front of
    (cost, side) over ways to place rows ``d..n-1`` into exactly those places,
    with side capped at the requirement. Labels that cannot end below an
    upper bound, or that cannot reach the requirement, are dropped.
    """

    def __init__(self, problem: AssignmentProblem) -> None:
        super().__init__(problem)
        self.small = [b for b in range(len(self.caps)) if b != self.big]
        radix = [1]
        for b in self.small:
            radix.append(radix[-1] * (int(self.caps[b]) + 1))
        self.stride = radix[:-1]
        self.states = radix[-1]

    def _upper_bound(self) -> float:
        """Exact cost of a feasible assignment found by a breakpoint search on
        the side multiplier; ``inf`` when none turns up."""
        C, S, caps, need = self.C, self.S, self.caps, self.need
        rows = np.arange(self.n)

        def point(a: np.ndarray) -> tuple[float, float]:
            return math.fsum(C[rows, a].tolist()), math.fsum(S[rows, a].tolist())

        lo = point(_relax(C, caps)[1])
        if lo[1] >= need:
            return lo[0]
        hi = point(_relax(-S, caps)[1])
        if hi[1] < need:
            return math.inf
        for _ in range(_MAX_DUAL_STEPS):
            if hi[1] <= lo[1]:
                break
            lam = max((hi[0] - lo[0]) / (hi[1] - lo[1]), 0.0)
            val, a = _relax(C - lam * S, caps)
            line = lo[0] - lam * lo[1]
            if val >= line - _BOUND_RTOL * (1.0 + abs(line)):
                break
            p = point(a)
            if p[1] >= need:
                hi = p
            else:
                lo = p
        return hi[0]

    def _tables(self, limit: float) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """``tables[d]``: (state, cost, side) label arrays sorted by state."""
        n, C, S, big, need = self.n, self.C, self.S, self.big, self.need
        small = self.small
        states = np.arange(self.states)
        caps = self.caps[small]
        counts = np.zeros((self.states, len(small)), dtype=np.intp)
        for k, (st, cap) in enumerate(zip(self.stride, caps.tolist())):
            counts[:, k] = (states // st) % (cap + 1)
        held = counts.sum(axis=1)
        filled = caps[None, :] - counts
        filled_total = filled.sum(axis=1)

        # what the rows before d can add when they fill the other places
        # (rows may repeat across classes, so these are only bounds)
        prefix_c = np.concatenate([[0.0], np.cumsum(C[:, big])])
        prefix_s = np.concatenate([[0.0], np.cumsum(S[:, big])])
        least = np.zeros((n + 1, len(small)))
        most = np.zeros((n + 1, len(small)))
        if small:
            least[1:] = np.minimum.accumulate(C[:, small] - C[:, [big]], axis=0)
            most[1:] = np.maximum.accumulate(S[:, small] - S[:, [big]], axis=0)
        cost_cap = limit + _BOUND_RTOL * (1.0 + float(np.abs(C).max(axis=1).sum()))
        side_cap = need - _BOUND_RTOL * (1.0 + float(S.max(axis=1).sum()))

        tables = [None] * (n + 1)
        tables[n] = (np.zeros(1, dtype=np.intp), np.zeros(1), np.zeros(1))
        for d in range(n - 1, -1, -1):
            st, c, s = tables[d + 1]
            moves = [(st, c + C[d, big], s + S[d, big], held[st] < n - d)]
            for k, b in enumerate(small):
                moves.append((st + self.stride[k], c + C[d, b], s + S[d, b], counts[st, k] < caps[k]))
            st = np.concatenate([m[0][m[3]] for m in moves])
            c = np.concatenate([m[1][m[3]] for m in moves])
            s = np.minimum(np.concatenate([m[2][m[3]] for m in moves]), need)
            ok = (filled_total[st] <= d) & (c + prefix_c[d] + least[d] @ filled[st].T <= cost_cap)
            ok &= s + prefix_s[d] + most[d] @ filled[st].T >= side_cap
            st, c, s = st[ok], c[ok], s[ok]
            if not st.size:
                # nothing can finish within the bound from here on
                for e in range(d, -1, -1):
                    tables[e] = (st, c, s)
                break
            order = np.lexsort((-s, c, st))
            st, c, s = st[order], c[order], s[order]
            # Pareto front per state: side must beat every cheaper label of
            # its state; integer ranks keep the per-state running max exact
            rank = np.unique(s, return_inverse=True)[1].ravel()
            group = np.cumsum(np.r_[True, st[1:] != st[:-1]]) - 1
            shifted = rank + group * (rank.size + 1)
            front = np.ones(st.size, dtype=bool)
            front[1:] = shifted[1:] > np.maximum.accumulate(shifted)[:-1]
            tables[d] = (st[front], c[front], s[front])
            self.nodes += int(front.sum())
        return tables

    def run(self) -> SolveResult:
        n, need = self.n, self.need
        if n == 0:
            ok = need <= 0
            return SolveResult(() if ok else None, 0.0 if ok else math.inf, ok, 1)
        bound = self._upper_bound()
        tables = self._tables(bound + tie_tolerance(bound))
        full = self.states - 1

        def labels(d: int, state: int) -> tuple[np.ndarray, np.ndarray]:
            st, c, s = tables[d]
            lo, hi = np.searchsorted(st, [state, state + 1])
            return c[lo:hi], s[lo:hi]

        c, s = labels(0, full)
        if not (s >= need).any():
            return SolveResult(None, math.inf, False, self.nodes)
        best = float(c[s >= need].min())
        target = best + tie_tolerance(best)

        # lexicographic walk: each row takes the smallest position from which
        # the rest of the rows can still finish within the target
        state, fc, fs = full, 0.0, 0.0
        used = [0] * len(self.caps)
        sigma = []
        for d in range(n):
            options = []
            open_big = (n - d) - sum(
                (state // st) % (int(self.caps[b]) + 1) for st, b in zip(self.stride, self.small)
            )
            if open_big:
                options.append((self.positions[self.big][used[self.big]], self.big, state))
            for st, b in zip(self.stride, self.small):
                if (state // st) % (int(self.caps[b]) + 1):
                    options.append((self.positions[b][used[b]], b, state - st))
            for position, b, after in sorted(options):
                c, s = labels(d + 1, after)
                c2, s2 = fc + self.C[d, b], fs + self.S[d, b]
                if ((c2 + c <= target) & (s2 + s >= need)).any():
                    break
            else:
                # rounding at the very edge of the target; settle it by search
                return _BranchAndBound(self.problem).run()
            sigma.append(position)
            used[b] += 1
            state, fc, fs = after, c2, s2
        assignment = tuple(int(x) for x in sigma)
        return SolveResult(assignment, self.problem.objective(assignment), True, self.nodes)
