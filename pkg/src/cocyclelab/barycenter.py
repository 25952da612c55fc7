"""Conformal barycenter of finite disk measures by midpoint self-pairing.

The pairing z * w is the hyperbolic geodesic midpoint; a measure is paired
with itself (pushforward of the product measure under *) and the energy
Phi(mu) = sum w / (1 - |z|^2) strictly decreases until the measure
concentrates at the barycenter.  A finite-atom realization needs a
compaction policy: atoms merge within a hyperbolic radius (weight-ordered
greedy clustering, which is Moebius-equivariant up to weight ties), tiny
weights merge into their nearest atom, and the atom count stays below a
hard cap.
"""

from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from .errors import AtomBlowup, BoundaryPoint, NoConvergence

HARD_PAIR_LIMIT = 1 << 24
WEIGHT_FLOOR = 1e-15
MERGE_RADIUS = 1e-9
ATOM_CAP = 4096


@dataclass
class DiskMeasure:
    """Finite atomic probability measure on the open unit disk."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=complex).ravel()
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.atoms.shape != self.weights.shape:
            raise ValueError("atoms and weights length mismatch")
        if np.any(self.weights < 0):
            raise ValueError("negative weight")
        total = self.weights.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")
        if np.any(np.abs(self.atoms) >= 1.0):
            raise BoundaryPoint("atom on or outside the unit circle")
        order = np.lexsort(
            (self.atoms.imag, self.atoms.real, -self.weights)
        )
        self.atoms = self.atoms[order]
        self.weights = self.weights[order]

    @staticmethod
    def point(z):
        return DiskMeasure(np.array([z]), np.array([1.0]))

    @staticmethod
    def uniform(atoms):
        atoms = np.asarray(atoms, dtype=complex)
        return DiskMeasure(atoms, np.full(len(atoms), 1.0 / len(atoms)))

    def pushforward(self, mat):
        """Image measure under the Moebius action of a disk-coordinates matrix."""
        return DiskMeasure(alg.mobius_apply(mat, self.atoms), self.weights.copy())

    def heaviest(self):
        return complex(self.atoms[np.argmax(self.weights)])

    def canonical_point(self):
        """Weighted geodesic fold of all atoms in invariant order.

        Moebius-equivariant up to float noise; used as the reference for
        spread measurements and stopping decisions.
        """
        z, _, _ = _fold_runs(
            self.atoms, self.weights, np.zeros(len(self.atoms), dtype=int)
        )
        return complex(z[0])

    def spread(self, ref=None):
        """(max, weighted rms) hyperbolic distance to the reference point."""
        ref = self.canonical_point() if ref is None else ref
        d = alg.hyperbolic_distance_unchecked(self.atoms, ref)
        return float(np.max(d)), float(np.sqrt(np.sum(self.weights * d * d)))


def geodesic_point(z, w, frac):
    """Point at hyperbolic fraction `frac` of the geodesic from z to w."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(z) >= 1.0) or np.any(np.abs(w) >= 1.0):
        raise BoundaryPoint("geodesic needs interior points")
    wp = (w - z) / (1.0 - np.conj(z) * w)
    r = np.abs(wp)
    fr = np.broadcast_to(np.asarray(frac, dtype=float), r.shape)
    scale = np.zeros_like(r)
    pos = r > 0
    scale[pos] = np.tanh(fr[pos] * np.arctanh(np.minimum(r[pos], 1 - 1e-16)))
    part = np.zeros_like(wp)
    part[pos] = wp[pos] / r[pos] * scale[pos]
    return (part + z) / (1.0 + np.conj(z) * part)


def hyperbolic_midpoint(z, w):
    """Midpoint of the hyperbolic geodesic from z to w; z * z = z."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(z) >= 1.0) or np.any(np.abs(w) >= 1.0):
        raise BoundaryPoint("midpoint needs interior points")
    wp = (w - z) / (1.0 - np.conj(z) * w)
    half = wp / (1.0 + np.sqrt(np.maximum(1.0 - np.abs(wp) ** 2, 0.0)))
    return (half + z) / (1.0 + np.conj(z) * half)


def phi(measure):
    """Energy Phi(mu) = sum w / (1 - |z|^2) >= 1."""
    return float(
        np.sum(measure.weights / (1.0 - np.abs(measure.atoms) ** 2))
    )


def _fold(z_keep, w_keep, z_in, w_in):
    """Weight-preserving geodesic fold; Phi-nonincreasing by convexity of
    1/(1-|z|^2) along hyperbolic geodesics."""
    total = w_keep + w_in
    frac = np.where(total > 0, w_in / np.maximum(total, 1e-300), 0.0)
    return geodesic_point(z_keep, z_in, frac), total


def _merge_small_weights(atoms, weights, floor):
    small = weights < floor
    if not np.any(small) or np.all(small):
        return atoms, weights
    big_atoms = atoms[~small].copy()
    big_weights = weights[~small].copy()
    for z, w in zip(atoms[small], weights[small]):
        k = np.argmin(np.abs(big_atoms - z))
        zk, wk = _fold(big_atoms[k : k + 1], big_weights[k : k + 1], z, w)
        big_atoms[k] = zk[0]
        big_weights[k] = wk[0]
    return big_atoms, big_weights


def pair_measures(mu, nu, prune=True, weight_floor=WEIGHT_FLOOR):
    """Pushforward of mu x nu under the midpoint pairing.

    Atom count is |mu|*|nu| (halved by symmetry when mu is nu); weights
    below the floor merge into their nearest atom when prune is set.
    """
    n, m = len(mu.atoms), len(nu.atoms)
    if n * m > HARD_PAIR_LIMIT:
        raise AtomBlowup(f"pairing would create {n * m} atoms")
    if mu is nu:
        i, j = np.triu_indices(n)
        w = mu.weights[i] * mu.weights[j]
        w[i != j] *= 2.0
        atoms = hyperbolic_midpoint(mu.atoms[i], mu.atoms[j])
    else:
        atoms = hyperbolic_midpoint(
            np.repeat(mu.atoms, m), np.tile(nu.atoms, n)
        )
        w = np.repeat(mu.weights, m) * np.tile(nu.weights, n)
    atoms, w = _dedupe_exact(atoms, w)
    if prune:
        atoms, w = _merge_small_weights(atoms, w, weight_floor)
    return DiskMeasure(atoms, w / w.sum())


def _dedupe_exact(atoms, weights):
    uniq, inv = np.unique(atoms, return_inverse=True)
    w = np.zeros(len(uniq))
    np.add.at(w, inv, weights)
    return uniq, w


def _dedupe_quantized(atoms, weights, resolution):
    """Fold atoms sharing a quantization box of the given Euclidean size.

    Cheap stand-in for radius merging at scales far below tol; the box
    assignment is the only non-equivariant step and is bounded by
    `resolution`, two orders below the convergence tolerance in use.
    """
    key = np.round(atoms.real / resolution) + 1j * np.round(
        atoms.imag / resolution
    )
    uniq, ids = np.unique(key, return_inverse=True)
    if len(uniq) == len(atoms):
        return atoms, weights
    z, w, _ = _fold_runs(atoms, weights, ids)
    return z, w


def _invariant_scores(atoms, weights):
    """Weighted distance sums: a Moebius-invariant sort tiebreaker.

    Rounded to 12 digits so frame-dependent float jitter cannot flip the
    order; residual ties occur only for genuinely symmetric configurations,
    where either choice is equivalent.
    """
    if len(atoms) > 3000:
        # fold the set of maximal-weight atoms into one invariant reference
        top = weights >= np.max(weights) * (1.0 - 1e-12)
        zs = atoms[top]
        ref, _, _ = _fold_runs(
            zs,
            np.full(len(zs), 1.0 / len(zs)),
            np.zeros(len(zs), dtype=int),
            scores=np.zeros(len(zs)),
        )
        d = alg.hyperbolic_distance_unchecked(atoms, ref[0])
    else:
        d = weights @ np.arctanh(
            np.clip(
                np.abs(atoms[:, None] - atoms[None, :])
                / np.abs(1.0 - np.conj(atoms[:, None]) * atoms[None, :]),
                0.0,
                1.0 - 1e-16,
            )
        )
    scale = max(np.max(d), 1e-300)
    return np.round(d / scale, 12)


def _order(atoms, weights, scores, ids=None):
    wr = np.round(weights / max(np.max(weights), 1e-300), 12)
    keys = [atoms.imag, atoms.real, scores, -wr]
    if ids is not None:
        keys.append(ids)
    return np.lexsort(tuple(keys))


def _fold_runs(atoms, weights, ids, scores=None):
    """Collapse each id-group to its weighted geodesic combination.

    Pairwise tree reduction, vectorized across all groups; every fold is
    Phi-nonincreasing, so the collapse is too.
    """
    if scores is None:
        scores = _invariant_scores(atoms, weights)
    order = _order(atoms, weights, scores, ids)
    z, w, cid = atoms[order], weights[order].copy(), ids[order]
    while True:
        first = np.ones(len(cid), dtype=bool)
        first[1:] = cid[1:] != cid[:-1]
        if np.all(first):
            return z, w, cid
        starts = np.where(first, np.arange(len(cid)), 0)
        runpos = np.arange(len(cid)) - np.maximum.accumulate(starts)
        right = runpos % 2 == 1
        li = np.where(right)[0] - 1
        zi, wi = _fold(z[li], w[li], z[right], w[right])
        z = z.copy()
        z[li] = zi
        w[li] = wi
        keep = ~right
        z, w, cid = z[keep], w[keep], cid[keep]


def _greedy_cluster(atoms, weights, radius, scores=None):
    """Weight-ordered greedy merge of atoms within hyperbolic `radius`."""
    if scores is None:
        scores = _invariant_scores(atoms, weights)
    order = _order(atoms, weights, scores)
    atoms = atoms[order]
    weights = weights[order]
    scores = scores[order]
    ids = np.full(len(atoms), -1, dtype=int)
    next_id = 0
    idx = 0
    while True:
        while idx < len(atoms) and ids[idx] >= 0:
            idx += 1
        if idx >= len(atoms):
            break
        live = np.where(ids < 0)[0]
        d = alg.hyperbolic_distance_unchecked(atoms[live], atoms[idx])
        ids[live[d <= radius]] = next_id
        next_id += 1
    z, w, _ = _fold_runs(atoms, weights, ids, scores=scores)
    return z, w


def _ref_scores(atoms, ref):
    d = alg.hyperbolic_distance_unchecked(atoms, ref)
    return np.round(d / max(np.max(d), 1e-300), 12)


def _compact(measure, budget, merge_radius, ref=None):
    atoms, weights = measure.atoms, measure.weights
    ref = measure.canonical_point() if ref is None else ref
    atoms, weights = _dedupe_quantized(atoms, weights, merge_radius / 4.0)
    if len(atoms) > budget:
        dmax = measure.spread(ref)[0]
        # invariant starting radius aimed at the budget in one pass
        radius = max(merge_radius, dmax / (2.0 * np.sqrt(budget)))
        for _ in range(60):
            scores = _ref_scores(atoms, ref)
            atoms, weights = _greedy_cluster(atoms, weights, radius, scores)
            if len(atoms) <= budget:
                break
            radius *= 2.0
    return DiskMeasure(atoms, weights / weights.sum())


def conformal_barycenter(
    measure,
    tol=1e-8,
    max_iter=200,
    budget=64,
    atom_cap=ATOM_CAP,
    merge_radius=MERGE_RADIUS,
    return_trace=False,
):
    """Barycenter location by iterated self-pairing, to hyperbolic tol.

    Stops when the measure's hyperbolic diameter is below tol (or its
    weighted variance below tol^2) and returns the heaviest atom.  The
    energy Phi must decrease across iterations; `budget <= atom_cap`
    controls the working resolution of the compaction policy.
    """
    if budget > atom_cap:
        raise ValueError("budget exceeds the atom cap")
    mu = _compact(measure, budget, merge_radius)
    trace = [phi(mu)]
    for _ in range(max_iter):
        ref = mu.canonical_point()
        dmax, rms = mu.spread(ref)
        if 2.0 * dmax < tol or rms * rms < tol * tol:
            if return_trace:
                return mu.heaviest(), trace
            return mu.heaviest()
        mu = pair_measures(mu, mu)
        if len(mu.atoms) > budget:
            mu = _compact(mu, budget, merge_radius, ref=ref)
        if len(mu.atoms) > atom_cap:
            raise AtomBlowup(f"{len(mu.atoms)} atoms despite compaction")
        trace.append(phi(mu))
        # pairing strictly decreases Phi; compaction may add O(radius)
        assert trace[-1] <= trace[-2] + 1e-9, "Phi increased"
    raise NoConvergence(
        f"diameter {2 * mu.spread()[0]:.3e} after {max_iter} iterations",
        diameter=2 * mu.spread()[0],
    )


def load_atoms(path):
    """Read a measure from text: one 're im [weight]' triple per line."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [float(v) for v in line.replace(",", " ").split()]
            if len(parts) == 2:
                parts.append(1.0)
            rows.append(parts)
    arr = np.array(rows)
    w = arr[:, 2]
    return DiskMeasure(arr[:, 0] + 1j * arr[:, 1], w / w.sum())
