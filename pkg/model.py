"""
Dynamical fitness model of daily interbank networks.

Each bank carries a fixed type and an activity level a in [0, 1]. Every day a
lender i lends to a borrower j with probability (a_i a_j)^alpha when the pair is
type-admissible; afterwards all edges are dropped and every activity either
resets to a fresh uniform value (probability a^c2 / c1) or takes a random-walk
step on the unit circle, a = |cos(theta)|.

Random draws happen in a fixed order so a seed fully determines a run:
bank types, initial activities, then per day the edge uniforms (an n x n
matrix, row-major, i.e. (i, j) lexicographic including inadmissible pairs),
the weight draws, and the activity updates (reset uniforms, replacement
activities, walk increments, each for all banks in id order).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import pandas as pd

from errors import ConsistencyError, DomainError, ParameterError


class BankType(Enum):
    PURE_BORROWER = 'B'
    PURE_LENDER = 'L'
    BIDIRECTIONAL = 'D'


# Same order as ModelParams.fractions (f_B, f_L, f_D).
TYPE_ORDER = (BankType.PURE_BORROWER, BankType.PURE_LENDER, BankType.BIDIRECTIONAL)


def validate_fractions(fractions):
    """
    Check a (f_B, f_L, f_D) triple.

    Raises:
        ParameterError: If the triple has the wrong length, an entry outside
            [0, 1], or does not sum to 1.
    """
    if len(fractions) != 3:
        raise ParameterError(f"Expected three type fractions, got {len(fractions)}.")
    if any(f < 0 or f > 1 for f in fractions):
        raise ParameterError(f"Type fractions must lie in [0, 1]: {tuple(fractions)}.")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ParameterError(f"Type fractions must sum to 1: {tuple(fractions)}.")


@dataclass(frozen=True)
class ModelParams:
    n_p: int = 300
    alpha: float = 4.0
    c1: float = 2000.0
    c2: float = 2.0
    fractions: tuple = (0.56, 0.34, 0.10)
    walk_half_width: float = 0.002
    horizon: int = 6500
    burn_in: int = 5000

    def __post_init__(self):
        if int(self.n_p) != self.n_p or self.n_p < 1:
            raise ParameterError(f"n_p must be a positive integer, got {self.n_p}.")
        if self.alpha < 1:
            raise ParameterError(f"alpha must be >= 1, got {self.alpha}.")
        # h(1) = 1 / c1 must be a probability.
        if self.c1 < 1:
            raise ParameterError(f"c1 must be >= 1, got {self.c1}.")
        if self.c2 <= 0:
            raise ParameterError(f"c2 must be positive, got {self.c2}.")
        validate_fractions(self.fractions)
        if self.walk_half_width < 0:
            raise ParameterError("walk_half_width must be nonnegative.")
        if self.horizon < 1 or self.burn_in < 0:
            raise ParameterError("horizon must be positive and burn_in nonnegative.")

    def reset_probability(self, activity):
        """h(a) = a^c2 / c1."""
        return np.power(activity, self.c2) / self.c1

    def with_n_p(self, n_p):
        return replace(self, n_p=int(n_p))


@dataclass(frozen=True)
class WeightParams:
    q: float = 0.5
    kappa: float = 80.0
    eta: float = 3.3
    nu_min: float = 1.0

    def __post_init__(self):
        if not 0 <= self.q <= 1:
            raise ParameterError(f"q must lie in [0, 1], got {self.q}.")
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be positive, got {self.kappa}.")
        if self.eta <= 1:
            raise ParameterError(f"eta must be > 1, got {self.eta}.")
        if self.nu_min <= 0:
            raise ParameterError(f"nu_min must be positive, got {self.nu_min}.")

    def draw_multipliers(self, rng, size):
        """Pareto draws with density proportional to x^-eta on [nu_min, inf)."""
        return self.nu_min * (1.0 + rng.pareto(self.eta - 1.0, size))


@dataclass(frozen=True)
class BankState:
    id: int
    bank_type: BankType
    activity: float
    angle: float


@dataclass
class DailyNetwork:
    """One day's simple directed graph; ``edges`` maps (lender, borrower) to weight."""
    day: int
    edges: dict = field(default_factory=dict)
    weighted: bool = True

    def __post_init__(self):
        for (lender, borrower), weight in self.edges.items():
            if lender == borrower:
                raise ConsistencyError(f"Self-loop on bank {lender} at day {self.day}.")
            if not weight > 0:
                raise ConsistencyError(f"Nonpositive weight on edge {lender}->{borrower} at day {self.day}.")

    def active_banks(self):
        banks = set()
        for lender, borrower in self.edges:
            banks.add(lender)
            banks.add(borrower)
        return banks

    @property
    def n_edges(self):
        return len(self.edges)


@dataclass(frozen=True)
class Simulated:
    params: ModelParams
    weights: WeightParams | None
    seed: object


@dataclass(frozen=True)
class Ingested:
    source: str
    bank_labels: tuple = ()
    dates: tuple = ()


@dataclass
class NetworkSeries:
    networks: list
    provenance: object
    bank_ids: tuple = ()
    bank_types: dict | None = None

    def __post_init__(self):
        days = [net.day for net in self.networks]
        if any(b <= a for a, b in zip(days, days[1:])):
            raise ConsistencyError("Day indices of a series must be strictly increasing.")
        if isinstance(self.provenance, Simulated) and days and days[-1] - days[0] != len(days) - 1:
            raise ConsistencyError("Simulated series must have contiguous day indices.")

    def __len__(self):
        return len(self.networks)

    @property
    def n_days(self):
        return len(self.networks)

    @property
    def days(self):
        return [net.day for net in self.networks]

    @property
    def first_day(self):
        return self.networks[0].day

    @property
    def weighted(self):
        return bool(self.networks) and all(net.weighted for net in self.networks)

    def to_frame(self):
        """Edge list as a DataFrame with columns day, lender, borrower, weight."""
        rows = [
            (net.day, lender, borrower, weight)
            for net in self.networks
            for (lender, borrower), weight in sorted(net.edges.items())
        ]
        frame = pd.DataFrame(rows, columns=['day', 'lender', 'borrower', 'weight'])
        return frame.astype({'day': 'int64', 'lender': 'int64', 'borrower': 'int64', 'weight': 'float64'})


def assign_types(n_p, fractions, rng):
    """
    Draw the fixed bank types.

    Counts follow largest-remainder rounding of f * n_p so they sum to n_p;
    remainder ties go to the earlier type in (B, L, D) order. The assignment
    order is a random permutation.

    Args:
        n_p (int): Number of banks.
        fractions (tuple): (f_B, f_L, f_D).
        rng (numpy.random.Generator): Random source.

    Returns:
        list: n_p BankType values, index k belonging to bank id k + 1.

    Raises:
        ParameterError: On invalid fractions or n_p < 1.
    """
    validate_fractions(fractions)
    if n_p < 1:
        raise ParameterError(f"n_p must be >= 1, got {n_p}.")

    raw = [f * n_p for f in fractions]
    counts = [math.floor(r + 1e-9) for r in raw]
    order = sorted(range(3), key=lambda k: (-(raw[k] - counts[k]), k))
    for k in order[:n_p - sum(counts)]:
        counts[k] += 1

    pool = [bank_type for bank_type, count in zip(TYPE_ORDER, counts) for _ in range(count)]
    return [pool[k] for k in rng.permutation(n_p)]


def is_admissible(lender_type, borrower_type):
    """Whether a lender of one type may lend to a borrower of the other."""
    return (lender_type is not BankType.PURE_BORROWER
            and borrower_type is not BankType.PURE_LENDER
            and not (lender_type is BankType.BIDIRECTIONAL and borrower_type is BankType.BIDIRECTIONAL))


def admissibility_mask(types):
    """Boolean n x n matrix of admissible ordered pairs (diagonal excluded)."""
    codes = np.array([t.value for t in types])
    can_lend = codes != BankType.PURE_BORROWER.value
    can_borrow = codes != BankType.PURE_LENDER.value
    bidirectional = codes == BankType.BIDIRECTIONAL.value
    mask = np.outer(can_lend, can_borrow) & ~np.outer(bidirectional, bidirectional)
    np.fill_diagonal(mask, False)
    return mask


def edge_probability(a_i, a_j, type_i, type_j, alpha):
    """
    Probability that bank i lends to bank j today.

    Args:
        a_i (float): Lender activity in [0, 1].
        a_j (float): Borrower activity in [0, 1].
        type_i (BankType): Lender type.
        type_j (BankType): Borrower type.
        alpha (float): Kernel exponent, >= 1.

    Returns:
        float: (a_i a_j)^alpha for admissible pairs, else 0.

    Raises:
        DomainError: If an activity lies outside [0, 1] or alpha < 1.
    """
    if not (0 <= a_i <= 1 and 0 <= a_j <= 1):
        raise DomainError(f"Activities must lie in [0, 1], got ({a_i}, {a_j}).")
    if alpha < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}.")
    if not is_admissible(type_i, type_j):
        return 0.0
    return (a_i * a_j) ** alpha


def _sample_edges(activity, mask, alpha, rng):
    """Draw one day's edges; returns (row indices, column indices, probabilities)."""
    n = activity.size
    uniforms = rng.random((n, n))
    probs = np.power(np.outer(activity, activity), alpha)
    probs[~mask] = 0.0
    rows, cols = np.nonzero(uniforms < probs)
    return rows, cols, probs[rows, cols]


def generate_daily_edges(states, alpha, rng, day=0):
    """
    Sample one day's unweighted network from the current bank states.

    Every admissible ordered pair gets an independent Bernoulli draw; nothing
    is carried over from previous days.

    Args:
        states (list): BankState per bank.
        alpha (float): Kernel exponent.
        rng (numpy.random.Generator): Random source.
        day (int, optional): Day index stored on the network.

    Returns:
        DailyNetwork: Edges with unit placeholder weights, ``weighted=False``.
    """
    activity = np.array([s.activity for s in states], dtype=float)
    if np.any((activity < 0) | (activity > 1)):
        raise DomainError("Bank activities must lie in [0, 1].")
    ids = [s.id for s in states]
    rows, cols, _ = _sample_edges(activity, admissibility_mask([s.bank_type for s in states]), alpha, rng)
    edges = {(ids[i], ids[j]): 1.0 for i, j in zip(rows, cols)}
    return DailyNetwork(day=day, edges=edges, weighted=False)


def walk_step(angle, epsilon):
    """Angle after a walk increment epsilon, and the resulting activity |cos(angle)|."""
    new_angle = angle + 2.0 * np.pi * epsilon
    return new_angle, np.abs(np.cos(new_angle))


def update_activity(state, params, rng):
    """
    Move one bank's activity to the next day.

    With probability h(a) the activity resets to a uniform draw a' and the angle
    to arccos(a'); otherwise the angle takes a walk step.

    Args:
        state (BankState): Current state.
        params (ModelParams): Model parameters.
        rng (numpy.random.Generator): Random source.

    Returns:
        BankState: The updated state.
    """
    if rng.random() < params.reset_probability(state.activity):
        fresh = rng.random()
        return replace(state, activity=float(fresh), angle=float(np.arccos(fresh)))
    epsilon = rng.uniform(-params.walk_half_width, params.walk_half_width)
    angle, activity = walk_step(state.angle, epsilon)
    return replace(state, activity=float(activity), angle=float(angle))


def update_activities(activity, angle, params, rng):
    """
    Batch form of update_activity for arrays of banks.

    Draws reset uniforms, replacement activities and walk increments for all
    banks, in that order, whichever branch each bank takes.

    Returns:
        tuple: (activity, angle) arrays for the next day.
    """
    n = activity.size
    resets = rng.random(n) < params.reset_probability(activity)
    fresh = rng.random(n)
    epsilon = rng.uniform(-params.walk_half_width, params.walk_half_width, n)
    walked_angle, walked_activity = walk_step(angle, epsilon)
    new_angle = np.where(resets, np.arccos(fresh), walked_angle)
    new_activity = np.where(resets, fresh, walked_activity)
    return new_activity, new_angle


def assign_weights(prev, current, wp, edge_probs, rng):
    """
    Attach weights to today's edges.

    An edge that also existed yesterday keeps yesterday's weight with
    probability 1 - q; otherwise (and always for new edges) the weight is
    kappa * nu * p with nu drawn from the Pareto law of ``wp``. Persistence
    draws come first (edges in lexicographic order), then the multipliers.

    Args:
        prev (DailyNetwork or None): Yesterday's weighted network.
        current (DailyNetwork): Today's network with placeholder weights.
        wp (WeightParams): Weight parameters.
        edge_probs (dict): (lender, borrower) -> today's edge probability.
        rng (numpy.random.Generator): Random source.

    Returns:
        DailyNetwork: Today's weighted network.

    Raises:
        ConsistencyError: If an edge has no probability or ``prev`` is unweighted.
    """
    if prev is not None and not prev.weighted:
        raise ConsistencyError("Weight persistence needs a weighted previous network.")
    edges = sorted(current.edges)
    missing = [e for e in edges if e not in edge_probs]
    if missing:
        raise ConsistencyError(f"No edge probability for {len(missing)} edge(s), e.g. {missing[0]}.")

    previous = prev.edges if prev is not None else {}
    persisted = [e for e in edges if e in previous]
    keep = dict(zip(persisted, rng.random(len(persisted)) >= wp.q))

    redraw = [e for e in edges if not keep.get(e, False)]
    multipliers = wp.draw_multipliers(rng, len(redraw))

    weights = {e: previous[e] for e in persisted if keep[e]}
    for e, nu in zip(redraw, multipliers):
        weights[e] = wp.kappa * float(nu) * float(edge_probs[e])
    return DailyNetwork(day=current.day, edges=dict(sorted(weights.items())), weighted=True)


def _initial_state(params, n, rng):
    types = assign_types(n, params.fractions, rng)
    activity = rng.random(n)
    return types, activity, np.arccos(activity)


def _run(params, wp, seed, weighted, n_p_path=None, fast_burn_in=False):
    """Shared simulation loop; returns (retained networks, types)."""
    if fast_burn_in and weighted:
        raise ParameterError("fast_burn_in needs an unweighted run.")
    if params.horizon <= params.burn_in:
        raise ParameterError(f"horizon ({params.horizon}) must exceed burn_in ({params.burn_in}).")
    if weighted and wp is None:
        raise ParameterError("Weighted simulation needs WeightParams.")

    n = params.n_p if n_p_path is None else int(max(n_p_path))
    rng = np.random.default_rng(seed)
    types, activity, angle = _initial_state(params, n, rng)
    mask = admissibility_mask(types)
    ids = np.arange(1, n + 1)

    networks = []
    prev = None
    for t in range(params.horizon):
        retained = t >= params.burn_in
        if fast_burn_in and not retained:
            activity, angle = update_activities(activity, angle, params, rng)
            continue
        day_activity = activity
        if n_p_path is not None:
            day_activity = activity.copy()
            day_activity[int(n_p_path[max(t - params.burn_in, 0)]):] = 0.0
        rows, cols, probs = _sample_edges(day_activity, mask, params.alpha, rng)

        if weighted or retained:
            pairs = list(zip(ids[rows].tolist(), ids[cols].tolist()))
            net = DailyNetwork(day=t - params.burn_in, edges=dict.fromkeys(pairs, 1.0), weighted=False)
            if weighted:
                net = assign_weights(prev, net, wp, dict(zip(pairs, probs.tolist())), rng)
                prev = net
            if retained:
                networks.append(net)

        activity, angle = update_activities(activity, angle, params, rng)

    bank_types = {int(i): bank_type for i, bank_type in zip(ids, types)}
    return networks, bank_types


def simulate_series(params, wp=None, seed=0, weighted=True, fast_burn_in=False):
    """
    Run the model for ``params.horizon`` days and keep the days after burn-in.

    Args:
        params (ModelParams): Model parameters.
        wp (WeightParams, optional): Weight parameters; required when weighted.
        seed (int or sequence of int): Seed of the run's single generator.
        weighted (bool, optional): Run the weight step. Default is True.
        fast_burn_in (bool, optional): Only evolve activities during burn-in,
            drawing no edges. Needs an unweighted run; the random stream then
            differs from the default run.

    Returns:
        NetworkSeries: horizon - burn_in networks with days 0, 1, ...

    Raises:
        ParameterError: If horizon <= burn_in.
    """
    networks, bank_types = _run(params, wp, seed, weighted, fast_burn_in=fast_burn_in)
    return NetworkSeries(
        networks=networks,
        provenance=Simulated(params, wp if weighted else None, seed),
        bank_ids=tuple(range(1, params.n_p + 1)),
        bank_types=bank_types,
    )


def simulate_varying_series(n_p_path, params, wp=None, seed=0, weighted=True, fast_burn_in=False):
    """
    Simulate with a day-dependent potential market size.

    A population of max(n_p_path) banks evolves; on retained day t only banks
    1..n_p_path[t] may trade. Burn-in days use n_p_path[0]. The run has
    burn_in + len(n_p_path) days.

    Args:
        n_p_path (sequence): N_P per retained day.
        params (ModelParams): Model parameters; n_p and horizon are ignored.
        wp (WeightParams, optional): Weight parameters.
        seed (int or sequence of int): Seed.
        weighted (bool, optional): Run the weight step.

    Returns:
        NetworkSeries: len(n_p_path) networks.
    """
    path = [int(v) for v in n_p_path]
    if not path or min(path) < 1:
        raise ParameterError("n_p_path must be a nonempty sequence of positive integers.")
    run_params = replace(params, n_p=max(path), horizon=params.burn_in + len(path))
    networks, bank_types = _run(run_params, wp, seed, weighted, n_p_path=path, fast_burn_in=fast_burn_in)
    return NetworkSeries(
        networks=networks,
        provenance=Simulated(run_params, wp if weighted else None, seed),
        bank_ids=tuple(range(1, max(path) + 1)),
        bank_types=bank_types,
    )


def simulate_untyped_nm(n_p, alpha, replicates, seed=0):
    """
    Single-day untyped, undirected fitness model with fresh uniform activities.

    Each unordered pair i < j links with probability (a_i a_j)^alpha.

    Returns:
        tuple: (N array, M array) over the replicates.
    """
    if n_p < 1 or replicates < 1:
        raise ParameterError("n_p and replicates must be positive.")
    rng = np.random.default_rng(seed)
    n_active = np.empty(replicates, dtype=np.int64)
    n_edges = np.empty(replicates, dtype=np.int64)
    for r in range(replicates):
        activity = rng.random(n_p)
        hits = np.triu(rng.random((n_p, n_p)) < np.power(np.outer(activity, activity), alpha), k=1)
        degree = hits.sum(axis=0) + hits.sum(axis=1)
        n_active[r] = np.count_nonzero(degree)
        n_edges[r] = hits.sum()
    return n_active, n_edges


def activity_trajectory(params, seed, days):
    """
    Activities of all banks over ``days`` days, without sampling edges.

    Uses the same initialization and batch update as the simulator.

    Returns:
        numpy.ndarray: Shape (days, n_p).
    """
    rng = np.random.default_rng(seed)
    _, activity, angle = _initial_state(params, params.n_p, rng)
    path = np.empty((days, params.n_p))
    for t in range(days):
        path[t] = activity
        activity, angle = update_activities(activity, angle, params, rng)
    return path


def nm_counts(net):
    """(N, M): active banks and edges of one day."""
    return len(net.active_banks()), net.n_edges


def type_violations(net, bank_types):
    """Edges of ``net`` that break the lending rules for ``bank_types`` (id -> BankType)."""
    return [
        (lender, borrower) for lender, borrower in net.edges
        if not is_admissible(bank_types[lender], bank_types[borrower])
    ]
