"""A posteriori verification of heat-equation approximations v = chi * f.

The candidate solution is a two-hidden-layer repu(n >= 3) network f multiplied
by the cutoff chi(x) = prod_{i < d-1} (1 - x_i^2), which enforces homogeneous
Dirichlet conditions on the spatial box U = [-1, 1]^(d-1).  The last input
axis is time.  Verification bounds the sup-in-time L^2 error against the
unknown true solution by

    sqrt(d)/(pi*sqrt(kappa)) * ||(d_t - kappa*Lap) v||_{L^2(U x [0,T])}
    + ||v(., 0) - g||_{L^2(U)}

and certifies both residual norms with midpoint quadrature whose error radii
come from the derivative envelopes of f combined, via the product rule, with
closed-form bounds on the derivatives of chi.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bounds import EnvelopeBatch, BoxSpec
from .derivatives import BatchJet, MultiIndex
from .errors import CapabilityError, GridMismatchError, ShapeError
from .model import REPU, NetworkParams, forward_batch
from .parallel import DEFAULT_CHUNK, KahanAccumulator, chunk_ranges, run_ordered
from .quadrature import GridDomain, NormCertificate, build_uniform_grid

SINE_PRODUCT = "sine_product"
ZERO_IC = "zero"

_EPS_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class InitialCondition:
    """Closed-form initial data with exact per-axis derivative sup bounds.

    ``sine_product``: g(x) = amplitude * prod_i sin(frequencies[i] * pi * x_i),
    which vanishes on the boundary of [-1, 1]^(d-1) and has
    sup |d_i g| <= amplitude * frequencies[i] * pi.  ``zero``: g = 0.
    """

    kind: str
    amplitude: float = 1.0
    frequencies: tuple = ()

    def __post_init__(self):
        if self.kind not in (SINE_PRODUCT, ZERO_IC):
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        freqs = tuple(int(m) for m in self.frequencies)
        if self.kind == SINE_PRODUCT:
            if not freqs or any(m < 1 for m in freqs):
                raise ValueError("sine_product needs positive integer frequencies")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    def spatial_dim(self) -> int | None:
        return len(self.frequencies) if self.kind == SINE_PRODUCT else None

    def values(self, x_space: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x_space, dtype=float))
        if self.kind == ZERO_IC:
            return np.zeros(x.shape[0])
        out = np.full(x.shape[0], self.amplitude)
        for i, m in enumerate(self.frequencies):
            out = out * np.sin(m * math.pi * x[:, i])
        return out

    def gradient_sup_bounds(self, spatial_dim: int) -> np.ndarray:
        if self.kind == ZERO_IC:
            return np.zeros(spatial_dim)
        return np.array(
            [abs(self.amplitude) * m * math.pi for m in self.frequencies], dtype=float
        )

    def to_dict(self) -> dict:
        if self.kind == ZERO_IC:
            return {"kind": ZERO_IC}
        return {
            "kind": SINE_PRODUCT,
            "amplitude": self.amplitude,
            "frequencies": list(self.frequencies),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InitialCondition":
        return cls(
            kind=d["kind"],
            amplitude=d.get("amplitude", 1.0),
            frequencies=tuple(d.get("frequencies", ())),
        )


@dataclass(frozen=True)
class HeatProblem:
    """Heat equation on [-1,1]^(d-1) x [0,T] with diffusivity kappa and data g."""

    d: int
    kappa: float
    T: float
    initial: InitialCondition

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need at least one space and one time dimension")
        if not self.kappa > 0 or not self.T > 0:
            raise ValueError("kappa and T must be positive")
        sd = self.initial.spatial_dim()
        if sd is not None and sd != self.d - 1:
            raise ValueError("initial condition frequencies must cover d-1 axes")

    @property
    def spatial_dim(self) -> int:
        return self.d - 1

    @property
    def time_axis(self) -> int:
        return self.d - 1

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "kappa": self.kappa,
            "T": self.T,
            "initial": self.initial.to_dict(),
        }


@dataclass(frozen=True)
class VerifySettings:
    """Tolerance and refinement budget for the verification loop."""

    eps0: float
    eps_init: float | None = None
    max_refinements: int = 6


def load_problem_config(path):
    """Read a problem config JSON: {kappa, T, d, initial, eps0, eps_init?, max_refinements?}."""
    with open(path) as fh:
        raw = json.load(fh)
    problem = HeatProblem(
        d=int(raw["d"]),
        kappa=float(raw["kappa"]),
        T=float(raw["T"]),
        initial=InitialCondition.from_dict(raw["initial"]),
    )
    settings = VerifySettings(
        eps0=float(raw["eps0"]),
        eps_init=float(raw["eps_init"]) if raw.get("eps_init") is not None else None,
        max_refinements=int(raw.get("max_refinements", 6)),
    )
    return problem, settings


# --- the cutoff chi --------------------------------------------------------------


def chi(x) -> float:
    """Cutoff prod_{i < d-1} (1 - x_i^2); the last axis (time) is untouched."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ShapeError("chi expects a single space-time point with d >= 2")
    return float(np.prod(1.0 - x[:-1] ** 2))


def chi_derivative_supnorms(d: int) -> dict:
    """Sup norms of chi and its derivatives on [-1,1]^(d-1), any time."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return {
        "chi": 1.0,
        "dj_chi": 2.0,
        "dj_di_chi": 4.0,
        "laplacian_chi": 2.0 * (d - 1),
        "dj_laplacian_chi": 4.0 * (d - 2),
        "dt_chi": 0.0,
    }


def _chi_parts(x_space: np.ndarray):
    """chi, d_i chi, d_i^2 chi evaluated on rows of x_space (spatial only)."""
    one_minus = 1.0 - x_space**2
    total = np.prod(one_minus, axis=1)
    sd = x_space.shape[1]
    grad = np.empty_like(x_space)
    second = np.empty_like(x_space)
    for i in range(sd):
        rest = np.prod(np.delete(one_minus, i, axis=1), axis=1) if sd > 1 else 1.0
        grad[:, i] = -2.0 * x_space[:, i] * rest
        second[:, i] = -2.0 * rest
    return total, grad, second


def _check_heat_net(net: NetworkParams, problem: HeatProblem) -> None:
    if net.input_dim != problem.d:
        raise ShapeError(
            f"network input dimension {net.input_dim} does not match problem d={problem.d}"
        )
    if net.depth != 2:
        raise CapabilityError("heat verification requires two hidden layers")
    if net.activation.kind != REPU or net.activation.order < 3:
        raise CapabilityError("heat verification requires a repu activation of order >= 3")


# --- residual values --------------------------------------------------------------


def _phi_pde_from_jet(jet: BatchJet, problem: HeatProblem) -> np.ndarray:
    """Assemble (d_t - kappa*Lap)(chi f) from exact partials of f at jet points."""
    d = problem.d
    X = jet.X
    mi = lambda *axes: MultiIndex.from_axes(d, axes)
    tau = problem.time_axis
    f_val = jet.partial(mi())
    f_t = jet.partial(mi(tau))
    chi_val, chi_grad, chi_second = _chi_parts(X[:, :-1])
    lap_chi = np.sum(chi_second, axis=1)
    cross = 0.0
    lap_f = 0.0
    for i in range(problem.spatial_dim):
        cross = cross + chi_grad[:, i] * jet.partial(mi(i))
        lap_f = lap_f + jet.partial(mi(i, i))
    return chi_val * f_t - problem.kappa * (lap_chi * f_val + 2.0 * cross + chi_val * lap_f)


def phi_pde_values(net: NetworkParams, problem: HeatProblem, X: np.ndarray) -> np.ndarray:
    """(d_t - kappa*Lap)(chi f) on rows of X, assembled by the product rule."""
    _check_heat_net(net, problem)
    return _phi_pde_from_jet(BatchJet(net, X), problem)


def phi_pde(net: NetworkParams, problem: HeatProblem, x) -> float:
    return float(phi_pde_values(net, problem, np.atleast_2d(x))[0])


def _with_time_zero(x_space: np.ndarray) -> np.ndarray:
    x_space = np.atleast_2d(np.asarray(x_space, dtype=float))
    return np.hstack([x_space, np.zeros((x_space.shape[0], 1))])


def _phi_init_from_values(f_at_tilde: np.ndarray, x_space: np.ndarray, problem: HeatProblem) -> np.ndarray:
    chi_val = np.prod(1.0 - x_space**2, axis=1)
    return chi_val * f_at_tilde - problem.initial.values(x_space)


def phi_init_values(net: NetworkParams, problem: HeatProblem, x_space: np.ndarray) -> np.ndarray:
    """(chi f)(., 0) - g on rows of the spatial batch."""
    _check_heat_net(net, problem)
    x_space = np.atleast_2d(np.asarray(x_space, dtype=float))
    _, f_val = forward_batch(net, _with_time_zero(x_space))
    return _phi_init_from_values(f_val, x_space, problem)


def phi_init(net: NetworkParams, problem: HeatProblem, x_space) -> float:
    return float(phi_init_values(net, problem, np.atleast_2d(x_space))[0])


# --- gradient bounds for the residuals --------------------------------------------


def _phi_pde_gradient_bound_arrays(
    batch: EnvelopeBatch, problem: HeatProblem
) -> np.ndarray:
    """Bound on ||grad phi_pde|| over each box of the batch.

    Component-wise product-rule expansion of (d_t - kappa*Lap)(chi f), with
    each chi-derivative replaced by its sup norm and each f-derivative by its
    envelope over the box.  The time component keeps the full coefficient
    2 * ||d_i chi|| = 4 on the mixed space-time terms.
    """
    d = problem.d
    tau = problem.time_axis
    kappa = problem.kappa
    mi = lambda *axes: MultiIndex.from_axes(d, axes)
    t = lambda *axes: batch.total(mi(*axes))
    t0 = t()
    sq = 0.0
    for j in range(problem.spatial_dim):
        inner = 0.0
        for i in range(problem.spatial_dim):
            inner = inner + (
                4.0 * t(i) + 2.0 * t(i, j) + t(i, i) + 0.5 * t(i, i, j)
            )
        phi_j = (
            2.0 * t(tau)
            + t(j, tau)
            + kappa
            * (4.0 * (d - 2) * t0 + 2.0 * (d - 1) * t(j) + 2.0 * inner)
        )
        sq = sq + phi_j**2
    inner_t = 0.0
    for i in range(problem.spatial_dim):
        inner_t = inner_t + 4.0 * t(i, tau) + t(i, i, tau)
    phi_tau = t(tau, tau) + kappa * (2.0 * (d - 1) * t(tau) + inner_t)
    return np.sqrt(sq + phi_tau**2)


def phi_pde_gradient_bound(net: NetworkParams, problem: HeatProblem, box: BoxSpec) -> float:
    """Certified bound on ||grad phi_pde|| over one space-time box."""
    _check_heat_net(net, problem)
    batch = EnvelopeBatch(net, box.center[None, :], box.side, max_order=3)
    return float(_phi_pde_gradient_bound_arrays(batch, problem)[0])


def _phi_init_gradient_bound_arrays(
    batch: EnvelopeBatch, problem: HeatProblem
) -> np.ndarray:
    """Bound on ||grad phi_0|| over each spatial box of the batch.

    The batch must be centered at the time-zero lifts (y, 0).  Per spatial
    axis, |d_i (chi f)| <= 2 * total(0) + total(e_i); the data part adds the
    Euclidean norm of the per-axis gradient bounds of g.
    """
    d = problem.d
    mi = lambda *axes: MultiIndex.from_axes(d, axes)
    t0 = batch.total(mi())
    sq = 0.0
    for i in range(problem.spatial_dim):
        sq = sq + (2.0 * t0 + batch.total(mi(i))) ** 2
    g_norm = float(
        np.linalg.norm(problem.initial.gradient_sup_bounds(problem.spatial_dim))
    )
    return np.sqrt(sq) + g_norm


def phi_init_gradient_bound(net: NetworkParams, problem: HeatProblem, space_box: BoxSpec) -> float:
    """Certified bound on ||grad phi_0|| over one spatial box."""
    _check_heat_net(net, problem)
    if space_box.dim != problem.spatial_dim:
        raise ShapeError("initial-data boxes live in the spatial domain")
    tilde = _with_time_zero(space_box.center[None, :])
    batch = EnvelopeBatch(net, tilde, space_box.side, max_order=1)
    return float(_phi_init_gradient_bound_arrays(batch, problem)[0])


# --- grids -------------------------------------------------------------------------


def admissible_eps(problem: HeatProblem, eps: float) -> bool:
    """True when eps tiles both the space extent 2 and the time extent T."""
    if eps <= 0:
        return False
    for extent in (2.0, problem.T):
        ratio = extent / eps
        if abs(ratio - round(ratio)) > _EPS_MATCH_RTOL * max(1.0, ratio):
            return False
    return True


def default_eps_init(problem: HeatProblem, eps0: float) -> float:
    """Largest admissible eps <= eps0 of the form 2/N_x = T/N_T."""
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    n_x = max(1, math.ceil(2.0 / eps0 - _EPS_MATCH_RTOL))
    for n in range(n_x, n_x + 1_000_000):
        eps = 2.0 / n
        if eps <= eps0 * (1.0 + _EPS_MATCH_RTOL) and admissible_eps(problem, eps):
            return eps
    raise GridMismatchError(
        f"no admissible grid size <= {eps0} found for T={problem.T}"
    )


def spacetime_grid(problem: HeatProblem, eps: float) -> GridDomain:
    """Uniform grid of [-1,1]^(d-1) x [0,T] with cube side eps."""
    lower = [-1.0] * problem.spatial_dim + [0.0]
    upper = [1.0] * problem.spatial_dim + [problem.T]
    return build_uniform_grid(lower, upper, eps)


def face_grid(problem: HeatProblem, eps: float, grid: GridDomain | None = None) -> GridDomain:
    """Spatial grid of U extracted from the first time slab of the space-time grid.

    A spatial center y belongs to the face grid exactly when (y, eps/2) is a
    space-time center.
    """
    if grid is None:
        grid = spacetime_grid(problem, eps)
    mask = np.abs(grid.centers[:, -1] - eps / 2.0) <= _EPS_MATCH_RTOL * eps
    centers = grid.centers[mask][:, :-1]
    if centers.shape[0] == 0:
        raise GridMismatchError("space-time grid has no first-slab centers")
    return GridDomain(centers=centers, sides=np.full(centers.shape[0], float(eps)))


# --- residual norm certificates -----------------------------------------------------


def _pde_chunk(args):
    net, problem, centers, eps = args
    d = problem.d
    batch = EnvelopeBatch(net, centers, eps, max_order=3)
    phi = _phi_pde_from_jet(batch.jet, problem)
    grad_bound = _phi_pde_gradient_bound_arrays(batch, problem)
    estimate = eps**d * phi**2
    radius = (
        eps ** (d + 1)
        * math.sqrt(d)
        * (np.abs(phi) + eps * math.sqrt(d) / 2.0 * grad_bound)
        * grad_bound
    )
    return float(np.sum(estimate)), float(np.sum(radius))


def _init_chunk(args):
    net, problem, centers, eps = args
    sd = problem.spatial_dim
    tilde = _with_time_zero(centers)
    batch = EnvelopeBatch(net, tilde, eps, max_order=1)
    phi = _phi_init_from_values(batch.jet.outputs, centers, problem)
    grad_bound = _phi_init_gradient_bound_arrays(batch, problem)
    estimate = eps**sd * phi**2
    radius = (
        eps ** (sd + 1)
        * math.sqrt(sd)
        * (np.abs(phi) + eps * math.sqrt(sd) / 2.0 * grad_bound)
        * grad_bound
    )
    return float(np.sum(estimate)), float(np.sum(radius))


def _accumulate(worker, tasks, workers):
    acc_i, acc_r = KahanAccumulator(), KahanAccumulator()
    for part_i, part_r in run_ordered(worker, tasks, workers):
        acc_i.add(part_i)
        acc_r.add(part_r)
    return acc_i.total, acc_r.total


def pde_residual_certificate(
    net: NetworkParams,
    problem: HeatProblem,
    eps: float,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    grid: GridDomain | None = None,
) -> NormCertificate:
    """Certified squared L^2 norm of the PDE residual over U x [0, T]."""
    _check_heat_net(net, problem)
    start = time.perf_counter()
    if grid is None:
        grid = spacetime_grid(problem, eps)
    tasks = [
        (net, problem, grid.centers[a:b], float(eps))
        for a, b in chunk_ranges(grid.n_boxes, chunk)
    ]
    total_i, total_r = _accumulate(_pde_chunk, tasks, workers)
    return NormCertificate(
        p=2,
        alpha=None,
        estimate=total_i,
        error_bound=total_r,
        eps=float(eps),
        n_boxes=grid.n_boxes,
        wall_time_ms=(time.perf_counter() - start) * 1e3,
    )


def init_residual_certificate(
    net: NetworkParams,
    problem: HeatProblem,
    eps: float,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    grid: GridDomain | None = None,
) -> NormCertificate:
    """Certified squared L^2 norm of the initial-data residual over U."""
    _check_heat_net(net, problem)
    start = time.perf_counter()
    if grid is None:
        if not admissible_eps(problem, eps):
            raise GridMismatchError(f"eps={eps} does not tile the space-time domain")
        grid = face_grid(problem, eps)
    tasks = [
        (net, problem, grid.centers[a:b], float(eps))
        for a, b in chunk_ranges(grid.n_boxes, chunk)
    ]
    total_i, total_r = _accumulate(_init_chunk, tasks, workers)
    return NormCertificate(
        p=2,
        alpha=None,
        estimate=total_i,
        error_bound=total_r,
        eps=float(eps),
        n_boxes=grid.n_boxes,
        wall_time_ms=(time.perf_counter() - start) * 1e3,
    )


@dataclass(frozen=True)
class ResidualCertificates:
    """The two residual-norm certificates entering the energy estimate."""

    pde: NormCertificate
    init: NormCertificate
    eps: float

    def to_json_dict(self) -> dict:
        return {
            "eps": self.eps,
            "pde": self.pde.to_json_dict(),
            "init": self.init.to_json_dict(),
        }


def residual_norm_certificates(
    net: NetworkParams,
    problem: HeatProblem,
    eps: float,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> ResidualCertificates:
    """Both residual certificates on the shared admissible grid of size eps."""
    if not admissible_eps(problem, eps):
        raise GridMismatchError(
            f"eps={eps} must tile both the space extent 2 and the time extent T={problem.T}"
        )
    st_grid = spacetime_grid(problem, eps)
    pde = pde_residual_certificate(net, problem, eps, workers, chunk, grid=st_grid)
    init = init_residual_certificate(
        net, problem, eps, workers, chunk, grid=face_grid(problem, eps, st_grid)
    )
    return ResidualCertificates(pde=pde, init=init, eps=float(eps))


# --- energy estimate and verification loops -----------------------------------------


def energy_constant(problem: HeatProblem) -> float:
    """Constant sqrt(d)/(pi*sqrt(kappa)) multiplying the PDE residual norm."""
    return math.sqrt(problem.d) / (math.pi * math.sqrt(problem.kappa))


def energy_error_bound(certs: ResidualCertificates, problem: HeatProblem) -> float:
    """Upper bound on sup_{0<=t<=T} ||u - chi f||_{L^2(U)} from the certificates.

    Uses the rigorous norm upper endpoints (I + R)^(1/2) of both residual
    certificates, which dominate the exact residual norms.
    """
    return energy_constant(problem) * certs.pde.norm_upper + certs.init.norm_upper


class Verdict(Enum):
    CERTIFIED = "certified"
    NOT_CERTIFIED = "not_certified"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class VerificationOutcome:
    """Result of the refinement loop for one candidate network."""

    verdict: Verdict
    certified_bound: float
    eps_final: float
    iterations: int
    certificates: ResidualCertificates
    history: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "certified_bound": self.certified_bound,
            "eps_final": self.eps_final,
            "iterations": self.iterations,
            "certificates": self.certificates.to_json_dict(),
            "history": list(self.history),
        }


def _history_row(eps: float, certs: ResidualCertificates, bound: float) -> dict:
    return {
        "eps": eps,
        "I_pde": certs.pde.estimate,
        "R_pde": certs.pde.error_bound,
        "I_init": certs.init.estimate,
        "R_init": certs.init.error_bound,
        "bound": bound,
    }


class _Candidate:
    """Refinement state of one network inside the verification loops."""

    def __init__(self, net, eps):
        self.net = net
        self.eps = eps
        self.history = []
        self.iterations = 0
        self.best = None  # (bound, eps, certs)

    def step(self, problem, workers, chunk):
        certs = residual_norm_certificates(
            self.net, problem, self.eps, workers=workers, chunk=chunk
        )
        bound = energy_error_bound(certs, problem)
        self.iterations += 1
        self.history.append(_history_row(self.eps, certs, bound))
        if self.best is None or bound < self.best[0]:
            self.best = (bound, self.eps, certs)
        current = (bound, self.eps, certs)
        self.eps /= 2.0
        return current

    def outcome(self, verdict, current=None) -> VerificationOutcome:
        bound, eps, certs = current if current is not None else self.best
        return VerificationOutcome(
            verdict=verdict,
            certified_bound=bound,
            eps_final=eps,
            iterations=self.iterations,
            certificates=certs,
            history=tuple(self.history),
        )


def _resolve_eps_init(problem, eps0, eps_init):
    if eps_init is None:
        return default_eps_init(problem, eps0)
    if eps_init > eps0 * (1.0 + _EPS_MATCH_RTOL):
        raise ValueError("eps_init must not exceed the target tolerance eps0")
    if not admissible_eps(problem, eps_init):
        raise GridMismatchError(f"eps_init={eps_init} does not tile the domain")
    return float(eps_init)


def local_verify(
    net: NetworkParams,
    problem: HeatProblem,
    eps0: float,
    eps_init: float | None = None,
    max_refinements: int = 6,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> VerificationOutcome:
    """Refine the grid until the certified error bound drops below eps0.

    Runs at most 1 + max_refinements grid sizes, halving eps each round.  The
    loop cannot reject a candidate; exhausting the budget reports the best
    bound found with verdict BUDGET_EXHAUSTED.
    """
    _check_heat_net(net, problem)
    cand = _Candidate(net, _resolve_eps_init(problem, eps0, eps_init))
    for _ in range(max_refinements + 1):
        current = cand.step(problem, workers, chunk)
        if current[0] < eps0:
            return cand.outcome(Verdict.CERTIFIED, current)
    return cand.outcome(Verdict.BUDGET_EXHAUSTED)


def global_verify(
    nets,
    problem: HeatProblem,
    eps0: float,
    eps_init: float | None = None,
    max_refinements: int = 6,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
):
    """Fair search over candidate networks; returns (index, outcome).

    Candidates advance one refinement step per round (breadth-first), so one
    hard candidate cannot starve the rest.  The first certified candidate wins;
    if every budget runs out, the index with the smallest bound is reported
    with verdict BUDGET_EXHAUSTED.
    """
    nets = list(nets)
    if not nets:
        raise ValueError("need at least one candidate network")
    for net in nets:
        _check_heat_net(net, problem)
    eps_start = _resolve_eps_init(problem, eps0, eps_init)
    cands = [_Candidate(net, eps_start) for net in nets]
    for _ in range(max_refinements + 1):
        for idx, cand in enumerate(cands):
            current = cand.step(problem, workers, chunk)
            if current[0] < eps0:
                return idx, cand.outcome(Verdict.CERTIFIED, current)
    best_idx = min(range(len(cands)), key=lambda i: cands[i].best[0])
    return best_idx, cands[best_idx].outcome(Verdict.BUDGET_EXHAUSTED)
