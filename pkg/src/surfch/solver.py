"""Implicit time stepping for the surface phase-field system.

Each step advects the mesh to the new time, reassembles the lumped mass and
stiffness matrices there, and solves a 2N x 2N nonlinear block system for the
order parameter alpha and the chemical potential beta:

    row 1:  Mbar a + tau A b                      = rhs
    row 2:  (-eps A + Mbar/eps) a + Mbar b        = (theta/(2 eps)) Mbar f(a)

with rhs the lumped mass vector of the previous solution.  Vertices ride the
prescribed flow, so no advection terms appear, and summing row 1 against the
all-ones vector shows the lumped integral of alpha is conserved (the
stiffness matrix annihilates constants).

The logarithmic nonlinearity f blows up at +-1, so Newton updates are damped:
the step is halved until the trial iterate stays strictly inside the feasible
slab |a_i| <= 1 - feasibility_margin and the residual norm decreases.  When
no halved step decreases the residual (for steps large enough that the system
admits several solutions, the residual norm has local minima that are not
roots), the solve is retried by continuation in tau: the same system is
solved with the time step scaled down by powers of two until Newton converges,
then the scale is walked back up with each solution warm-starting the next.
The last solve uses the unscaled system, so an accepted step still satisfies
the original equations at the Newton tolerance while staying on the solution
branch connected to the previous state.  If continuation also stalls, the
step is re-solved with regularized potentials of decreasing width delta (each
solution warm-starting the next) and the exact system is attempted once more
from the regularized solution.

After acceptance, a constant shift of size (mass defect)/(total lumped mass)
restores the step-0 lumped integral exactly; the shift is far below the
Newton tolerance, and without it round-off in the per-step defect could
accumulate over long trajectories.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from . import assembly, diagnostics, geometry, meshing, potential

DEFAULT_DELTA_SCHEDULE = (1e-2, 1e-3, 1e-4)

# The continuation rescue for stalled solves halves the time-step scale at
# most this many times; the smallest warm-start system uses tau / 2**DEPTH.
TAU_CONTINUATION_MAX_DEPTH = 6

# Residual norms are measured relative to max(|rhs|, RESIDUAL_FLOOR) so the
# all-zero state converges instead of dividing by zero.
RESIDUAL_FLOOR = 1e-12


class StabilityWarning(UserWarning):
    """Time-step choice is outside a regime with a supporting estimate."""


class StepFailure(RuntimeError):
    """Raised when a time step cannot be solved, even after regularization."""

    def __init__(self, message: str, step: int, time: float,
                 residual_norm: float, worst_node: int):
        super().__init__(message)
        self.step = step
        self.time = time
        self.residual_norm = residual_norm
        self.worst_node = worst_node


@dataclasses.dataclass(frozen=True)
class SchemeParams:
    """Time discretization and Newton controls.

    The potential here is always the exact one (delta is None); regularization
    widths used by the fallback cascade live in delta_schedule, ordered from
    widest to narrowest.
    """

    potential: potential.PotentialParams
    tau: float
    t_end: float
    newton_tol: float = 1e-9
    newton_max_iters: int = 30
    damping_max_halvings: int = 20
    feasibility_margin: float = 1e-9
    delta_schedule: tuple[float, ...] = DEFAULT_DELTA_SCHEDULE

    def __post_init__(self) -> None:
        if self.potential.delta is not None:
            raise ValueError(
                "scheme params take the exact potential; regularization "
                "widths belong in delta_schedule"
            )
        if not (np.isfinite(self.tau) and self.tau > 0.0):
            raise ValueError(f"tau must be positive and finite, got {self.tau}")
        if not (np.isfinite(self.t_end) and self.t_end >= 0.0):
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if not self.newton_tol > 0.0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iters < 1:
            raise ValueError("newton_max_iters must be at least 1")
        if self.damping_max_halvings < 0:
            raise ValueError("damping_max_halvings must be nonnegative")
        if not 0.0 < self.feasibility_margin < 1.0:
            raise ValueError("feasibility_margin must lie in (0, 1)")
        schedule = tuple(float(d) for d in self.delta_schedule)
        if any(not 0.0 < d < 0.5 for d in schedule):
            raise ValueError("delta_schedule entries must lie in (0, 0.5)")
        if any(b >= a for a, b in zip(schedule, schedule[1:])):
            raise ValueError("delta_schedule must be strictly decreasing")
        object.__setattr__(self, "delta_schedule", schedule)


def stability_warnings(params: SchemeParams, h: float | None = None) -> list[str]:
    """Advisory messages for time steps outside the supported regimes."""
    eps = params.potential.epsilon
    tau = params.tau
    messages = []
    if tau >= 0.5 * eps**3:
        messages.append(
            f"tau = {tau:g} is not below 0.5*epsilon^3 = {0.5 * eps**3:g}; "
            "per-step energy decay is no longer guaranteed"
        )
    if tau >= 4.0 * eps**3:
        messages.append(
            f"tau = {tau:g} is not below 4*epsilon^3 = {4.0 * eps**3:g}; "
            "the nonlinear step may admit multiple solutions"
        )
    if h is not None and tau > 10.0 * h * h:
        messages.append(
            f"tau = {tau:g} exceeds 10*h^2 = {10.0 * h * h:g}; "
            "the time step is coarse relative to the mesh"
        )
    return messages


@dataclasses.dataclass(frozen=True)
class SolverState:
    """One accepted time level of a simulation."""

    step: int
    time: float
    mesh: meshing.SurfaceMesh
    u: assembly.FeFunction
    w: assembly.FeFunction
    # Lumped mass vector of u on this state's mesh; the right-hand side
    # consumed by the next step.
    rhs_cache: np.ndarray
    # Residual evaluations spent accepting this state (1 = converged at the
    # initial guess) and the running total over the trajectory.
    newton_iters: int
    newton_total: int
    # Lumped integral of the initial data; every later step is shifted to
    # reproduce it exactly.
    mass0: float

    @property
    def mass(self) -> float:
        return float(np.sum(self.rhs_cache))


@dataclasses.dataclass(frozen=True)
class AdmissibilityReport:
    passed: bool
    reasons: tuple[str, ...]
    max_abs_u: float
    mean_value: float
    mean_margin: float
    energy: float | None


class _NewtonStall(Exception):
    def __init__(self, residual_norm: float, alpha: np.ndarray, iters: int):
        self.residual_norm = residual_norm
        self.alpha = alpha
        self.iters = iters


def _potential_with(params: SchemeParams, delta: float | None) -> potential.PotentialParams:
    if delta is None:
        return params.potential
    return dataclasses.replace(params.potential, delta=delta)


def residual(alpha, beta, mbar_diag, stiffness, rhs_cache, params: SchemeParams,
             delta: float | None = None) -> np.ndarray:
    """Algebraic residual of the block system, length 2N.

    With delta None the exact logarithmic term is used and |alpha_i| < 1 is
    required; a regularization width replaces f by its globally defined
    counterpart.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    pp = _potential_with(params, delta)
    if delta is None:
        f_alpha = potential.f_log(alpha)
    else:
        f_alpha = potential.f_delta(alpha, pp)
    theta, eps = pp.theta, pp.epsilon
    row1 = mbar_diag * alpha + params.tau * (stiffness @ beta) - rhs_cache
    row2 = (
        -eps * (stiffness @ alpha)
        + (mbar_diag * alpha) / eps
        + mbar_diag * beta
        - (0.5 * theta / eps) * (mbar_diag * f_alpha)
    )
    return np.concatenate([row1, row2])


def jacobian(alpha, mbar_diag, stiffness, params: SchemeParams,
             delta: float | None = None) -> sparse.csc_array:
    """Block Jacobian of the residual with respect to (alpha, beta)."""
    alpha = np.asarray(alpha, dtype=float)
    pp = _potential_with(params, delta)
    if delta is None:
        f_prime = potential.f_log_prime(alpha)
    else:
        f_prime = potential.f_delta_prime(alpha, pp)
    theta, eps = pp.theta, pp.epsilon
    n = alpha.size
    mbar = sparse.dia_array((mbar_diag[None, :], [0]), shape=(n, n))
    lower_diag = mbar_diag / eps - (0.5 * theta / eps) * mbar_diag * f_prime
    block_21 = -eps * stiffness + sparse.dia_array(
        (lower_diag[None, :], [0]), shape=(n, n)
    )
    return sparse.block_array(
        [[mbar, params.tau * stiffness], [block_21, mbar]], format="csc"
    )


def chemical_potential(alpha, mbar_diag, stiffness, params: SchemeParams,
                       delta: float | None = None) -> np.ndarray:
    """beta solving the second block row exactly for the given alpha (the
    lumped mass matrix is diagonal, so this is a componentwise formula)."""
    alpha = np.asarray(alpha, dtype=float)
    pp = _potential_with(params, delta)
    if delta is None:
        f_alpha = potential.f_log(alpha)
    else:
        f_alpha = potential.f_delta(alpha, pp)
    return (
        pp.epsilon * (stiffness @ alpha) / mbar_diag
        + (0.5 * pp.theta / pp.epsilon) * f_alpha
        - alpha / pp.epsilon
    )


def _newton_solve(alpha0, mbar_diag, stiffness, rhs_cache,
                  params: SchemeParams, delta: float | None):
    """Damped Newton iteration; returns (alpha, beta, residual_evaluations).

    The second block row is linear in beta with a diagonal matrix, so beta is
    reset to exact consistency after every update and the residual reduces to
    the first row.  At such points the block correction for alpha coincides
    with the Newton step of the beta-eliminated system, while the transient
    second-row residual growth that a merit-decrease line search would choke
    on never appears.

    Damping exhaustion means the iterate sits at a local minimum of the
    residual norm that is not a root (the norm can have such points when the
    step admits several solutions); the iteration then stops rather than
    wander off the solution branch connected to the previous state.

    Raises _NewtonStall on damping exhaustion or when the iteration budget
    runs out.  A final chord correction with the last factorization pushes
    the residual toward round-off; it is kept only if it helps.
    """
    n = alpha0.size
    cap = 1.0 - params.feasibility_margin if delta is None else None
    scale = max(float(np.linalg.norm(rhs_cache)), RESIDUAL_FLOOR)
    alpha = np.array(alpha0, dtype=float)
    beta = chemical_potential(alpha, mbar_diag, stiffness, params, delta)

    r = residual(alpha, beta, mbar_diag, stiffness, rhs_cache, params, delta)
    rnorm = float(np.linalg.norm(r))
    iters = 1
    lu = None

    while rnorm > params.newton_tol * scale:
        if iters > params.newton_max_iters:
            raise _NewtonStall(rnorm, alpha, iters)
        lu = splu(jacobian(alpha, mbar_diag, stiffness, params, delta))
        correction = lu.solve(-r)
        d_alpha = correction[:n]

        accepted = False
        damping = 1.0
        for _ in range(params.damping_max_halvings + 1):
            trial_a = alpha + damping * d_alpha
            if cap is not None and float(np.max(np.abs(trial_a))) > cap:
                damping *= 0.5
                continue
            trial_b = chemical_potential(trial_a, mbar_diag, stiffness,
                                         params, delta)
            r_trial = residual(trial_a, trial_b, mbar_diag, stiffness,
                               rhs_cache, params, delta)
            r_trial_norm = float(np.linalg.norm(r_trial))
            if r_trial_norm < rnorm:
                alpha, beta = trial_a, trial_b
                r, rnorm = r_trial, r_trial_norm
                accepted = True
                break
            damping *= 0.5
        if not accepted:
            raise _NewtonStall(rnorm, alpha, iters)
        iters += 1

    if lu is not None and rnorm > 0.0:
        correction = lu.solve(-r)
        polished_a = alpha + correction[:n]
        if cap is None or float(np.max(np.abs(polished_a))) <= cap:
            polished_b = chemical_potential(polished_a, mbar_diag, stiffness,
                                            params, delta)
            r_polished = residual(polished_a, polished_b, mbar_diag, stiffness,
                                  rhs_cache, params, delta)
            if float(np.linalg.norm(r_polished)) <= rnorm:
                alpha, beta = polished_a, polished_b
    return alpha, beta, iters


def _tau_continuation(alpha0, mbar_diag, stiffness, rhs_cache,
                      params: SchemeParams, delta: float | None,
                      stall: _NewtonStall):
    """Warm-start rescue for a solve that stalled at large tau.

    For tau above roughly 4 eps^3 the step may admit several solutions and
    the residual norm develops non-root local minima where damped Newton
    parks.  The system depends on tau only through the tau A coupling, and
    as tau -> 0 its solution tends to the transported previous state, so
    solving with tau scaled down by powers of two (until Newton converges)
    and then doubling the scale back up tracks the solution branch connected
    to the previous state.  The last solve uses the original parameters, so
    an accepted step still satisfies the unmodified system at the Newton
    tolerance.

    Raises _NewtonStall carrying the first stall's residual and iterate
    (with every residual evaluation folded into the count) when no scaled
    system converges or the climb back stalls.
    """
    total = stall.iters
    warm = np.array(alpha0, dtype=float)
    scale = 1.0
    for _ in range(TAU_CONTINUATION_MAX_DEPTH):
        scale *= 0.5
        scaled = dataclasses.replace(params, tau=scale * params.tau)
        try:
            warm, _, iters = _newton_solve(
                warm, mbar_diag, stiffness, rhs_cache, scaled, delta
            )
            total += iters
            break
        except _NewtonStall as inner:
            total += inner.iters
    else:
        raise _NewtonStall(stall.residual_norm, stall.alpha, total)

    while scale < 1.0:
        scale = min(2.0 * scale, 1.0)
        scaled = params if scale == 1.0 else dataclasses.replace(
            params, tau=scale * params.tau
        )
        try:
            warm, beta, iters = _newton_solve(
                warm, mbar_diag, stiffness, rhs_cache, scaled, delta
            )
            total += iters
        except _NewtonStall as inner:
            raise _NewtonStall(
                stall.residual_norm, stall.alpha, total + inner.iters
            ) from None
    return warm, beta, total


def _advance(state: SolverState, family: geometry.SurfaceFamily,
             params: SchemeParams, delta: float | None,
             t_new: float | None, tau: float | None,
             allow_fallback: bool) -> SolverState:
    effective = params if tau is None else dataclasses.replace(params, tau=tau)
    if t_new is None:
        t_new = state.time + effective.tau
    mesh_new = meshing.advect_mesh(state.mesh, family, t_new)
    mbar = assembly.lumped_mass_diagonal(mesh_new)
    stiff = assembly.stiffness(mesh_new)
    rhs = state.rhs_cache

    cap = 1.0 - params.feasibility_margin
    alpha0 = state.u.coefficients
    if delta is None:
        alpha0 = np.clip(alpha0, -cap, cap)

    try:
        alpha, beta, iters = _newton_solve(
            alpha0, mbar, stiff, rhs, effective, delta
        )
    except _NewtonStall as first:
        try:
            alpha, beta, iters = _tau_continuation(
                alpha0, mbar, stiff, rhs, effective, delta, first
            )
        except _NewtonStall as stall:
            if delta is not None or not allow_fallback:
                raise StepFailure(
                    f"step {state.step + 1} at t = {t_new:g} did not converge "
                    f"(residual {stall.residual_norm:.3e})",
                    step=state.step + 1,
                    time=t_new,
                    residual_norm=stall.residual_norm,
                    worst_node=int(np.argmax(np.abs(stall.alpha))),
                ) from None
            alpha, beta, iters = _regularized_cascade(
                alpha0, mbar, stiff, rhs, effective, stall,
                failed_step=state.step + 1, failed_time=t_new,
            )

    # Exact restoration of the step-0 lumped integral (see module docstring).
    defect = float(np.dot(mbar, alpha)) - state.mass0
    alpha = alpha - defect / float(np.sum(mbar))
    if delta is None and float(np.max(np.abs(alpha))) > cap:
        alpha = np.clip(alpha, -cap, cap)

    return SolverState(
        step=state.step + 1,
        time=t_new,
        mesh=mesh_new,
        u=assembly.fe_function(mesh_new, alpha),
        w=assembly.fe_function(mesh_new, beta),
        rhs_cache=mbar * alpha,
        newton_iters=iters,
        newton_total=state.newton_total + iters,
        mass0=state.mass0,
    )


def _regularized_cascade(alpha0, mbar, stiff, rhs, params: SchemeParams,
                         stall: _NewtonStall, failed_step: int,
                         failed_time: float):
    """Walk delta_schedule downward, warm-starting each solve with the last,
    then re-attempt the exact system from the regularized solution."""
    total = stall.iters
    warm_a = np.array(alpha0, dtype=float)
    for position, delta in enumerate(params.delta_schedule):
        try:
            warm_a, _, iters = _newton_solve(
                warm_a, mbar, stiff, rhs, params, delta
            )
            total += iters
        except _NewtonStall as inner:
            total += inner.iters
            if position == 0:
                raise StepFailure(
                    f"step {failed_step} at t = {failed_time:g} did not "
                    f"converge for the widest regularization "
                    f"delta = {delta:g} (residual {inner.residual_norm:.3e})",
                    step=failed_step,
                    time=failed_time,
                    residual_norm=inner.residual_norm,
                    worst_node=int(np.argmax(np.abs(inner.alpha))),
                ) from None
            break

    cap = 1.0 - params.feasibility_margin
    warm_a = np.clip(warm_a, -cap, cap)
    try:
        alpha, beta, iters = _newton_solve(
            warm_a, mbar, stiff, rhs, params, None
        )
    except _NewtonStall as final:
        raise StepFailure(
            f"step {failed_step} at t = {failed_time:g} did not converge "
            f"even from the regularized warm start "
            f"(residual {final.residual_norm:.3e})",
            step=failed_step,
            time=failed_time,
            residual_norm=final.residual_norm,
            worst_node=int(np.argmax(np.abs(final.alpha))),
        ) from None
    return alpha, beta, total + iters


def newton_step(state: SolverState, family: geometry.SurfaceFamily,
                params: SchemeParams, t_new: float | None = None,
                tau: float | None = None) -> SolverState:
    """Advance one step with the exact potential, falling back to tau
    continuation and then the regularized cascade if the direct solve
    stalls."""
    return _advance(state, family, params, None, t_new, tau, allow_fallback=True)


def regularized_step(state: SolverState, family: geometry.SurfaceFamily,
                     params: SchemeParams, delta: float,
                     t_new: float | None = None,
                     tau: float | None = None) -> SolverState:
    """Advance one step with the width-delta regularized potential (no
    feasibility constraint, no fallback)."""
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 0.5), got {delta}")
    return _advance(state, family, params, delta, t_new, tau, allow_fallback=False)


def _coefficients(u0) -> np.ndarray:
    if isinstance(u0, assembly.FeFunction):
        return np.asarray(u0.coefficients, dtype=float)
    return np.asarray(u0, dtype=float)


def validate_initial(mesh: meshing.SurfaceMesh, family: geometry.SurfaceFamily,
                     u0, params: potential.PotentialParams | None = None
                     ) -> AdmissibilityReport:
    """Report-only admissibility check of initial data.

    Checks that the nodal values lie in [-1, 1], that the lumped mean value
    lies strictly inside (-1, 1), and that the discrete energy is finite.
    The reported energy uses the given potential parameters (a placeholder
    temperature/width pair if omitted; finiteness does not depend on them).
    """
    del family  # admissibility depends only on the mesh at its current time
    values = _coefficients(u0)
    if values.shape != (mesh.vertex_count,):
        raise ValueError("initial data must provide one value per vertex")

    reasons = []
    max_abs = float(np.max(np.abs(values)))
    if not np.all(np.isfinite(values)):
        reasons.append("initial data contains non-finite values")
        max_abs = float("inf")
    elif max_abs > 1.0:
        reasons.append(f"max |u0| = {max_abs:.6g} exceeds 1")

    lumped = assembly.lumped_mass_diagonal(mesh)
    if np.isfinite(max_abs):
        mean_value = float(np.dot(lumped, values) / np.sum(lumped))
    else:
        mean_value = float("nan")
    mean_margin = 1.0 - abs(mean_value)
    if not mean_margin > 0.0:
        reasons.append(
            f"lumped mean value {mean_value:.6g} is not strictly inside (-1, 1)"
        )

    energy = None
    if not reasons:
        pp = params if params is not None else potential.PotentialParams(0.5, 1.0)
        energy = diagnostics.gl_energy(mesh, values, pp, lumped_diag=lumped)
        if not np.isfinite(energy):
            reasons.append("discrete energy is not finite")

    return AdmissibilityReport(
        passed=not reasons,
        reasons=tuple(reasons),
        max_abs_u=max_abs,
        mean_value=mean_value,
        mean_margin=mean_margin,
        energy=energy,
    )


def initial_state(mesh: meshing.SurfaceMesh, family: geometry.SurfaceFamily,
                  params: SchemeParams, u0) -> SolverState:
    """Build the step-0 state, deriving the chemical potential from the order
    parameter by evaluating the second block row (a diagonal solve).

    The stepping scheme never consumes the previous chemical potential, but
    the trace wants a value from step 0 and Newton warm-starts from it.
    Nodal values at exactly +-1 are admissible initial data; the logarithm is
    evaluated at values nudged inside by the feasibility margin.
    """
    report = validate_initial(mesh, family, u0, params.potential)
    if not report.passed:
        raise ValueError(
            "initial data is not admissible: " + "; ".join(report.reasons)
        )
    values = _coefficients(u0)
    mbar = assembly.lumped_mass_diagonal(mesh)
    stiff = assembly.stiffness(mesh)
    cap = 1.0 - params.feasibility_margin
    w0 = chemical_potential(
        np.clip(values, -cap, cap), mbar, stiff, params
    )
    rhs_cache = mbar * values
    return SolverState(
        step=0,
        time=mesh.time,
        mesh=mesh,
        u=assembly.fe_function(mesh, values),
        w=assembly.fe_function(mesh, w0),
        rhs_cache=rhs_cache,
        newton_iters=0,
        newton_total=0,
        mass0=float(np.dot(mbar, values)),
    )


def number_of_steps(params: SchemeParams) -> int:
    """ceil(t_end/tau) with a guard against float dust in the quotient."""
    return max(0, math.ceil(params.t_end / params.tau - 1e-9))


def run_simulation(mesh: meshing.SurfaceMesh, family: geometry.SurfaceFamily,
                   params: SchemeParams, u0, callback=None,
                   warn: bool = True) -> SolverState:
    """Run ceil(t_end/tau) steps from the given initial data.

    Interior steps land on exact multiples of tau; the final step is clamped
    to t_end (shortening it when tau does not divide t_end).  The callback,
    if given, receives every SolverState including step 0.  Returns the final
    state; a failed step raises StepFailure after the callback has seen all
    accepted states.
    """
    if warn:
        for message in stability_warnings(params, h=meshing.quality(mesh).h):
            warnings.warn(message, StabilityWarning, stacklevel=2)

    state = initial_state(mesh, family, params, u0)
    if callback is not None:
        callback(state)

    n_steps = number_of_steps(params)
    for k in range(1, n_steps + 1):
        if k < n_steps:
            state = newton_step(state, family, params, t_new=k * params.tau)
        else:
            tau_last = params.t_end - (n_steps - 1) * params.tau
            state = newton_step(state, family, params,
                                t_new=params.t_end, tau=tau_last)
        if callback is not None:
            callback(state)
    return state
