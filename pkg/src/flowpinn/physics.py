"""PDE residual operators: 2D incompressible Navier-Stokes, 3D RANS,
and the inverse variant with a trainable viscosity coefficient.

The residual formulas are written once, generically over any operands
supporting arithmetic (floats, numpy arrays, or graph Vars), so the
oracle path and the training path share a single source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import ConfigurationError
from .netderiv import NetGraph, activation_by_name, params_to_vars

NS2D = "ns2d"
RANS3D = "rans3d"
RANS3D_INVERSE = "rans3d_inverse"
REGIMES = (NS2D, RANS3D, RANS3D_INVERSE)

# Output column conventions.  2D: (u, v, p).  3D: mean velocities and
# pressure followed by the six unique Reynolds-stress components.
COLS_2D = {"u": 0, "v": 1, "p": 2}
COLS_3D = {
    "u": 0, "v": 1, "w": 2, "p": 3,
    "uu": 4, "uv": 5, "uw": 6, "vv": 7, "vw": 8, "ww": 9,
}
AXES_2D = {"x": 0, "y": 1, "t": 2}
AXES_3D = {"x": 0, "y": 1, "z": 2, "t": 3}


def input_width(regime: str) -> int:
    _check_regime(regime)
    return 3 if regime == NS2D else 4


def output_width(regime: str) -> int:
    _check_regime(regime)
    return 3 if regime == NS2D else 10


def velocity_fields(regime: str) -> tuple[str, ...]:
    _check_regime(regime)
    return ("u", "v") if regime == NS2D else ("u", "v", "w")


def _check_regime(regime: str) -> None:
    if regime not in REGIMES:
        raise ConfigurationError(f"unknown physics regime {regime!r}")


@dataclass
class ResidualBundle:
    """PDE residual values; ``e_mz`` is present only in 3D.

    Fields may be scalars or aligned arrays (one entry per point).
    """

    e_c: np.ndarray
    e_mx: np.ndarray
    e_my: np.ndarray
    e_mz: np.ndarray | None = None

    def max_abs(self) -> float:
        parts = [self.e_c, self.e_mx, self.e_my]
        if self.e_mz is not None:
            parts.append(self.e_mz)
        return float(max(np.max(np.abs(p)) for p in parts))


@dataclass
class FlowState2D:
    """Field values and the derivatives entering the 2D residuals."""

    u: float
    v: float
    p: float
    re: float
    u_x: float
    u_y: float
    u_t: float
    u_xx: float
    u_yy: float
    v_x: float
    v_y: float
    v_t: float
    v_xx: float
    v_yy: float
    p_x: float
    p_y: float


@dataclass
class FlowState3D:
    """Mean-flow values, their derivatives, and the six unique
    Reynolds-stress components with the stress derivatives the momentum
    residuals need (symmetric-stress convention: cross terms once each)."""

    u: float
    v: float
    w: float
    p: float
    u_x: float; u_y: float; u_z: float; u_t: float
    u_xx: float; u_yy: float; u_zz: float
    v_x: float; v_y: float; v_z: float; v_t: float
    v_xx: float; v_yy: float; v_zz: float
    w_x: float; w_y: float; w_z: float; w_t: float
    w_xx: float; w_yy: float; w_zz: float
    p_x: float; p_y: float; p_z: float
    uu: float = 0.0; uv: float = 0.0; uw: float = 0.0
    vv: float = 0.0; vw: float = 0.0; ww: float = 0.0
    uu_x: float = 0.0
    uv_x: float = 0.0; uv_y: float = 0.0
    uw_x: float = 0.0; uw_z: float = 0.0
    vv_y: float = 0.0
    vw_y: float = 0.0; vw_z: float = 0.0
    ww_z: float = 0.0


# residual formulas (single source of truth) ----------------------------


def ns2d_terms(u, v, u_x, u_y, u_t, u_xx, u_yy,
               v_x, v_y, v_t, v_xx, v_yy, p_x, p_y, inv_re):
    e_c = u_x + v_y
    e_mx = u_t + p_x + u * u_x + v * u_y - inv_re * (u_xx + u_yy)
    e_my = v_t + p_y + u * v_x + v * v_y - inv_re * (v_xx + v_yy)
    return e_c, e_mx, e_my


def rans3d_terms(u, v, w,
                 u_x, u_y, u_z, u_t, u_xx, u_yy, u_zz,
                 v_x, v_y, v_z, v_t, v_xx, v_yy, v_zz,
                 w_x, w_y, w_z, w_t, w_xx, w_yy, w_zz,
                 p_x, p_y, p_z,
                 uu_x, uv_x, uv_y, uw_x, uw_z, vv_y, vw_y, vw_z, ww_z,
                 viscosity):
    e_c = u_x + v_y + w_z
    e_mx = (u_t + p_x + u * u_x + v * u_y + w * u_z
            - viscosity * (u_xx + u_yy + u_zz) + uu_x + uv_y + uw_z)
    e_my = (v_t + p_y + u * v_x + v * v_y + w * v_z
            - viscosity * (v_xx + v_yy + v_zz) + uv_x + vv_y + vw_z)
    e_mz = (w_t + p_z + u * w_x + v * w_y + w * w_z
            - viscosity * (w_xx + w_yy + w_zz) + uw_x + vw_y + ww_z)
    return e_c, e_mx, e_my, e_mz


def ns2d_residuals(state: FlowState2D) -> ResidualBundle:
    """Continuity and momentum residuals of the 2D incompressible
    Navier-Stokes equations with viscous factor 1/Re."""
    if not state.re > 0:
        raise ConfigurationError(f"Reynolds number must be positive, got {state.re}")
    e_c, e_mx, e_my = ns2d_terms(
        state.u, state.v,
        state.u_x, state.u_y, state.u_t, state.u_xx, state.u_yy,
        state.v_x, state.v_y, state.v_t, state.v_xx, state.v_yy,
        state.p_x, state.p_y, 1.0 / state.re,
    )
    return ResidualBundle(e_c=e_c, e_mx=e_mx, e_my=e_my)


def rans3d_residuals(state: FlowState3D, viscosity: float) -> ResidualBundle:
    """RANS residuals; ``viscosity`` stands for 1/Re in the forward
    problem or the trainable coefficient in the inverse one."""
    e_c, e_mx, e_my, e_mz = rans3d_terms(
        state.u, state.v, state.w,
        state.u_x, state.u_y, state.u_z, state.u_t, state.u_xx, state.u_yy, state.u_zz,
        state.v_x, state.v_y, state.v_z, state.v_t, state.v_xx, state.v_yy, state.v_zz,
        state.w_x, state.w_y, state.w_z, state.w_t, state.w_xx, state.w_yy, state.w_zz,
        state.p_x, state.p_y, state.p_z,
        state.uu_x, state.uv_x, state.uv_y, state.uw_x, state.uw_z,
        state.vv_y, state.vw_y, state.vw_z, state.ww_z,
        viscosity,
    )
    return ResidualBundle(e_c=e_c, e_mx=e_mx, e_my=e_my, e_mz=e_mz)


# graph-level residual assembly -----------------------------------------


def residual_graph(graph: NetGraph, regime: str, viscosity) -> dict:
    """Residual expressions over a collocation batch, as graph Vars.

    ``viscosity`` is a float (1/Re) for forward regimes or the lambda
    Var for the inverse one.  Keys are ``e_c``, ``e_mx``, ``e_my`` and,
    in 3D, ``e_mz``.
    """
    _check_regime(regime)
    if regime == NS2D:
        c, a = COLS_2D, AXES_2D
        u, v = graph.output_col(c["u"]), graph.output_col(c["v"])
        fu, fv, fp = (graph.first_partials(c[f]) for f in ("u", "v", "p"))
        e_c, e_mx, e_my = ns2d_terms(
            u, v,
            ad.getcol(fu, a["x"]), ad.getcol(fu, a["y"]), ad.getcol(fu, a["t"]),
            graph.second_partial(c["u"], a["x"]), graph.second_partial(c["u"], a["y"]),
            ad.getcol(fv, a["x"]), ad.getcol(fv, a["y"]), ad.getcol(fv, a["t"]),
            graph.second_partial(c["v"], a["x"]), graph.second_partial(c["v"], a["y"]),
            ad.getcol(fp, a["x"]), ad.getcol(fp, a["y"]),
            viscosity,
        )
        return {"e_c": e_c, "e_mx": e_mx, "e_my": e_my}

    c, a = COLS_3D, AXES_3D
    u, v, w = (graph.output_col(c[f]) for f in ("u", "v", "w"))
    fu, fv, fw, fp = (graph.first_partials(c[f]) for f in ("u", "v", "w", "p"))

    def seconds(field):
        k = c[field]
        return (
            graph.second_partial(k, a["x"]),
            graph.second_partial(k, a["y"]),
            graph.second_partial(k, a["z"]),
        )

    def stress_partial(field, axis):
        return graph.first_partial(c[field], a[axis])

    e_c, e_mx, e_my, e_mz = rans3d_terms(
        u, v, w,
        ad.getcol(fu, a["x"]), ad.getcol(fu, a["y"]), ad.getcol(fu, a["z"]),
        ad.getcol(fu, a["t"]), *seconds("u"),
        ad.getcol(fv, a["x"]), ad.getcol(fv, a["y"]), ad.getcol(fv, a["z"]),
        ad.getcol(fv, a["t"]), *seconds("v"),
        ad.getcol(fw, a["x"]), ad.getcol(fw, a["y"]), ad.getcol(fw, a["z"]),
        ad.getcol(fw, a["t"]), *seconds("w"),
        ad.getcol(fp, a["x"]), ad.getcol(fp, a["y"]), ad.getcol(fp, a["z"]),
        stress_partial("uu", "x"),
        stress_partial("uv", "x"), stress_partial("uv", "y"),
        stress_partial("uw", "x"), stress_partial("uw", "z"),
        stress_partial("vv", "y"),
        stress_partial("vw", "y"), stress_partial("vw", "z"),
        stress_partial("ww", "z"),
        viscosity,
    )
    return {"e_c": e_c, "e_mx": e_mx, "e_my": e_my, "e_mz": e_mz}


def collocation_residuals(net, params, points, regime: str, re: float | None = None) -> ResidualBundle:
    """Residuals at a batch of collocation points, evaluated from the
    network's input derivatives.

    For ``rans3d_inverse`` the viscosity is read from ``params.lam``;
    otherwise ``re`` must be supplied.  Returns aligned arrays, one
    entry per point.
    """
    _check_regime(regime)
    if net.config.n_outputs != output_width(regime):
        raise ConfigurationError(
            f"regime {regime} needs {output_width(regime)} outputs, "
            f"network has {net.config.n_outputs}"
        )
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != input_width(regime):
        raise ConfigurationError(
            f"regime {regime} needs points of width {input_width(regime)}"
        )
    if regime == RANS3D_INVERSE:
        if params.lam is None:
            raise ConfigurationError("inverse regime requires params.lam")
        viscosity = float(params.lam)
    else:
        if re is None or re <= 0:
            raise ConfigurationError("forward regimes require a positive Reynolds number")
        viscosity = 1.0 / re

    pvars = params_to_vars(params, requires_grad=False)
    graph = NetGraph(pvars, activation_by_name(net.config.activation), pts)
    values = {
        key: np.asarray(var.value)
        for key, var in residual_graph(graph, regime, viscosity).items()
    }
    return ResidualBundle(
        e_c=values["e_c"],
        e_mx=values["e_mx"],
        e_my=values["e_my"],
        e_mz=values.get("e_mz"),
    )
