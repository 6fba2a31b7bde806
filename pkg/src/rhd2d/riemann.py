"""Approximate Riemann solvers: 1D HLL and the four-state corner HLL.

Signal speeds are amplified extreme characteristic speeds (factor alpha,
alpha = 2 gives the positivity guarantee).  Flux formulas are written in
difference form, f_left + (corrections built from state and flux
differences); this keeps equal-state, supersonic, and one-dimensional
reductions exact in floating point, which the mesh update relies on.
All functions broadcast over leading axes and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import recovery
from .errors import AdmissibilityError, DegenerateFanError, DispatchError
from .physics import EosParams, eigenvalues, is_admissible, physical_flux, prim_to_cons


@dataclass(frozen=True)
class RiemannState:
    """A conserved state with its primitive companion cached alongside."""

    cons: np.ndarray
    prim: np.ndarray

    @classmethod
    def from_primitive(cls, prim: np.ndarray, eos: EosParams) -> "RiemannState":
        prim = np.asarray(prim, dtype=float)
        return cls(prim_to_cons(prim, eos), prim)

    @classmethod
    def from_conserved(cls, cons: np.ndarray, eos: EosParams) -> "RiemannState":
        cons = np.asarray(cons, dtype=float)
        return cls(cons, recovery.recover_primitives(cons, eos))


@dataclass(frozen=True)
class CornerStates:
    """The four constant states meeting at a grid vertex."""

    left_down: RiemannState
    right_down: RiemannState
    left_up: RiemannState
    right_up: RiemannState

    def __post_init__(self):
        for name in ("left_down", "right_down", "left_up", "right_up"):
            state = getattr(self, name)
            if not np.all(is_admissible(state.cons)):
                raise AdmissibilityError(f"corner state {name} is not admissible")


@dataclass(frozen=True)
class WaveSpeeds2D:
    """Signal-speed bounds of a corner fan and their sign-clipped forms."""

    s_left: np.ndarray
    s_right: np.ndarray
    s_down: np.ndarray
    s_up: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.s_left) > np.asarray(self.s_right)) or np.any(
            np.asarray(self.s_down) > np.asarray(self.s_up)
        ):
            raise ValueError("wave speeds must satisfy s_left <= s_right, s_down <= s_up")

    @property
    def s_left_minus(self):
        return np.minimum(self.s_left, 0.0)

    @property
    def s_right_plus(self):
        return np.maximum(self.s_right, 0.0)

    @property
    def s_down_minus(self):
        return np.minimum(self.s_down, 0.0)

    @property
    def s_up_plus(self):
        return np.maximum(self.s_up, 0.0)


def _check_alpha(alpha):
    if not alpha >= 1.0:
        raise ValueError(f"speed amplifier alpha must be >= 1, got {alpha}")


def wave_speeds_1d(left: RiemannState, right: RiemannState, eos: EosParams, axis: int, alpha=2.0):
    """(alpha * min lam1, alpha * max lam4) over the two adjacent states."""
    _check_alpha(alpha)
    lam_l = eigenvalues(left.prim, eos, axis)
    lam_r = eigenvalues(right.prim, eos, axis)
    s_minus = alpha * np.minimum(lam_l.lam1, lam_r.lam1)
    s_plus = alpha * np.maximum(lam_l.lam4, lam_r.lam4)
    return s_minus, s_plus


def wave_speeds_2d(corners: CornerStates, eos: EosParams, alpha=2.0) -> WaveSpeeds2D:
    """Extreme eigenvalues over all four corner states, amplified by alpha."""
    _check_alpha(alpha)
    states = (corners.left_down, corners.right_down, corners.left_up, corners.right_up)
    lam_x = [eigenvalues(s.prim, eos, 0) for s in states]
    lam_y = [eigenvalues(s.prim, eos, 1) for s in states]
    return WaveSpeeds2D(
        s_left=alpha * np.minimum.reduce([lam.lam1 for lam in lam_x]),
        s_right=alpha * np.maximum.reduce([lam.lam4 for lam in lam_x]),
        s_down=alpha * np.minimum.reduce([lam.lam1 for lam in lam_y]),
        s_up=alpha * np.maximum.reduce([lam.lam4 for lam in lam_y]),
    )


def _hll_flux_formula(u_l, f_l, u_r, f_r, s_minus, s_plus):
    """Clipped-fan HLL flux in difference form.

    With sl = min(s_minus, 0), sr = max(s_plus, 0):
        flux = f_l + sl * (sr * (u_r - u_l) - (f_r - f_l)) / (sr - sl),
    dispatched to the pure upwind flux when a clipped speed is zero.  The
    grouping returns f_l (f_r) exactly for supersonic fans and f_l exactly
    for equal inputs.  When both clipped speeds vanish the fan is empty and
    the left state's physical flux is returned.
    """
    sl = np.minimum(s_minus, 0.0)[..., None]
    sr = np.maximum(s_plus, 0.0)[..., None]
    den = sr - sl
    safe = np.where(den == 0.0, 1.0, den)
    mid = f_l + sl * (sr * (u_r - u_l) - (f_r - f_l)) / safe
    return np.where(sl == 0.0, f_l, np.where(sr == 0.0, f_r, mid))


def _state_formula(u_l, f_l, u_r, f_r, s_minus, s_plus):
    """Single intermediate fan state in difference form (unclipped speeds)."""
    sl = np.asarray(s_minus, dtype=float)[..., None]
    sr = np.asarray(s_plus, dtype=float)[..., None]
    return u_l + (sr * (u_r - u_l) - (f_r - f_l)) / (sr - sl)


def hll_state_1d(left: RiemannState, right: RiemannState, axis: int, speeds) -> np.ndarray:
    """Intermediate HLL state (S_R U_R - S_L U_L + F_L - F_R) / (S_R - S_L).

    `speeds` is the (s_minus, s_plus) pair; the subsonic case
    s_minus < 0 < s_plus is the caller's contract.
    """
    s_minus, s_plus = (np.asarray(s, dtype=float) for s in speeds)
    if np.any(s_minus == s_plus):
        raise DegenerateFanError("degenerate fan: s_minus == s_plus")
    f_l = physical_flux(left.prim, left.cons, axis)
    f_r = physical_flux(right.prim, right.cons, axis)
    return _state_formula(left.cons, f_l, right.cons, f_r, s_minus, s_plus)


def hll_flux_1d(left: RiemannState, right: RiemannState, axis: int, speeds) -> np.ndarray:
    """HLL flux with speeds clipped against zero, valid in every regime."""
    s_minus, s_plus = (np.asarray(s, dtype=float) for s in speeds)
    f_l = physical_flux(left.prim, left.cons, axis)
    f_r = physical_flux(right.prim, right.cons, axis)
    return _hll_flux_formula(left.cons, f_l, right.cons, f_r, s_minus, s_plus)


def _corner_arrays(corners: CornerStates):
    ld, rd, lu, ru = (
        corners.left_down,
        corners.right_down,
        corners.left_up,
        corners.right_up,
    )
    fx = {k: physical_flux(s.prim, s.cons, 0) for k, s in (("ld", ld), ("rd", rd), ("lu", lu), ("ru", ru))}
    fy = {k: physical_flux(s.prim, s.cons, 1) for k, s in (("ld", ld), ("rd", rd), ("lu", lu), ("ru", ru))}
    uu = {"ld": ld.cons, "rd": rd.cons, "lu": lu.cons, "ru": ru.cons}
    return uu, fx, fy


def _require_subsonic(speeds: WaveSpeeds2D):
    ok = (
        (np.asarray(speeds.s_left) < 0.0)
        & (np.asarray(speeds.s_right) > 0.0)
        & (np.asarray(speeds.s_down) < 0.0)
        & (np.asarray(speeds.s_up) > 0.0)
    )
    if not np.all(ok):
        raise DispatchError(
            "corner solver needs s_left < 0 < s_right and s_down < 0 < s_up; "
            "one-signed fans belong to the 1D solver"
        )


def _lanes_equal(a: RiemannState, b: RiemannState) -> np.ndarray:
    return np.all((a.cons == b.cons) & (a.prim == b.prim), axis=-1)


def hll_state_2d(corners: CornerStates, speeds: WaveSpeeds2D) -> np.ndarray:
    """Intermediate state of the four-state corner Riemann fan.

    U* combines the four states and both flux families,
        [S_R S_U U_RU + S_L S_D U_LD - S_R S_D U_RD - S_L S_U U_LU
         - S_U (F_RU - F_LU) + S_D (F_RD - F_LD)
         - S_R (G_RU - G_RD) + S_L (G_LU - G_LD)] / ((S_R - S_L)(S_U - S_D)).

    Lanes whose corner data are invariant along one axis are routed through
    the 1D formula so the documented reduction holds exactly.
    """
    _require_subsonic(speeds)
    uu, fx, fy = _corner_arrays(corners)
    sl = np.asarray(speeds.s_left, dtype=float)
    sr = np.asarray(speeds.s_right, dtype=float)
    sd = np.asarray(speeds.s_down, dtype=float)
    su = np.asarray(speeds.s_up, dtype=float)

    slv, srv, sdv, suv = (s[..., None] for s in (sl, sr, sd, su))
    span = (srv - slv) * (suv - sdv)
    states = srv * suv * uu["ru"] + slv * sdv * uu["ld"] - srv * sdv * uu["rd"] - slv * suv * uu["lu"]
    xflux = suv * (fx["ru"] - fx["lu"]) - sdv * (fx["rd"] - fx["ld"])
    yflux = srv * (fy["ru"] - fy["rd"]) - slv * (fy["lu"] - fy["ld"])
    general = (states - xflux - yflux) / span

    y_inv = _lanes_equal(corners.left_down, corners.left_up) & _lanes_equal(
        corners.right_down, corners.right_up
    )
    x_inv = _lanes_equal(corners.left_down, corners.right_down) & _lanes_equal(
        corners.left_up, corners.right_up
    )
    if np.any(y_inv):
        x_pair = _state_formula(
            uu["ld"], fx["ld"], uu["rd"], fx["rd"], sl, sr
        )
        general = np.where(y_inv[..., None], x_pair, general)
    if np.any(x_inv):
        y_pair = _state_formula(
            uu["ld"], fy["ld"], uu["lu"], fy["lu"], sd, su
        )
        general = np.where((x_inv & ~y_inv)[..., None], y_pair, general)
    return general


def quadrant_fan_states(corners: CornerStates, speeds: WaveSpeeds2D):
    """The four per-quadrant composites U - F/S_x - G/S_y (subsonic fans only).

    Each is admissible when the speeds carry amplifier alpha = 2, and the
    corner state is their convex combination with weights
    S_L S_D / B, -S_R S_D / B, -S_L S_U / B, S_R S_U / B.
    """
    _require_subsonic(speeds)
    uu, fx, fy = _corner_arrays(corners)
    sl = np.asarray(speeds.s_left, dtype=float)[..., None]
    sr = np.asarray(speeds.s_right, dtype=float)[..., None]
    sd = np.asarray(speeds.s_down, dtype=float)[..., None]
    su = np.asarray(speeds.s_up, dtype=float)[..., None]
    h_ld = uu["ld"] - fx["ld"] / sl - fy["ld"] / sd
    h_rd = uu["rd"] - fx["rd"] / sr - fy["rd"] / sd
    h_lu = uu["lu"] - fx["lu"] / sl - fy["lu"] / su
    h_ru = uu["ru"] - fx["ru"] / sr - fy["ru"] / su
    return h_ld, h_rd, h_lu, h_ru


def hll_flux_2d(corners: CornerStates, speeds: WaveSpeeds2D):
    """(flux_x, flux_y) of the corner fan, valid in every speed regime.

    Built from the four clipped 1D fluxes of the fan's edge pairs plus a
    transverse flux-difference correction:

        flux_x = [S_U+ F_U** - S_D- F_D**
                  - 2 S_L- S_R+ / (S_R+ - S_L-) * dG] / (S_U+ - S_D-),

    with dG = (G_RU - G_RD) - (G_LU - G_LD), and symmetrically for flux_y.
    The difference-form grouping makes one-dimensional corner data reproduce
    the matching 1D flux exactly.
    """
    uu, fx, fy = _corner_arrays(corners)
    sl = np.asarray(speeds.s_left, dtype=float)
    sr = np.asarray(speeds.s_right, dtype=float)
    sd = np.asarray(speeds.s_down, dtype=float)
    su = np.asarray(speeds.s_up, dtype=float)
    slm = np.minimum(sl, 0.0)[..., None]
    srp = np.maximum(sr, 0.0)[..., None]
    sdm = np.minimum(sd, 0.0)[..., None]
    sup = np.maximum(su, 0.0)[..., None]
    den_x = srp - slm
    den_y = sup - sdm
    if np.any(den_x == 0.0) or np.any(den_y == 0.0):
        raise DegenerateFanError(
            "corner fan degenerate: clipped speed spread vanished "
            "(callers may substitute the clipped 1D flux; the spread is "
            "positive for any admissible corner data)"
        )

    f_up = _hll_flux_formula(uu["lu"], fx["lu"], uu["ru"], fx["ru"], sl, sr)
    f_down = _hll_flux_formula(uu["ld"], fx["ld"], uu["rd"], fx["rd"], sl, sr)
    g_right = _hll_flux_formula(uu["rd"], fy["rd"], uu["ru"], fy["ru"], sd, su)
    g_left = _hll_flux_formula(uu["ld"], fy["ld"], uu["lu"], fy["lu"], sd, su)
    diff_g = (fy["ru"] - fy["rd"]) - (fy["lu"] - fy["ld"])
    diff_f = (fx["ru"] - fx["rd"]) - (fx["lu"] - fx["ld"])

    flux_x = f_down + (sup * (f_up - f_down) - (2.0 * slm * srp / den_x) * diff_g) / den_y
    flux_y = g_left + (srp * (g_right - g_left) - (2.0 * sdm * sup / den_y) * diff_f) / den_x
    return flux_x, flux_y
