"""AUSM interface fluxes for the shallow-water system.

The advection-upstream splitting separates the flux through an element face
into an advective part, upwinded through split Mach numbers, and a pressure
part, blended through split pressure weights.  The local gravity-wave speed
in coordinate direction i is a^i = sqrt(h^ii g H), which is continuous across
element and panel interfaces.

All arithmetic is polynomial in the inputs once the branches are fixed, and
every branch is decided on real parts only, so the routines propagate
complex-step perturbations exactly.
"""

from __future__ import annotations

import numpy as np


def _real(x):
    return np.real(np.asarray(x))


def split_mach(mach, positive: bool):
    """Liou-Steffen split Mach number M+ (positive=True) or M-."""
    m = np.asarray(mach)
    mr = _real(m)
    sub = np.abs(mr) <= 1.0
    # supersonic: (m + |m|)/2 is m or 0 depending on the sign; the piecewise
    # form keeps complex-step perturbations exact
    if positive:
        return np.where(sub, 0.25 * (m + 1.0) ** 2,
                        np.where(mr > 0.0, m, 0.0 * m))
    return np.where(sub, -0.25 * (m - 1.0) ** 2,
                    np.where(mr < 0.0, m, 0.0 * m))


def split_pressure_weight(mach, positive: bool):
    """Pressure blending weight P+ or P- of the split."""
    m = np.asarray(mach)
    mr = _real(m)
    sub = np.abs(mr) <= 1.0
    sgn = np.sign(mr)
    if positive:
        return np.where(sub, 0.25 * (m + 1.0) ** 2 * (2.0 - m),
                        0.5 * (1.0 + sgn))
    return np.where(sub, 0.25 * (m - 1.0) ** 2 * (2.0 + m),
                    0.5 * (1.0 - sgn))


def wave_speed(h_nn, gravity, depth):
    """Gravity-wave speed sqrt(h^nn g H) in the normal coordinate direction."""
    return np.sqrt(h_nn * gravity * depth)


def ausm_flux(depth_l, u1_l, u2_l, depth_r, u1_r, u2_r,
              u_n_l, u_n_r, sqrt_g, h_nn, h_1n, h_2n, gravity):
    """AUSM numerical flux through a face with normal coordinate direction n.

    All metric arrays are evaluated at the face and shared by both sides;
    u_n_l / u_n_r are the normal contravariant velocity components.  Returns
    the (mass, momentum-1, momentum-2) flux components, each shaped like the
    inputs.
    """
    a_l = wave_speed(h_nn, gravity, depth_l)
    a_r = wave_speed(h_nn, gravity, depth_r)
    a = np.where(_real(a_l) >= _real(a_r), a_l, a_r)
    mach_l = u_n_l / a
    mach_r = u_n_r / a
    m = split_mach(mach_l, True) + split_mach(mach_r, False)
    m_pos = np.where(_real(m) > 0.0, m, 0.0)
    m_neg = np.where(_real(m) < 0.0, m, 0.0)

    adv_l = sqrt_g * depth_l * a
    adv_r = sqrt_g * depth_r * a
    p_l = 0.5 * sqrt_g * gravity * depth_l**2
    p_r = 0.5 * sqrt_g * gravity * depth_r**2
    w_l = split_pressure_weight(mach_l, True)
    w_r = split_pressure_weight(mach_r, False)

    f0 = m_pos * adv_l + m_neg * adv_r
    f1 = (m_pos * adv_l * u1_l + m_neg * adv_r * u1_r
          + h_1n * (w_l * p_l + w_r * p_r))
    f2 = (m_pos * adv_l * u2_l + m_neg * adv_r * u2_r
          + h_2n * (w_l * p_l + w_r * p_r))
    return f0, f1, f2


def physical_flux(depth, u1, u2, u_n, sqrt_g, h_1n, h_2n, gravity):
    """Exact coordinate-direction flux of the momentum-form system."""
    f0 = sqrt_g * depth * u_n
    p = 0.5 * sqrt_g * gravity * depth**2
    return f0, f0 * u1 + h_1n * p, f0 * u2 + h_2n * p
