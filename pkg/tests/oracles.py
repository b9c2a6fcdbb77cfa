"""Independent reference computations the tests check production code against.

Everything here is deliberately written from closed forms or brute-force
constructions, not by calling the code under test.
"""

import numpy as np

SP = np.array([[0, 1], [0, 0]], dtype=complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def lorentzian_correlation(tau, center, width, strength):
    """Full-line Fourier transform of the Lorentzian spectral density."""
    return (strength * width / 2.0) * np.exp(-1j * center * tau - width * np.abs(tau))


def lorentzian_gamma_integral(t, center, width, strength, phase_freq):
    """Closed form of int_0^t exp(i*phase_freq*tau) f(tau) dtau for the Lorentzian."""
    d = phase_freq - center
    return (strength * width / 2.0) * (1.0 - np.exp((1j * d - width) * t)) / (width - 1j * d)


def lorentzian_rates(t, center, width, strength, laser_freq):
    g = lorentzian_gamma_integral(t, center, width, strength, laser_freq)
    return 2.0 * g.real, g.imag


def lorentzian_truncation_bound(tau, center, width, strength, halfwidth_factor):
    """Oscillatory-tail bound on |f_truncated - f_fullline| for tau != 0."""
    j_edge = (strength / (2 * np.pi)) / (1.0 + halfwidth_factor**2)
    return 4.0 * j_edge / np.abs(tau)


def flat_correlation(tau, level, lo, hi):
    tau = np.asarray(tau, dtype=float)
    out = np.where(tau == 0.0, level * (hi - lo) + 0j,
                   level * (np.exp(-1j * lo * np.where(tau == 0, 1, tau))
                            - np.exp(-1j * hi * np.where(tau == 0, 1, tau)))
                   / (1j * np.where(tau == 0, 1, tau)))
    return out


def ohmic_correlation(tau, coupling, cutoff, exponent):
    from scipy.special import gamma as gamma_fn
    return (coupling * cutoff**2 * gamma_fn(exponent + 1.0)
            / (1.0 + 1j * cutoff * tau) ** (exponent + 1.0))


def dressed_coefficients(delta, rabi):
    om = np.hypot(delta, rabi)
    return (om + delta) / (2 * om), (om - delta) / (2 * om), rabi / (2 * om)


# The full master equation, assembled term by term as a list of
# (coefficient, left operator, right operator) sandwiches.  This mirrors the
# printed seven-line structure rather than the grouped form the package uses.
def term_table(om, cp, cm, c0, gam, lam, secular, lamb_mode="corrected"):
    hs = om / 2.0 * SZ
    if lamb_mode == "corrected":
        hl = lam * (cp**2 * (SM @ SP) + cm**2 * (SP @ SM))
    elif lamb_mode == "literal":
        hl = lam * (cp**2 * (SM @ SP) + cp**2 * (SM @ SM) + c0**2 * (SZ @ SZ))
    else:
        hl = np.zeros((2, 2), complex)
    h = hs + hl
    terms = [(-1j, h, I2), (1j, I2, h)]
    for weight, l in ((cp**2, SM), (cm**2, SP), (c0**2, SZ)):
        ldl = l.conj().T @ l
        terms += [(weight * gam, l, l.conj().T),
                  (-0.5 * weight * gam, ldl, I2),
                  (-0.5 * weight * gam, I2, ldl)]
    if not secular:
        terms += [(-cm * c0 * gam, SP, SZ), (-cm * c0 * gam, SZ, SM),
                  (cp * c0 * gam, SM, SZ), (cp * c0 * gam, SZ, SP),
                  (c0**2 * gam, SP, SP), (c0**2 * gam, SM, SM),
                  (0.5 * c0 * gam, SX, I2), (0.5 * c0 * gam, I2, SX),
                  (1j * c0 * lam, SX, I2), (-1j * c0 * lam, I2, SX)]
    return terms


def reference_rhs(rho, om, cp, cm, c0, gam, lam, secular, lamb_mode="corrected"):
    out = np.zeros((2, 2), dtype=complex)
    for coef, left, right in term_table(om, cp, cm, c0, gam, lam, secular, lamb_mode):
        out += coef * (left @ rho @ right)
    return out


def lindblad_generator_action(rho, h, channels):
    """Textbook Lindblad form: -i[H, rho] + sum_r r (L rho L+ - {L+L, rho}/2)."""
    out = -1j * (h @ rho - rho @ h)
    for rate, l in channels:
        ld = l.conj().T
        out += rate * (l @ rho @ ld - 0.5 * (ld @ l @ rho + rho @ ld @ l))
    return out


def random_density_matrix(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian_unit_trace(rng):
    """Hermitian with unit trace but possibly negative eigenvalues."""
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = 0.5 * (a + a.conj().T)
    h += (1.0 - np.trace(h).real) / 2.0 * np.eye(2)
    return h


def rotate_about(axis, angle, vec):
    """Rodrigues rotation of vec about the unit 3-vector axis."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    vec = np.asarray(vec, dtype=float)
    return (vec * np.cos(angle) + np.cross(axis, vec) * np.sin(angle)
            + axis * np.dot(axis, vec) * (1 - np.cos(angle)))
