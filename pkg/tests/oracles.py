"""Independent brute-force reference implementations used by the tests.

Everything here is deliberately written with naive explicit loops in a
different representation from the package code (complex circular-mode
occupation basis instead of the real symmetry-adapted basis) so spectra
can be compared between two genuinely separate constructions.
"""

import numpy as np


def circular_states(n_max):
    """(n_plus, n_minus) pairs with each mode capped at n_max."""
    return [(np_, nm) for np_ in range(n_max + 1) for nm in range(n_max + 1)]


def _ladder_terms():
    """Matrix-element rules for x, y and the quadratic pair operators.

    Each rule is (dn_plus, dn_minus, amplitude function of (n+, n-)).
    """
    sq = np.sqrt
    x_terms = [
        (-1, 0, lambda p, m: 0.5 * sq(p)),        # a_+
        (0, -1, lambda p, m: 0.5 * sq(m)),        # a_-
        (+1, 0, lambda p, m: 0.5 * sq(p + 1)),    # a_+^dag
        (0, +1, lambda p, m: 0.5 * sq(m + 1)),    # a_-^dag
    ]
    y_terms = [
        (-1, 0, lambda p, m: 0.5j * sq(p)),
        (0, -1, lambda p, m: -0.5j * sq(m)),
        (0, +1, lambda p, m: 0.5j * sq(m + 1)),
        (+1, 0, lambda p, m: -0.5j * sq(p + 1)),
    ]
    # (x + iy)^2 = a_-^2 + (a_+^dag)^2 + 2 a_+^dag a_-
    plus2 = [
        (0, -2, lambda p, m: sq(m * (m - 1))),
        (+2, 0, lambda p, m: sq((p + 1) * (p + 2))),
        (+1, -1, lambda p, m: 2.0 * sq((p + 1) * m)),
    ]
    # (x - iy)^2 = a_+^2 + (a_-^dag)^2 + 2 a_-^dag a_+
    minus2 = [
        (-2, 0, lambda p, m: sq(p * (p - 1))),
        (0, +2, lambda p, m: sq((m + 1) * (m + 2))),
        (-1, +1, lambda p, m: 2.0 * sq(p * (m + 1))),
    ]
    return x_terms, y_terms, plus2, minus2


def _operator(terms, states):
    idx = {s: k for k, s in enumerate(states)}
    dim = len(states)
    mat = np.zeros((dim, dim), dtype=complex)
    for (p, m), k in idx.items():
        for dp, dm, amp in terms:
            tgt = (p + dp, m + dm)
            if tgt in idx:
                a = amp(p, m)
                if a != 0:
                    mat[idx[tgt], k] += a
    return mat


def vibrational_operators(n_max):
    """x, y, x^2 - y^2 and 2xy on the circular occupation basis."""
    states = circular_states(n_max)
    x_terms, y_terms, plus2, minus2 = _ladder_terms()
    x = _operator(x_terms, states)
    y = _operator(y_terms, states)
    q_plus = _operator(plus2, states)
    q_minus = _operator(minus2, states)
    x2my2 = 0.5 * (q_plus + q_minus)
    xy2 = (q_plus - q_minus) / 2j
    number = np.diag([float(p + m) for p, m in states]).astype(complex)
    return states, x, y, x2my2, xy2, number


def brute_djt_matrix(F, G, hw, n_max):
    """E x e Hamiltonian over {e_+, e_-} x circular states, complex Hermitian.

    In the complex electronic basis the Pauli combinations become
    sigma_z = -(|+><-| + |-><+|) and sigma_x = i(|+><-| - |-><+|).
    """
    states, x, y, x2my2, xy2, number = vibrational_operators(n_max)
    sz = -np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sx = np.array([[0.0, 1j], [-1j, 0.0]], dtype=complex)
    eye = np.eye(len(states), dtype=complex)
    h = (
        np.kron(np.eye(2, dtype=complex), hw * (number + eye))
        + F * (np.kron(sz, x) - np.kron(sx, y))
        + G * (np.kron(sz, x2my2) + np.kron(sx, xy2))
    )
    assert np.abs(h - h.conj().T).max() < 1e-12
    return h


def brute_lower_matrix(lam_e, hw_E, f2, c2, n_max):
    """Lower-branch Hamiltonian over {|xx>, |xy>, |yy>} x circular states."""
    states, x, y, _, _, number = vibrational_operators(n_max)
    eye = np.eye(len(states), dtype=complex)
    h_e = 0.5 * lam_e * np.array(
        [[1.0, 0, 1], [0, 0, 0], [1, 0, 1]], dtype=complex
    )
    sz = np.array([[1.0, 0, 0], [0, 0, 0], [0, 0, -1.0]], dtype=complex)
    sx = (-1 / np.sqrt(2)) * np.array(
        [[0, 1.0, 0], [1, 0, 1], [0, 1, 0]], dtype=complex
    )
    szb = 0.5 * np.array([[-1.0, 0, 1], [0, 2, 0], [1, 0, -1]], dtype=complex)
    sxb = (1 / np.sqrt(2)) * np.array(
        [[0, -1.0, 0], [-1, 0, 1], [0, 1, 0]], dtype=complex
    )
    h = (
        np.kron(h_e, eye)
        + np.kron(np.eye(3, dtype=complex), hw_E * (number + eye))
        + c2 * 2.0 * f2 * (np.kron(sz, x) - np.kron(sx, y))
        + (1.0 - c2) * f2 * (np.kron(szb, x) - np.kron(sxb, y))
    )
    assert np.abs(h - h.conj().T).max() < 1e-12
    return h


def direct_two_mode_lineshape(s1, hw1, s2, hw2, sigma, energies, n_cap=20):
    """Double sum over (n1, n2) of Gaussian lines, normalized by trapezoid."""
    from math import exp, factorial

    vals = np.zeros_like(energies)
    g = 1.0 / (sigma * np.sqrt(2.0 * np.pi))
    for n1 in range(n_cap + 1):
        w1 = exp(-s1) * s1**n1 / factorial(n1)
        for n2 in range(n_cap + 1):
            w2 = exp(-s2) * s2**n2 / factorial(n2)
            pos = n1 * hw1 + n2 * hw2
            vals += w1 * w2 * g * np.exp(
                -((energies - pos) ** 2) / (2.0 * sigma**2)
            )
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    return vals / trapezoid(vals, energies)
