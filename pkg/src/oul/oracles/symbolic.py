"""Symbolic derivation of the phase-space equations of a damped oscillator.

The master equation ``gd D[a] + gu D[a+]`` is mapped term by term with the
standard operator correspondences, each acting as a first-order differential
operator on the quasiprobability ``F(alpha, alpha*)``:

P (Glauber):  a rho -> alpha,         rho a+ -> alpha*,
              a+ rho -> alpha* - d_a, rho a  -> alpha - d_a*.
Q (Husimi):   a rho -> alpha + d_a*,  rho a+ -> alpha* + d_a,
              a+ rho -> alpha*,       rho a  -> alpha.

The normally ordered characteristic function is the Fourier transform
``X(eta) = int P(alpha) exp(eta alpha* - eta* alpha) d^2 alpha``; integrating by
parts turns ``alpha -> -d_eta*``, ``alpha* -> d_eta``, ``d_a -> eta*``,
``d_a* -> -eta`` with operator order preserved.
"""
from __future__ import annotations

import itertools

import sympy as sp

__all__ = ["OpticalEquations", "derive_optical_equations", "operator_from_coefficients"]

a, ac, eta, etac = sp.symbols("alpha alpha_c eta eta_c")
gd, gu = sp.symbols("gamma_down gamma_up", positive=True)

# primitive letters: "x" (alpha), "xc" (alpha*), "d" (d_alpha), "dc" (d_alpha*)
_P_RULES = {
    ("L", "a"): [(1, "x")],
    ("R", "ad"): [(1, "xc")],
    ("L", "ad"): [(1, "xc"), (-1, "d")],
    ("R", "a"): [(1, "x"), (-1, "dc")],
}
_Q_RULES = {
    ("L", "a"): [(1, "x"), (1, "dc")],
    ("R", "ad"): [(1, "xc"), (1, "d")],
    ("L", "ad"): [(1, "xc")],
    ("R", "a"): [(1, "x")],
}


def _dissipator_terms(rate, op, dag):
    """``rate * (op rho dag - dag op rho / 2 - rho dag op / 2)`` as sequences of (side, op)."""
    # a sequence lists the maps from outermost to innermost
    return [
        (rate, [("L", op), ("R", dag)]),
        (-rate / 2, [("L", dag), ("L", op)]),
        (-rate / 2, [("R", op), ("R", dag)]),
    ]


def _master_equation():
    return _dissipator_terms(gd, "a", "ad") + _dissipator_terms(gu, "ad", "a")


def _words(rules):
    """Expand the master equation into a sum of words in the primitive letters."""
    out = []
    for coeff, seq in _master_equation():
        for choice in itertools.product(*[rules[s] for s in seq]):
            c = coeff
            word = []
            for sign, letter in choice:
                c = c * sign
                word.append(letter)
            out.append((c, tuple(word)))
    return out


def _apply(word, f, letters):
    # the innermost (rightmost) letter acts first
    for letter in reversed(word):
        f = letters[letter](f)
    return f


def _phase_space_letters():
    return {
        "x": lambda g: a * g,
        "xc": lambda g: ac * g,
        "d": lambda g: sp.diff(g, a),
        "dc": lambda g: sp.diff(g, ac),
    }


def _fourier_letters():
    return {
        "x": lambda g: -sp.diff(g, etac),
        "xc": lambda g: sp.diff(g, eta),
        "d": lambda g: etac * g,
        "dc": lambda g: -eta * g,
    }


class OpticalEquations:
    """Right-hand sides of the P, Q and characteristic-function equations."""

    def __init__(self):
        self.F = sp.Function("F")(a, ac)
        self.X = sp.Function("X")(eta, etac)
        pw = _words(_P_RULES)
        qw = _words(_Q_RULES)
        self.p_rhs = sp.expand(sum(c * _apply(w, self.F, _phase_space_letters()) for c, w in pw))
        self.q_rhs = sp.expand(sum(c * _apply(w, self.F, _phase_space_letters()) for c, w in qw))
        self.chi_rhs = sp.expand(sum(c * _apply(w, self.X, _fourier_letters()) for c, w in pw))

    def substitute(self, gamma_down, gamma_up):
        subs = {gd: sp.nsimplify(gamma_down), gu: sp.nsimplify(gamma_up)}
        return tuple(sp.expand(e.subs(subs)) for e in (self.p_rhs, self.q_rhs, self.chi_rhs))


def operator_from_coefficients(drift, diffusion=None, multiplier=None, representation="P"):
    """Build ``drift (d_a a + d_a* a*) F + diffusion d_a d_a* F`` (or the eta form) symbolically."""
    drift = sp.nsimplify(drift)
    if representation in ("P", "Q"):
        F = sp.Function("F")(a, ac)
        expr = drift * (sp.diff(a * F, a) + sp.diff(ac * F, ac))
        if diffusion is not None:
            expr += sp.nsimplify(diffusion) * sp.diff(F, a, ac)
        return sp.expand(expr)
    X = sp.Function("X")(eta, etac)
    expr = drift * (etac * sp.diff(X, etac) + eta * sp.diff(X, eta))
    if multiplier is not None:
        expr += sp.nsimplify(multiplier) * eta * etac * X
    return sp.expand(expr)


def derive_optical_equations():
    return OpticalEquations()
