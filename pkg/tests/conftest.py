import pytest

from kqr.distributions import (
    ZeroLocation,
    bounded_density_mixture,
    dirac_atom_mixture,
    polynomial_density,
    two_atom,
    uniform_noise,
)


@pytest.fixture(scope="session")
def unit_uniform():
    """Uniform conditional law on [-1, 1], no location shift."""
    return uniform_noise(halfwidth=1.0, location=ZeroLocation())


@pytest.fixture(scope="session")
def pure_two_atom():
    """0.5 at -0.5 plus 0.5 at +0.5, no location shift."""
    return two_atom(location=ZeroLocation())


@pytest.fixture(scope="session")
def all_families():
    """The four default families with the sine location function."""
    return [
        bounded_density_mixture(),
        polynomial_density(),
        dirac_atom_mixture(),
        two_atom(),
    ]


@pytest.fixture(scope="session")
def centered_families():
    """Same four families with g = 0 (useful for scalar-law oracles)."""
    return [
        bounded_density_mixture(location=ZeroLocation()),
        polynomial_density(location=ZeroLocation()),
        dirac_atom_mixture(location=ZeroLocation()),
        two_atom(location=ZeroLocation()),
    ]


def quad_pinball_oracle(model, x, tau, t):
    """Independent inner-risk oracle: adaptive quadrature over the density
    pieces (split at the loss kink) plus a direct sum over atoms."""
    from scipy.integrate import quad

    from kqr.losses import pinball_loss

    g = model.g_scalar(x)
    kink = t - g  # noise-frame location of the loss kink
    total = 0.0
    for piece in model.noise.pieces:
        def integrand(y, _p=piece):
            return pinball_loss(tau, y + g, t) * _p.scale * abs(y - _p.anchor) ** _p.exponent

        split = min(max(kink, piece.lo), piece.hi)
        total += quad(integrand, piece.lo, split, limit=200)[0]
        total += quad(integrand, split, piece.hi, limit=200)[0]
    for atom in model.noise.atoms:
        total += atom.mass * pinball_loss(tau, atom.location + g, t)
    return total
