"""Truncated Fourier representation of the shear strip T x (ly-periodic R).

Fields live on a (k, eta) mode lattice with k integer and eta quantized to
(2*pi/ly) * Z.  All derivative operators in the frame moving with the
background shear are diagonal Fourier multipliers; quadratic nonlinearities
are evaluated pointwise in physical space on a 3/2-padded grid and then
restricted to the dealias ball, which makes them exact convolutions there.

Conventions
-----------
A field f(x, y) = sum_{k,m} c[k, m] * exp(i*(k*x + eta_m*y)), eta_m = 2*pi*m/ly.
Coefficient arrays are indexed in numpy FFT order along both axes, so
``c[k % nx, m % ny]`` is the (k, eta_m) coefficient.  Real fields satisfy
c(-k, -m) = conj(c(k, m)).

The perpendicular gradient is fixed globally as perp(g) = (-d_y g, d_x g).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonconformalGrid, SingularSymbolAtZeroMode

TWO_PI = 2.0 * np.pi


def _pad_size(n: int) -> int:
    """Smallest even M >= 3n/2, the padding that de-aliases quadratic terms."""
    m = (3 * n + 1) // 2
    return m + (m % 2)


@dataclass(frozen=True)
class SpectralGrid:
    """Mode lattice for T x (ly-periodic line).

    nx, ny are mode counts (even, >= 8); ly is the y-period; dealias_fraction
    sets the retained fraction of each axis after products (2/3 default).
    """

    nx: int
    ny: int
    ly: float = 4.0 * np.pi
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.nx % 2 or self.ny % 2 or self.nx < 8 or self.ny < 8:
            raise ValueError("nx, ny must be even and >= 8")
        if self.ly <= 0:
            raise ValueError("ly must be positive")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")

    @cached_property
    def kx(self) -> np.ndarray:
        """Integer x-wavenumbers in FFT order, shape (nx,)."""
        return np.fft.fftfreq(self.nx, d=1.0 / self.nx).astype(np.int64)

    @cached_property
    def my(self) -> np.ndarray:
        """Integer y-mode indices in FFT order, shape (ny,)."""
        return np.fft.fftfreq(self.ny, d=1.0 / self.ny).astype(np.int64)

    @cached_property
    def eta(self) -> np.ndarray:
        """Physical y-frequencies eta = 2*pi*m/ly, shape (ny,)."""
        return (TWO_PI / self.ly) * self.my

    @cached_property
    def k2d(self) -> np.ndarray:
        return self.kx[:, None].astype(float) * np.ones((1, self.ny))

    @cached_property
    def eta2d(self) -> np.ndarray:
        return np.ones((self.nx, 1)) * self.eta[None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        kc = int(np.floor(self.dealias_fraction * self.nx / 2))
        mc = int(np.floor(self.dealias_fraction * self.ny / 2))
        return (np.abs(self.kx)[:, None] <= kc) & (np.abs(self.my)[None, :] <= mc)

    @property
    def pad_shape(self) -> tuple[int, int]:
        return _pad_size(self.nx), _pad_size(self.ny)

    @property
    def cell_area(self) -> float:
        """Parseval factor: ||f||_L2^2 = cell_area * sum |c|^2."""
        return TWO_PI * self.ly

    def index_of(self, k: int, m: int) -> tuple[int, int]:
        if not (-self.nx // 2 <= k < self.nx // 2 and -self.ny // 2 <= m < self.ny // 2):
            raise ValueError(f"mode ({k},{m}) outside grid")
        return k % self.nx, m % self.ny


@dataclass(frozen=True)
class ShearedSymbols:
    """Diagonal symbols of the moving-frame operators at a fixed time.

    dx     : symbol of d_x, i.e. i*k
    dyt    : symbol of d_y - t*d_x, i.e. i*(eta - k*t)
    lam    : |(k, eta - k*t)|, vanishing only at the origin mode
    lap    : -(k^2 + (eta - k*t)^2)
    """

    grid: SpectralGrid
    t: float
    dx: np.ndarray
    dyt: np.ndarray
    lam: np.ndarray
    lap: np.ndarray


def make_sheared_symbols(grid: SpectralGrid, t: float) -> ShearedSymbols:
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    k = grid.k2d
    sig = grid.eta2d - k * t
    lam2 = k * k + sig * sig
    return ShearedSymbols(
        grid=grid,
        t=float(t),
        dx=1j * k,
        dyt=1j * sig,
        lam=np.sqrt(lam2),
        lap=-lam2,
    )


def perp_gradient_symbols(
    symbols: ShearedSymbols, sheared: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Symbols of the perpendicular gradient, (-d_y^t, d_x) or (-d_y, d_x).

    Both readings appear in derived advecting-velocity formulas; note that
    contracted against the matching gradient they produce the same transport
    kernel, so the choice only matters for reconstructing the velocity
    itself.
    """
    if sheared:
        return -symbols.dyt, symbols.dx
    return -1j * symbols.grid.eta2d, symbols.dx


def lambda_power(symbols: ShearedSymbols, a: float) -> np.ndarray:
    """Symbol of the fractional sheared half-Laplacian Lambda_t^a.

    For a < 0 the origin entry is +inf; apply_multiplier maps it to zero on
    mean-zero fields and raises otherwise.
    """
    if a == 0:
        return np.ones_like(symbols.lam)
    with np.errstate(divide="ignore"):
        out = symbols.lam**a
    return out


def compose_symbol(*factors: np.ndarray) -> np.ndarray:
    """Product of symbol arrays, tolerating inf*0 at singular entries.

    The resulting NaN/inf entries keep the apply_multiplier zero-mode guard
    intact.
    """
    with np.errstate(invalid="ignore"):
        out = np.asarray(factors[0])
        for f in factors[1:]:
            out = out * f
    return out


class SpectralField:
    """Scalar or 2-vector field as complex coefficients on a SpectralGrid."""

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: SpectralGrid, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim == 2:
            coeffs = coeffs[None, :, :]
        if coeffs.ndim != 3 or coeffs.shape[1:] != (grid.nx, grid.ny):
            raise NonconformalGrid(
                f"coefficient shape {coeffs.shape} does not match grid "
                f"({grid.nx}, {grid.ny})"
            )
        if coeffs.shape[0] not in (1, 2):
            raise ValueError("fields have 1 or 2 components")
        self.grid = grid
        self.coeffs = coeffs

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, grid: SpectralGrid, components: int = 1) -> "SpectralField":
        return cls(grid, np.zeros((components, grid.nx, grid.ny), dtype=np.complex128))

    @classmethod
    def from_modes(cls, grid: SpectralGrid, modes: dict, components: int = 1) -> "SpectralField":
        """Build a real field from {(comp, k, m): amplitude}; the conjugate
        partner of every mode is filled in automatically."""
        f = cls.zeros(grid, components)
        for (comp, k, m), val in modes.items():
            i, j = grid.index_of(k, m)
            ii, jj = grid.index_of(-k, -m) if (k, m) != (0, 0) else (i, j)
            f.coeffs[comp, i, j] += val
            if (k, m) != (0, 0):
                f.coeffs[comp, ii, jj] += np.conj(val)
        return f

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def __mul__(self, other) -> "SpectralField":
        if not np.isscalar(other):
            return NotImplemented
        return SpectralField(self.grid, self.coeffs * other)

    __rmul__ = __mul__

    def get_mode(self, k: int, m: int, comp: int = 0) -> complex:
        i, j = self.grid.index_of(k, m)
        return complex(self.coeffs[comp, i, j])

    def mean_modes(self) -> np.ndarray:
        return self.coeffs[:, 0, 0]

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.cell_area * np.sum(np.abs(self.coeffs) ** 2)))

    def l2_norm_nonzero_x(self) -> float:
        """L2 norm of the part with k != 0 (the x-average removed)."""
        c = self.coeffs[:, 1:, :]
        return float(np.sqrt(self.grid.cell_area * np.sum(np.abs(c) ** 2)))

    def sobolev_norm(self, s: float) -> float:
        w = (1.0 + self.grid.k2d**2 + self.grid.eta2d**2) ** (s / 2.0)
        return float(
            np.sqrt(self.grid.cell_area * np.sum((w[None] * np.abs(self.coeffs)) ** 2))
        )

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - _reflect_conj(self.coeffs))))

    def enforce_hermitian(self) -> "SpectralField":
        self.coeffs = 0.5 * (self.coeffs + _reflect_conj(self.coeffs))
        return self


def _reflect_conj(c: np.ndarray) -> np.ndarray:
    """conj(c(-k, -m)) with FFT index wrapping."""
    return np.conj(np.roll(c[..., ::-1, ::-1], shift=(1, 1), axis=(-2, -1)))


def _check_same_grid(f: SpectralField, g: SpectralField) -> None:
    if f.grid != g.grid:
        raise NonconformalGrid("fields live on different grids")


def apply_multiplier(f: SpectralField, m: np.ndarray) -> SpectralField:
    """Pointwise multiplication by a per-mode symbol.

    Non-finite symbol entries (the origin of negative Lambda powers) act as
    zero where the field vanishes and raise SingularSymbolAtZeroMode where it
    does not.
    """
    m = np.asarray(m)
    if m.ndim == 2:
        if m.shape != (f.grid.nx, f.grid.ny):
            raise NonconformalGrid("symbol shape does not match grid")
        m = m[None, :, :]
    elif m.shape != f.coeffs.shape:
        raise NonconformalGrid("symbol shape does not match field")
    bad = ~np.isfinite(m)
    if bad.any():
        bad_b = np.broadcast_to(bad, f.coeffs.shape)
        if np.any(f.coeffs[bad_b] != 0):
            raise SingularSymbolAtZeroMode(
                "singular symbol applied to a field with nonzero mean mode"
            )
        m = np.where(bad, 0.0, m)
    return SpectralField(f.grid, m * f.coeffs)


def to_physical(f: SpectralField) -> np.ndarray:
    """Collocation values on the 3/2-padded grid, shape (nc, Mx, My)."""
    grid = f.grid
    mx, my_ = grid.pad_shape
    big = np.zeros((f.components, mx, my_), dtype=np.complex128)
    hx, hy = grid.nx // 2, grid.ny // 2
    big[:, :hx, :hy] = f.coeffs[:, :hx, :hy]
    big[:, :hx, -hy:] = f.coeffs[:, :hx, -hy:]
    big[:, -hx:, :hy] = f.coeffs[:, -hx:, :hy]
    big[:, -hx:, -hy:] = f.coeffs[:, -hx:, -hy:]
    return np.real(np.fft.ifft2(big, axes=(-2, -1))) * (mx * my_)


def from_physical(values: np.ndarray, grid: SpectralGrid) -> SpectralField:
    """Inverse of to_physical followed by dealias truncation."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 2:
        values = values[None]
    mx, my_ = values.shape[-2:]
    big = np.fft.fft2(values, axes=(-2, -1)) / (mx * my_)
    hx, hy = grid.nx // 2, grid.ny // 2
    c = np.zeros((values.shape[0], grid.nx, grid.ny), dtype=np.complex128)
    c[:, :hx, :hy] = big[:, :hx, :hy]
    c[:, :hx, -hy:] = big[:, :hx, -hy:]
    c[:, -hx:, :hy] = big[:, -hx:, :hy]
    c[:, -hx:, -hy:] = big[:, -hx:, -hy:]
    c *= grid.dealias_mask[None]
    return SpectralField(grid, c)


def physical_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Dealiased coefficients of the pointwise product f*g.

    Component handling: equal component counts multiply componentwise; a
    scalar broadcasts against a vector.
    """
    _check_same_grid(f, g)
    if f.components != g.components and 1 not in (f.components, g.components):
        raise ValueError("incompatible component counts")
    return from_physical(to_physical(f) * to_physical(g), f.grid)


def divergence_t(v: SpectralField, symbols: ShearedSymbols) -> np.ndarray:
    """Moving-frame divergence dx*v^x + dyt*v^y as a coefficient array."""
    if v.components != 2:
        raise ValueError("divergence_t expects a 2-vector field")
    return symbols.dx * v.coeffs[0] + symbols.dyt * v.coeffs[1]


def leray_project(v: SpectralField, t: float) -> SpectralField:
    """Remove the moving-frame gradient part: output satisfies div_t = 0.

    Acts per mode as I - sigma sigma^T/|sigma|^2 with sigma = (k, eta - k t);
    the origin mode (constants are divergence free) is left untouched.
    """
    if v.components != 2:
        raise ValueError("leray_project expects a 2-vector field")
    sym = make_sheared_symbols(v.grid, t)
    k = v.grid.k2d
    sig = np.imag(sym.dyt)
    lam2 = k * k + sig * sig
    inv = np.zeros_like(lam2)
    nz = lam2 > 0
    inv[nz] = 1.0 / lam2[nz]
    div = (k * v.coeffs[0] + sig * v.coeffs[1]) * inv
    out = v.coeffs.copy()
    out[0] -= k * div
    out[1] -= sig * div
    return SpectralField(v.grid, out)


def random_real_field(
    grid: SpectralGrid,
    rng: np.random.Generator,
    components: int = 1,
    k_band: int | None = None,
    m_band: int | None = None,
    mean_zero: bool = True,
) -> SpectralField:
    """Hermitian-symmetric random field, optionally band-limited."""
    c = rng.standard_normal((components, grid.nx, grid.ny)) + 1j * rng.standard_normal(
        (components, grid.nx, grid.ny)
    )
    if k_band is not None:
        c *= (np.abs(grid.kx) <= k_band)[None, :, None]
    if m_band is not None:
        c *= (np.abs(grid.my) <= m_band)[None, None, :]
    c *= grid.dealias_mask[None]
    f = SpectralField(grid, c).enforce_hermitian()
    if mean_zero:
        f.coeffs[:, 0, 0] = 0.0
    return f
