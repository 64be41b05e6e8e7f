"""Object models evaluated to transfer functions ``f(omega)``.

Depths follow the full optical-path-difference convention by default: a
mirror at ``z`` produces fringes ``exp(i z omega / c)`` and reconstructs to an
A-scan peak at ``z``. Layer stacks use physical thicknesses and a round trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import keyvalue
from .spectral import C_LIGHT, ComplexSpectrum, SpectralGrid

__all__ = [
    "MirrorObject",
    "Layer",
    "LayerStack",
    "Dispersion",
    "mirror_transfer",
    "stack_transfer",
    "add_dispersion",
    "transfer",
    "parse_object",
    "load_object",
]

FS2_PER_MM = 1e-30 / 1e-3  # s^2/m


@dataclass(frozen=True)
class MirrorObject:
    reflectivity: float = 1.0
    depth: float = 0.0
    # False: ``depth`` is a one-way distance and the OPD is twice it
    depth_is_opd: bool = True

    def __post_init__(self):
        if not 0 <= self.reflectivity <= 1:
            raise ValueError(f"reflectivity must lie in [0, 1], got {self.reflectivity}")
        if not np.isfinite(self.depth):
            raise ValueError("depth must be finite")

    @property
    def opd(self) -> float:
        return self.depth if self.depth_is_opd else 2 * self.depth


@dataclass(frozen=True)
class Layer:
    thickness: float
    group_index: float
    r: float  # amplitude of the interface at the top of this layer
    beta2: float = 0.0  # s^2/m

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValueError("layer thickness must be positive")
        if not self.group_index > 0:
            raise ValueError("group index must be positive")


@dataclass(frozen=True)
class LayerStack:
    layers: tuple[Layer, ...]
    air_gap: float = 0.0
    r_bottom: float = 0.0  # interface below the last layer

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("a layer stack needs at least one layer")
        if self.air_gap < 0:
            raise ValueError("air gap must be non-negative")
        if sum(a**2 for a in self.interface_amplitudes) > 1 + 1e-12:
            raise ValueError("sum of squared interface amplitudes exceeds 1")

    @property
    def interface_amplitudes(self) -> list[float]:
        return [layer.r for layer in self.layers] + [self.r_bottom]

    def interface_opds(self) -> list[float]:
        """Group-delay OPD of each interface (``2 * (gap + sum n_g L)``)."""
        out = [2 * self.air_gap]
        for layer in self.layers:
            out.append(out[-1] + 2 * layer.group_index * layer.thickness)
        return out


@dataclass(frozen=True)
class Dispersion:
    beta2: float  # s^2/m
    length: float  # m


def mirror_transfer(grid: SpectralGrid, obj: MirrorObject) -> ComplexSpectrum:
    """``f = R exp(i z (beta0 + beta1 (omega - omega_c)))`` with ``beta1 = 1/c``.

    ``beta0 = omega_c / c`` only adds the constant phase ``z beta0``, so the
    result equals ``R exp(i z omega / c)``.
    """
    z = obj.opd
    beta0 = grid.center_omega / C_LIGHT
    phase = z * beta0 + z * grid.detuning / C_LIGHT
    return ComplexSpectrum(grid, obj.reflectivity * np.exp(1j * phase))


def stack_transfer(grid: SpectralGrid, obj: LayerStack) -> ComplexSpectrum:
    """First-order (single-scattering) reflection from a layer stack.

    Each interface contributes ``r_j exp(i phi_j)``, where ``phi_j`` is the
    round-trip phase through the air gap and every layer above it, including
    each layer's quadratic dispersion about the grid centre.
    """
    w = grid.omega
    d = grid.detuning
    phi = 2 * obj.air_gap * w / C_LIGHT
    f = np.zeros(grid.n_points, dtype=complex)
    for layer in obj.layers:
        f += layer.r * np.exp(1j * phi)
        phi = phi + 2 * (layer.group_index * layer.thickness * w / C_LIGHT + 0.5 * layer.beta2 * layer.thickness * d**2)
    f += obj.r_bottom * np.exp(1j * phi)
    return ComplexSpectrum(grid, f)


def add_dispersion(f: ComplexSpectrum, beta2: float, length: float) -> ComplexSpectrum:
    """Multiply by ``exp(i beta2 L (omega - omega_c)^2 / 2)``."""
    if not (np.isfinite(beta2) and np.isfinite(length)):
        raise ValueError("beta2 and length must be finite")
    d = f.grid.detuning
    return ComplexSpectrum(f.grid, f.amplitudes * np.exp(0.5j * beta2 * length * d**2))


def transfer(grid: SpectralGrid, obj, dispersion: Dispersion | None = None) -> ComplexSpectrum:
    if isinstance(obj, MirrorObject):
        f = mirror_transfer(grid, obj)
    elif isinstance(obj, LayerStack):
        f = stack_transfer(grid, obj)
    else:
        raise TypeError(f"unsupported object type {type(obj).__name__}")
    if dispersion is not None:
        f = add_dispersion(f, dispersion.beta2, dispersion.length)
    return f


def object_from_sections(sections) -> tuple[MirrorObject | LayerStack, Dispersion | None]:
    """Build an object from parsed ``[mirror]`` or ``[stack]`` + ``[layer]`` sections.

    Sections other than ``mirror``, ``stack``, ``layer`` and ``dispersion``
    are ignored so the same sections can sit inside a larger config file.
    """
    names = [n for n, _ in sections]
    mirror = [b for n, b in sections if n == "mirror"]
    stack = [b for n, b in sections if n == "stack"]
    layers = [b for n, b in sections if n == "layer"]
    disp = [b for n, b in sections if n == "dispersion"]
    if len(mirror) + len(stack) != 1:
        raise keyvalue.FormatError("object description needs exactly one [mirror] or [stack] section")
    if mirror and layers:
        raise keyvalue.FormatError("[layer] blocks only belong to a [stack]")
    if len(disp) > 1:
        raise keyvalue.FormatError("at most one [dispersion] section")
    try:
        if mirror:
            s = keyvalue.Section("mirror", mirror[0])
            obj = MirrorObject(
                reflectivity=s.float("reflectivity", 1.0),
                depth=s.float("opd_um") * 1e-6,
            )
            s.check_unknown()
        else:
            if "layer" not in names:
                raise keyvalue.FormatError("[stack] needs at least one [layer]")
            s = keyvalue.Section("stack", stack[0])
            built = []
            for body in layers:
                ls = keyvalue.Section("layer", body)
                built.append(
                    Layer(
                        thickness=ls.float("thickness_um") * 1e-6,
                        group_index=ls.float("group_index"),
                        r=ls.float("r"),
                        beta2=ls.float("beta2_fs2_per_mm", 0.0) * FS2_PER_MM,
                    )
                )
                ls.check_unknown()
            obj = LayerStack(tuple(built), air_gap=s.float("air_gap_um", 0.0) * 1e-6, r_bottom=s.float("r_bottom", 0.0))
            s.check_unknown()
        dispersion = None
        if disp:
            ds = keyvalue.Section("dispersion", disp[0])
            dispersion = Dispersion(ds.float("beta2_fs2_per_mm") * FS2_PER_MM, ds.float("length_mm") * 1e-3)
            ds.check_unknown()
    except ValueError as exc:
        if isinstance(exc, keyvalue.FormatError):
            raise
        raise keyvalue.FormatError(str(exc)) from exc
    return obj, dispersion


def parse_object(text: str):
    """Parse an object description file; returns ``(object, dispersion or None)``."""
    return object_from_sections(keyvalue.parse(text))


def load_object(path):
    with open(path, encoding="utf-8") as fh:
        return parse_object(fh.read())
