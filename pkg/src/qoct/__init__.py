"""Simulation and analysis of Fourier-domain OCT with weak coherent light and entangled photon pairs."""

from .spectral import ComplexSpectrum, JointSpectrum, SpectralGrid, make_grid
from .scene import Dispersion, Layer, LayerStack, MirrorObject, transfer
from .interferometer import BeamSplitter, BiphotonSource, CoherentSource
from .events import FiberSpectrometer, RunConfig, simulate_run
from .reconstruct import AScan, PeakMetrics, ReconstructionConfig, RolloffCurve

__version__ = "0.1.0"

__all__ = [
    "ComplexSpectrum",
    "JointSpectrum",
    "SpectralGrid",
    "make_grid",
    "Dispersion",
    "Layer",
    "LayerStack",
    "MirrorObject",
    "transfer",
    "BeamSplitter",
    "BiphotonSource",
    "CoherentSource",
    "FiberSpectrometer",
    "RunConfig",
    "simulate_run",
    "AScan",
    "PeakMetrics",
    "ReconstructionConfig",
    "RolloffCurve",
]
