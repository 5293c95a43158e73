from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import InputError


@dataclass(frozen=True)
class InversionConfig:
    abs_tolerance: float = 1e-10
    max_quadrature_nodes: int = 1_000_000
    mc_fallback_samples: int = 2_000_000
    seed: int = 0

    def __post_init__(self):
        if not self.abs_tolerance > 0:
            raise InputError("abs_tolerance must be positive")
        if self.mc_fallback_samples < 10_000:
            raise InputError("mc_fallback_samples must be at least 1e4")
        if self.max_quadrature_nodes < 16:
            raise InputError("max_quadrature_nodes must be at least 16")


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 0
    chunk: int = 2**16

    def __post_init__(self):
        if self.samples < 10_000:
            raise InputError("samples must be at least 1e4")
        if self.chunk < 1:
            raise InputError("chunk must be positive")


@dataclass(frozen=True)
class NumericsConfig:
    """Everything a computation needs to be reproducible."""

    gl_nodes: int = 64
    quad_tol: float = 1e-8
    inversion: InversionConfig = field(default_factory=InversionConfig)
    mc: McConfig = field(default_factory=McConfig)

    def __post_init__(self):
        if self.gl_nodes < 2:
            raise InputError("gl_nodes must be at least 2")
        if not self.quad_tol > 0:
            raise InputError("quad_tol must be positive")

    @classmethod
    def build(cls, seed=0, samples=1_000_000, gl_nodes=64, tol=1e-10, quad_tol=1e-8):
        return cls(
            gl_nodes=gl_nodes,
            quad_tol=quad_tol,
            inversion=InversionConfig(abs_tolerance=tol, seed=seed),
            mc=McConfig(samples=samples, seed=seed),
        )

    def with_seed(self, seed: int) -> "NumericsConfig":
        return replace(
            self,
            inversion=replace(self.inversion, seed=seed),
            mc=replace(self.mc, seed=seed),
        )
