"""Model presets: the four Py-DMA isotopologues and the one-nucleus template.

Each Py-DMA entry is a two-spin-1/2-nuclei model: the Py nucleus couples to
electron 1, the DMA nucleus to electron 2, isotropic couplings quoted in mT.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dynamics import RatePair
from .spincore import HyperfineCoupling, NucleusSpec, SpinSystem

__all__ = ["PyDmaPreset", "PRESETS", "preset_system", "preset_rates", "one_nucleus_system"]


@dataclass(frozen=True)
class PyDmaPreset:
    a_py_mT: float
    a_dma_mT: float
    k_s_per_us: float
    k_t_per_us: float


PRESETS: dict[str, PyDmaPreset] = {
    "Py-h10-DMA-h11": PyDmaPreset(1.9, 6.7, 8.5, 4.0),
    "Py-d10-DMA-h11": PyDmaPreset(0.4, 5.0, 12.0, 11.4),
    "Py-d10-DMA-d11": PyDmaPreset(0.9, 4.2, 7.9, 6.0),
    "Py-h10-DMA-d11": PyDmaPreset(1.3, 4.0, 3.7, 1.8),
}


def preset_system(name: str, field_mT: float = 0.0) -> SpinSystem:
    p = PRESETS[name]
    return SpinSystem(
        nuclei=(
            NucleusSpec(0.5, 1, HyperfineCoupling.isotropic_mT(p.a_py_mT)),
            NucleusSpec(0.5, 2, HyperfineCoupling.isotropic_mT(p.a_dma_mT)),
        ),
        field_mT=field_mT,
    )


def preset_rates(name: str) -> RatePair:
    p = PRESETS[name]
    return RatePair(p.k_s_per_us, p.k_t_per_us)


def one_nucleus_system(a_rad_per_us: float, field_mT: float = 0.05) -> SpinSystem:
    """One spin-1/2 nucleus on electron 1, isotropic coupling in rad/us.

    The default field of 0.05 mT (0.5 gauss) matches the hyperfine-sweep
    and <Q_S>-trace scenarios.
    """
    return SpinSystem(
        nuclei=(NucleusSpec(0.5, 1, HyperfineCoupling.isotropic(a_rad_per_us)),),
        field_mT=field_mT,
    )


#: recombination rates used by the hyperfine-sweep and <Q_S>-trace scenarios
ONE_NUCLEUS_RATES = RatePair(20.0, 0.5)
