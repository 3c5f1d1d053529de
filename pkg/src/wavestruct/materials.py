"""Material parameters of the solid-fluid pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MaterialParams:
    """Lame constants, densities and fluid sound speed."""

    lame_lambda: float
    lame_mu: float
    rho_solid: float
    rho_fluid: float
    sound_speed: float

    def __post_init__(self):
        if self.lame_mu <= 0 or self.lame_lambda + self.lame_mu <= 0:
            raise ValueError("need mu > 0 and lambda + mu > 0")
        if self.rho_solid <= 0 or self.rho_fluid <= 0 or self.sound_speed <= 0:
            raise ValueError("densities and sound speed must be positive")

    @property
    def c_L(self) -> float:
        return float(np.sqrt((self.lame_lambda + 2.0 * self.lame_mu) / self.rho_solid))

    @property
    def c_T(self) -> float:
        return float(np.sqrt(self.lame_mu / self.rho_solid))


DISK_STUDY = MaterialParams(lame_lambda=9.0, lame_mu=15.0, rho_solid=1.5,
                            rho_fluid=1.0, sound_speed=np.sqrt(5.0))
RECT_STUDY = MaterialParams(lame_lambda=2.0, lame_mu=3.0, rho_solid=5.0,
                            rho_fluid=1.0, sound_speed=1.0)
