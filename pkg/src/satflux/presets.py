"""Published simulation set-ups with their constants kept in one place."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import ModelParams
from .pde import GridState, preset_initial


@dataclass(frozen=True)
class RunSpec:
    """One simulation: parameters, grid size and initial-data recipe."""

    label: str
    params: ModelParams
    N: int
    init: str
    init_args: dict = field(default_factory=dict)

    def initial_state(self, N: int | None = None) -> GridState:
        return preset_initial(self.init, self.params, N or self.N, **self.init_args)


# monotone data 0.3 - 0.5 tanh(1000 (x/L - 0.4)) on (0, 1.7), mean 0.2
_EXP1_INIT = {"A": 0.3, "B": -0.5, "gamma": 0.4, "sharpness": 1000.0}
# (gamma, beta) pairs; beta - 0.5 tanh(1000 (x/L - gamma)) has mean beta - 0.5 + gamma = 0.2
FIG9_INTERFACES = ((0.5, 0.2), (0.6, 0.1), (0.9, -0.2))


def _fig9():
    params = ModelParams(L=2.5, M=0.2, lam=8.0)
    return [RunSpec(f"gamma={g:g},beta={b:g}", params, 500, "tanh_step",
                    {"A": b, "B": -0.5, "gamma": g, "sharpness": 1000.0})
            for g, b in FIG9_INTERFACES]


PRESETS = {
    "exp1-left": [RunSpec("exp1-left", ModelParams(L=1.7, M=0.2, lam=4.0), 500, "tanh_step", _EXP1_INIT)],
    "exp1-right": [RunSpec("exp1-right", ModelParams(L=1.7, M=0.2, lam=5.0), 500, "tanh_step", _EXP1_INIT)],
    "fig9": _fig9(),
    "fig11": [RunSpec("fig11", ModelParams(L=2.5, M=0.2, lam=8.0), 500, "two_interface", {})],
}


def get_preset(name: str) -> list[RunSpec]:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
