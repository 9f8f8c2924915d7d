"""Flat key-value configuration files and their mapping to solver objects.

Format: one ``key = value`` pair per line, dotted section prefixes
(``noise.kernel = gaussian``), ``#`` comments and blank lines ignored.
The flat layout keeps configs diff-friendly.  ``--set key=value`` command
line overrides replace values after loading.

Recognized keys (defaults in parentheses):

    model.name            fhn | poly                  (fhn)
    model.phi1.v_coeffs   ascending poly coefficients of v in phi1 [poly]
    model.phi1.w_coeff    linear w coefficient in phi1             [poly]
    model.phi2.v_coeff    phi2 = v_coeff*v + w_coeff*w + const     [poly]
    model.phi2.w_coeff
    model.phi2.const      (0)
    model.b_const         constant noise intensity (1)
    model.L_lip, model.beta, model.gamma, model.m, model.M_growth
                          structural constants [poly]
    grid.n (128)          cells
    grid.L (20)           domain length
    init.kind (pulse)     pulse | equilibrium | zero
    init.amplitude (2)    pulse bump height
    init.width (2)        pulse bump width
    solver.scheme (semi_implicit)   semi_implicit | tamed_explicit | explicit
    solver.dt (1e-2), solver.T (20), solver.T0 (5)
    solver.record_stride (1), solver.snapshot_stride (0)
    noise.kernel (gaussian)         constant | gaussian | exponential
    noise.sigma (0.1), noise.corr_length (1), noise.quad_order (4)
    failure.kappa (5), failure.epsilon (0.1), failure.alpha (0.05),
    failure.c_hat (1), failure.m (100)
    study.ladder (32 64 128)        whitespace/comma separated cell counts
    study.ref_factor (4), study.samples (16), study.p (2)
    check.samples (100000), check.box_v (5), check.box_w (5),
    check.sbp_pairs (1000), check.cov_draws (100000)
    seed (0)              overridden by --seed
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .grid import Grid, SystemState
from .model import MODEL_REGISTRY, ReactionModel, polynomial_model
from .noise import KERNEL_REGISTRY, CovarianceKernel
from .mc import FailureSpec
from .sim import SolverConfig, equilibrium_state, pulse_state, zero_state

__all__ = ["Config", "load_config"]


@dataclass
class Config:
    """Parsed key-value configuration with typed accessors."""

    entries: dict[str, str] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "Config":
        entries: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
        return cls(entries)

    def apply_overrides(self, overrides) -> None:
        for item in overrides or ():
            if "=" not in item:
                raise ConfigError(f"override must look like key=value, got {item!r}")
            key, value = item.split("=", 1)
            self.entries[key.strip()] = value.strip()

    # -- typed getters ------------------------------------------------------

    _MISSING = object()

    def get_str(self, key: str, default=_MISSING) -> str:
        if key in self.entries:
            return self.entries[key]
        if default is Config._MISSING:
            raise ConfigError(f"missing required config key '{key}'")
        return default

    def get_float(self, key: str, default=_MISSING) -> float:
        raw = self.get_str(key, default)
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"config key '{key}' is not a number: {raw!r}") from None

    def get_int(self, key: str, default=_MISSING) -> int:
        raw = self.get_str(key, default)
        try:
            return int(str(raw))
        except (TypeError, ValueError):
            raise ConfigError(f"config key '{key}' is not an integer: {raw!r}") from None

    def get_float_list(self, key: str, default=_MISSING) -> list[float]:
        raw = self.get_str(key, default)
        if isinstance(raw, (list, tuple)):
            return [float(x) for x in raw]
        parts = str(raw).replace(",", " ").split()
        if not parts:
            raise ConfigError(f"config key '{key}' is an empty list")
        return [float(x) for x in parts]

    def get_int_list(self, key: str, default=_MISSING) -> list[int]:
        return [int(x) for x in self.get_float_list(key, default)]

    def resolved_items(self) -> list[tuple[str, str]]:
        return sorted(self.entries.items())

    # -- object builders ----------------------------------------------------

    def build_model(self) -> ReactionModel:
        name = self.get_str("model.name", "fhn")
        if name in MODEL_REGISTRY:
            return MODEL_REGISTRY[name]()
        if name != "poly":
            raise ConfigError(
                f"unknown model.name '{name}'; use one of "
                f"{sorted(MODEL_REGISTRY)} or 'poly'"
            )
        try:
            return polynomial_model(
                phi1_v_coeffs=self.get_float_list("model.phi1.v_coeffs"),
                phi1_w_coeff=self.get_float("model.phi1.w_coeff", 0.0),
                phi2_v_coeff=self.get_float("model.phi2.v_coeff", 0.0),
                phi2_w_coeff=self.get_float("model.phi2.w_coeff", 0.0),
                phi2_const=self.get_float("model.phi2.const", 0.0),
                b_const=self.get_float("model.b_const", 1.0),
                L_lip=self.get_float("model.L_lip", 2.5),
                beta=self.get_float("model.beta", 1.0),
                gamma=self.get_float("model.gamma", 1.0 / 6.0),
                m=self.get_float("model.m", 3.0),
                M_growth=self.get_float("model.M_growth", 2.0),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def build_kernel(self) -> CovarianceKernel:
        name = self.get_str("noise.kernel")
        if name not in KERNEL_REGISTRY:
            raise ConfigError(
                f"unknown noise.kernel '{name}'; use one of {sorted(KERNEL_REGISTRY)}"
            )
        sigma = self.get_float("noise.sigma", 0.1)
        if name == "constant":
            return KERNEL_REGISTRY[name](sigma)
        return KERNEL_REGISTRY[name](sigma, self.get_float("noise.corr_length", 1.0))

    def build_solver_config(self) -> SolverConfig:
        cfg = SolverConfig(
            n=self.get_int("grid.n", 128),
            L=self.get_float("grid.L", 20.0),
            dt=self.get_float("solver.dt", 1e-2),
            T=self.get_float("solver.T", 20.0),
            T0=self.get_float("solver.T0", 5.0),
            scheme=self.get_str("solver.scheme", "semi_implicit"),
            record_stride=self.get_int("solver.record_stride", 1),
            snapshot_stride=self.get_int("solver.snapshot_stride", 0),
        )
        cfg.validate()
        return cfg

    def build_initial_state(self, model: ReactionModel, grid: Grid) -> SystemState:
        kind = self.get_str("init.kind", "pulse")
        if kind == "pulse":
            return pulse_state(
                model,
                grid,
                amplitude=self.get_float("init.amplitude", 2.0),
                width=self.get_float("init.width", 2.0),
            )
        if kind == "equilibrium":
            return equilibrium_state(model, grid)
        if kind == "zero":
            return zero_state(grid)
        raise ConfigError(
            f"unknown init.kind '{kind}'; use pulse, equilibrium, or zero"
        )

    def build_failure_spec(self) -> FailureSpec:
        try:
            return FailureSpec(
                kappa=self.get_float("failure.kappa", 5.0),
                epsilon=self.get_float("failure.epsilon", 0.1),
                T0=self.get_float("solver.T0", 5.0),
                confidence_alpha=self.get_float("failure.alpha", 0.05),
                c_hat=self.get_float("failure.c_hat", 1.0),
                m=self.get_int("failure.m", 100),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def quad_order(self) -> int:
        return self.get_int("noise.quad_order", 4)


def load_config(path) -> Config:
    try:
        with open(path) as fh:
            return Config.parse(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
