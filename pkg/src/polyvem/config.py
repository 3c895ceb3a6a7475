"""Strict flat key=value run configuration with dotted section prefixes."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

__all__ = ["ConfigError", "RunConfig", "parse_config_text", "load_run_config"]


class ConfigError(ValueError):
    """Invalid or unknown configuration content (CLI exit code 2)."""


def _as_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {s!r}")


def _as_float_list(s: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in s.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated floats, got {s!r}") from exc


def _as_int_list(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in s.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {s!r}") from exc


def _as_component(s: str) -> float | None:
    v = s.strip().lower()
    if v == "free":
        return None
    try:
        return float(v)
    except ValueError as exc:
        raise ConfigError(f"expected a number or 'free', got {s!r}") from exc


_PROBLEMS = ("simple-shear", "cook", "punch", "custom")
_FAMILIES = ("sq1", "dq2s", "sns", "isns", "vrn")
_MODELS = ("neo-hookean", "mooney-rivlin", "ogden")
_ALPHA = ("on", "off")


# key -> (attribute, caster)
_SCHEMA = {
    "problem": ("problem", str),
    "mesh.family": ("mesh_family", str),
    "mesh.N": ("mesh_N", int),
    "mesh.seed": ("mesh_seed", int),
    "mesh.distortion": ("mesh_distortion", float),
    "mesh.lloyd_iters": ("mesh_lloyd_iters", int),
    "mesh.serration": ("mesh_serration", float),
    "mesh.file": ("mesh_file", str),
    "model": ("model_kind", str),
    "E": ("E", float),
    "nu": ("nu", float),
    "mr_ratio": ("mr_ratio", float),
    "ogden_alphas": ("ogden_alphas", _as_float_list),
    "ogden_mu_fractions": ("ogden_mu_fractions", _as_float_list),
    "stab.alpha": ("stab_alpha", str),
    "stab.taylor_order": ("stab_taylor_order", int),
    "stab.nu0": ("stab_nu0", float),
    "stab.mvee_tol": ("stab_mvee_tol", float),
    "steps": ("steps", int),
    "adaptive": ("adaptive", _as_bool),
    "newton.tol_rel": ("newton_tol_rel", float),
    "newton.max_iter": ("newton_max_iter", int),
    "load": ("load", float),
    "body_force": ("body_force", _as_float_list),
    "out_dir": ("out_dir", str),
    "study.N": ("study_N", _as_int_list),
    "study.nu": ("study_nu", _as_float_list),
    "study.alpha": ("study_alpha", lambda s: tuple(t.strip() for t in s.split(",") if t.strip())),
    "reference.level": ("reference_level", int),
    "reference.cache_dir": ("reference_cache_dir", str),
}


@dataclass
class RunConfig:
    """Fully resolved run configuration (defaults filled in)."""

    problem: str = "simple-shear"
    mesh_family: str = "sq1"
    mesh_N: int = 3
    mesh_seed: int = 0
    mesh_distortion: float = 0.25
    mesh_lloyd_iters: int = 10
    mesh_serration: float = 0.15
    mesh_file: str | None = None
    model_kind: str = "neo-hookean"
    E: float = 200.0
    nu: float = 0.3
    mr_ratio: float = 4.0
    ogden_alphas: tuple[float, ...] = (1.3, 5.0, -2.0)
    ogden_mu_fractions: tuple[float, ...] = (0.77, 0.1, -0.25)
    stab_alpha: str = "on"
    stab_taylor_order: int = 5
    stab_nu0: float = 0.0
    stab_mvee_tol: float = 1e-8
    steps: int = 5
    adaptive: bool = True
    newton_tol_rel: float = 1e-10
    newton_max_iter: int = 25
    load: float | None = None
    body_force: tuple[float, ...] = (0.0, 0.0)
    out_dir: str = "out"
    dirichlet: dict = field(default_factory=dict)
    tractions: dict = field(default_factory=dict)
    study_N: tuple[int, ...] | None = None
    study_nu: tuple[float, ...] | None = None
    study_alpha: tuple[str, ...] | None = None
    reference_level: int = 6
    reference_cache_dir: str | None = None

    def effective_dict(self) -> dict:
        d = asdict(self)
        d["dirichlet"] = {k: list(v) for k, v in self.dirichlet.items()}
        d["tractions"] = {k: list(v) for k, v in self.tractions.items()}
        return d

    def validate(self, for_study: bool = False) -> None:
        if self.problem not in _PROBLEMS:
            raise ConfigError(f"problem must be one of {_PROBLEMS}, got {self.problem!r}")
        if self.model_kind not in _MODELS:
            raise ConfigError(f"model must be one of {_MODELS}, got {self.model_kind!r}")
        if self.stab_alpha not in _ALPHA:
            raise ConfigError(f"stab.alpha must be on or off, got {self.stab_alpha!r}")
        if self.problem == "custom":
            if not self.mesh_file:
                raise ConfigError("problem = custom requires mesh.file")
            if not self.dirichlet:
                raise ConfigError("problem = custom requires at least one dirichlet.<tag> entry")
        else:
            if self.mesh_family not in _FAMILIES:
                raise ConfigError(
                    f"mesh.family must be one of {_FAMILIES}, got {self.mesh_family!r}"
                )
            if self.mesh_N < 1:
                raise ConfigError("mesh.N must be >= 1")
            if self.dirichlet or self.tractions:
                raise ConfigError("dirichlet./traction. keys are only valid for problem = custom")
        if not 0.0 <= self.mesh_distortion < 0.5:
            raise ConfigError("mesh.distortion must be in [0, 0.5)")
        if not -1.0 < self.nu < 0.5:
            raise ConfigError("nu must lie in (-1, 0.5)")
        if self.E <= 0:
            raise ConfigError("E must be positive")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if len(self.body_force) != 2:
            raise ConfigError("body_force must have two components")
        if for_study:
            if not self.study_N or not self.study_nu:
                raise ConfigError("study requires non-empty study.N and study.nu")
            for a in self.study_alpha or ():
                if a not in _ALPHA:
                    raise ConfigError(f"study.alpha entries must be on/off, got {a!r}")
            if self.problem == "custom":
                raise ConfigError("studies run on the named benchmark problems only")


def parse_config_text(text: str) -> RunConfig:
    """Parse and validate flat key = value text; unknown keys are rejected."""
    cfg = RunConfig()
    seen: set[str] = set()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key.startswith("dirichlet."):
            tag = key[len("dirichlet."):]
            parts = value.split(",")
            if len(parts) != 2:
                raise ConfigError(f"line {lineno}: dirichlet.{tag} needs 'ux,uy'")
            cfg.dirichlet[tag] = (_as_component(parts[0]), _as_component(parts[1]))
            continue
        if key.startswith("traction."):
            tag = key[len("traction."):]
            vals = _as_float_list(value)
            if len(vals) != 2:
                raise ConfigError(f"line {lineno}: traction.{tag} needs 'tx,ty'")
            cfg.tractions[tag] = vals
            continue
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, caster = _SCHEMA[key]
        try:
            setattr(cfg, attr, caster(value))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return cfg


def load_run_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
