"""INI-style scenario documents.

Layout::

    # top-level keys come before the first section
    preset = fig3_g_mid        # optional starting point
    label = my_run
    regimes = qq, sc, cb

    [params]      m, omega, omega_s, g (sets g1 and g2), g1, g2, lambda, levels, oscillator_form
    [initial]     x0, p0, spin (name or 4 amplitudes), state (ghz or 4*levels amplitudes)
    [integrator]  dt, t_final, sample_every, method, adaptive_tol, auto_dt
    [output]      outputs, entropy_mode
    [statics]     branches, guesses ("x p; x p"), guess_radius, n_angles

Unknown sections or keys are rejected. Missing keys keep their defaults
(m = omega = 1, dt = 1e-3, ...) or the preset's values.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import METHODS, IntegratorConfig
from .model import OSCILLATOR_FORMS, ModelParams
from .observables import ENTROPY_MODES, REGIMES
from .scenarios import OUTPUT_KINDS, SPIN_STATES, ScenarioConfig, UnknownPreset, build_ghz, preset
from .statics import circle_guesses

TOP = "scenario"
SECTIONS = {
    TOP: {"preset", "label", "regimes"},
    "params": {"m", "omega", "omega_s", "g", "g1", "g2", "lambda", "levels", "oscillator_form"},
    "initial": {"x0", "p0", "spin", "state"},
    "integrator": {"dt", "t_final", "sample_every", "method", "adaptive_tol", "auto_dt"},
    "output": {"outputs", "entropy_mode"},
    "statics": {"branches", "guesses", "guess_radius", "n_angles"},
}


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ValidationError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass(frozen=True)
class StaticsOptions:
    branches: tuple[int, ...] = (0, 1, 2, 3)
    guesses: tuple[tuple[float, float], ...] = field(default_factory=lambda: tuple(circle_guesses(1.0, 8)))


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(
        comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None, strict=True
    )
    try:
        cp.read_string(f"[{TOP}]\n" + text)
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", _line(exc.lineno)) from None
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r}", _line(exc.lineno)) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ParseError(f"cannot parse {line!r}", _line(lineno)) from None
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None
    return cp


def _line(lineno):
    return None if lineno is None else lineno - 1


def _float(key, raw, positive=False):
    try:
        v = float(raw)
    except ValueError:
        raise ValidationError(f"not a number: {raw!r}", key) from None
    if not np.isfinite(v):
        raise ValidationError("must be finite", key)
    if positive and not v > 0:
        raise ValidationError(f"must be positive, got {v}", key)
    return v


def _int(key, raw, minimum):
    try:
        v = int(raw)
    except ValueError:
        raise ValidationError(f"not an integer: {raw!r}", key) from None
    if v < minimum:
        raise ValidationError(f"must be >= {minimum}, got {v}", key)
    return v


def _choice(key, raw, choices):
    if raw not in choices:
        raise ValidationError(f"must be one of {', '.join(choices)}; got {raw!r}", key)
    return raw


def _bool(key, raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {raw!r}", key)


def _list(raw):
    return [item.strip() for item in raw.split(",") if item.strip()]


def _amplitudes(key, raw, n):
    try:
        amps = tuple(complex(item.replace(" ", "")) for item in _list(raw))
    except ValueError:
        raise ValidationError(f"bad amplitude list {raw!r}", key) from None
    if len(amps) != n:
        raise ValidationError(f"expected {n} amplitudes, got {len(amps)}", key)
    if np.linalg.norm(amps) == 0:
        raise ValidationError("state is zero", key)
    return amps


def _parse(text: str) -> tuple[ScenarioConfig, StaticsOptions]:
    cp = _read(text)
    for section in cp.sections():
        if section not in SECTIONS:
            raise ValidationError(f"unknown section [{section}]", section)
        for key in cp[section]:
            if key not in SECTIONS[section]:
                raise ValidationError(f"unknown key in [{section}]", key)

    def get(section, key):
        return cp[section].get(key) if cp.has_section(section) else None

    name = get(TOP, "preset")
    if name is not None:
        try:
            base = preset(name)
        except UnknownPreset as exc:
            raise ValidationError(str(exc), "preset") from None
    else:
        base = ScenarioConfig()

    # params
    pv = {}
    for key, attr in (("m", "m"), ("omega", "omega")):
        if (raw := get("params", key)) is not None:
            pv[attr] = _float(key, raw, positive=True)
    for key, attr in (("omega_s", "omega_s"), ("g1", "g1"), ("g2", "g2"), ("lambda", "lam")):
        if (raw := get("params", key)) is not None:
            pv[attr] = _float(key, raw)
    if (raw := get("params", "g")) is not None:
        if "g1" in pv or "g2" in pv:
            raise ValidationError("give either g or g1/g2, not both", "g")
        pv["g1"] = pv["g2"] = _float("g", raw)
    if (raw := get("params", "levels")) is not None:
        pv["levels"] = _int("levels", raw, 2)
    if (raw := get("params", "oscillator_form")) is not None:
        pv["oscillator_form"] = _choice("oscillator_form", raw, OSCILLATOR_FORMS)
    params = replace(base.params, **pv)

    # integrator
    iv = {}
    for key in ("dt", "t_final", "adaptive_tol"):
        if (raw := get("integrator", key)) is not None:
            iv[key] = _float(key, raw, positive=True)
    if (raw := get("integrator", "sample_every")) is not None:
        iv["sample_every"] = _int("sample_every", raw, 1)
    if (raw := get("integrator", "method")) is not None:
        iv["method"] = _choice("method", raw, METHODS)
    if (raw := get("integrator", "auto_dt")) is not None:
        iv["auto_dt"] = _bool("auto_dt", raw)
    integrator = replace(base.integrator, **iv)

    sv = {"params": params, "integrator": integrator}
    if (raw := get(TOP, "label")) is not None:
        sv["label"] = raw.strip()
    elif name is None:
        sv["label"] = "scenario"
    if (raw := get(TOP, "regimes")) is not None:
        regimes = tuple(r.upper() for r in _list(raw))
        for r in regimes:
            _choice("regimes", r, REGIMES)
        sv["regimes"] = regimes
    for key in ("x0", "p0"):
        if (raw := get("initial", key)) is not None:
            sv[key] = _float(key, raw)
    if (raw := get("initial", "spin")) is not None:
        raw = raw.strip()
        sv["spin"] = SPIN_STATES[raw] if raw in SPIN_STATES else _amplitudes("spin", raw, 4)
    if (raw := get("initial", "state")) is not None:
        raw = raw.strip()
        if raw.lower() == "ghz":
            sv["state"] = tuple(build_ghz(params.levels))
        elif raw.lower() == "none":
            sv["state"] = None
        else:
            sv["state"] = _amplitudes("state", raw, params.dim_qq)
    elif base.state is not None and params.levels != len(base.state) // 4:
        sv["state"] = tuple(build_ghz(params.levels))
    if (raw := get("output", "outputs")) is not None:
        outs = tuple(_list(raw))
        for o in outs:
            _choice("outputs", o, OUTPUT_KINDS)
        sv["outputs"] = outs
    if (raw := get("output", "entropy_mode")) is not None:
        sv["entropy_mode"] = _choice("entropy_mode", raw, ENTROPY_MODES)

    try:
        cfg = replace(base, **sv)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None

    statics = StaticsOptions()
    if (raw := get("statics", "branches")) is not None:
        branches = tuple(_int("branches", b, 0) for b in _list(raw))
        if any(b > 3 for b in branches):
            raise ValidationError("branches must be in 0..3", "branches")
        statics = replace(statics, branches=branches)
    radius = 1.0
    n_angles = 8
    if (raw := get("statics", "guess_radius")) is not None:
        radius = _float("guess_radius", raw, positive=True)
    if (raw := get("statics", "n_angles")) is not None:
        n_angles = _int("n_angles", raw, 1)
    guesses = list(circle_guesses(radius, n_angles))
    if (raw := get("statics", "guesses")) is not None:
        guesses = []
        for chunk in raw.split(";"):
            parts = chunk.split()
            if len(parts) != 2:
                raise ValidationError(f"guess {chunk.strip()!r} needs 'x p'", "guesses")
            guesses.append((_float("guesses", parts[0]), _float("guesses", parts[1])))
    statics = replace(statics, guesses=tuple(guesses))
    return cfg, statics


def parse_config(text: str) -> ScenarioConfig:
    """Parse a scenario document.

    Raises:
        ParseError: malformed syntax, with the offending line number.
        ValidationError: unknown key or invalid value, naming the key.
    """
    return _parse(text)[0]


def parse_statics_config(text: str) -> tuple[ScenarioConfig, StaticsOptions]:
    return _parse(text)


def _fmt_amp(c: complex) -> str:
    c = complex(c)
    return repr(c.real) if c.imag == 0 else repr(c).strip("()")


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialise a config so that ``parse_config(dump_config(cfg)) == cfg``."""
    p = cfg.params
    it = cfg.integrator
    spin = next((k for k, v in SPIN_STATES.items() if tuple(complex(a) for a in v) == cfg.spin), None)
    lines = [
        f"label = {cfg.label}",
        f"regimes = {', '.join(r.lower() for r in cfg.regimes)}",
        "",
        "[params]",
        f"m = {p.m!r}",
        f"omega = {p.omega!r}",
        f"omega_s = {p.omega_s!r}",
        f"g1 = {p.g1!r}",
        f"g2 = {p.g2!r}",
        f"lambda = {p.lam!r}",
        f"levels = {p.levels}",
        f"oscillator_form = {p.oscillator_form}",
        "",
        "[initial]",
        f"x0 = {cfg.x0!r}",
        f"p0 = {cfg.p0!r}",
        f"spin = {spin if spin else ', '.join(_fmt_amp(a) for a in cfg.spin)}",
    ]
    if cfg.state is not None:
        ghz = tuple(complex(a) for a in build_ghz(p.levels))
        lines.append(f"state = {'ghz' if cfg.state == ghz else ', '.join(_fmt_amp(a) for a in cfg.state)}")
    lines += [
        "",
        "[integrator]",
        f"dt = {it.dt!r}",
        f"t_final = {it.t_final!r}",
        f"sample_every = {it.sample_every}",
        f"method = {it.method}",
        f"adaptive_tol = {it.adaptive_tol!r}",
        f"auto_dt = {'true' if it.auto_dt else 'false'}",
        "",
        "[output]",
        f"outputs = {', '.join(cfg.outputs)}",
        f"entropy_mode = {cfg.entropy_mode}",
    ]
    return "\n".join(lines) + "\n"


def safe_label(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label).strip("_") or "scenario"
