"""Run configuration: flat ``key = value`` files with command-line overrides.

Keys are ``section.field`` (for example ``sweep.k_list = 1000, 10000``). A
bare ``field`` resolves against the section of the command being run.
Values are parsed according to the type of the field's default.
"""

from dataclasses import dataclass, field, fields
from pathlib import Path

SECTIONS = ("find_tau", "spectrum", "sweep", "compare", "quasimode", "heat")


@dataclass
class TauConfig:
    tau0: complex | None = None
    z0: float = 6.0
    steps: int = 6000
    tol: float = 1e-10
    maxit: int = 30
    scan_n: int = 20
    re_min: float = -2.0
    re_max: float = 0.0
    im_min: float = -2.0
    im_max: float = 0.0
    sc_floor: float = 1e-3

    def validate(self):
        _require(self.z0 >= 4, "find_tau.z0 must be at least 4")
        _require(self.steps >= 1000, "find_tau.steps must be at least 1000")
        _require(self.tol > 0, "find_tau.tol must be positive")
        _require(self.maxit >= 1, "find_tau.maxit must be at least 1")
        _require(self.scan_n >= 2, "find_tau.scan_n must be at least 2")
        _require(self.re_min < self.re_max and self.im_min < self.im_max, "empty scan window")
        _require(self.im_max <= 0, "scan window must lie in the closed lower half-plane")
        if self.tau0 is not None:
            _require(self.tau0.imag < 0, "find_tau.tau0 must have negative imaginary part")


@dataclass
class SpectrumConfig:
    Z: float = 10.0
    N: int = 1600
    order: int = 4

    def validate(self):
        _require(self.Z >= 6, "spectrum.Z must be at least 6")
        _require(self.N >= 200 and self.N % 2 == 0, "spectrum.N must be even and at least 200")
        _require(self.order in (2, 4), "spectrum.order must be 2 or 4")


@dataclass
class SweepConfig:
    k_list: list = field(default_factory=lambda: [1000, 10000, 100000, 1000000])
    L: float = 10.0
    N: int = 4000
    steps_per_efold: int = 150
    efolds: float = 18.0
    tol: float = 1e-3
    base_seed: int = 0

    def validate(self):
        _require(len(self.k_list) > 0 and all(k >= 1 for k in self.k_list), "sweep.k_list must hold positive integers")
        _require(self.L > 2, "sweep.L must exceed 2")
        _require(self.N >= 500, "sweep.N must be at least 500")
        _require(self.steps_per_efold >= 10 and self.efolds > 0, "sweep time stepping too coarse")
        _require(self.tol > 0, "sweep.tol must be positive")


@dataclass
class CompareConfig:
    epsilon: float = 1e-6
    exclusion_widths: float = 5.0
    inner_radius: float = 5.0
    N: int = 4000
    L: float = 10.0

    def validate(self):
        _require(0 < self.epsilon <= 1e-2, "compare.epsilon must lie in (0, 1e-2]")
        _require(self.exclusion_widths >= 3, "compare.exclusion_widths must be at least 3")
        _require(self.inner_radius > 0, "compare.inner_radius must be positive")
        _require(self.N >= 500, "compare.N must be at least 500")


@dataclass
class QuasimodeConfig:
    eps_list: list = field(default_factory=lambda: [1e-3, 1e-4, 1e-5])
    n_times: int = 6
    t_span: float = 1.0  # sample t in [0, t_span sqrt(eps)]
    cutoff_inner: float = 0.45
    cutoff_outer: float = 0.65
    alpha_w: float = 0.5

    def validate(self):
        _require(all(0 < e < 1 for e in self.eps_list), "quasimode.eps_list entries must lie in (0, 1)")
        _require(self.n_times >= 1 and self.t_span > 0, "quasimode time sampling must be nonempty")
        _require(0 < self.cutoff_inner < self.cutoff_outer < 1, "quasimode cutoff must satisfy 0 < inner < outer < 1")


@dataclass
class HeatConfig:
    L: float = 8.0
    h: float = 0.004
    T: float = 2.0
    dt: float = 5e-4
    k_list: list = field(default_factory=lambda: [10, 30, 100])
    table_times: list = field(default_factory=lambda: [0.02, 0.05, 0.1, 0.2, 0.5, 1.0])
    table_t: float = 1.0  # time at which linearity in k is judged
    table_h: float = 0.04
    table_dt: float = 2e-3
    cross_k: int = 100

    def validate(self):
        _require(self.L > 2 and self.h > 0 and self.h < self.L / 50, "heat grid too coarse")
        _require(self.T > 0 and 0 < self.dt < self.T, "heat.dt must lie in (0, T)")
        _require(len(self.k_list) >= 2, "heat.k_list needs at least two entries")
        _require(all(t > 0 for t in self.table_times), "heat.table_times must be positive")
        _require(self.table_t in self.table_times, "heat.table_t must be one of heat.table_times")


@dataclass
class RunConfig:
    find_tau: TauConfig = field(default_factory=TauConfig)
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    quasimode: QuasimodeConfig = field(default_factory=QuasimodeConfig)
    heat: HeatConfig = field(default_factory=HeatConfig)
    output_dir: Path = Path("prandtl_lab_out")
    emit_svg: bool = False
    threads: int = 1

    def validate(self, section=None):
        _require(self.threads >= 1, "threads must be at least 1")
        for name in (section,) if section else SECTIONS:
            getattr(self, name).validate()
        return self

    def set(self, key, value, default_section=None):
        """Assign ``key`` from its string form ``value``."""
        key = key.strip()
        if "." in key:
            sec, name = key.split(".", 1)
            target = getattr(self, sec, None)
            if sec not in SECTIONS or target is None:
                raise ValueError(f"unknown config section {sec!r}")
        elif key in ("output_dir", "emit_svg", "threads"):
            target, name = self, key
        elif default_section is not None:
            target, name = getattr(self, default_section), key
        else:
            raise ValueError(f"config key {key!r} needs a section prefix")
        current = {f.name: getattr(target, f.name) for f in fields(target)}
        if name not in current:
            raise ValueError(f"unknown config key {key!r}")
        setattr(target, name, _parse(value, current[name], name))

    def items(self):
        """Flattened ``(key, value)`` pairs in a stable order."""
        out = [("output_dir", str(self.output_dir)), ("emit_svg", self.emit_svg), ("threads", self.threads)]
        for sec in SECTIONS:
            obj = getattr(self, sec)
            out += [(f"{sec}.{f.name}", getattr(obj, f.name)) for f in fields(obj)]
        return out


def _require(cond, message):
    if not cond:
        raise ValueError(message)


def _parse(text, default, name):
    text = str(text).strip()
    if name == "tau0":
        return None if text.lower() in ("", "none") else complex(text.replace(" ", ""))
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: not a boolean: {text!r}")
    if isinstance(default, list):
        conv = int if all(isinstance(v, int) for v in default) else float
        return [conv(float(v)) if conv is int else float(v) for v in text.split(",") if v.strip()]
    if isinstance(default, int):
        return int(float(text))
    if isinstance(default, float):
        return float(text)
    if isinstance(default, Path):
        return Path(text)
    return text


def load(path=None, overrides=(), section=None):
    """Read a config file (optional) and apply ``key=value`` overrides."""
    cfg = RunConfig()
    pairs = []
    if path is not None:
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            pairs.append(line.split("=", 1))
    pairs += [o.split("=", 1) for o in overrides]
    for key, value in pairs:
        cfg.set(key, value, section)
    return cfg


def dump(cfg):
    """Render ``cfg`` in the file format accepted by :func:`load`."""
    lines = []
    for key, value in cfg.items():
        if isinstance(value, list):
            value = ", ".join(repr(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
