import os
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from wavemap.core.errors import ConfigError

ENV_PREFIX = "WAVEMAP_"


@dataclass(frozen=True)
class ShootingConfig:
    delta0: float = 1e-2
    delta1: float = 1e-2
    match_point: float = 0.5
    rtol: float = 1e-11
    atol: float = 1e-13
    series_order: int = 40
    series_radius: float = 0.4
    method: str = "DOP853"
    eigen_tol: float = 1e-7

    def problems(self) -> list[str]:
        found = []
        if not 0 < self.delta0 <= self.series_radius:
            found.append(f"delta0={self.delta0} must lie in (0, {self.series_radius}]")
        if not 0 < self.delta1 <= self.series_radius:
            found.append(f"delta1={self.delta1} must lie in (0, {self.series_radius}]")
        if self.delta0 + self.delta1 >= 1:
            found.append("delta0 + delta1 must be < 1")
        if not self.delta0 < self.match_point < 1 - self.delta1:
            found.append(
                f"match_point={self.match_point} must lie in "
                f"({self.delta0}, {1 - self.delta1})"
            )
        if self.rtol <= 0 or self.atol <= 0:
            found.append("integrator tolerances must be positive")
        if self.series_order < 4:
            found.append(f"series_order={self.series_order} must be >= 4")
        if self.eigen_tol <= 0:
            found.append("eigen_tol must be positive")
        return found

    def validate(self) -> "ShootingConfig":
        found = self.problems()
        if found:
            raise ConfigError(found)
        return self

    def with_(self, **changes) -> "ShootingConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class PicardConfig:
    tol: float = 1e-12
    max_iter: int = 400
    safety: float = 0.9
    # [0, rho0]: uniform Chebyshev panels
    zero_panels: int = 250
    zero_order: int = 8
    # [rho1, 1]: geometric panels in x = 1 - rho
    one_order: int = 12
    one_ratio: float = 0.75
    one_tail: float = 1e-13
    psi_base: float = 0.5
    divergence_window: int = 3

    def problems(self) -> list[str]:
        found = []
        if self.tol <= 0:
            found.append("picard tol must be positive")
        if self.max_iter < 1:
            found.append("max_iter must be >= 1")
        if not 0 < self.safety < 1:
            found.append("safety factor must lie in (0, 1)")
        if self.zero_panels < 1 or self.zero_order < 2 or self.one_order < 2:
            found.append("panel counts and orders must be positive")
        if not 0 < self.one_ratio < 1:
            found.append("one_ratio must lie in (0, 1)")
        if not 0 < self.psi_base < 1:
            found.append("psi_base must lie in (0, 1)")
        return found

    def validate(self) -> "PicardConfig":
        found = self.problems()
        if found:
            raise ConfigError(found)
        return self


@dataclass(frozen=True)
class CertificateConfig:
    # (lo, hi, n) scan ranges
    ranges: tuple = ((0.05, 0.95, 181), (1.05, 3.0, 100))
    # Window expected to contain exactly the gauge eigenvalue; None disables
    gauge_window: Optional[tuple] = (0.9, 1.1, 41)
    positivity_lambdas: tuple = tuple(round(0.05 + 0.1 * k, 2) for k in range(20))
    sign_lambdas: tuple = (0.3, 0.5, 0.7)
    regularity_lambdas: tuple = tuple(round(0.1 * k, 1) for k in range(1, 10))
    weighted_lambdas: tuple = (0.25, 0.5, 1.0, 1.5, 2.0)
    margin: float = 1e-3
    residual_tol: float = 1e-10
    regularity_tol: float = 1e-8
    critical_tol: float = 1e-8
    workers: int = 1
    shooting: ShootingConfig = field(default_factory=ShootingConfig)

    def problems(self) -> list[str]:
        found = []
        for lo, hi, n in self.ranges:
            if not 0 < lo < hi or n < 2:
                found.append(f"invalid scan range {lo}:{hi} with n={n}")
        if not 0 < self.margin < 0.5:
            found.append("margin must lie in (0, 0.5)")
        if self.workers < 1:
            found.append("workers must be >= 1")
        found.extend(self.shooting.problems())
        return found

    def validate(self) -> "CertificateConfig":
        found = self.problems()
        if found:
            raise ConfigError(found)
        return self

    def restricted(self, lo: float, hi: float, n: int = 100) -> "CertificateConfig":
        """Certificate over a single scan range; the gauge window is kept only if inside it."""
        gauge = self.gauge_window
        if gauge is not None and not (lo <= gauge[0] and gauge[1] <= hi):
            gauge = None
        return replace(self, ranges=((lo, hi, n),), gauge_window=gauge)


# 1. Default shooting profile
DEFAULT_SHOOTING = ShootingConfig()

# 2. Fine profile (smaller handoff offsets, longer series)
FINE_SHOOTING = ShootingConfig(
    delta0=5e-3,
    delta1=5e-3,
    rtol=1e-12,
    atol=1e-14,
    series_order=50,
)

# 3. Coarse profile for quick looks and complex contours
COARSE_SHOOTING = ShootingConfig(
    rtol=1e-9,
    atol=1e-11,
    series_order=30,
)

DEFAULT_PICARD = PicardConfig()
DEFAULT_CERTIFICATE = CertificateConfig()

SHOOTING_PROFILES = {
    "default": DEFAULT_SHOOTING,
    "fine": FINE_SHOOTING,
    "coarse": COARSE_SHOOTING,
}


def get_shooting_profile(name: str) -> ShootingConfig:
    """Selects a named shooting profile, falling back to the default."""
    return SHOOTING_PROFILES.get(name, DEFAULT_SHOOTING)


@dataclass(frozen=True)
class RunConfig:
    command: str
    lo: Optional[float] = None
    hi: Optional[float] = None
    n: int = 101
    lam: Optional[complex] = None
    range: Optional[str] = None
    match_point: float = 0.5
    tol: float = 1e-12
    workers: int = 1
    out: str = "results"
    profile: str = "default"

    def problems(self) -> list[str]:
        found = []
        if self.command == "scan":
            if self.lo is None:
                found.append("--lo is required")
            if self.hi is None:
                found.append("--hi is required")
            if self.lo is not None and self.hi is not None and not 0 < self.lo < self.hi:
                found.append(f"need 0 < lo < hi, got lo={self.lo} hi={self.hi}")
            if self.n < 2:
                found.append(f"--n must be >= 2, got {self.n}")
        if self.command in ("mode", "picard"):
            if self.lam is None:
                found.append("lambda is required")
            elif self.lam.real <= 0:
                found.append(f"Re lambda must be > 0, got {self.lam}")
        if self.command == "picard" and self.lam is not None and self.lam.imag != 0:
            found.append("picard runs need a real lambda")
        if self.command == "certify" and self.range is not None:
            try:
                self.certify_range()
            except ValueError as e:
                found.append(str(e))
        if self.tol <= 0:
            found.append("--tol must be positive")
        if self.workers < 1:
            found.append("--workers must be >= 1")
        if self.profile not in SHOOTING_PROFILES:
            found.append(f"unknown profile {self.profile!r}")
        # the matching point is checked against the profile's handoff offsets
        found.extend(self.shooting().problems())
        return found

    def validate(self) -> "RunConfig":
        found = self.problems()
        if found:
            raise ConfigError(found)
        return self

    def certify_range(self) -> Optional[tuple]:
        if self.range is None:
            return None
        parts = self.range.split(":")
        if len(parts) != 2:
            raise ValueError(f"--range must look like lo:hi, got {self.range!r}")
        lo, hi = float(parts[0]), float(parts[1])
        if not 0 < lo < hi:
            raise ValueError(f"--range needs 0 < lo < hi, got {self.range!r}")
        return lo, hi

    def shooting(self) -> ShootingConfig:
        return get_shooting_profile(self.profile).with_(match_point=self.match_point)

    def picard(self) -> PicardConfig:
        return replace(DEFAULT_PICARD, tol=self.tol)

    def echo(self) -> dict:
        data = asdict(self)
        if self.lam is not None:
            data["lam"] = {"re": self.lam.real, "im": self.lam.imag}
        data["shooting"] = asdict(self.shooting())
        return data


def parse_lambda(text: str) -> complex:
    """Parses '0.5', '1+0.25j' or '1+0.25i'."""
    return complex(str(text).strip().replace("i", "j").replace(" ", ""))


_ENV_CASTS = {
    "lo": float,
    "hi": float,
    "n": int,
    "match_point": float,
    "tol": float,
    "workers": int,
    "out": str,
    "range": str,
    "profile": str,
}


def env_overrides(environ=None) -> tuple[dict, list[str]]:
    """Reads WAVEMAP_<FLAG> variables; returns (values, problems)."""
    environ = os.environ if environ is None else environ
    values, found = {}, []
    for name, cast in _ENV_CASTS.items():
        key = ENV_PREFIX + name.upper()
        if key not in environ:
            continue
        try:
            values[name] = cast(environ[key])
        except ValueError:
            found.append(f"{key}={environ[key]!r} is not a valid {cast.__name__}")
    return values, found


def build_run_config(command: str, cli_values: dict, environ=None) -> RunConfig:
    """Merges environment overrides under explicit flags and validates everything at once.

    Flags given on the command line win over WAVEMAP_* variables, which win
    over the dataclass defaults.
    """
    values, found = env_overrides(environ)
    for key, value in cli_values.items():
        if value is not None:
            values[key] = value
    lam = values.pop("lam", None)
    if isinstance(lam, str):
        try:
            lam = parse_lambda(lam)
        except ValueError:
            found.append(f"cannot parse lambda {lam!r}")
            lam = None
    config = RunConfig(command=command, lam=lam, **values)
    found.extend(config.problems())
    if found:
        raise ConfigError(found)
    return config
