from pathlib import Path

import numpy as np

from wavemap.commands import EXIT_OK
from wavemap.commands._options import COMMON, add_common_flags
from wavemap.core.config import RunConfig
from wavemap.core.logger import get_logger
from wavemap.spectral.connection import ModeParameter, miss, phi0_profile, phi1_profile
from wavemap.storage.results import ResultEnvelope, write_envelope, write_profile_dat

logger = get_logger(__name__)

NAME = "mode"
FLAGS = COMMON + ("n",)
EDGE = 1e-3


def add_parser(subparsers):
    parser = subparsers.add_parser(
        NAME,
        help="write phi0 and phi1 profiles and their miss at one lambda",
        description="Writes <out>/mode.json, <out>/phi0.dat and <out>/phi1.dat "
        "(columns: rho u du; complex lambdas give real and imaginary columns).",
    )
    parser.add_argument("lam", help="spectral parameter, e.g. 0.5 or 1+0.25j")
    parser.add_argument("--n", type=int, default=None, help="samples per profile (default 101)")
    add_common_flags(parser)
    return parser


def run(config: RunConfig) -> int:
    parameter = ModeParameter.from_value(config.lam)
    lam = parameter.scalar
    shooting = config.shooting()
    diagnostics = []
    if parameter.nudged:
        diagnostics.append({"lambda": config.lam, "detail": f"integer lambda nudged to {lam}"})

    result = miss(lam, shooting)
    phi0 = phi0_profile(lam, np.linspace(0.0, 1.0 - EDGE, config.n), shooting)
    phi1 = phi1_profile(lam, np.linspace(EDGE, 1.0, config.n), shooting)

    out = Path(config.out)
    write_profile_dat(out / "phi0.dat", phi0, comment=f"phi0 lambda={lam}")
    write_profile_dat(out / "phi1.dat", phi1, comment=f"phi1 lambda={lam}")
    payload = {"lambda": lam, "connection": result, "files": ["phi0.dat", "phi1.dat"]}
    write_envelope(out / "mode.json", ResultEnvelope(NAME, config.echo(), payload, diagnostics))
    logger.info(f"Mode lambda={lam}: normalized miss {result.normalized:.3e} ({result.classification})")
    return EXIT_OK
