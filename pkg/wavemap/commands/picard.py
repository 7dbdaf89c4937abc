from pathlib import Path

import numpy as np

from wavemap.commands import EXIT_OK
from wavemap.commands._options import COMMON, add_common_flags
from wavemap.core.config import RunConfig
from wavemap.core.logger import get_logger
from wavemap.spectral.connection import phi0_profile, phi1_profile
from wavemap.spectral.picard import contraction_radius_one, contraction_radius_zero, picard_phi0, picard_phi1
from wavemap.storage.results import ResultEnvelope, write_envelope

logger = get_logger(__name__)

NAME = "picard"
FLAGS = COMMON


def add_parser(subparsers):
    parser = subparsers.add_parser(
        NAME,
        help="contraction radii and fixed points of both integral equations at one real lambda",
        description="Writes <out>/picard.json with both runs and their distance to the shooting solutions.",
    )
    parser.add_argument("lam", help="real spectral parameter > 0")
    add_common_flags(parser)
    return parser


def _summary(run, shooting_u) -> dict:
    return {
        "interval": run.interval,
        "iterations": run.iterations,
        "differences": run.differences,
        "residual": run.residual,
        "converged": run.converged,
        "contraction": run.contraction,
        "ode_residual": run.ode_residual(),
        "derivative_consistency": run.derivative_consistency(),
        "shooting_distance": float(np.max(np.abs(run.u - shooting_u))),
    }


def run(config: RunConfig) -> int:
    lam = config.lam.real
    picard_config = config.picard()
    shooting = config.shooting()

    zero = contraction_radius_zero(lam, picard_config)
    left = picard_phi0(lam, zero.endpoint, config=picard_config, contraction=zero.constant)
    one = contraction_radius_one(lam, picard_config)
    right = picard_phi1(lam, offset=one.offset, config=picard_config, contraction=one.constant)

    left_shooting = phi0_profile(lam, left.nodes, shooting).u
    right_shooting = phi1_profile(lam, config=shooting, offsets=right.offsets).u
    payload = {
        "lambda": lam,
        "contraction_zero": zero,
        "contraction_one": one,
        "phi0": _summary(left, left_shooting),
        "phi1": _summary(right, right_shooting),
    }
    out = Path(config.out)
    write_envelope(out / "picard.json", ResultEnvelope(NAME, config.echo(), payload))
    logger.info(
        f"Picard lambda={lam}: rho0={zero.endpoint}, rho1=1-{one.offset:.3e}, "
        f"iterations {left.iterations}/{right.iterations}"
    )
    return EXIT_OK
