from dataclasses import replace
from pathlib import Path

from wavemap.commands import EXIT_CERTIFICATE_FAILED, EXIT_OK
from wavemap.commands._options import COMMON, add_common_flags
from wavemap.core.config import DEFAULT_CERTIFICATE, RunConfig
from wavemap.core.logger import get_logger
from wavemap.spectral.stability import full_certificate
from wavemap.storage.results import ResultEnvelope, write_envelope

logger = get_logger(__name__)

NAME = "certify"
FLAGS = COMMON + ("range", "n")


def add_parser(subparsers):
    parser = subparsers.add_parser(
        NAME,
        help="run every stability check and write the certificate",
        description="Writes <out>/certificate.json. Exit code 0 iff every check passes, 1 otherwise.",
    )
    parser.add_argument("--range", default=None, help="restrict the scans to lo:hi, e.g. 1.05:3.0")
    parser.add_argument("--n", type=int, default=None, help="grid size for a restricted range (default 101)")
    add_common_flags(parser)
    return parser


def certificate_config(config: RunConfig):
    certificate = DEFAULT_CERTIFICATE
    bounds = config.certify_range()
    if bounds is not None:
        certificate = certificate.restricted(*bounds, n=config.n)
    return replace(certificate, shooting=config.shooting(), workers=config.workers)


def run(config: RunConfig) -> int:
    report = full_certificate(certificate_config(config))
    out = Path(config.out)
    write_envelope(out / "certificate.json", ResultEnvelope(NAME, config.echo(), report, report.violations))
    if not report.passed:
        for violation in report.violations:
            logger.error(f"Certificate violation: {violation}")
        return EXIT_CERTIFICATE_FAILED
    return EXIT_OK
