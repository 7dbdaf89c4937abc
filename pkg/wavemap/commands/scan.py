from pathlib import Path

from wavemap.commands import EXIT_OK
from wavemap.commands._options import COMMON, add_common_flags
from wavemap.core.config import RunConfig
from wavemap.core.logger import get_logger
from wavemap.spectral.connection import scan_real
from wavemap.storage.results import ResultEnvelope, write_envelope, write_scan_csv

logger = get_logger(__name__)

NAME = "scan"
FLAGS = COMMON + ("lo", "hi", "n")


def add_parser(subparsers):
    parser = subparsers.add_parser(
        NAME,
        help="sample the miss function on a real lambda grid and refine its roots",
        description="Writes <out>/scan.json and <out>/scan.csv. CSV columns: "
        "lambda, miss (Abel-invariant connection value), normalized_miss, "
        "classification (eigenvalue-candidate | no-eigenvalue | indeterminate).",
    )
    parser.add_argument("--lo", type=float, default=None, help="lower end of the lambda grid (> 0)")
    parser.add_argument("--hi", type=float, default=None, help="upper end of the lambda grid")
    parser.add_argument("--n", type=int, default=None, help="number of grid points (default 101)")
    add_common_flags(parser)
    return parser


def run(config: RunConfig) -> int:
    report = scan_real(config.lo, config.hi, config.n, config.shooting(), workers=config.workers)
    out = Path(config.out)
    write_scan_csv(out / "scan.csv", report)
    payload = {
        "roots": report.roots,
        "sign_changes": report.sign_changes,
        "discontinuities": report.discontinuities,
        "lambdas": report.lambdas,
        "normalized_miss": report.miss,
        "miss": report.abel_invariant,
        "classifications": report.classifications,
    }
    write_envelope(out / "scan.json", ResultEnvelope(NAME, config.echo(), payload, report.failures))
    logger.info(f"Scan complete: {len(report.roots)} root(s) {report.root_values()}")
    return EXIT_OK
