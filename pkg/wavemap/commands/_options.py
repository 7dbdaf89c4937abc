import argparse


def add_common_flags(parser: argparse.ArgumentParser):
    """Flags shared by every subcommand; defaults are None so WAVEMAP_* variables can fill them."""
    parser.add_argument("--match-point", dest="match_point", type=float, default=None, help="matching point rho_m (default 0.5)")
    parser.add_argument("--tol", type=float, default=None, help="Picard tolerance (default 1e-12)")
    parser.add_argument("--workers", type=int, default=None, help="parallel worker processes for scans (default 1)")
    parser.add_argument("--out", default=None, help="output directory (default ./results)")
    parser.add_argument("--profile", default=None, help="shooting profile: default, fine or coarse")


def cli_values(args: argparse.Namespace, names) -> dict:
    return {name: getattr(args, name, None) for name in names}


COMMON = ("match_point", "tol", "workers", "out", "profile")
