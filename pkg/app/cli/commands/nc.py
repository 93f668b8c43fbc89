import argparse
import json

import numpy as np

from app.cli.commands import common_options
from app.core.nc_core import catalan, check_order, enumerate_nc
from app.core.schemas import PartitionListing

STREAM = 0


def run_count(args: argparse.Namespace, rng: np.random.Generator) -> PartitionListing:
    check_order(args.n)
    count = catalan(args.n)
    print(count)
    return PartitionListing(n=args.n, count=count)


def run_list(args: argparse.Namespace, rng: np.random.Generator) -> PartitionListing:
    partitions = [p.as_lists() for p in enumerate_nc(args.n)]
    listing = PartitionListing(n=args.n, count=len(partitions), partitions=partitions)
    if args.json:
        print(json.dumps(partitions))
    else:
        for blocks in partitions:
            print(" | ".join(",".join(map(str, block)) for block in blocks))
    return listing


def register(subparsers) -> None:
    parser = subparsers.add_parser("nc", help="non-crossing partitions")
    actions = parser.add_subparsers(dest="action", required=True)
    common = common_options()

    count = actions.add_parser("count", parents=[common], help="|NC(n)|")
    count.add_argument("--n", type=int, required=True)
    count.set_defaults(handler=run_count, writes_by_default=False)

    listing = actions.add_parser("list", parents=[common], help="all of NC(n) in canonical order")
    listing.add_argument("--n", type=int, required=True)
    listing.add_argument("--json", action="store_true")
    listing.set_defaults(handler=run_list, writes_by_default=False)
