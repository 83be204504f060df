#!/usr/bin/env python3
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
#


import argparse
import os
import sys

import numpy as np

from dadgplan import corpus
from dadgplan import generate
from dadgplan.pddlparse import serialize_problem


def main(args):

    rng = np.random.default_rng(args.seed)
    dom = corpus.bundled_domain('blocks')
    os.makedirs(args.outdir, exist_ok=True)

    ### Tower reversal first, it is the long one
    if args.tower:
        problem = generate.blocks_tower(args.tower)
        path = os.path.join(args.outdir, problem.name + '.pddl')
        with open(path, 'w') as handle:
            handle.write(serialize_problem(problem.init, problem.goal, dom, problem.objects, problem.name))
        print(path)

    for size in range(args.min_blocks, args.max_blocks + 1):
        for i in range(1, args.count + 1):
            name = 'blocks-%d-%02d' % (size, i)
            problem = generate.blocks_instance(size, rng, name)
            path = os.path.join(args.outdir, name + '.pddl')
            with open(path, 'w') as handle:
                handle.write(serialize_problem(problem.init, problem.goal, dom, problem.objects, name))
            print(path)

    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="write seeded random Blocks World instances, a size range at a time")
    parser.add_argument("--outdir", type=str, required=True)
    parser.add_argument("--min_blocks", type=int, default=4)
    parser.add_argument("--max_blocks", type=int, default=6)
    parser.add_argument("--count", type=int, default=10, help="instances per size")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tower", type=int, default=0, help="also write an n-block tower reversal")
    sys.exit(main(parser.parse_args()))
