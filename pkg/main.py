"""
Command line front end for SurfaceScope.

Every verb prints a JSON report with sorted keys. Exit codes: 0 when the
checked property holds, 1 when it fails, 2 for usage or input errors, 3
when a budget runs out and 4 when an internal identity check fails.
"""

import argparse
import os
import sys

from SurfaceScope.config import (
    DEFAULT_SEED,
    REPAIR_MAX_MOVES,
    RIGIDITY_PRIME,
    worker_count,
)
from SurfaceScope.io.data_tools import (
    dumps,
    graph_from_dict,
    graph_to_dict,
    read_json,
    read_mesh,
    read_moves,
    read_spec,
    to_dot,
    write_json,
    write_mesh,
    write_moves,
    write_tower,
)
from SurfaceScope.models.girth import check_girth, repair
from SurfaceScope.models.mesh import FORMAT as MESH_FORMAT
from SurfaceScope.models.mesh import SurfaceMesh, surface_invariants, validate
from SurfaceScope.models.model_surface import (
    NAMED_SPECS,
    build_tower,
    classify,
    named_spec,
    schwarz_block_join,
    schwarz_maxwell,
)
from SurfaceScope.models.moves import replay
from SurfaceScope.models.rigidity import generic_rank, is_min_3rigid, tower_certificate
from SurfaceScope.models.sparsity import (
    TIGHT,
    check_36,
    check_36_exhaustive,
    check_36_flow,
)
from SurfaceScope.utils.errors import BudgetExceededError, ConsistencyError
from SurfaceScope.utils.logger import get_logger, set_verbose

logger = get_logger(__name__)

PASS, FAIL, USAGE, BUDGET, INTERNAL = 0, 1, 2, 3, 4


def emit(report):
    print(dumps(report))


def load_document(path):
    """A mesh when the file is an srs-mesh document, else a graph."""
    document = read_json(path)
    if isinstance(document, dict) and document.get("format") == MESH_FORMAT:
        return SurfaceMesh.from_dict(document)
    return graph_from_dict(document)


def load_spec(args):
    if args.named:
        return named_spec(args.named)
    if not args.spec:
        raise ValueError("give --spec FILE or --named NAME")
    return read_spec(args.spec)


def cmd_build(args):
    spec = load_spec(args)
    tower = build_tower(spec, args.depth)
    report = tower.as_dict()
    if args.out:
        report["files"] = write_tower(args.out, tower)
    if not args.certify:
        emit(report)
        return PASS
    verdicts = [check_36_flow(stage, args.workers) for stage in tower.stages]
    certificate = tower_certificate(tower.stages, seed=args.seed)
    report["tight"] = [verdict.status for verdict in verdicts]
    report["rigidity"] = certificate.as_dict()
    emit(report)
    tight = all(verdict.status == TIGHT for verdict in verdicts)
    return PASS if tight and certificate.ok else FAIL


def cmd_classify(args):
    emit(classify(load_spec(args)).as_dict())
    return PASS


def _check_tight(args):
    graph = load_document(args.mesh)
    if args.method == "exhaustive":
        verdict = check_36_exhaustive(graph)
    elif args.method == "flow":
        verdict = check_36_flow(graph, args.workers)
    else:
        verdict = check_36(graph, args.workers)
    emit(verdict.as_dict())
    return PASS if verdict.status == TIGHT else FAIL


def _check_girth(args):
    mesh = read_mesh(args.mesh)
    mode = {"exhaustive": "exhaustive", "flow": "targeted"}.get(args.method, "auto")
    verdict = check_girth(mesh, mode=mode, workers=args.workers)
    emit(verdict.as_dict())
    return PASS if verdict.ok else FAIL


def _check_rigid(args):
    graph = load_document(args.mesh)
    minimal, report, redundant = is_min_3rigid(graph, args.seed, args.prime)
    result = report.as_dict()
    result["redundant_edge"] = list(redundant) if redundant else None
    emit(result)
    return PASS if minimal else FAIL


CHECKS = {"tight": _check_tight, "girth": _check_girth, "rigid": _check_rigid}


def cmd_check(args):
    return CHECKS[args.property](args)


def cmd_repair(args):
    mesh = read_mesh(args.mesh)
    result = repair(mesh, max_moves=args.max_moves, workers=args.workers)
    if args.out:
        write_mesh(args.out, result.mesh)
        write_moves(os.path.splitext(args.out)[0] + ".moves.json", result.log)
    report = result.as_dict()
    report["f"] = result.mesh.maxwell_count
    emit(report)
    return PASS if result.ok else BUDGET


def cmd_invariants(args):
    mesh = read_mesh(args.mesh)
    report = validate(mesh)
    if not report.ok:
        emit({"validation": report.as_dict()})
        return FAIL
    emit(surface_invariants(mesh).as_dict())
    return PASS


def cmd_rank(args):
    report = generic_rank(load_document(args.mesh), args.seed, args.prime, workers=args.workers)
    emit(report.as_dict())
    return PASS


def cmd_replay(args):
    mesh = replay(read_mesh(args.mesh), read_moves(args.log).records)
    if args.out:
        write_mesh(args.out, mesh)
    else:
        print(mesh.to_json())
    return PASS


def cmd_export(args):
    item = load_document(args.mesh)
    if args.format == "dot":
        text = to_dot(item)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as file:
                file.write(text)
        else:
            sys.stdout.write(text)
        return PASS
    document = item.canonical().to_dict() if isinstance(item, SurfaceMesh) else graph_to_dict(item)
    if args.out:
        write_json(args.out, document)
    else:
        emit(document)
    return PASS


def cmd_schwarz(args):
    sizes = []
    deficiencies = []
    for m in range(1, args.m + 1):
        mesh = schwarz_block_join(m)
        verdict = check_36_flow(mesh, args.workers)
        deficiencies.append(verdict.deficiency)
        sizes.append(
            {
                "m": m,
                "V": len(mesh.vertices),
                "E": len(mesh.edges),
                "f": mesh.maxwell_count,
                "f_predicted": schwarz_maxwell(m),
                "holes": len(mesh.holes),
                "status": verdict.status,
                "deficiency": verdict.deficiency,
            }
        )
        if args.out and m == args.m:
            write_mesh(args.out, mesh)
    emit(
        {
            "sizes": sizes,
            "nondecreasing": all(a <= b for a, b in zip(deficiencies, deficiencies[1:])),
        }
    )
    return PASS


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="log progress at INFO level")
    common.add_argument("--workers", type=int, default=None, help="worker threads for oracles")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for random placements")
    common.add_argument("--prime", type=int, default=RIGIDITY_PRIME, help="field size for ranks")
    parser = argparse.ArgumentParser(prog="SurfaceScope", description=__doc__.strip().splitlines()[0])
    verbs = parser.add_subparsers(dest="verb", required=True)

    build = verbs.add_parser("build", parents=[common], help="build a tower of tight triangulations")
    build.add_argument("--spec", help="tree-spec/1 file")
    build.add_argument("--named", help="a catalogued model surface: " + ", ".join(NAMED_SPECS))
    build.add_argument("--depth", type=int, default=3)
    build.add_argument("--out", help="directory for stage files and the move log")
    build.add_argument("--certify", action="store_true", help="check tightness and rigidity of every stage")
    build.set_defaults(handler=cmd_build)

    classify_verb = verbs.add_parser("classify", parents=[common], help="invariants of a model surface")
    classify_verb.add_argument("--spec")
    classify_verb.add_argument("--named")
    classify_verb.set_defaults(handler=cmd_classify)

    check = verbs.add_parser("check", parents=[common], help="check a property of a mesh or graph")
    check.add_argument("property", choices=sorted(CHECKS))
    check.add_argument("mesh")
    check.add_argument("--method", choices=("exhaustive", "flow"))
    check.set_defaults(handler=cmd_check)

    repair_verb = verbs.add_parser("repair", parents=[common], help="subdivide until the girth inequalities hold")
    repair_verb.add_argument("mesh")
    repair_verb.add_argument("--out")
    repair_verb.add_argument("--max-moves", type=int, default=REPAIR_MAX_MOVES)
    repair_verb.set_defaults(handler=cmd_repair)

    invariants = verbs.add_parser("invariants", parents=[common], help="counts and surface type of a mesh")
    invariants.add_argument("mesh")
    invariants.set_defaults(handler=cmd_invariants)

    rank = verbs.add_parser("rank", parents=[common], help="generic 3-dimensional rigidity rank")
    rank.add_argument("mesh")
    rank.set_defaults(handler=cmd_rank)

    replay_verb = verbs.add_parser("replay", parents=[common], help="apply a move log to a mesh")
    replay_verb.add_argument("mesh")
    replay_verb.add_argument("log")
    replay_verb.add_argument("--out")
    replay_verb.set_defaults(handler=cmd_replay)

    export = verbs.add_parser("export", parents=[common], help="write a mesh as DOT or canonical JSON")
    export.add_argument("mesh")
    export.add_argument("--format", choices=("dot", "json"), default="json")
    export.add_argument("--out")
    export.set_defaults(handler=cmd_export)

    schwarz = verbs.add_parser("schwarz", parents=[common], help="sparsity of cubic blocks of the six-holed unit")
    schwarz.add_argument("--m", type=int, default=2)
    schwarz.add_argument("--out", help="file for the largest block")
    schwarz.set_defaults(handler=cmd_schwarz)
    return parser


def main(argv=None):
    """Run one verb and return its exit code."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_verbose(True)
    if args.workers is None:
        args.workers = worker_count()
    try:
        return args.handler(args)
    except BudgetExceededError as error:
        logger.error("budget exhausted: %s", error)
        return BUDGET
    except ConsistencyError as error:
        logger.error("internal consistency failure: %s", error)
        return INTERNAL
    except (ValueError, OSError) as error:
        logger.error("%s", error)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
