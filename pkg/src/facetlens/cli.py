"""Command-line interface.

Exit codes are part of the contract:

    0  success
    3  validation or domain error (bad documents, conflicts, unknown ids)
    4  composition check failed (`verify` found unequal issue sets)
    5  I/O failure

2 is left to the argument parser for usage errors.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import __version__
from .artifacts import compose_report, generate_survey, persona_cards, render_cards
from .core import join_many, partition
from .errors import BadId, FacetLensError, StorageError
from .evaluate import evaluate, merge_many, sampling_baseline, verify_composition
from . import store

EXIT_DOMAIN = 3
EXIT_COMPOSITION = 4
EXIT_IO = 5


def _exit_code(e: FacetLensError) -> int:
    return EXIT_IO if isinstance(e, StorageError) else EXIT_DOMAIN


def handles_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FacetLensError as e:
            click.echo(f"error [{e.code}]: {e.message}", err=True)
            sys.exit(_exit_code(e))

    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="facetlens")
def cli():
    """Type-level inclusivity evaluation over facet dimensions."""


@cli.command()
@click.argument("workspace", type=click.Path(exists=True, file_okay=False))
@handles_errors
def validate(workspace):
    """Check every document in WORKSPACE for integrity problems."""
    diags = store.validate_workspace(workspace)
    for d in diags:
        click.echo(str(d))
    if diags:
        click.echo(f"{len(diags)} problem(s) found", err=True)
        sys.exit(EXIT_DOMAIN)
    click.echo("workspace OK")


@cli.command()
@click.argument("dims", nargs=-1, required=True, metavar="DIM...")
@click.option("-o", "--output", required=True, type=click.Path(), help="Joined dimension file.")
@handles_errors
def join(dims, output):
    """Join dimension files into one composed dimension."""
    joined = join_many([store.load_dimension(p) for p in dims])
    store.save_dimension(joined, output)
    click.echo(f"wrote {output} ({joined.id}: {len(joined.facets)} facets)")


@cli.command()
@click.argument("dims", nargs=-1, required=True, metavar="DIM...")
@click.option("--joined", is_flag=True, help="Cards for the join of all inputs instead of per dimension.")
@click.option("-o", "--output", type=click.Path(), help="Write markdown here instead of stdout.")
@handles_errors
def personas(dims, joined, output):
    """Render the extreme persona card pair for each dimension."""
    loaded = [store.load_dimension(p) for p in dims]
    if joined:
        loaded = [join_many(loaded)]
    text = render_cards(persona_cards(loaded))
    if output:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"wrote {output}")
    else:
        click.echo(text, nl=False)


@cli.command(name="eval")
@click.argument("dim", type=click.Path(dir_okay=False))
@click.argument("usecase", type=click.Path(dir_okay=False))
@click.argument("rules", type=click.Path(dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(), help="Result file.")
@handles_errors
def eval_cmd(dim, usecase, rules, output):
    """Evaluate both extremes of every facet of DIM over USECASE with RULES."""
    result = evaluate(
        store.load_dimension(dim), store.load_use_case(usecase), store.load_rules(rules)
    )
    store.save_result(result, output)
    click.echo(
        f"wrote {output} ({len(result.issues)} issues, "
        f"{result.spot_invocations} spot invocations)"
    )


@cli.command()
@click.argument("results", nargs=-1, required=True, metavar="RESULT...")
@click.option("-o", "--output", required=True, type=click.Path(), help="Merged result file.")
@handles_errors
def merge(results, output):
    """Union result files over the same use case."""
    merged = merge_many([store.load_result(p) for p in results])
    store.save_result(merged, output)
    click.echo(f"wrote {output} ({len(merged.issues)} issues)")


@cli.command()
@click.argument("dim_a", type=click.Path(dir_okay=False))
@click.argument("dim_b", type=click.Path(dir_okay=False))
@click.argument("usecase", type=click.Path(dir_okay=False))
@click.argument("rules", type=click.Path(dir_okay=False))
@handles_errors
def verify(dim_a, dim_b, usecase, rules):
    """Check evaluate(join(A, B)) against merge(evaluate(A), evaluate(B)).

    Exits 0 when the issue sets are equal, 4 with a diff when they are not.
    """
    report = verify_composition(
        store.load_dimension(dim_a),
        store.load_dimension(dim_b),
        store.load_use_case(usecase),
        store.load_rules(rules),
    )
    if report.equal:
        click.echo(
            f"composition holds: {len(report.joined.issues)} issues either way"
        )
        return
    click.echo("composition VIOLATED", err=True)
    for issue in report.only_joined:
        click.echo(f"  only in joined evaluation: {issue.code} @ {issue.state_id}", err=True)
    for issue in report.only_merged:
        click.echo(f"  only in merged results:   {issue.code} @ {issue.state_id}", err=True)
    sys.exit(EXIT_COMPOSITION)


@cli.command(name="partition")
@click.argument("dim", type=click.Path(dir_okay=False))
@click.option(
    "--groups",
    "groups_spec",
    required=True,
    help="Assignment spec: 'name=facet,facet;name2=facet' (disjoint, covering).",
)
@click.option("-o", "--outdir", type=click.Path(file_okay=False), help="Directory for the part files (default: alongside DIM).")
@handles_errors
def partition_cmd(dim, groups_spec, outdir):
    """Split DIM into disjoint covering sub-dimensions."""
    d = store.load_dimension(dim)
    groups: dict[str, list[str]] = {}
    for chunk in groups_spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise BadId(f"group spec {chunk!r} must look like name=facet,facet")
        name, _, members = chunk.partition("=")
        groups[name.strip()] = [m.strip() for m in members.split(",") if m.strip()]
    parts = partition(d, groups)
    target = Path(outdir) if outdir else Path(dim).parent
    for name in sorted(parts):
        path = target / f"{name}{store.DIMENSION_SUFFIX}"
        store.save_dimension(parts[name], path)
        click.echo(f"wrote {path} ({len(parts[name].facets)} facets)")


@cli.command()
@click.argument("dims", nargs=-1, required=True, metavar="DIM...")
@click.option("-q", "--questions-per-facet", default=1, show_default=True, type=int)
@click.option("-o", "--output", type=click.Path(), help="Write CSV here instead of stdout.")
@handles_errors
def survey(dims, questions_per_facet, output):
    """Generate the facet self-location survey for the joined inputs."""
    s = generate_survey(
        [store.load_dimension(p) for p in dims], questions_per_facet
    )
    text = s.to_csv()
    if output:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"wrote {output} ({len(s.questions)} questions)")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.argument("results", nargs=-1, required=True, metavar="RESULT...")
@click.option("--format", "fmt", type=click.Choice(["md", "csv"]), default="md", show_default=True)
@click.option("-o", "--output", type=click.Path(), help="Write the report here instead of stdout.")
@handles_errors
def report(results, fmt, output):
    """Render result files (merged) as a markdown or CSV report."""
    text = compose_report([store.load_result(p) for p in results], fmt)
    if output:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"wrote {output}")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.argument("args", nargs=-1, required=True, metavar="DIM... USECASE RULES")
@click.option("--budget", required=True, type=int, help="Number of sampled observations.")
@click.option("--seed", required=True, type=int, help="RNG seed; runs are deterministic per seed.")
@click.option("-o", "--output", type=click.Path(), help="Write the JSON summary here instead of stdout.")
@handles_errors
def baseline(args, budget, seed, output):
    """Sampling contrast: spend BUDGET random user-state observations."""
    if len(args) < 3:
        raise click.UsageError("expected at least one DIM, then USECASE and RULES")
    dims = [store.load_dimension(p) for p in args[:-2]]
    u = store.load_use_case(args[-2])
    r = store.load_rules(args[-1])
    rep = sampling_baseline(dims, u, r, budget=budget, seed=seed)
    typed = evaluate(join_many(dims), u, r)
    doc = {
        "budget": rep.budget,
        "seed": rep.seed,
        "total_cells": rep.total_cells,
        "occupied_cells": rep.occupied_cells,
        "cell_density": rep.cell_density,
        "issues_found": len(rep.issues_found),
        "type_based_issues": len(typed.issues),
        "missed": sorted(
            list(pair) for pair in typed.issues.identities() - rep.issues_found.identities()
        ),
    }
    text = store.canonical_dumps(doc)
    if output:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"wrote {output}")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--workspace", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--ui-dir", type=click.Path(file_okay=False), help="Built web UI to serve at /app.")
def serve(port, host, workspace, ui_dir):
    """Run the HTTP service over a workspace directory."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(workspace, ui_dir), host=host, port=port, log_level="info")


main = cli

if __name__ == "__main__":
    main()
