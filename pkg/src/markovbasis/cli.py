"""Command-line interface.

Every command that writes to ``--out DIR`` also writes ``DIR/manifest.json``
holding the resolved options; ``markovbasis replay MANIFEST`` reruns it and
reproduces the outputs byte for byte.

Exit codes: 0 success, 1 verification found a disconnected fiber, 2 usage
error, 3 parse error, 4 cap exceeded, 5 fit did not converge, 6 invalid
model or configuration.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .basis import CompletionCaps, MarkovBasis, Move, independence_basis, toric_markov_basis, verify_connects
from .errors import CapExceededError, DimensionError, ModelInvalidError, NonConvergenceError, ParseError
from .errors import ConfigurationError, InconsistentFitError
from .enumeration import enumerate_fiber_cells
from .fiber import WalkConfig, chain_rng, walk
from .gof import exact_pvalue_enumerated, exact_pvalue_mc
from .io import format_rows, format_sample, read_basis, read_edge_list, read_matrix, read_table_csv
from .model import ModelSpec, generic_design, graph_to_table, independence_design, p1_design, sufficient_statistics

EXIT_OK = 0
EXIT_DISCONNECTED = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CAP = 4
EXIT_NONCONVERGENCE = 5
EXIT_CONFIG = 6


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _abs(path) -> str | None:
    return str(Path(path).resolve()) if path is not None else None


def _num(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- resolution


def resolve_spec(opts: dict) -> ModelSpec:
    model = opts.get("model")
    if model is None:
        model = "generic" if opts.get("matrix") else None
    if model == "independence":
        dims = opts.get("dims")
        if not dims:
            raise ConfigurationError("--model independence needs --dims D1,D2")
        try:
            d1, d2 = (int(x) for x in dims.split(","))
        except ValueError:
            raise ConfigurationError(f"--dims must look like 3,3, got {dims!r}") from None
        return independence_design(d1, d2)
    if model == "p1":
        if opts.get("nodes") is None:
            raise ConfigurationError("--model p1 needs --nodes N")
        return p1_design(int(opts["nodes"]), opts.get("reciprocity") or "constant")
    if model == "generic":
        if not opts.get("matrix"):
            raise ConfigurationError("--model generic needs --matrix FILE")
        return generic_design(read_matrix(opts["matrix"]))
    raise ConfigurationError("give --model or --matrix")


def load_data(spec: ModelSpec, path) -> tuple[int, ...]:
    if path is None:
        raise ConfigurationError("--data is required")
    if spec.family == "p1":
        return graph_to_table(read_edge_list(path, spec.params["n"])).cells
    table = read_table_csv(path)
    if len(table.cells) != spec.n_cells:
        raise ParseError(path, None, f"table has {len(table.cells)} cells, model expects {spec.n_cells}")
    return table.cells


def resolve_walk(opts: dict, spec: ModelSpec) -> WalkConfig:
    proposal = opts.get("proposal") or ("dynamic" if spec.family == "p1" else "basis")
    return WalkConfig(
        steps=int(opts["steps"]),
        burn_in=None if opts.get("burnin") is None else int(opts["burnin"]),
        thin=int(opts["thin"]),
        seed=int(opts["seed"]),
        target=opts["target"],
        proposal=proposal,
    )


def resolve_basis(opts: dict, spec: ModelSpec) -> MarkovBasis:
    if opts.get("basis"):
        return MarkovBasis(tuple(Move(v) for v in read_basis(opts["basis"])), spec.design)
    if spec.family == "independence" and not opts.get("toric"):
        return independence_basis(spec.params["d1"], spec.params["d2"])
    caps = CompletionCaps(int(opts["max_generators"]), int(opts["max_degree"]))
    return toric_markov_basis(spec.design, caps)


def _manifest(command: str, opts: dict) -> str:
    doc = {"tool": "markovbasis", "version": __version__, "command": command, "options": opts}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_outputs(out, command: str, opts: dict, files: dict[str, str]) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    (out / "manifest.json").write_text(_manifest(command, opts))


# ---------------------------------------------------------------- runners


def run_basis(opts: dict, out) -> None:
    spec = resolve_spec(opts)
    basis = resolve_basis(opts, spec)
    text = format_rows(spec.n_cells, len(basis), basis.vectors())
    click.echo(f"moves {len(basis)} max_degree {basis.max_degree}", err=out is None)
    if out is None:
        click.echo(text, nl=False)
    else:
        _write_outputs(out, "basis", opts, {"basis.txt": text})


def run_enumerate(opts: dict, out) -> None:
    spec = resolve_spec(opts)
    u = load_data(spec, opts["data"])
    fiber = enumerate_fiber_cells(spec.design, u, int(opts["cap"]))
    text = format_sample(sufficient_statistics(spec, u), fiber)
    if out is None:
        click.echo(text, nl=False)
    else:
        _write_outputs(out, "enumerate", opts, {"fiber.txt": text})
        click.echo(f"fiber size {len(fiber)}")


def run_sample(opts: dict, out) -> None:
    spec = resolve_spec(opts)
    u = load_data(spec, opts["data"])
    cfg = resolve_walk(opts, spec)
    opts = {**opts, "proposal": cfg.proposal, "burnin": cfg.burn_in}
    basis = resolve_basis(opts, spec) if cfg.proposal == "basis" else None
    sample = walk(spec, basis, u, cfg, rng=chain_rng(cfg.seed))
    text = format_sample(sample.statistics, sample.states)
    if out is None:
        click.echo(text, nl=False)
    else:
        _write_outputs(out, "sample", opts, {"sample.txt": text})
        click.echo(f"recorded {len(sample.states)} states, acceptance {_num(sample.acceptance_rate)}")


def histogram_csv(hist) -> str:
    lines = ["bin_lo,bin_hi,count"]
    lines += [f"{_num(lo)},{_num(hi)},{c}" for (lo, hi), c in hist]
    return "\n".join(lines) + "\n"


def histogram_svg(hist, observed: float, width: int = 640, height: int = 400) -> str:
    """Bars for the histogram plus a red vertical line at the observed value."""
    pad = 40
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if hist:
        lo = min(hist[0][0][0], observed)
        hi = max(hist[-1][0][1], observed)
        span = hi - lo or 1.0
        top = max(c for _, c in hist) or 1
        plot_w, plot_h = width - 2 * pad, height - 2 * pad

        def xpos(x):
            return pad + (x - lo) / span * plot_w

        for (a, b), c in hist:
            h = c / top * plot_h
            parts.append(
                f'<rect x="{xpos(a):.3f}" y="{height - pad - h:.3f}" width="{max(xpos(b) - xpos(a), 0.0):.3f}" '
                f'height="{h:.3f}" fill="#9ab" stroke="#456" stroke-width="0.5"/>'
            )
        xo = xpos(observed)
        parts.append(f'<line x1="{xo:.3f}" y1="{pad}" x2="{xo:.3f}" y2="{height - pad}" stroke="red" stroke-width="2"/>')
        parts.append(
            f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>'
        )
        parts.append(f'<text x="{pad}" y="{height - pad + 16}" font-size="11">{lo:.4g}</text>')
        parts.append(f'<text x="{width - pad}" y="{height - pad + 16}" font-size="11" text-anchor="end">{hi:.4g}</text>')
        parts.append(f'<text x="{width / 2}" y="{height - 8}" font-size="12" text-anchor="middle">chi-square</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def run_test(opts: dict, out) -> None:
    spec = resolve_spec(opts)
    u = load_data(spec, opts["data"])
    bins = int(opts["bins"])
    if opts.get("exact"):
        result = exact_pvalue_enumerated(spec, u, int(opts["cap"]), bins)
        doc = {"method": "enumerated", **result.as_dict()}
    else:
        cfg = resolve_walk(opts, spec)
        opts = {**opts, "proposal": cfg.proposal, "burnin": cfg.burn_in}
        basis = resolve_basis(opts, spec) if cfg.proposal == "basis" else None
        result = exact_pvalue_mc(spec, u, basis, cfg, chains=int(opts["chains"]), bins=bins)
        doc = {"method": "mc", **result.as_dict(), "acceptance_rate": result.extra["acceptance_rate"]}
    _write_outputs(
        out,
        "test",
        opts,
        {
            "result.json": json.dumps(doc, indent=2) + "\n",
            "histogram.csv": histogram_csv(result.histogram),
            "histogram.svg": histogram_svg(result.histogram, result.observed_stat),
        },
    )
    click.echo(
        f"chi2 {_num(result.observed_stat)} p {_num(result.p_value)} "
        f"se {_num(result.mc_std_error)} n {result.sample_size}"
    )


def run_verify(opts: dict, out) -> None:
    spec = resolve_spec(opts)
    basis = resolve_basis(opts, spec)
    tables = []
    if opts.get("data"):
        tables.append(load_data(spec, opts["data"]))
    else:
        rng = chain_rng(int(opts["seed"]))
        for _ in range(int(opts["tables"])):
            tables.append(tuple(int(x) for x in rng.integers(0, int(opts["max_entry"]) + 1, size=spec.n_cells)))
    lines, bad = [], 0
    for u in tables:
        try:
            ok = verify_connects(spec.design, basis, u, int(opts["cap"]))
            status = "connected" if ok else "DISCONNECTED"
            bad += not ok
        except CapExceededError:
            status = "skipped-cap"
        lines.append(" ".join(str(x) for x in u) + f" {status}")
    text = "\n".join(lines) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        _write_outputs(out, "verify", opts, {"verify.txt": text})
    click.echo(f"{len(tables)} fibers, {bad} disconnected", err=out is None)
    if bad:
        sys.exit(EXIT_DISCONNECTED)


RUNNERS = {
    "basis": run_basis,
    "enumerate": run_enumerate,
    "sample": run_sample,
    "test": run_test,
    "verify": run_verify,
}


def _dispatch(command: str, opts: dict, out) -> None:
    try:
        RUNNERS[command](opts, out)
    except ParseError as exc:
        _fail(EXIT_PARSE, str(exc))
    except CapExceededError as exc:
        _fail(EXIT_CAP, f"{exc} (cap: {exc.cap})")
    except NonConvergenceError as exc:
        _fail(EXIT_NONCONVERGENCE, str(exc))
    except (ConfigurationError, ModelInvalidError, DimensionError, InconsistentFitError) as exc:
        _fail(EXIT_CONFIG, str(exc))


# ---------------------------------------------------------------- click


def model_options(f):
    f = click.option("--matrix", type=click.Path(dir_okay=False), help="Design matrix file ('m r' then rows).")(f)
    f = click.option(
        "--reciprocity", type=click.Choice(["zero", "constant", "differential"]), default=None,
        help="p1 reciprocity mode (default constant).",
    )(f)
    f = click.option("--nodes", type=int, default=None, help="Node count for p1.")(f)
    f = click.option("--dims", default=None, help="Table dimensions for independence, e.g. 3,3.")(f)
    f = click.option("--model", type=click.Choice(["independence", "p1", "generic"]), default=None)(f)
    return f


def basis_options(f):
    f = click.option("--max-degree", default=40, show_default=True, help="Completion degree cap.")(f)
    f = click.option("--max-generators", default=100_000, show_default=True, help="Completion generator cap.")(f)
    f = click.option("--toric", is_flag=True, help="Compute the basis even where a closed form exists.")(f)
    f = click.option("--basis", "basis_file", type=click.Path(dir_okay=False), default=None, help="Basis file.")(f)
    return f


def walk_options(f):
    f = click.option("--proposal", type=click.Choice(["basis", "dynamic"]), default=None,
                     help="Default: dynamic for p1, basis otherwise.")(f)
    f = click.option("--target", type=click.Choice(["uniform", "hypergeometric"]), default="hypergeometric",
                     show_default=True)(f)
    f = click.option("--seed", type=int, required=True)(f)
    f = click.option("--thin", default=1, show_default=True)(f)
    f = click.option("--burnin", type=int, default=None, help="Default: 10% of steps.")(f)
    f = click.option("--steps", default=100_000, show_default=True)(f)
    return f


def _opts(kwargs: dict, *, paths=("matrix", "data", "basis")) -> dict:
    opts = dict(kwargs)
    opts.pop("out", None)
    if "basis_file" in opts:
        opts["basis"] = opts.pop("basis_file")
    for k in paths:
        if opts.get(k) is not None:
            opts[k] = _abs(opts[k])
    return dict(sorted(opts.items()))


@click.group()
@click.version_option(__version__, prog_name="markovbasis")
def main():
    """Markov bases, fiber walks and exact conditional tests for log-linear models."""


@main.command(name="basis")
@model_options
@basis_options
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
def basis_cmd(**kw):
    """Compute a Markov basis and write it in canonical form."""
    _dispatch("basis", _opts(kw), kw["out"])


@main.command(name="enumerate")
@model_options
@click.option("--data", type=click.Path(dir_okay=False), required=True)
@click.option("--cap", default=100_000, show_default=True, help="Maximum fiber size.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def enumerate_cmd(**kw):
    """List every table in the fiber of the data, sorted."""
    _dispatch("enumerate", _opts(kw), kw["out"])


@main.command(name="sample")
@model_options
@basis_options
@walk_options
@click.option("--data", type=click.Path(dir_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def sample_cmd(**kw):
    """Dump the recorded states of one Metropolis-Hastings walk."""
    _dispatch("sample", _opts(kw), kw["out"])


@main.command(name="test")
@model_options
@basis_options
@walk_options
@click.option("--data", type=click.Path(dir_okay=False), required=True)
@click.option("--chains", default=1, show_default=True, help="Independent chains, pooled in order.")
@click.option("--bins", default=50, show_default=True, help="Histogram bins.")
@click.option("--exact", is_flag=True, help="Enumerate the fiber instead of walking.")
@click.option("--cap", default=100_000, show_default=True, help="Fiber cap for --exact.")
@click.option("--out", type=click.Path(file_okay=False), required=True)
def test_cmd(**kw):
    """Chi-square goodness of fit with an exact conditional p-value."""
    _dispatch("test", _opts(kw), kw["out"])


@main.command(name="verify")
@model_options
@basis_options
@click.option("--data", type=click.Path(dir_okay=False), default=None, help="Check this table's fiber only.")
@click.option("--tables", default=20, show_default=True, help="Random tables to check without --data.")
@click.option("--max-entry", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--cap", default=5000, show_default=True, help="Maximum fiber size.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def verify_cmd(**kw):
    """Check that a basis connects enumerated fibers."""
    _dispatch("verify", _opts(kw), kw["out"])


@main.command(name="replay")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), required=True)
def replay(manifest, out):
    """Rerun the command recorded in MANIFEST, writing into --out."""
    try:
        doc = json.loads(Path(manifest).read_text())
        command, opts = doc["command"], doc["options"]
    except (ValueError, KeyError) as exc:
        _fail(EXIT_PARSE, f"{manifest}: not a run manifest ({exc})")
    if command not in RUNNERS:
        _fail(EXIT_PARSE, f"{manifest}: unknown command {command!r}")
    _dispatch(command, opts, out)


if __name__ == "__main__":
    main()
