import functools
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

from src.ternary.errors import (
    VERIFY_FAILED_EXIT_CODE,
    PreconditionError,
    TernaryError,
)
from src.ternary.ffpoly import Poly, is_squarefree
from src.ternary.formulas import (
    alpha_closed_form,
    beta_limit,
    l_average_table,
    mass_formula_for,
)
from src.ternary.genus import (
    genus_classes,
    genus_symbol,
    seed_lattice,
    siegel_lhs,
    siegel_rhs,
)
from src.ternary.lattice import (
    Twist,
    beta_coefficients,
    decompose,
    representation_count,
    twisted_zeta_coefficients,
)
from src.ternary.logs import err_console, setup_logging
from src.ternary.settings import SCHEMA_VERSION, Settings, config_value, resolve_settings
from src.ternary.verify import CheckResult, run_suite
from src.ternary.zeta_l import (
    class_number,
    describe_order,
    l_polynomial,
    picard_oracle,
    rh_bound_holds,
)

console = Console()
app = typer.Typer(
    help="Exact arithmetic for definite ternary lattices over F_q[t].",
    add_completion=False,
)

F = TypeVar("F", bound=Callable[..., None])

Q_OPTION = typer.Option(None, "--q", help="Odd prime q (default 3)")
FORMAT_OPTION = typer.Option(None, "--format", help="Output format: table, json or tsv")
SEED_OPTION = typer.Option(None, "--seed", help="Seed for randomized checks")
THREADS_OPTION = typer.Option(None, "--threads", help="Worker threads for enumeration")
CONFIG_OPTION = typer.Option(None, "--config", help="JSON file with default option values")
VERBOSE_OPTION = typer.Option(False, "--verbose", "-v", help="Log at debug level")
METHOD_OPTION = typer.Option("neighbor", "--method", help="Genus search: neighbor or exhaustive")
ANISOTROPIC_OPTION = typer.Option(
    None, "--anisotropic", help="Product D1 of the anisotropic primes (picks the genus)"
)


def handle_errors(fn: F) -> F:
    """Print library errors as one ``error[code]: message`` line and exit with their code."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        try:
            fn(*args, **kwargs)
        except TernaryError as e:
            err_console.print(f"error[{e.code}]: {e}", style="red", markup=False, highlight=False)
            raise typer.Exit(e.exit_code)
        except (typer.Exit, typer.Abort):
            raise
        except Exception as e:
            err_console.print(f"error[internal]: {e}", style="red", markup=False, highlight=False)
            raise typer.Exit(1)

    return wrapper  # type: ignore[return-value]


def _settings(
    config: Optional[Path],
    q: Optional[int],
    fmt: Optional[str],
    seed: Optional[int],
    threads: Optional[int],
    verbose: bool,
) -> Settings:
    settings = resolve_settings(
        config, q=q, format=fmt, seed=seed, threads=threads, verbose=verbose or None
    )
    setup_logging(settings.verbose)
    return settings


def _poly(config: Optional[Path], key: str, value: Optional[str], q: int) -> Poly:
    text = config_value(config, key, value)
    if text is None:
        raise PreconditionError(f"--{key} is required")
    return Poly.parse(str(text), q)


def _optional_poly(config: Optional[Path], key: str, value: Optional[str], q: int) -> Optional[Poly]:
    text = config_value(config, key, value)
    return None if text is None else Poly.parse(str(text), q)


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def emit(
    settings: Settings,
    command: str,
    title: str,
    frame: pd.DataFrame,
    summary: Dict[str, Any],
    table_only: Sequence[str] = (),
) -> None:
    """Render rows plus a summary in the requested format.

    Columns listed in ``table_only`` (floats, timings) never reach json or tsv.
    """
    machine = frame.drop(columns=[c for c in table_only if c in frame.columns])
    if settings.format == "json":
        rows = json.loads(machine.to_json(orient="records"))
        payload = {"schema": SCHEMA_VERSION, "command": command, **summary, "rows": rows}
        typer.echo(json.dumps(payload, indent=2))
        return
    if settings.format == "tsv":
        typer.echo(f"# schema={SCHEMA_VERSION} command={command}")
        for key, value in summary.items():
            typer.echo(f"# {key}={value}")
        if len(machine.columns):
            typer.echo(machine.to_csv(sep="\t", index=False), nl=False)
        return
    console.rule(title)
    if len(frame):
        table = Table()
        for col in frame.columns:
            table.add_column(str(col), justify="right" if col in ("k", "l", "i") else "left")
        for row in frame.itertuples(index=False):
            table.add_row(*(str(v) for v in row))
        console.print(table)
    for key, value in summary.items():
        style = {"PASS": "green", "FAIL": "red"}.get(str(value), "")
        console.print(f"{key}: [{style}]{value}[/{style}]" if style else f"{key}: {value}")


def _exit_on_fail(ok: bool) -> None:
    if not ok:
        raise typer.Exit(VERIFY_FAILED_EXIT_CODE)


@app.command()
@handle_errors
def lpoly(
    b: Optional[str] = typer.Option(None, "--b", help="Polynomial b, e.g. t^3+2*t+1"),
    method: str = typer.Option("functional", "--method", help="functional or sum"),
    q: Optional[int] = Q_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Coefficients of the L-polynomial L*(u, chi_b)."""
    settings = _settings(config, q, fmt, seed, threads, verbose)
    poly = _poly(config, "b", b, settings.q)
    lp = l_polynomial(poly, method)
    frame = pd.DataFrame({"k": range(len(lp.coeffs)), "c_k": lp.to_json()})
    summary: Dict[str, Any] = {
        "b": str(poly),
        "L": str(lp),
        "infinity": describe_order(poly).infinity_type.value,
    }
    if is_squarefree(poly):
        summary["rh_bound"] = _verdict(rh_bound_holds(lp, poly.degree or 0, settings.q))
    emit(settings, "lpoly", f"L*(u, chi_b) for b = {poly}", frame, summary)


@app.command()
@handle_errors
def classno(
    m: Optional[str] = typer.Option(None, "--m", help="Polynomial m of A[sqrt(m)]"),
    oracle: bool = typer.Option(False, "--oracle", help="Cross-check with the ideal-class oracle"),
    q: Optional[int] = Q_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Class number h(m) = |Pic(A[sqrt(m)])| of an imaginary quadratic order."""
    settings = _settings(config, q, fmt, seed, threads, verbose)
    poly = _poly(config, "m", m, settings.q)
    desc = describe_order(poly)
    h = class_number(poly)
    summary: Dict[str, Any] = {
        "m": str(poly),
        "infinity": desc.infinity_type.value,
        "conductor": str(desc.conductor_square_part),
        "h": h,
    }
    ok = True
    if oracle:
        h_oracle = picard_oracle(poly)
        ok = h == h_oracle
        summary["h_oracle"] = h_oracle
        summary["verdict"] = _verdict(ok)
    emit(settings, "classno", f"Class number of A[sqrt({poly})]", pd.DataFrame(), summary)
    _exit_on_fail(ok)


@app.command()
@handle_errors
def mass(
    D: Optional[str] = typer.Option(None, "--D", help="Squarefree determinant D"),
    enumerate_: bool = typer.Option(False, "--enumerate", help="Also sum 1/|SO| over the class list"),
    method: str = typer.Option("exhaustive", "--method", help="Class search: exhaustive or neighbor"),
    anisotropic: Optional[str] = ANISOTROPIC_OPTION,
    q: Optional[int] = Q_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Mass of the genus of determinant D from the closed form."""
    settings = _settings(config, q, fmt, seed, threads, verbose)
    det = _poly(config, "D", D, settings.q)
    d1 = _optional_poly(config, "anisotropic", anisotropic, settings.q)
    symbol = genus_symbol(seed_lattice(settings.q, det, d1), det)
    formula = mass_formula_for(symbol)
    summary: Dict[str, Any] = {
        "D": str(det),
        "D0": str(symbol.D0),
        "D1": str(symbol.D1),
        "formula": str(formula.value),
        "statement_form": str(formula.statement),
        "derivation_form": str(formula.derivation),
    }
    ok = True
    if enumerate_:
        classes = genus_classes(settings.q, det, method, symbol.D1, settings.threads)
        ok = classes.mass == formula.value
        summary["h"] = classes.class_number
        summary["enumerated"] = str(classes.mass)
        summary["verdict"] = _verdict(ok)
    emit(settings, "mass", f"Mass of the genus of determinant {det}", pd.DataFrame(), summary)
    _exit_on_fail(ok)


@app.command()
@handle_errors
def genus(
    D: Optional[str] = typer.Option(None, "--D", help="Squarefree determinant D"),
    method: str = METHOD_OPTION,
    anisotropic: Optional[str] = ANISOTROPIC_OPTION,
    q: Optional[int] = Q_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Class representatives of a genus with |SO(L_i)| and the mass check."""
    settings = _settings(config, q, fmt, seed, threads, verbose)
    det = _poly(config, "D", D, settings.q)
    d1 = _optional_poly(config, "anisotropic", anisotropic, settings.q)
    classes = genus_classes(settings.q, det, method, d1, settings.threads)
    formula = mass_formula_for(classes.genus_symbol)
    frame = pd.DataFrame(
        {
            "i": range(1, classes.class_number + 1),
            "gram": [str(lat) for lat in classes.representatives],
            "minima": [" ".join(map(str, lat.minima)) for lat in classes.representatives],
            "so_order": list(classes.so_orders),
            "decomposable": [decompose(lat) is not None for lat in classes.representatives],
        }
    )
    ok = classes.mass == formula.value
    summary = {
        "D": str(det),
        "D1": str(classes.genus_symbol.D1),
        "method": classes.method,
        "h": classes.class_number,
        "mass": str(classes.mass),
        "formula": str(formula.value),
        "verdict": _verdict(ok),
    }
    emit(settings, "genus", f"Classes in the genus of determinant {det}", frame, summary)
    _exit_on_fail(ok)


@app.command()
@handle_errors
def represent(
    D: Optional[str] = typer.Option(None, "--D", help="Squarefree determinant D"),
    a: Optional[str] = typer.Option(None, "--a", help="Represented polynomial a, prime to D"),
    method: str = METHOD_OPTION,
    anisotropic: Optional[str] = ANISOTROPIC_OPTION,
    q: Optional[int] = Q_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Siegel's weighted representation count against 2^-r h(-aD)."""
    settings = _settings(config, q, fmt, seed, threads, verbose)
    det = _poly(config, "D", D, settings.q)
    value = _poly(config, "a", a, settings.q)
    d1 = _optional_poly(config, "anisotropic", anisotropic, settings.q)
    classes = genus_classes(settings.q, det, method, d1, settings.threads)
    counts = [representation_count(lat, value, threads=settings.threads) for lat in classes.representatives]
    lhs = siegel_lhs(classes, value, settings.threads)
    rhs = siegel_rhs(classes, value)
    ok = lhs == (rhs if rhs is not None else Fraction(0))
    frame = pd.DataFrame(
        {
            "i": range(1, classes.class_number + 1),
            "gram": [str(lat) for lat in classes.representatives],
            "R": counts,
            "so_order": list(classes.so_orders),
        }
    )
    summary = {
        "D": str(det),
        "a": str(value),
        "weighted_sum": str(lhs),
        "class_number_side": "not representable" if rhs is None else str(rhs),
        "verdict": _verdict(ok),
    }
    emit(settings, "represent", f"Representations of {value} in the genus of {det}", frame, summary)
    _exit_on_fail(ok)


@app.command()
@handle_errors
def average(
    D: Optional[str] = typer.Option(None, "--D", help="Squarefree D"),
    lmax: int = typer.Option(4, "--lmax", min=1, help="Largest degree l of m"),
    lmin: int = typer.Option(1, "--lmin", min=1, help="Smallest degree l of m"),
    q: Optional[int] = Q_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Normalized averages of L(1, chi_Dm) over deg m = l next to their limit."""
    settings = _settings(config, q, fmt, seed, threads, verbose)
    det = _poly(config, "D", D, settings.q)
    rows = l_average_table(det, lmax, lmin, settings.threads)
    frame = pd.DataFrame(
        {
            "l": [r.l for r in rows],
            "count": [r.count for r in rows],
            "average": [str(r.average) for r in rows],
            "limit": [str(r.limit) for r in rows],
            "identity": [_verdict(r.identity_holds) for r in rows],
            "rh_violations": [r.rh_violations for r in rows],
            "deviation (approx)": [f"{r.deviation:.3e}" for r in rows],
        }
    )
    ok = all(r.identity_holds and r.rh_violations == 0 for r in rows)
    summary = {"D": str(det), "limit": str(rows[0].limit) if rows else "", "verdict": _verdict(ok)}
    emit(settings, "average", f"L-value averages for D = {det}", frame, summary, ("deviation (approx)",))
    _exit_on_fail(ok)


@app.command()
@handle_errors
def epstein(
    D: Optional[str] = typer.Option(None, "--D", help="Squarefree determinant D"),
    kmax: int = typer.Option(6, "--kmax", min=0, help="Largest degree k"),
    twist: Twist = typer.Option(Twist.NONE, "--twist", help="none, chi, psi or phi_psi"),
    d: Optional[str] = typer.Option(None, "--d", help="Divisor d of D for the chi twist"),
    beta: bool = typer.Option(False, "--beta", help="Add beta_k and its limit ratios"),
    anisotropic: Optional[str] = ANISOTROPIC_OPTION,
    q: Optional[int] = Q_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Epstein zeta coefficients of a lattice in the genus of D."""
    settings = _settings(config, q, fmt, seed, threads, verbose)
    det = _poly(config, "D", D, settings.q)
    divisor = _optional_poly(config, "d", d, settings.q)
    d1 = _optional_poly(config, "anisotropic", anisotropic, settings.q)
    lattice = seed_lattice(settings.q, det, d1)
    coefficients = twisted_zeta_coefficients(lattice, kmax, twist, divisor, settings.threads)
    delta = lattice.delta
    columns: Dict[str, List[Any]] = {"k": list(range(kmax + 1)), "count": coefficients}
    if twist is Twist.NONE:
        columns["closed_form"] = [
            str(alpha_closed_form(settings.q, delta, k)) if k > delta else "" for k in range(kmax + 1)
        ]
    table_only: List[str] = []
    summary: Dict[str, Any] = {"D": str(det), "lattice": str(lattice), "twist": twist.value}
    if beta:
        symbol = genus_symbol(lattice, det)
        betas = beta_coefficients(lattice, kmax, threads=settings.threads)
        limits = [beta_limit(settings.q, det, symbol.D0, symbol.D1, p) for p in (0, 1)]
        ratios = []
        for k in range(kmax + 1):
            shift = k - delta
            if shift < 0:
                ratios.append("")
                continue
            m, parity = divmod(shift, 2)
            ratios.append(f"{float(Fraction(betas[k], settings.q ** (3 * m)) / limits[parity]):.4f}")
        columns["beta"] = betas
        columns["beta/limit (approx)"] = ratios
        table_only.append("beta/limit (approx)")
        summary["beta_limit_even"] = str(limits[0])
        summary["beta_limit_odd"] = str(limits[1])
    emit(settings, "epstein", f"Epstein coefficients of {lattice}", pd.DataFrame(columns), summary, table_only)


@app.command()
@handle_errors
def verify(
    suite: str = typer.Option("fast", "--suite", help="fast or all"),
    q: Optional[int] = Q_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Run the acceptance checks and exit non-zero if any of them fails."""
    settings = _settings(config, q, fmt, seed, threads, verbose)

    def progress(result: CheckResult) -> None:
        if settings.format == "table":
            err_console.print(f"{result.name}: {result.status.value} ({result.elapsed:.1f}s)", markup=False)

    results = run_suite(suite, settings.seed, settings.threads, progress)
    frame = pd.DataFrame(
        {
            "name": [r.name for r in results],
            "status": [r.status.value for r in results],
            "detail": [r.detail for r in results],
            "seconds": [f"{r.elapsed:.2f}" for r in results],
        }
    )
    passed = sum(r.passed for r in results)
    summary = {"suite": suite, "passed": f"{passed}/{len(results)}", "verdict": _verdict(passed == len(results))}
    emit(settings, "verify", f"Acceptance suite ({suite})", frame, summary, ("seconds",))
    _exit_on_fail(passed == len(results))


def main():
    app()


if __name__ == "__main__":
    main()
