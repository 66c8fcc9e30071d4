"""
Result files: CSV tables, charts and the run manifest.
"""

import json
import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
import pytz  # noqa: E402
import tzlocal  # noqa: E402
from tzlocal.windows_tz import win_tz  # noqa: E402

from .. import __version__  # noqa: E402
from .config import ENV_TIMEZONE  # noqa: E402
from .runner import CURVE_COLUMNS, ExperimentResult  # noqa: E402

logger = logging.getLogger(__name__)

RUN_COLUMNS = [
    "scenario",
    "policy",
    "replication",
    "seed",
    "status",
    "error",
    "rounds",
    "pulls",
    "total_spend",
    "final_reward",
    "final_regret",
    "cutoff",
    "accepted",
    "identification_spend",
    "identification_rounds",
]
DIAGNOSTIC_COLUMNS = ["scenario", "policy", "replication", "seed", "source", "round"]

PathLike = Union[str, Path]


def _write(frame: pd.DataFrame, path: Path) -> Path:
    try:
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    except OSError as error:
        logger.error("Cannot write %s: %s", path, error)
        raise OSError(f"{path}: {error}") from error
    return path


def runs_frame(results: List[ExperimentResult]) -> pd.DataFrame:
    rows = [
        {"scenario": result.scenario, **run.summary}
        for result in results
        for run in result.runs
    ]
    return pd.DataFrame(rows, columns=RUN_COLUMNS)


def diagnostics_frame(results: List[ExperimentResult]) -> pd.DataFrame:
    rows = [
        {"scenario": result.scenario, **row}
        for result in results
        for run in result.runs
        for row in run.diagnostics
    ]
    extra = sorted({key for row in rows for key in row} - set(DIAGNOSTIC_COLUMNS))
    return pd.DataFrame(rows, columns=DIAGNOSTIC_COLUMNS + extra)


def curves_frame(results: List[ExperimentResult]) -> pd.DataFrame:
    frames = [result.curves for result in results if len(result.curves)]
    if not frames:
        return pd.DataFrame(columns=CURVE_COLUMNS)
    return pd.concat(frames, ignore_index=True)[CURVE_COLUMNS]


def emit_csv(results: List[ExperimentResult], directory: PathLike) -> Dict[str, Path]:
    """
    Write curves.csv, runs.csv and diagnostics.csv.

    Row order is fixed: experiments as given, policies in config order, then
    replication and round. An empty result list yields header-only files.

    Args:
        results: Experiment results
        directory: Output directory (created if needed)

    Returns:
        Mapping from table name to written path

    Raises:
        OSError: With the offending path in the message
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = {
        "curves": _write(curves_frame(results), directory / "curves.csv"),
        "runs": _write(runs_frame(results), directory / "runs.csv"),
        "diagnostics": _write(diagnostics_frame(results), directory / "diagnostics.csv"),
    }
    logger.info("Wrote CSV tables to %s", directory)
    return written


def build_figure(result: ExperimentResult):
    """Cumulative reward against round, one series per policy, with a 1-stderr band."""
    fig, ax = plt.subplots(figsize=(9, 5.5))
    for policy, frame in result.curves.groupby("policy", sort=False):
        ax.plot(frame["round"], frame["mean_cum_reward"], label=policy, linewidth=1.5)
        ax.fill_between(
            frame["round"],
            frame["mean_cum_reward"] - frame["stderr_cum_reward"],
            frame["mean_cum_reward"] + frame["stderr_cum_reward"],
            alpha=0.2,
        )
    ax.set_title(result.scenario)
    ax.set_xlabel("Round")
    ax.set_ylabel("Cumulative reward")
    ax.grid(True, alpha=0.3)
    if len(result.curves):
        ax.legend(loc="upper left")
    fig.tight_layout()
    return fig, ax


def render_plots(
    results: List[ExperimentResult], directory: PathLike, fmt: str = "png"
) -> List[Path]:
    """
    Render one chart per scenario, named ``<scenario>.<fmt>``.

    Returns:
        Paths of the written charts
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for result in results:
        path = directory / f"{result.scenario}.{fmt}"
        fig, _ = build_figure(result)
        try:
            fig.savefig(path, dpi=150, bbox_inches="tight")
        except OSError as error:
            logger.error("Cannot write %s: %s", path, error)
            raise OSError(f"{path}: {error}") from error
        finally:
            plt.close(fig)
        paths.append(path)
    logger.info("Rendered %d chart(s) to %s", len(paths), directory)
    return paths


def resolve_timezone(name: Optional[str] = None):
    """
    Timezone for manifest stamps.

    Accepts IANA names and Windows names; falls back to the machine's zone.
    """
    name = name or os.environ.get(ENV_TIMEZONE)
    if name:
        iana = win_tz.get(name, name)
        try:
            return pytz.timezone(iana)
        except pytz.UnknownTimeZoneError:
            logger.warning("Unknown timezone %r, using the local zone", name)
    return pytz.timezone(tzlocal.get_localzone_name() or "UTC")


def now_stamp(tz=None) -> str:
    tz = tz or resolve_timezone()
    return datetime.now(tz).isoformat(timespec="seconds")


def write_manifest(
    results: List[ExperimentResult],
    directory: PathLike,
    started_at: str,
    finished_at: str,
    files: Optional[List[Path]] = None,
) -> Path:
    """Record the resolved configs, seeds and timestamps next to the tables."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest: Dict[str, Any] = {
        "version": __version__,
        "started_at": started_at,
        "finished_at": finished_at,
        "experiments": [
            {
                "scenario": result.scenario,
                "config": result.config.to_dict(),
                "world_seed": result.config.resolved_world_seed,
                "seeds": [result.config.seed_for(i) for i in range(result.config.replications)],
                "theta_scale": result.theta_scale,
                "failures": len(result.failures),
            }
            for result in results
        ],
        "files": sorted(str(path) for path in files or []),
    }
    path = directory / "manifest.json"
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, default=str)
    return path
