"""From per-unit t-statistics to shrinkage effect-size estimates.

Input is a CSV with header ``id,stat[,df]``. Statistics are mapped to
z-scores by ``z = Phi^{-1}(F_df(t))`` and then analysed as a normal-means
problem with the Gibbs sampler.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._io import fmt, read_csv, write_csv
from .exceptions import DomainError
from .mcmc import McmcConfig, TauPolicy, run_gibbs
from .multitest import half_threshold_rule
from .specialfn import std_normal_quantile, student_t_cdf

log = logging.getLogger(__name__)

__all__ = [
    "TestStatisticsFile",
    "EffectSizeReport",
    "read_test_statistics",
    "t_to_z",
    "analyze",
    "write_z_csv",
    "write_report",
]

P_FLOOR = 1e-300
DEFAULT_DRAWS = 15_000
DEFAULT_BURN = 3_000


@dataclass
class TestStatisticsFile:
    ids: list
    stat: np.ndarray
    df: np.ndarray
    rejected: list = field(default_factory=list)  # (line number, id, reason)

    __test__ = False  # not a pytest class

    @property
    def n(self):
        return len(self.ids)


def read_test_statistics(path, df=None):
    """Read ``id,stat[,df]`` rows; a file-level ``df`` overrides the column.

    Rows with a non-finite statistic or an invalid ``df`` are skipped and
    listed in ``rejected``.
    """
    header, rows = read_csv(path)
    cols = {h.lower(): i for i, h in enumerate(header)}
    if "id" not in cols or "stat" not in cols:
        raise DomainError(f"{path}: header must contain 'id' and 'stat', got {header}")
    if df is None and "df" not in cols:
        raise DomainError(f"{path}: no 'df' column and no file-level df given")
    ids, stats, dfs, rejected = [], [], [], []
    for lineno, row in enumerate(rows, start=2):
        rid = row[cols["id"]].strip() if len(row) > cols["id"] else ""
        try:
            t = float(row[cols["stat"]])
            d = float(df) if df is not None else float(row[cols["df"]])
        except (IndexError, ValueError):
            rejected.append((lineno, rid, "unparseable row"))
            continue
        if not math.isfinite(t):
            rejected.append((lineno, rid, "non-finite statistic"))
            continue
        if not (math.isfinite(d) and d >= 1.0):
            rejected.append((lineno, rid, "degrees of freedom must be >= 1"))
            continue
        ids.append(rid)
        stats.append(t)
        dfs.append(d)
    for lineno, rid, why in rejected:
        log.warning("%s line %d (%s): %s", path, lineno, rid, why)
    return TestStatisticsFile(ids, np.array(stats), np.array(dfs), rejected)


def t_to_z(stat, df=None):
    """``Phi^{-1}(F_df(t))``, evaluated on the lower tail for precision and mirrored.

    Accepts a :class:`TestStatisticsFile` or arrays of statistics and degrees of freedom.
    """
    if isinstance(stat, TestStatisticsFile):
        stat, df = stat.stat, stat.df
    t = np.asarray(stat, dtype=float)
    d = np.broadcast_to(np.asarray(df, dtype=float), t.shape)
    if not np.all(np.isfinite(t)):
        raise DomainError("statistics must be finite")
    lower = np.clip(student_t_cdf(-np.abs(t), d), P_FLOOR, 0.5)
    z = -np.asarray(std_normal_quantile(lower), dtype=float)
    z = np.where(t == 0.0, 0.0, z)
    return np.sign(t) * z


@dataclass
class EffectSizeReport:
    ids: list
    y: np.ndarray
    theta_hat: np.ndarray
    omega: np.ndarray
    reject: np.ndarray
    mse: float
    overshoot: int
    family: str

    @property
    def n(self):
        return self.y.size


def analyze(z, family, config=None, ids=None, threads=1):
    """Posterior means, pseudo-inclusion probabilities and half-threshold decisions.

    The default sampler runs 15,000 iterations with 3,000 burn-in and a
    half-Cauchy ``tau`` with scale ``1/n``. ``mse`` is the mean squared
    difference between the posterior means and the z-scores.
    """
    y = np.asarray(z, dtype=float).ravel()
    n = y.size
    if config is None:
        config = McmcConfig(iterations=DEFAULT_DRAWS, burn_in=DEFAULT_BURN,
                            tau_policy=TauPolicy.half_cauchy(1.0 / n))
    config = replace(config, keep_kappa=False)
    res = run_gibbs(y, family, config, threads=threads)
    s = res.summary
    reject = half_threshold_rule(s)
    overshoot = int(np.sum(np.abs(s.mean) > np.abs(y)))
    if overshoot:
        log.warning("%d posterior means exceed |y| in magnitude", overshoot)
    ids = [str(i + 1) for i in range(n)] if ids is None else list(ids)
    mse = float(np.mean((s.mean - y) ** 2))
    return EffectSizeReport(ids, y, s.mean, s.omega, reject, mse, overshoot, str(family))


def write_z_csv(path, ids, z):
    write_csv(path, ["id", "y"], zip(ids, z))


def write_report(path, report, stats_path=None):
    """Write ``id,y,theta_hat,omega_hat,reject`` rows and a ``key=value`` stats sidecar."""
    write_csv(path, ["id", "y", "theta_hat", "omega_hat", "reject"],
              zip(report.ids, report.y, report.theta_hat, report.omega, report.reject))
    stats_path = stats_path or f"{path}.stats"
    with open(stats_path, "w", encoding="utf-8") as fh:
        fh.write(f"family={report.family}\n")
        fh.write(f"n={report.n}\n")
        fh.write(f"mse={fmt(report.mse)}\n")
        fh.write(f"rejections={int(np.sum(report.reject))}\n")
        fh.write(f"overshoot={report.overshoot}\n")
    return stats_path
