"""Experiment configuration, the analysis pipeline behind `laxgrid run`, and
report serialization.

A run approximates one map across a ladder of grid orders, then applies the
requested analyses to the finest order's permutation.  Everything lands in a
single JSON report whose bytes are reproducible for a fixed config -- only
the isolated "timing" block differs between runs -- plus one CSV per tabular
analysis and a rendered PNG next to each CSV.  Floats are written with 17
significant digits; exact rationals are written as "num/den" strings.
"""
from __future__ import annotations

import json
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import DyadicGrid
from .lax import MODES, lax_approximate
from .maps import parse_map_spec
from .metrics import delta_sum, epsilon_tolerance, parse_theta, speed_profile
from .spectral import (
    KoopmanShift,
    cesaro_mixing_diagnostic,
    cesaro_unsigned_average,
    rigidity_detector,
    spectral_type,
)
from .towers import rank_one_base, rokhlin_tower, two_column_partition
from .entropy import Partition, entropy_rate_estimate, katok_stepin_gap_bound

ANALYSES = ("speed", "towers", "rank_one", "entropy", "spectral", "cesaro")

_DEFAULTS = {
    "map": "cat",
    "dim": 2,
    "topology": "torus",
    "orders": (1, 2, 3),
    "mode": "plain",
    "sampling": 8,
    "refine": 3,
    "analyses": ("speed",),
    "seed": 0,
    "theta": "1.0/q",
    "out": "laxgrid_out",
    "height": 2,
    "col_p": 2,
    "col_qp": 3,
    "l_max": 4,
    "cesaro_n": 0,  # 0 = one full period (q steps)
    "start_cell": 0,
    "figures": 1,
}

_INT_KEYS = {
    "dim",
    "sampling",
    "refine",
    "seed",
    "height",
    "col_p",
    "col_qp",
    "l_max",
    "cesaro_n",
    "start_cell",
    "figures",
}


class ExperimentConfig:
    """Validated experiment description; construct via from_mapping,
    from_file, or keyword overrides on the defaults."""

    __slots__ = tuple(_DEFAULTS)

    def __init__(self, **kw):
        merged = dict(_DEFAULTS)
        for k, v in kw.items():
            if v is None:
                continue
            if k not in _DEFAULTS:
                raise ConfigError(f"unknown config key {k!r}")
            merged[k] = v
        for k, v in merged.items():
            setattr(self, k, v)
        self._validate()

    def _validate(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ConfigError(f"dim must be a positive integer, got {self.dim!r}")
        orders = tuple(int(o) for o in self.orders)
        if not orders or any(o < 1 for o in orders):
            raise ConfigError(f"orders must be positive, got {list(self.orders)}")
        if any(b <= a for a, b in zip(orders, orders[1:])):
            raise ConfigError(f"orders must be strictly increasing, got {list(orders)}")
        self.orders = orders
        if self.topology not in ("torus", "cube"):
            raise ConfigError(f"topology must be torus or cube, got {self.topology!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.sampling < 1:
            raise ConfigError(f"sampling must be >= 1, got {self.sampling}")
        if self.refine < 1:
            raise ConfigError(f"refine must be >= 1, got {self.refine}")
        analyses = tuple(self.analyses)
        bad = [a for a in analyses if a not in ANALYSES]
        if bad:
            raise ConfigError(f"unknown analyses {bad}; choose from {list(ANALYSES)}")
        self.analyses = analyses
        for key in ("height", "col_p", "col_qp", "l_max"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1, got {getattr(self, key)}")
        if self.cesaro_n < 0:
            raise ConfigError(f"cesaro_n must be >= 0, got {self.cesaro_n}")
        # parse early so bad specs fail at config time with ConfigError
        parse_map_spec(self.map, self.dim)
        try:
            parse_theta(self.theta)
        except Exception as e:
            raise ConfigError(f"bad theta spec {self.theta!r}: {e}") from e

    @staticmethod
    def _coerce(key: str, v):
        if not isinstance(v, str):
            return v
        v = v.strip()
        if key == "orders":
            try:
                return tuple(int(x) for x in v.split(",") if x.strip())
            except ValueError as e:
                raise ConfigError(f"bad orders {v!r}") from e
        if key == "analyses":
            return tuple(x.strip() for x in v.split(",") if x.strip())
        if key in _INT_KEYS:
            try:
                return int(v)
            except ValueError as e:
                raise ConfigError(f"{key} must be an integer, got {v!r}") from e
        return v

    @classmethod
    def from_mapping(cls, mapping) -> "ExperimentConfig":
        kw = {}
        for k, v in mapping.items():
            key = str(k).strip()
            if key not in _DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            kw[key] = cls._coerce(key, v)
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Flat key=value file; blank lines and #-comments are skipped."""
        try:
            text = Path(path).read_text()
        except OSError as e:
            from .errors import IoError

            raise IoError(f"cannot read config file {path}: {e}") from e
        mapping = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            k, _, v = line.partition("=")
            mapping[k.strip()] = v.strip()
        return cls.from_mapping(mapping)

    def override(self, **kw) -> "ExperimentConfig":
        """A copy with the non-None keyword values replacing current ones;
        string values are parsed the same way as config-file values."""
        vals = {k: getattr(self, k) for k in _DEFAULTS}
        for k, v in kw.items():
            if v is None:
                continue
            if k not in _DEFAULTS:
                raise ConfigError(f"unknown config key {k!r}")
            vals[k] = self._coerce(k, v)
        return ExperimentConfig(**vals)

    def to_json_dict(self) -> dict:
        return {
            "map": self.map,
            "dim": self.dim,
            "topology": self.topology,
            "orders": list(self.orders),
            "mode": self.mode,
            "sampling": self.sampling,
            "refine": self.refine,
            "analyses": list(self.analyses),
            "seed": self.seed,
            "theta": self.theta,
            "height": self.height,
            "col_p": self.col_p,
            "col_qp": self.col_qp,
            "l_max": self.l_max,
            "cesaro_n": self.cesaro_n,
            "start_cell": self.start_cell,
        }


def _frac_str(fr: Fraction) -> str:
    fr = Fraction(fr)
    return f"{fr.numerator}/{fr.denominator}"


def _jsonify(obj):
    """Recursively convert to plain JSON types: numpy scalars to Python ones,
    Fractions to exact num/den strings."""
    if isinstance(obj, Fraction):
        return _frac_str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(x) for x in obj]
    return obj


def report_bytes(report: dict) -> bytes:
    return (json.dumps(_jsonify(report), indent=2, sort_keys=True) + "\n").encode()


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def _g17(x) -> str:
    return f"{float(x):.17g}"


def _write_speed_csv(path: Path, records):
    lines = ["order,q,delta_sum,theta,pass"]
    for r in records:
        lines.append(
            f"{r.order},{r.q},{_frac_str(r.delta_sum)},{_g17(r.theta)},{int(r.passed)}"
        )
    path.write_text("\n".join(lines) + "\n")


def _write_spectral_csv(path: Path, measure):
    lines = ["num,den,weight"]
    for f in sorted(measure.atoms):
        lines.append(f"{f.numerator},{f.denominator},{_g17(measure.atoms[f])}")
    path.write_text("\n".join(lines) + "\n")


def _write_entropy_csv(path: Path, rows):
    lines = ["l,H_l,bound"]
    for row in rows:
        lines.append(f"{row['l']},{_g17(row['H_l'])},{_g17(row['bound'])}")
    path.write_text("\n".join(lines) + "\n")


def _render_figures(out: Path, results: dict) -> list:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    if "speed" in results:
        rows = results["speed"]
        qs = [r["q"] for r in rows]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.loglog(qs, [max(float(r["delta_sum"]), 1e-300) for r in rows], "o-", label="delta_sum")
        ax.loglog(qs, [r["theta"] for r in rows], "s--", label="theta(q)")
        ax.set_xlabel("q")
        ax.set_ylabel("one-step image difference")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / "speed.png", dpi=120)
        plt.close(fig)
        written.append("speed.png")
    if "spectral" in results:
        atoms = results["spectral"]["atoms"]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        xs = [a["num"] / a["den"] for a in atoms]
        ws = [a["weight"] for a in atoms]
        ax.vlines(xs, 0, ws)
        ax.plot(xs, ws, "o")
        ax.set_xlabel("eigenvalue angle (turns)")
        ax.set_ylabel("weight")
        fig.tight_layout()
        fig.savefig(out / "spectral.png", dpi=120)
        plt.close(fig)
        written.append("spectral.png")
    if "entropy" in results:
        rows = results["entropy"]["rows"]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot([r["l"] for r in rows], [r["H_l"] for r in rows], "o-", label="H_l")
        ax.set_xlabel("depth l")
        ax.set_ylabel("joint entropy (nats)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / "entropy.png", dpi=120)
        plt.close(fig)
        written.append("entropy.png")
    return written


def run_experiment(config: ExperimentConfig, write_files: bool = True) -> dict:
    """Execute the configured pipeline.  Returns the report dict; when
    write_files is set, also writes report.json, the CSVs, and the figures
    under config.out and lists them in the report's "artifacts"."""
    t0 = time.perf_counter()
    timing = {}
    map_ = parse_map_spec(config.map, config.dim)
    theta = parse_theta(config.theta)
    rng = np.random.default_rng(config.seed)

    results: dict = {}
    final_order = config.orders[-1]
    grid = DyadicGrid(config.dim, final_order, config.topology)

    t = time.perf_counter()
    perm, cert = lax_approximate(map_, grid, config.sampling, config.mode)
    timing["lax_s"] = time.perf_counter() - t
    results["final"] = {
        "order": final_order,
        "q": grid.q,
        "mode": config.mode,
        "cycle_lengths": perm.cycle_lengths(),
        "certificate": cert.to_json_dict(),
    }

    speed_records = None
    for name in config.analyses:
        t = time.perf_counter()
        if name == "speed":
            speed_records = speed_profile(
                map_,
                config.orders,
                mode=config.mode,
                theta=theta,
                dim=config.dim,
                topology=config.topology,
                sampling=config.sampling,
                refine=config.refine,
            )
            results["speed"] = [
                dict(r.to_json_dict(), delta_sum_exact=_frac_str(r.delta_sum))
                for r in speed_records
            ]
        elif name == "towers":
            tower = rokhlin_tower(perm, config.height)
            cols = two_column_partition(perm, config.col_p, config.col_qp)
            results["towers"] = {
                "rokhlin": tower.to_json_dict(),
                "two_column": cols.to_json_dict(),
            }
        elif name == "rank_one":
            cert1 = rank_one_base(
                map_, perm, grid, refine=config.refine, start_cell=config.start_cell
            )
            results["rank_one"] = dict(
                cert1.to_json_dict(),
                base_deficit=_frac_str(cert1.base_deficit()),
                epsilon=epsilon_tolerance(grid, config.refine),
            )
        elif name == "entropy":
            P = Partition.cell_partition(grid, refine=0)
            ds = delta_sum(map_, perm, grid, config.refine)
            rows = []
            for l in range(1, config.l_max + 1):
                rate = entropy_rate_estimate(perm, P, l)
                rows.append({
                    "l": l,
                    "H_l": rate * l,
                    "rate": rate,
                    "bound": katok_stepin_gap_bound(l, float(ds), grid.q),
                })
            results["entropy"] = {
                "rows": rows,
                "log_q": float(np.log(grid.q)),
                "delta_sum": _frac_str(ds),
            }
        elif name == "spectral":
            st = spectral_type(perm)
            d, defect = rigidity_detector(perm)
            results["spectral"] = {
                "atoms": st.to_json_list(),
                "total_mass": st.total_mass(),
                "rigidity_power": d,
                "rigidity_defect": defect,
                "koopman_order": KoopmanShift(perm).order(),
            }
        elif name == "cesaro":
            n = config.cesaro_n if config.cesaro_n > 0 else grid.q
            k1 = max(1, grid.q // 2)
            k2 = max(1, grid.q // 2)
            e1 = np.sort(rng.choice(grid.q, size=k1, replace=False))
            e2 = np.sort(rng.choice(grid.q, size=k2, replace=False))
            avgs = cesaro_mixing_diagnostic(perm, e1, e2, n)
            results["cesaro"] = {
                "n": n,
                "e1": [int(x) for x in e1],
                "e2": [int(x) for x in e2],
                "averages": [_frac_str(a) for a in avgs],
                "final_average": _frac_str(avgs[-1]),
                "unsigned_average": _frac_str(
                    cesaro_unsigned_average(perm, e1, e2, n)
                ),
            }
        timing[f"{name}_s"] = time.perf_counter() - t

    from laxgrid import __version__

    report = {
        "schema": "laxgrid-report/1",
        "version": __version__,
        "config": config.to_json_dict(),
        "map": map_.describe(),
        "results": results,
        "artifacts": [],
    }

    if write_files:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        artifacts = ["report.json"]
        if speed_records is not None:
            _write_speed_csv(out / "speed.csv", speed_records)
            artifacts.append("speed.csv")
        if "spectral" in results:
            _write_spectral_csv(out / "spectral.csv", spectral_type(perm))
            artifacts.append("spectral.csv")
        if "entropy" in results:
            _write_entropy_csv(out / "entropy.csv", results["entropy"]["rows"])
            artifacts.append("entropy.csv")
        if config.figures:
            artifacts.extend(_render_figures(out, results))
        report["artifacts"] = sorted(artifacts)
        timing["total_s"] = time.perf_counter() - t0
        report["timing"] = timing
        (out / "report.json").write_bytes(report_bytes(report))
    else:
        timing["total_s"] = time.perf_counter() - t0
        report["timing"] = timing
    return report
