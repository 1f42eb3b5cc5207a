"""CSV and manifest serialization for run directories.

Layout of a run directory:
    series.csv           diagnostics rows (fixed column order)
    snapshots/t=<T>.csv  per-slice fields (theta, omega, rho, u)
    trajectory.csv       oracle sample paths (t, sample_id, eta, v, d, log_rho)
    sweep.csv            (branch, K, r_inf, blowup_flag)
    manifest.json        resolved config + code version + wall time

All numeric output is written at 17 significant digits.
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from .diagnostics import SERIES_COLUMNS, TimeSeries

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % float(x)


def write_series_csv(path, series):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_COLUMNS)
        for row in series.data:
            writer.writerow([_fmt(x) for x in row])


def read_series_csv(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    cols = [np.atleast_1d(data[name]) for name in SERIES_COLUMNS]
    return TimeSeries(np.column_stack(cols))


def snapshot_filename(t):
    return "t=%s.csv" % ("%g" % float(t))


def parse_snapshot_time(filename):
    base = os.path.basename(filename)
    if not (base.startswith("t=") and base.endswith(".csv")):
        raise ValueError(f"not a snapshot filename: {filename}")
    return float(base[2:-4])


def list_snapshots(run_dir):
    """Map snapshot time -> path for every snapshots/t=*.csv in a run dir."""
    snap_dir = os.path.join(run_dir, "snapshots")
    out = {}
    if os.path.isdir(snap_dir):
        for name in sorted(os.listdir(snap_dir)):
            if name.startswith("t=") and name.endswith(".csv"):
                out[parse_snapshot_time(name)] = os.path.join(snap_dir, name)
    return out


def write_snapshot_csv(path, theta, omega_values, rho, u):
    """Write per-slice fields; rho/u have shape (n_omega, n_theta)."""
    rho = np.atleast_2d(rho)
    u = np.atleast_2d(u)
    omega_values = np.atleast_1d(omega_values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "omega", "rho", "u"])
        for k, om in enumerate(omega_values):
            for j, th in enumerate(theta):
                writer.writerow([_fmt(th), _fmt(om), _fmt(rho[k, j]), _fmt(u[k, j])])


def read_snapshot_csv(path):
    """Read a snapshot back as (theta, omega_values, rho, u) arrays."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    theta_flat = np.atleast_1d(data["theta"])
    omega_flat = np.atleast_1d(data["omega"])
    omega_values, inverse = np.unique(omega_flat, return_inverse=True)
    n_omega = omega_values.size
    n_theta = theta_flat.size // n_omega
    if n_omega * n_theta != theta_flat.size:
        raise ValueError(f"{path}: ragged snapshot table")
    order = np.lexsort((theta_flat, inverse))
    theta = theta_flat[order][:n_theta]
    rho = np.atleast_1d(data["rho"])[order].reshape(n_omega, n_theta)
    u = np.atleast_1d(data["u"])[order].reshape(n_omega, n_theta)
    return theta, omega_values, rho, u


def write_trajectory_csv(path, times, trajectory):
    """Dump oracle sample paths; trajectory holds (n_rec, n_samples) arrays."""
    eta = trajectory["eta"]
    n_rec, n_samples = eta.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "sample_id", "eta", "v", "d", "log_rho"])
        for i in range(n_rec):
            t_s = _fmt(times[i])
            for s in range(n_samples):
                writer.writerow(
                    [
                        t_s,
                        s,
                        _fmt(eta[i, s]),
                        _fmt(trajectory["v"][i, s]),
                        _fmt(trajectory["d"][i, s]),
                        _fmt(trajectory["log_rho"][i, s]),
                    ]
                )


def write_sweep_csv(path, result):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["branch", "K", "r_inf", "blowup_flag"])
        for branch, points in (("forward", result.forward), ("backward", result.backward)):
            for K, r_inf, flag in points:
                writer.writerow([branch, _fmt(K), _fmt(r_inf), int(flag)])


def read_sweep_csv(path):
    forward, backward = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            point = (float(row["K"]), float(row["r_inf"]), bool(int(row["blowup_flag"])))
            (forward if row["branch"] == "forward" else backward).append(point)
    return forward, backward


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def write_manifest(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_manifest(path):
    with open(path) as fh:
        return json.load(fh)
