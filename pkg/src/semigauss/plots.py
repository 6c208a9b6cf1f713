"""Figure rendering for the CLI report path.

Each helper writes one PNG next to the delimited output it illustrates.
Rendering is headless (Agg) and deterministic given the same data.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_trajectory(traj, path):
    d = traj.d
    fig, ax = plt.subplots(1, 2, figsize=(9, 3.6), constrained_layout=True)
    if d == 1:
        ax[0].plot(traj.X[:, 1], traj.X[:, 0], lw=1.0)
        ax[0].set_xlabel("q")
        ax[0].set_ylabel("p")
        ax[0].set_title("phase plane")
        ax[1].plot(traj.times, traj.X[:, 1], lw=1.0)
        ax[1].set_ylabel("q(t)")
    else:
        ax[0].plot(traj.X[:, d], traj.X[:, d + 1], lw=0.8)
        ax[0].set_xlabel("q1")
        ax[0].set_ylabel("q2")
        ax[0].set_title("configuration plane")
        for i in range(d):
            ax[1].plot(traj.times, traj.X[:, d + i], lw=0.8, label=f"q{i + 1}")
        ax[1].legend(frameon=False)
    ax[1].set_xlabel("t")
    ax[1].set_title("position vs time")
    _save(fig, path)


def render_width(widths, path, K=None):
    fig, ax = plt.subplots(figsize=(6.4, 3.6), constrained_layout=True)
    ax.plot(widths.times, widths.sigma, lw=1.2, label="sigma")
    ax.plot(widths.times, widths.dx2, lw=0.8, ls="--", label="dx^2")
    ax.plot(widths.times, widths.dp2, lw=0.8, ls=":", label="dp^2")
    ax.axhline(widths.sigma[0], color="k", lw=0.6, alpha=0.5)
    if K is not None and np.isfinite(K) and K * widths.sigma[0] < 10 * widths.sigma.max():
        ax.axhline(K * widths.sigma[0], color="r", lw=0.8, alpha=0.6,
                   label="one-period bound")
    if widths.sigma.max() / widths.sigma.min() > 1e3:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("width")
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)


def render_floquet(multipliers, path):
    fig, ax = plt.subplots(figsize=(4.2, 4.2), constrained_layout=True)
    th = np.linspace(0, 2 * np.pi, 256)
    ax.plot(np.cos(th), np.sin(th), color="0.7", lw=0.8)
    mult = np.asarray(multipliers, dtype=complex)
    ax.scatter(mult.real, mult.imag, s=40, zorder=3)
    lim = max(1.2, 1.1 * np.max(np.abs(mult)))
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title("Floquet multipliers")
    _save(fig, path)


def render_compare(times, fid, exact_w, sigma, delta, path):
    fig, ax = plt.subplots(1, 3, figsize=(11, 3.4), constrained_layout=True)
    ax[0].plot(times, 1.0 - np.asarray(fid), lw=1.0)
    ax[0].set_yscale("log")
    ax[0].set_xlabel("t")
    ax[0].set_title("1 - fidelity")
    ax[1].plot(times, exact_w, lw=1.2, label="grid solver")
    ax[1].plot(times, sigma, lw=0.9, ls="--", label="semiclassical")
    ax[1].set_xlabel("t")
    ax[1].set_title("total width")
    ax[1].legend(frameon=False, fontsize=8)
    ax[2].plot(times, delta, lw=1.0)
    ax[2].set_xlabel("t")
    ax[2].set_title("width error")
    _save(fig, path)


def render_scaling(hbars, errors, slope, path):
    fig, ax = plt.subplots(figsize=(4.6, 3.6), constrained_layout=True)
    ax.loglog(hbars, errors, "o", ms=6)
    if np.isfinite(slope):
        anchor = errors[0] * (np.asarray(hbars) / hbars[0]) ** slope
        ax.loglog(hbars, anchor, "-", lw=0.9, label=f"slope {slope:.3f}")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel("hbar")
    ax.set_ylabel("norm error")
    _save(fig, path)
