"""Matplotlib renderings of evaluation reports.

Figures are written next to the delimited report files. PNG metadata is
stripped so repeated runs with identical inputs produce byte-identical
images.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalReport

_SAVE_KWARGS = {"dpi": 130, "metadata": {"Software": None}}

_LANGUAGE_COLORS = {"en": "#4878cf", "ch": "#d65f5f", "ar": "#6acc65"}


def render_ap_figure(report: EvalReport, path) -> None:
    """Bar chart of per-question AP with the MAP drawn as a reference line."""
    question_ids = sorted(report.per_question)
    values = [report.per_question[qid] for qid in question_ids]
    width = max(6.0, 0.28 * len(question_ids))
    fig, ax = plt.subplots(figsize=(width, 3.6))
    ax.bar(range(len(values)), values, color="#4878cf")
    ax.axhline(report.map_score, color="#d65f5f", linewidth=1.2,
               label=f"MAP = {report.map_score:.3f}")
    ax.set_xticks(range(len(question_ids)))
    ax.set_xticklabels(question_ids, rotation=90, fontsize=7)
    ax.set_ylabel(f"AP-{report.k}")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def render_language_figure(ratio: tuple[float, float, float], path) -> None:
    """Language share (en, ch, ar) of the final answer lists, in percent."""
    labels = ("en", "ch", "ar")
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.bar(labels, ratio, color=[_LANGUAGE_COLORS[l] for l in labels])
    for i, value in enumerate(ratio):
        ax.text(i, value + 1.0, f"{value:.1f}%", ha="center", fontsize=9)
    ax.set_ylabel("share of returned answers (%)")
    ax.set_ylim(0.0, 105.0)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def render_weight_sweep_figure(weights, english_shares, path) -> None:
    """English share of the merged list as the English weight grows."""
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot(weights, english_shares, marker="o", color="#4878cf")
    ax.set_xlabel("English score weight")
    ax.set_ylabel("English share (%)")
    ax.set_ylim(0.0, 105.0)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
