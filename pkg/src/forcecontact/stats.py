"""Corpus statistics over per-frame contact records and pseudolabel ledgers."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputIOError, SchemaError
from .labeling import ContactState, contact_fraction
from .session import HANDS
from .io import tables
from .io.manifest import MANIFEST_NAME, SessionManifest

NA = "NA"


@dataclass
class StatRow:
    session_id: str
    hand: str
    total: int
    contact: int
    no_contact: int
    ambiguous: int
    excluded: int
    pseudolabeled: int

    def __post_init__(self):
        parts = self.contact + self.no_contact + self.ambiguous + self.excluded
        if parts != self.total:
            raise SchemaError(
                f"{self.session_id}/{self.hand}: state counts {parts} "
                f"do not partition {self.total} frames"
            )

    @property
    def fraction(self) -> float | None:
        if self.contact + self.no_contact == 0:
            return None
        return self.contact / (self.contact + self.no_contact)


def session_stats(manifest: SessionManifest) -> list[StatRow]:
    rows = []
    for hand in HANDS:
        frames_file = manifest.derived(f"frames_{hand}.csv")
        if not frames_file.is_file():
            continue
        _, df = tables.read_frames(frames_file)
        states = df["state"].to_numpy()
        pseudolabeled = 0
        ledger_file = manifest.derived(f"pseudolabel_{hand}.csv")
        if ledger_file.is_file():
            _, ldf = tables.read_ledger(ledger_file)
            pseudolabeled = int((ldf["mask_id"] != tables.NONE_TOKEN).sum())
        rows.append(
            StatRow(
                session_id=manifest.session_id,
                hand=hand,
                total=int(states.size),
                contact=int(np.count_nonzero(states == ContactState.CONTACT)),
                no_contact=int(np.count_nonzero(states == ContactState.NO_CONTACT)),
                ambiguous=int(np.count_nonzero(states == ContactState.AMBIGUOUS)),
                excluded=int(np.count_nonzero(states == ContactState.EXCLUDED)),
                pseudolabeled=pseudolabeled,
            )
        )
    return rows


def discover_sessions(corpus: Path) -> list[SessionManifest]:
    """A corpus path is a session directory, a manifest file, or a directory
    of session directories."""
    corpus = Path(corpus)
    if corpus.is_file():
        return [SessionManifest.load(corpus)]
    if (corpus / MANIFEST_NAME).is_file():
        return [SessionManifest.load(corpus)]
    if not corpus.is_dir():
        raise InputIOError(f"missing corpus path: {corpus}")
    manifests = []
    for child in sorted(corpus.iterdir()):
        if child.is_dir() and (child / MANIFEST_NAME).is_file():
            manifests.append(SessionManifest.load(child))
    if not manifests:
        raise InputIOError(f"no session manifests found under {corpus}")
    return manifests


def corpus_stats(corpus_paths: list[Path]) -> list[StatRow]:
    rows = []
    for corpus in corpus_paths:
        for manifest in discover_sessions(Path(corpus)):
            rows.extend(session_stats(manifest))
    if not rows:
        raise InputIOError("no per-frame contact records found; run frames first")
    return rows


def totals(rows: list[StatRow]) -> dict[str, StatRow]:
    """Aggregate per hand plus an 'all' row (session_id 'TOTAL')."""
    out = {}
    for key in [*HANDS, "all"]:
        sel = [r for r in rows if key == "all" or r.hand == key]
        if not sel:
            continue
        out[key] = StatRow(
            session_id="TOTAL",
            hand=key,
            total=sum(r.total for r in sel),
            contact=sum(r.contact for r in sel),
            no_contact=sum(r.no_contact for r in sel),
            ambiguous=sum(r.ambiguous for r in sel),
            excluded=sum(r.excluded for r in sel),
            pseudolabeled=sum(r.pseudolabeled for r in sel),
        )
    return out


STATS_COLUMNS = [
    "session",
    "hand",
    "total",
    "contact",
    "no_contact",
    "ambiguous",
    "excluded",
    "pseudolabeled",
    "contact_fraction",
]


def _fraction_text(row: StatRow) -> str:
    f = row.fraction
    return NA if f is None else repr(f)


def write_stats(out_dir: Path, rows: list[StatRow], fingerprint: str) -> tuple[Path, Path]:
    """Machine-readable CSV plus an aligned human-readable table."""
    out_dir = Path(out_dir)
    agg = totals(rows)
    all_rows = rows + list(agg.values())
    cols = [
        [r.session_id for r in all_rows],
        [r.hand for r in all_rows],
        [str(r.total) for r in all_rows],
        [str(r.contact) for r in all_rows],
        [str(r.no_contact) for r in all_rows],
        [str(r.ambiguous) for r in all_rows],
        [str(r.excluded) for r in all_rows],
        [str(r.pseudolabeled) for r in all_rows],
        [_fraction_text(r) for r in all_rows],
    ]
    csv_path = out_dir / "stats.csv"
    tables.write_table(csv_path, {"config_fingerprint": fingerprint}, STATS_COLUMNS, cols)

    widths = [max(len(c), max((len(v) for v in col), default=0)) for c, col in zip(STATS_COLUMNS, cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(STATS_COLUMNS, widths))]
    for i in range(len(all_rows)):
        lines.append("  ".join(col[i].ljust(w) for col, w in zip(cols, widths)))
    text = "\n".join(lines) + "\n"
    txt_path = out_dir / "stats.txt"
    from .io.kv import atomic_write_text

    atomic_write_text(txt_path, text)
    return csv_path, txt_path
