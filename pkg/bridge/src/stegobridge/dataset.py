"""Self-supervised dataset regeneration at toy scale.

Given a parallel corpus (tab-separated ``english<TAB>german`` lines), a
second-round corpus is produced by keeping every English side unchanged
and replacing the German side with the forward model's own output. Lines
the model fails on are skipped and recorded in a skip manifest so the
caller can audit coverage.
"""

import logging
from pathlib import Path

from .models import TranslationError

log = logging.getLogger("stegobridge.dataset")


def regenerate_dataset(in_path, out_path, en2ge) -> list[tuple[int, str]]:
    """Write the regenerated corpus; return [(line_no, reason)] skips."""
    skips: list[tuple[int, str]] = []
    out_lines: list[str] = []
    for lineno, line in enumerate(
        Path(in_path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        english, sep, _german = line.partition("\t")
        if not sep:
            skips.append((lineno, "no tab separator"))
            log.warning("line %d skipped: no tab separator", lineno)
            continue
        try:
            regenerated = en2ge.translate(english)
        except TranslationError as exc:
            skips.append((lineno, str(exc)))
            log.warning("line %d skipped: %s", lineno, exc)
            continue
        out_lines.append(f"{english}\t{regenerated}")
    Path(out_path).write_text(
        "".join(l + "\n" for l in out_lines), encoding="utf-8"
    )
    manifest = Path(str(out_path) + ".skips")
    manifest.write_text(
        "".join(f"{n}\t{reason}\n" for n, reason in skips), encoding="utf-8"
    )
    return skips
