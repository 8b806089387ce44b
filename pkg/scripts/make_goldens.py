#!/usr/bin/env python3
"""Regenerate golden files under tests/golden/.

Run only after a deliberate behavior change; the tests compare against these
files byte-for-byte (reports) or to 1e-12 (forward scores).
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from fixtures import forward_fixture  # noqa: E402

from affectlens.models import EmotionModel  # noqa: E402

GOLDEN = ROOT / "tests" / "golden"


def forward_goldens():
    for kind in ("cnn", "lstm"):
        spec, params, xs, lex = forward_fixture(kind)
        scores = EmotionModel(spec, params).scores(xs, lex)
        out = {"spec": spec.to_dict(), "seed": 1234, "scores": [[repr(float(v)) for v in row] for row in scores]}
        (GOLDEN / f"forward_{kind}.json").write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")


def demo_reports():
    with tempfile.TemporaryDirectory() as tmp:
        for cmd in ("train", "predict", "evaluate"):
            subprocess.run(
                ["affectlens", cmd, "--config", str(ROOT / "demo" / "config.json"), "--output-dir", tmp],
                check=True, stdout=subprocess.DEVNULL,
            )
        for name in ("report.csv", "report.txt"):
            shutil.copy(Path(tmp) / name, GOLDEN / f"demo_{name}")


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    forward_goldens()
    demo_reports()
    print(f"golden files written to {GOLDEN}")
