"""Generate a small benchmark and score the bundled mock model against it.

Run with ``python3 demos/mock_evaluation.py [out_dir]``. Replace the mock
transport with a real ModelEndpointConfig to score an actual model.
"""
import sys
import tempfile
from pathlib import Path

from millerlatent.datagen import DatasetConfig, emit_dataset
from millerlatent.harness import ModelEndpointConfig, MockResponder, run_eval, score, write_report

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="millerlatent-"))
records = emit_dataset(DatasetConfig(), out / "dataset", seed=7)
print(f"{len(records)} samples in {out / 'dataset'}")

endpoint = ModelEndpointConfig("http://mock")
for mode in ("echo", "invert", "random-family"):
    results = run_eval(records, endpoint, dataset_dir=out / "dataset",
                       transport=MockResponder(records, mode).transport())
    report = score(results)
    write_report(report, out / mode)
    print(f"{mode:14s} inference acc={report.get('Inference', 'accuracy'):.2f}  "
          f"applicability F1={report.get('Applicability', 'f1'):.2f}  "
          f"consistency acc={report.get('Consistency', 'accuracy'):.2f}")

print(f"reports under {out}")
