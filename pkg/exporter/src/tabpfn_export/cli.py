"""CLI: export embeddings and baseline probabilities for one dataset."""

from __future__ import annotations

import argparse
import sys

from .backends import ModelUnavailableError, make_backend
from .datasets import DatasetError
from .export import ExportManifest, export_baseline_probs, export_embeddings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tabpfn-export",
        description="export pooled encoder activations and baseline probabilities",
    )
    parser.add_argument("--dataset", required=True,
                        help="breast_cancer | pima | heart_cleveland")
    parser.add_argument("--data", required=True, help="source CSV path")
    parser.add_argument("--seed", type=int, default=42,
                        help="split seed; must match the consumer's split")
    parser.add_argument("--embeddings-out", required=True)
    parser.add_argument("--probs-out", required=True)
    parser.add_argument("--backend", choices=("tabpfn", "stub"),
                        default="tabpfn")
    args = parser.parse_args(argv)

    manifest = ExportManifest(
        dataset=args.dataset,
        data_path=args.data,
        split_seed=args.seed,
        embeddings_out=args.embeddings_out,
        probs_out=args.probs_out,
    )
    try:
        backend = make_backend(args.backend)
        pooled = export_embeddings(manifest, backend)
        probs = export_baseline_probs(manifest, backend)
    except (DatasetError, ModelUnavailableError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {pooled.shape[0]}x{pooled.shape[1]} embeddings to "
        f"{args.embeddings_out} and {len(probs)} probabilities to {args.probs_out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
