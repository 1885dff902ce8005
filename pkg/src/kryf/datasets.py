"""Dataset generation and line-delimited persistence.

A dataset file is UTF-8 JSON lines: a header record with generator
metadata (family, split tag, master seed, counts, format version) followed
by one record per sequence carrying the sampled couplings, the per-record
seed, and the coefficients.  Per-record seeds derive from the master seed
through the splitmix hash, so files are byte-identical for a given
configuration regardless of worker count.
"""

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import classical, tfim
from .exceptions import GenerationExhausted, LanczosBreakdown, VersionMismatch
from .seeding import derive_seed
from .validation import check_lanczos_sequence

__all__ = ["Dataset", "generate_dataset", "save_dataset", "load_dataset"]

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
GENERATOR_VERSION = "kryf-0.1.0"
MAX_ATTEMPTS = 100

FAMILIES = ("xyz", "tfim")


@dataclass
class Dataset:
    """In-memory dataset: (N, T) coefficients plus per-record provenance."""

    family: str
    split: str
    T: int
    master_seed: int
    sequences: np.ndarray
    params: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    L: int | None = None  # tfim only
    generator_version: str = GENERATOR_VERSION
    n_resampled: int = 0

    def __len__(self):
        return self.sequences.shape[0]

    def describe(self):
        return {
            "family": self.family,
            "split": self.split,
            "L": self.L,
            "T": self.T,
            "count": len(self),
            "master_seed": self.master_seed,
            "generator_version": self.generator_version,
        }

    def checksum(self):
        digest = hashlib.sha256()
        digest.update(json.dumps(self.describe(), sort_keys=True).encode())
        digest.update(np.ascontiguousarray(self.sequences).tobytes())
        return digest.hexdigest()


def _generate_record(family, index, master_seed, T, L):
    """One sequence; resamples parameters on Lanczos breakdown."""
    for attempt in range(MAX_ATTEMPTS):
        seed = derive_seed(master_seed, index, attempt)
        try:
            if family == "xyz":
                params = classical.sample_xyz(seed)
                b = classical.lanczos_generate_classical(params, T)
            else:
                params = tfim.sample_tfim(seed, L)
                b, _ = tfim.lanczos_generate(params, T)
            return b, asdict(params), seed, attempt
        except LanczosBreakdown as exc:
            logger.info("record %d attempt %d: %s; resampling", index, attempt, exc)
    raise GenerationExhausted(
        f"record {index}: no valid sequence after {MAX_ATTEMPTS} resampling attempts"
    )


def generate_dataset(family, count, T, master_seed, split="train", L=None, workers=1):
    """Generate ``count`` sequences of length T for one model family.

    Per-record seeds derive from (master_seed, record index, attempt), so
    output does not depend on ``workers``.  Breakdown sequences are skipped
    and resampled; the resample count is logged and recorded.
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    if family == "tfim" and not L:
        raise ValueError("tfim generation requires the site count L")
    count, T = int(count), int(T)
    if count < 1 or T < 1:
        raise ValueError("count and T must be >= 1")

    jobs = range(count)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda i: _generate_record(family, i, master_seed, T, L), jobs
                )
            )
    else:
        results = [_generate_record(family, i, master_seed, T, L) for i in jobs]

    sequences = np.stack([r[0] for r in results])
    n_resampled = sum(r[3] for r in results)
    if n_resampled:
        logger.info("resampled %d record(s) in total", n_resampled)
    return Dataset(
        family=family,
        split=split,
        T=T,
        master_seed=int(master_seed),
        sequences=sequences,
        params=[r[1] for r in results],
        seeds=[r[2] for r in results],
        L=int(L) if L else None,
        n_resampled=n_resampled,
    )


def save_dataset(dataset, path):
    """Write the header + one JSON record per sequence."""
    header = {
        "kind": "kryf-dataset",
        "format_version": FORMAT_VERSION,
        **dataset.describe(),
        "n_resampled": dataset.n_resampled,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for i in range(len(dataset)):
            record = {
                "family": dataset.family,
                "params": dataset.params[i] if dataset.params else None,
                "seed": dataset.seeds[i] if dataset.seeds else None,
                "T": dataset.T,
                "b": [float(v) for v in dataset.sequences[i]],
            }
            if dataset.family == "tfim":
                record["L"] = dataset.L
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def load_dataset(path):
    """Read and validate a dataset file (every b must be a valid sequence)."""
    with open(path) as fh:
        lines = [line for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty dataset file")
    header = json.loads(lines[0])
    if header.get("kind") != "kryf-dataset":
        raise VersionMismatch(f"{path}: not a kryf dataset file")
    if header.get("format_version", 0) > FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: format version {header['format_version']} is newer than "
            f"supported version {FORMAT_VERSION}"
        )
    records = [json.loads(line) for line in lines[1:]]
    if len(records) != header["count"]:
        raise ValueError(
            f"{path}: header promises {header['count']} records, found {len(records)}"
        )
    sequences = np.stack(
        [check_lanczos_sequence(r["b"], f"record {i}") for i, r in enumerate(records)]
    )
    return Dataset(
        family=header["family"],
        split=header["split"],
        T=header["T"],
        master_seed=header["master_seed"],
        sequences=sequences,
        params=[r.get("params") for r in records],
        seeds=[r.get("seed") for r in records],
        L=header.get("L"),
        generator_version=header.get("generator_version", "unknown"),
        n_resampled=header.get("n_resampled", 0),
    )
