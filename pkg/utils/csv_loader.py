import csv
from typing import List, Dict, Any, Iterable

LANDMARK_HEADER = ["frame", "u", "v", "confidence"]
TRIALS_HEADER = ["trial", "seed", "S_i", "n_i", "replans", "failure_modes"]


# ---------------------------------------------------------------------
# Landmarks
# ---------------------------------------------------------------------
def load_landmark_rows(file_name: str) -> List[Dict[str, Any]]:
    """
    Load wrist landmarks from CSV.

    Returns:
        List of dicts with keys: frame, u, v, confidence
    """
    rows = []

    with open(file_name, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = set(LANDMARK_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{file_name}: missing columns {sorted(missing)}")
        for line, row in enumerate(reader, start=2):
            try:
                rows.append({
                    "frame": int(row["frame"]),
                    "u": float(row["u"]),
                    "v": float(row["v"]),
                    "confidence": float(row["confidence"]),
                })
            except (TypeError, ValueError) as e:
                raise ValueError(f"{file_name}:{line}: {e}") from e
    return rows


def write_landmark_rows(file_name: str, rows: Iterable[Dict[str, Any]]) -> None:
    with open(file_name, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=LANDMARK_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in LANDMARK_HEADER})


# ---------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------
def load_trial_rows(file_name: str) -> List[Dict[str, Any]]:
    """
    Load per-trial rows from trials.csv.

    Returns:
        List of dicts with keys: trial, seed, S_i, n_i, replans, failure_modes (list)
    """
    rows = []

    with open(file_name, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = set(TRIALS_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{file_name}: missing columns {sorted(missing)}")
        for line, row in enumerate(reader, start=2):
            try:
                modes = row.get("failure_modes") or ""
                rows.append({
                    "trial": int(row["trial"]),
                    "seed": int(row["seed"]),
                    "S_i": int(row["S_i"]),
                    "n_i": int(row["n_i"]),
                    "replans": int(row["replans"]),
                    "failure_modes": [m for m in modes.split(";") if m],
                })
            except (TypeError, ValueError) as e:
                raise ValueError(f"{file_name}:{line}: {e}") from e
    return rows


def write_trial_rows(file_name: str, rows: Iterable[Dict[str, Any]]) -> None:
    with open(file_name, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=TRIALS_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({
                "trial": row["trial"],
                "seed": row["seed"],
                "S_i": row["S_i"],
                "n_i": row["n_i"],
                "replans": row["replans"],
                "failure_modes": ";".join(row["failure_modes"]),
            })
