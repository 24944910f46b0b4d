from .csv_loader import load_landmark_rows, load_trial_rows, write_landmark_rows, write_trial_rows
from .files import dump_json, read_json, resolve_path, write_json
