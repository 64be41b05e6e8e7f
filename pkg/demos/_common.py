from pathlib import Path

from qoct.config import load_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def config(name):
    return load_config(CONFIGS / name)
