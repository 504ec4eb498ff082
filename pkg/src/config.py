import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict

# Load environment variables
load_dotenv()

# Directories
BASE_DIR = Path(__file__).resolve().parent.parent
CORPUS_DIR = BASE_DIR / "tests" / "corpus"
REPORTS_DIR = BASE_DIR / "reports"

# Source files
SOURCE_EXTENSION = ".auk"
MAP_EXTENSION = ".json"

# Enumeration bounds
LIST_BOUND = int(os.getenv("AUK_LIST_BOUND", "8"))  # longest list enumerated in lazy carriers
ENUMERATION_LIMIT = int(os.getenv("AUK_ENUMERATION_LIMIT", "20000"))  # hom enumeration cutoff
CARRIER_LIMIT = int(os.getenv("AUK_CARRIER_LIMIT", "50000"))  # elements produced per derived carrier
SEARCH_DEPTH = int(os.getenv("AUK_SEARCH_DEPTH", "3"))  # bounded derivation/witness search

# Server
APP_VERSION = "0.1.0"
HOST = os.getenv("AUK_HOST", "0.0.0.0")
PORT = int(os.getenv("AUK_PORT", "8020"))

# Optional YAML overrides
CONFIG_FILE = os.getenv("AUK_CONFIG_FILE")

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")


class Settings(BaseModel):
    """Effective settings snapshot."""
    model_config = ConfigDict(frozen=True)

    list_bound: int = LIST_BOUND
    enumeration_limit: int = ENUMERATION_LIMIT
    carrier_limit: int = CARRIER_LIMIT
    search_depth: int = SEARCH_DEPTH
    log_level: str = LOG_LEVEL


def load_settings(config_file: Optional[str] = None) -> Settings:
    """Environment values, overridden by the keys of a YAML mapping when one is given."""
    path = config_file or CONFIG_FILE
    if not path:
        return Settings()
    with open(path, "r", encoding="utf-8") as f:
        overrides = yaml.safe_load(f) or {}
    if not isinstance(overrides, dict):
        raise ValueError(f"config file {path} must contain a mapping")
    known = {k: v for k, v in overrides.items() if k in Settings.model_fields}
    return Settings(**known)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()
