import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .errors import ScenarioError


DEFAULT_CACHE_DIR = "~/.cache/alemass"
DEFAULT_OUTPUT_DIR = "alemass-out"
DEFAULT_QUADRATURE_N = 24

CONFIG_FILENAME = ".alemass.yaml"


def _read_yaml(path: Path) -> Dict:
    if not path.exists():
        return {}
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ScenarioError(f"{path} must contain a mapping at top level")
    return data


def _env_int(name: str) -> Optional[int]:
    val = os.getenv(name)
    if val is None or not val.strip():
        return None
    try:
        return int(val)
    except ValueError:
        raise ScenarioError(f"environment variable {name}={val!r} is not an integer") from None


def merge(a: Dict, b: Dict) -> Dict:
    out = dict(a)
    for k, v in b.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)  # type: ignore
        else:
            out[k] = v
    return out


def load_config(cli_args: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Load configuration with precedence: CLI > env > YAML > defaults.

    Recognized keys: cache_dir, output_dir, quadrature_n, jobs, progress
    """
    cli_args = {k: v for k, v in (cli_args or {}).items() if v is not None}

    # Home first so the working-directory file wins
    yaml_conf: Dict = {}
    for p in (Path.home() / CONFIG_FILENAME, Path.cwd() / CONFIG_FILENAME):
        yaml_conf = merge(yaml_conf, _read_yaml(p))

    env_conf: Dict = {}
    if os.getenv("ALEMASS_CACHE_DIR"):
        env_conf["cache_dir"] = os.getenv("ALEMASS_CACHE_DIR")
    if os.getenv("ALEMASS_OUTPUT_DIR"):
        env_conf["output_dir"] = os.getenv("ALEMASS_OUTPUT_DIR")
    n = _env_int("ALEMASS_QUADRATURE_N")
    if n is not None:
        env_conf["quadrature_n"] = n
    jobs = _env_int("ALEMASS_JOBS")
    if jobs is not None:
        env_conf["jobs"] = jobs

    defaults = {
        "cache_dir": DEFAULT_CACHE_DIR,
        "output_dir": DEFAULT_OUTPUT_DIR,
        "quadrature_n": DEFAULT_QUADRATURE_N,
        "jobs": 1,
        "progress": True,
    }

    conf = merge(defaults, yaml_conf)
    conf = merge(conf, env_conf)
    conf = merge(conf, cli_args)
    conf["cache_dir"] = str(Path(os.path.expanduser(str(conf["cache_dir"]))))
    return conf
