"""Make the checkout importable as the ``SurfaceScope`` package."""
import importlib.util
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent

if "SurfaceScope" not in sys.modules:
    spec = importlib.util.spec_from_file_location(
        "SurfaceScope", ROOT / "__init__.py", submodule_search_locations=[str(ROOT)]
    )
    module = importlib.util.module_from_spec(spec)
    sys.modules["SurfaceScope"] = module
    spec.loader.exec_module(module)
