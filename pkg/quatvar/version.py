import importlib.metadata

try:
    __version__ = importlib.metadata.version("quatvar")
except importlib.metadata.PackageNotFoundError:
    # Fallback if running from source without being installed
    __version__ = "0.0.0"


def build_id() -> str:
    """Build identifier embedded in every report."""
    return f"quatvar-{__version__}"
