"""
Shared Tools Module
Output formats and argument parsers used by the CLI and the lab facade
"""
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from dotenv import dotenv_values

logger = logging.getLogger(__name__)


class FormatError(ValueError):
    """Malformed grid, range, assignment list or config file"""


# ============================================================================
# CSV TOOLS
# ============================================================================

class CsvTools:
    """Comma-separated output with a header row and 17 significant digits"""

    FLOAT_FORMAT = "%.17g"

    @staticmethod
    def to_csv(frame: pd.DataFrame) -> str:
        """
        Render a DataFrame as CSV text

        Args:
            frame: Rows to emit, columns in output order

        Returns:
            CSV text with LF line endings; missing values are blank
        """
        return frame.to_csv(index=False, float_format=CsvTools.FLOAT_FORMAT, na_rep="", lineterminator="\n")

    @staticmethod
    def read_csv(source: str) -> pd.DataFrame:
        """Parse CSV text or a file path written by to_csv"""
        if "\n" in source:
            return pd.read_csv(io.StringIO(source), float_precision="round_trip")
        return pd.read_csv(source, float_precision="round_trip")


# ============================================================================
# JSON TOOLS
# ============================================================================

class JsonTools:
    """UTF-8 JSON in insertion order; NaN and infinities become null"""

    @staticmethod
    def clean(data: Any) -> Any:
        """Convert numpy scalars/arrays to Python values and non-finite floats to None"""
        if isinstance(data, dict):
            return {str(k): JsonTools.clean(v) for k, v in data.items()}
        if isinstance(data, (list, tuple)):
            return [JsonTools.clean(v) for v in data]
        if isinstance(data, np.ndarray):
            return JsonTools.clean(data.tolist())
        if isinstance(data, (bool, np.bool_)):
            return bool(data)
        if isinstance(data, (int, np.integer)):
            return int(data)
        if isinstance(data, (float, np.floating)):
            value = float(data)
            return value if math.isfinite(value) else None
        if data is None or isinstance(data, str):
            return data
        return str(data)

    @staticmethod
    def dumps(data: Any, indent: int = 2) -> str:
        """
        Format data as JSON

        Args:
            data: Data to format
            indent: Indentation spaces

        Returns:
            JSON text terminated by a newline
        """
        return json.dumps(JsonTools.clean(data), indent=indent, ensure_ascii=False, allow_nan=False) + "\n"

    @staticmethod
    def records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
        """DataFrame rows as dicts, blanks as None"""
        rows = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
        return [JsonTools.clean(r) for r in rows]


# ============================================================================
# CONFIG FILE TOOLS
# ============================================================================

class ConfigFileTools:
    """Flat `key = value` files; `#` starts a comment"""

    @staticmethod
    def parse(text: str) -> Dict[str, str]:
        values = dotenv_values(stream=io.StringIO(text))
        missing = [k for k, v in values.items() if v is None]
        if missing:
            raise FormatError(f"config entries without a value: {', '.join(missing)}")
        return {k.strip().replace("-", "_"): v.strip() for k, v in values.items()}

    @staticmethod
    def read(filepath: str) -> Dict[str, str]:
        """
        Read a config file

        Args:
            filepath: Path to the file

        Returns:
            Mapping of keys (dashes normalized to underscores) to raw string values
        """
        path = Path(filepath)
        if not path.is_file():
            raise FormatError(f"config file not found: {filepath}")
        return ConfigFileTools.parse(path.read_text(encoding="utf-8"))


# ============================================================================
# SPEC TOOLS
# ============================================================================

class SpecTools:
    """Parsers for the compact argument syntaxes of the CLI"""

    @staticmethod
    def parse_float(text: str) -> float:
        try:
            return float(text.strip())
        except ValueError:
            raise FormatError(f"not a number: '{text}'") from None

    @staticmethod
    def parse_floats(text: str, count: Optional[int] = None) -> List[float]:
        """Comma-separated numbers, e.g. a matrix `1,3,0,1`"""
        values = [SpecTools.parse_float(v) for v in text.split(",") if v.strip()]
        if count is not None and len(values) != count:
            raise FormatError(f"expected {count} comma-separated numbers, got {len(values)} in '{text}'")
        return values

    @staticmethod
    def parse_range(text: str) -> Tuple[float, float]:
        """`lo:hi`"""
        parts = text.split(":")
        if len(parts) != 2:
            raise FormatError(f"expected lo:hi, got '{text}'")
        return SpecTools.parse_float(parts[0]), SpecTools.parse_float(parts[1])

    @staticmethod
    def parse_grid(text: str, axes: int = 2) -> List[Tuple[float, float, int]]:
        """
        Parse a grid spec such as `0:3:20,-3.14:3.14:20`

        Args:
            text: One `lo:hi:n` block per axis, comma-separated
            axes: Required number of axes

        Returns:
            List of (lo, hi, n) per axis
        """
        blocks = [b for b in text.split(",") if b.strip()]
        if len(blocks) != axes:
            raise FormatError(f"expected {axes} grid axes, got {len(blocks)} in '{text}'")
        grid = []
        for block in blocks:
            parts = block.split(":")
            if len(parts) != 3:
                raise FormatError(f"grid axis must be lo:hi:n, got '{block}'")
            lo, hi = SpecTools.parse_float(parts[0]), SpecTools.parse_float(parts[1])
            try:
                n = int(parts[2])
            except ValueError:
                raise FormatError(f"grid size must be an integer, got '{parts[2]}'") from None
            if n < 1 or not lo <= hi:
                raise FormatError(f"grid axis needs lo <= hi and n >= 1, got '{block}'")
            grid.append((lo, hi, n))
        return grid

    @staticmethod
    def parse_assignments(text: str) -> Dict[str, float]:
        """`x=0,y=1,phi=0` into a dict of floats"""
        values: Dict[str, float] = {}
        for item in (i for i in text.split(",") if i.strip()):
            key, sep, value = item.partition("=")
            if not sep or not key.strip():
                raise FormatError(f"expected name=value, got '{item}'")
            values[key.strip()] = SpecTools.parse_float(value)
        return values

    @staticmethod
    def axis(lo: float, hi: float, n: int) -> np.ndarray:
        return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


# ============================================================================
# EXPORT ALL TOOLS
# ============================================================================

TOOL_REGISTRY = {
    "csv": CsvTools,
    "json": JsonTools,
    "config": ConfigFileTools,
    "spec": SpecTools,
}


def get_tool(category: str):
    """Get tool class by category"""
    return TOOL_REGISTRY.get(category)


def list_tools() -> Dict[str, List[str]]:
    """List all available tools"""
    return {
        category: [
            method for method in dir(tool_class)
            if not method.startswith('_') and callable(getattr(tool_class, method))
        ]
        for category, tool_class in TOOL_REGISTRY.items()
    }
