import os
import pathlib
import sys
from typing import Optional, Union

import pandas as pd

# 17 significant digits round-trip every float64
FLOAT_FORMAT = "%.17g"


class BaseWriter:
    """Writes results to a file, or to standard output when `path` is None."""
    def __init__(self, path: Optional[Union[str, os.PathLike]] = None, create_dirs=True):
        self.path = None if path is None else pathlib.Path(path).as_posix()
        self.create_dirs = create_dirs
        if self.path is not None and create_dirs:
            out_dir = os.path.dirname(self.path)
            if out_dir and not os.path.exists(out_dir):
                os.makedirs(out_dir, exist_ok=True)

    def put(self, *args, **kwargs):
        raise NotImplementedError

    def _write_text(self, text: str):
        if self.path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with open(self.path, "w", encoding="utf-8", newline="") as f:
                f.write(text)


class CSVWriter(BaseWriter):
    """Writes a DataFrame as CSV with full double precision.

    Missing values are written as empty fields and lines end with a bare
    newline on every platform, so identical frames give identical bytes.
    """
    def put(self, frame: pd.DataFrame):
        text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
        self._write_text(text)


class TextWriter(BaseWriter):
    def put(self, text: str):
        self._write_text(text)
