"""
Data Ingestion Module
Loads and writes patient-level survival files (header time,event,arm)
"""

import re
import io
import os
import logging
from typing import Any, Dict, Optional, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from modules.data_validation import TrialDataValidator
from modules.exceptions import DataFormatError, EmptyArmError
from modules.survival_core import ARMS, TrialDataset

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

CANONICAL_COLUMNS = ["time", "event", "arm"]

_PARSER_LINE = re.compile(r"line (\d+)")


class DataIngestion:
    """Reads survival CSV files into TrialDataset objects"""

    def __init__(self):
        self.supported_formats = ['.csv']
        self.validator = TrialDataValidator()

    def auto_detect_format(self, file_path: str) -> str:
        """
        Check the file extension

        Args:
            file_path: Path to the data file

        Returns:
            str: Detected file format
        """
        _, ext = os.path.splitext(str(file_path))
        ext = ext.lower()

        if ext not in self.supported_formats:
            raise DataFormatError(f"unsupported file format {ext!r}; supported formats: {self.supported_formats}")

        logger.info(f"Detected file format: {ext}")
        return ext

    def read_raw(self, source: Union[str, os.PathLike, TextIO]) -> pd.DataFrame:
        """
        Read the file with every cell kept as text, so validation sees what was written

        Blank lines are kept as empty rows so row i stays on physical line i + 2;
        only blank lines after the last record are dropped.
        """
        try:
            df = pd.read_csv(source, dtype=str, keep_default_na=False, skipinitialspace=True,
                             skip_blank_lines=False).fillna('')
            filled = np.flatnonzero(~self.validator.blank_rows(df))
            return df.iloc[:filled[-1] + 1 if filled.size else 0]
        except pd.errors.EmptyDataError:
            raise DataFormatError("file is empty; expected header time,event,arm", 1) from None
        except pd.errors.ParserError as e:
            match = _PARSER_LINE.search(str(e))
            raise DataFormatError(f"malformed CSV: {e}", int(match.group(1)) if match else None) from None

    def ingest_data(self, source: Union[str, os.PathLike, TextIO]) -> Tuple[TrialDataset, Dict[str, Any]]:
        """
        Load a survival file into a dataset and return it with metadata

        Args:
            source: path to a .csv file, or an open text stream

        Returns:
            Tuple of (TrialDataset, metadata dictionary)

        Raises:
            DataFormatError: on the first invalid line, a bad header or an empty arm
        """
        is_path = isinstance(source, (str, os.PathLike))
        if is_path:
            self.auto_detect_format(source)
        metadata = {
            'file_path': str(source) if is_path else '<stream>',
            'format': '.csv',
            'success': False
        }

        df = self.read_raw(source)
        results = self.validator.validate_data(df)
        metadata['warnings'] = results['warnings']
        if results['issues']:
            first = results['issues'][0]
            metadata['error'] = first['message']
            logger.error(f"Rejected {metadata['file_path']}: {len(results['issues'])} issue(s)")
            if first['message'].startswith("empty arm"):
                raise EmptyArmError(first['message'])
            raise DataFormatError(first['message'], first['line'])

        frame = pd.DataFrame({
            'time': pd.to_numeric(df['time'].str.strip()).astype(float),
            'event': pd.to_numeric(df['event'].str.strip()).astype(int),
            'arm': pd.to_numeric(df['arm'].str.strip()).astype(int),
        })
        if not frame['time'].max() > 0:
            raise DataFormatError("all follow-up times are zero")
        dataset = TrialDataset.from_frame(frame)

        metadata['success'] = True
        metadata['rows'] = len(dataset)
        metadata['events'] = dataset.event_count()
        metadata['arm_counts'] = dataset.arm_counts()
        metadata['max_time'] = dataset.cutoff

        for warning in results['warnings']:
            logger.warning(warning)
        logger.info(f"Successfully ingested {len(dataset)} patients, {dataset.event_count()} events "
                    f"(arm 0: {metadata['arm_counts'][0]}, arm 1: {metadata['arm_counts'][1]})")
        return dataset, metadata

    def describe(self, dataset: TrialDataset) -> pd.DataFrame:
        """
        Per-arm summary table

        Returns:
            DataFrame with one row per arm: patients, events, censored,
            event percentage, median and maximum follow-up
        """
        rows = []
        for arm in ARMS:
            data = dataset.arm_data(arm)
            n = int(data.time.size)
            events = int(np.count_nonzero(data.event))
            rows.append({
                'arm': arm,
                'patients': n,
                'events': events,
                'censored': n - events,
                'event_pct': 100.0 * events / n if n else float('nan'),
                'median_followup': float(np.median(data.time)) if n else float('nan'),
                'max_followup': float(data.time.max()) if n else float('nan'),
            })
        return pd.DataFrame(rows)


def load_csv(source: Union[str, os.PathLike, TextIO]) -> TrialDataset:
    """
    Load a time,event,arm file

    The cutoff of the returned dataset is the largest follow-up time.
    """
    dataset, _ = DataIngestion().ingest_data(source)
    return dataset


def dataset_to_csv(dataset: TrialDataset) -> str:
    """Canonical text form: header time,event,arm, shortest round-trip floats, '\\n' line endings"""
    buffer = io.StringIO()
    dataset.to_frame()[CANONICAL_COLUMNS].to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def write_csv(dataset: TrialDataset, path: Optional[Union[str, os.PathLike]] = None) -> str:
    """
    Write a dataset in canonical form

    Args:
        dataset: records to write
        path: destination file; nothing is written when None

    Returns:
        The CSV text
    """
    text = dataset_to_csv(dataset)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info(f"Wrote {len(dataset)} records to {path}")
    return text
