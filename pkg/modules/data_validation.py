"""
Data Validation Module
Row-level integrity checks for patient-level survival files
"""

import pandas as pd
import numpy as np
from typing import Dict, List, Any, Optional
import logging

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

# Header row is line 1, so DataFrame row i sits on line i + 2
FIRST_DATA_LINE = 2


class TrialDataValidator:
    """Checks that a raw time/event/arm table is a valid two-arm survival dataset"""

    REQUIRED_COLUMNS = ["time", "event", "arm"]

    def __init__(self):
        self.validation_results = {}

    def validate_data(self, df: pd.DataFrame) -> Dict[str, Any]:
        """
        Perform all validation checks

        Args:
            df: raw table read with every cell as a string

        Returns:
            Dictionary with 'issues' (blocking, each with an optional line
            number) and 'warnings' (informational)
        """
        results = {
            'total_rows': len(df),
            'total_columns': len(df.columns),
            'issues': [],
            'warnings': [],
            'column_validations': {}
        }

        column_issues = self.check_columns(df)
        if column_issues:
            results['issues'].extend(column_issues)
            self.validation_results = results
            logger.info(f"Validation stopped at header: {len(column_issues)} issues")
            return results

        if len(df) == 0:
            results['issues'].append(self._issue("file has no data rows"))

        blank_lines = [int(i) + FIRST_DATA_LINE for i in np.flatnonzero(self.blank_rows(df))]
        for line in blank_lines:
            results['issues'].append(self._issue("blank line", line))

        for col, check in (('time', self.check_time), ('event', self.check_binary),
                           ('arm', self.check_binary)):
            bad_lines = [line for line in check(df[col]) if line not in blank_lines]
            results['column_validations'][col] = {'invalid_count': len(bad_lines)}
            for line in bad_lines:
                results['issues'].append(
                    self._issue(f"invalid {col} value {df[col].iloc[line - FIRST_DATA_LINE]!r}", line, col)
                )

        if not any(issue['column'] == 'arm' for issue in results['issues']) and len(df) > 0:
            arm_counts = pd.to_numeric(df['arm'].str.strip(), errors='coerce').value_counts()
            for arm in (0, 1):
                if arm_counts.get(arm, 0) == 0:
                    results['issues'].append(self._issue(f"empty arm: no subjects in arm {arm}"))
            results['arm_counts'] = {arm: int(arm_counts.get(arm, 0)) for arm in (0, 1)}

        if not results['issues']:
            results['warnings'].extend(self.check_ties(df))

        results['issues'].sort(key=lambda issue: (issue['line'] is not None, issue['line'] or 0))
        self.validation_results = results
        logger.info(f"Validation complete: {len(results['issues'])} issues, {len(results['warnings'])} warnings")
        return results

    def check_columns(self, df: pd.DataFrame) -> List[Dict[str, Any]]:
        """Header must name exactly the time, event and arm columns"""
        issues = []
        unknown = [col for col in df.columns if col not in self.REQUIRED_COLUMNS]
        missing = [col for col in self.REQUIRED_COLUMNS if col not in df.columns]
        if unknown:
            issues.append(self._issue(f"unknown column(s) {unknown}; expected header time,event,arm", 1))
        if missing:
            issues.append(self._issue(f"missing column(s) {missing}; expected header time,event,arm", 1))
        if not issues and list(df.columns) != self.REQUIRED_COLUMNS:
            issues.append(self._issue(f"columns out of order {list(df.columns)}; expected header time,event,arm", 1))
        return issues

    def blank_rows(self, df: pd.DataFrame) -> np.ndarray:
        """Mask of rows whose cells are all empty or whitespace"""
        if df.empty:
            return np.zeros(len(df), dtype=bool)
        return df.apply(lambda col: col.astype(str).str.strip() == '').all(axis=1).to_numpy()

    def check_time(self, values: pd.Series) -> List[int]:
        """Line numbers whose time is not a finite nonnegative number"""
        numeric = pd.to_numeric(values.str.strip(), errors='coerce')
        bad = numeric.isna() | ~np.isfinite(numeric.fillna(0)) | (numeric < 0)
        return [int(i) + FIRST_DATA_LINE for i in np.flatnonzero(bad.to_numpy())]

    def check_binary(self, values: pd.Series) -> List[int]:
        """Line numbers whose value is not 0 or 1"""
        numeric = pd.to_numeric(values.str.strip(), errors='coerce')
        bad = ~numeric.isin([0, 1])
        return [int(i) + FIRST_DATA_LINE for i in np.flatnonzero(bad.to_numpy())]

    def check_ties(self, df: pd.DataFrame) -> List[str]:
        warnings = []
        time = pd.to_numeric(df['time'].str.strip())
        tied = int(time.duplicated(keep=False).sum())
        if tied:
            warnings.append(f"{tied} records share a follow-up time with another record (ties)")
        zero = int((time == 0).sum())
        if zero:
            warnings.append(f"{zero} records have zero follow-up")
        return warnings

    def _issue(self, message: str, line: Optional[int] = None, column: Optional[str] = None) -> Dict[str, Any]:
        return {'line': line, 'column': column, 'message': message}

    def generate_validation_report(self, validation_results: Dict[str, Any]) -> str:
        """Generate a human-readable validation report"""
        report_lines = [
            "="*60,
            "SURVIVAL DATA VALIDATION REPORT",
            "="*60,
            f"\nDataset Overview:",
            f"  Total Rows: {validation_results['total_rows']}",
            f"  Total Columns: {validation_results['total_columns']}",
        ]
        if 'arm_counts' in validation_results:
            counts = validation_results['arm_counts']
            report_lines.append(f"  Control (arm 0): {counts[0]}  Experimental (arm 1): {counts[1]}")
        report_lines += [
            f"\nIssues Found: {len(validation_results['issues'])}",
            f"Warnings: {len(validation_results['warnings'])}",
        ]

        if validation_results['warnings']:
            report_lines.append("\nWarnings:")
            for warning in validation_results['warnings']:
                report_lines.append(f"  - {warning}")

        if validation_results['issues']:
            report_lines.append("\nIssues:")
            for issue in validation_results['issues']:
                where = f"line {issue['line']}: " if issue['line'] is not None else ""
                report_lines.append(f"  - {where}{issue['message']}")

        report_lines.append("="*60)

        return "\n".join(report_lines)
