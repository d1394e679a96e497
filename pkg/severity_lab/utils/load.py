import abc
from typing import Dict, List, Tuple

import numpy as np

from ..analysis import BifurcationBranch, Branch
from ..constants import (
    BIFURCATION_CSV_HEADER, BIFURCATION_FILE_NAME, EXIT_POINTS_CSV_HEADER, EXIT_POINTS_FILE_NAME,
    EXIT_TIMES_CSV_HEADER, EXIT_TIMES_FILE_NAME, REPORT_FILE_NAME, SWEEP_CSV_HEADER, SWEEP_FILE_NAME,
    TRAJECTORY_CSV_HEADER, TRAJECTORY_FILE_NAME,
)
from ..econ import SweepRow
from ..sim import SampleRow, TrajectorySamples
from ..slowfast import EntryExitResult
from ..utils import BaseDir, CsvFile, ReportFile, parse_bool_cell, parse_optional_float


class BaseLoad(abc.ABC):

    @abc.abstractmethod
    def load(self):
        raise NotImplementedError


class TrajectoryLoad(BaseLoad):

    def __init__(self, directory: BaseDir):
        self.file_handler = CsvFile(directory, TRAJECTORY_FILE_NAME, TRAJECTORY_CSV_HEADER)

    def load(self) -> TrajectorySamples:
        # R is derived from the other compartments and not read back.
        return TrajectorySamples(rows=tuple(
            SampleRow(
                t=float(row["t"]), s=float(row["S"]), i=float(row["I"]), c=float(row["C"]),
                h=float(row["H"]), k=float(row["K"]), event=row["event"],
            )
            for row in self.file_handler.read()
        ))


class SweepLoad(BaseLoad):

    def __init__(self, directory: BaseDir):
        self.file_handler = CsvFile(directory, SWEEP_FILE_NAME, SWEEP_CSV_HEADER)

    def load(self) -> Tuple[SweepRow, ...]:
        return tuple(
            SweepRow(
                theta=float(row["theta"]),
                r0=float(row["r0"]),
                t_f=parse_optional_float(row["t_F"]),
                k_tf=parse_optional_float(row["K_tF"]),
                status=row["status"],
            )
            for row in self.file_handler.read()
        )


class EntryExitLoad(BaseLoad):
    """Joins the exit-point and exit-time files back into one result per entry point."""

    def __init__(self, directory: BaseDir):
        self.points_handler = CsvFile(directory, EXIT_POINTS_FILE_NAME, EXIT_POINTS_CSV_HEADER)
        self.times_handler = CsvFile(directory, EXIT_TIMES_FILE_NAME, EXIT_TIMES_CSV_HEADER)

    def load(self) -> Tuple[EntryExitResult, ...]:
        points, times = self.points_handler.read(), self.times_handler.read()
        if [row["s_entry"] for row in points] != [row["s_entry"] for row in times]:
            raise ValueError("Exit point and exit time files cover different entry grids.")

        return tuple(
            EntryExitResult(
                s_entry=float(point["s_entry"]),
                s_exit_predicted=float(point["s_exit_predicted"]),
                tau_exit_predicted=float(time["tau_exit_predicted"]),
                s_exit_simulated=parse_optional_float(point["s_exit_simulated"]),
                tau_exit_simulated=parse_optional_float(time["tau_exit_simulated"]),
                abs_err_point=parse_optional_float(point["abs_err_point"]),
                abs_err_time=parse_optional_float(time["abs_err_time"]),
                status=point["status"],
            )
            for point, time in zip(points, times)
        )


class BifurcationLoad(BaseLoad):

    def __init__(self, directory: BaseDir):
        self.file_handler = CsvFile(directory, BIFURCATION_FILE_NAME, BIFURCATION_CSV_HEADER)

    def load(self) -> List[BifurcationBranch]:
        grouped = {branch: [] for branch in Branch}
        for row in self.file_handler.read():
            grouped[Branch(row["branch"])].append(row)

        def column(rows, name):
            return np.array([float(row[name]) for row in rows], dtype=float)

        return [
            BifurcationBranch(
                branch_id=branch,
                beta_grid=column(rows, "beta"),
                s=column(rows, "S"), i=column(rows, "I"), c=column(rows, "C"), h=column(rows, "H"),
                stable=np.array([parse_bool_cell(row["stable"]) for row in rows], dtype=bool),
                p_i=column(rows, "p_I"), p_c=column(rows, "p_C"), p_h=column(rows, "p_H"),
            )
            for branch, rows in grouped.items()
        ]


class ReportLoad(BaseLoad):

    def __init__(self, directory: BaseDir):
        self.file_handler = ReportFile(directory, REPORT_FILE_NAME)

    def load(self) -> Dict[str, str]:
        return self.file_handler.read()
