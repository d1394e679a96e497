import abc
from pathlib import Path
from typing import Dict, Sequence

from ..analysis import BifurcationBranch
from ..constants import (
    BIFURCATION_CSV_HEADER, BIFURCATION_FILE_NAME, EXIT_POINTS_CSV_HEADER, EXIT_POINTS_FILE_NAME,
    EXIT_TIMES_CSV_HEADER, EXIT_TIMES_FILE_NAME, REPORT_FILE_NAME, SWEEP_CSV_HEADER, SWEEP_FILE_NAME,
    TRAJECTORY_CSV_HEADER, TRAJECTORY_FILE_NAME,
)
from ..econ import SweepRow
from ..sim import TrajectorySamples
from ..slowfast import EntryExitResult
from ..utils import BaseDir, CsvFile, ReportFile


class BaseExport(abc.ABC):
    file_name: str
    header: Sequence[str]

    def __init__(self, directory: BaseDir):
        self.file_handler = CsvFile(directory=directory, file_name=self.file_name, header=self.header)

    @abc.abstractmethod
    def export(self, data) -> Path:
        raise NotImplementedError


class TrajectoryExport(BaseExport):
    """One row per accepted step, then event rows at their located times, flagged in the `event` column."""
    file_name = TRAJECTORY_FILE_NAME
    header = TRAJECTORY_CSV_HEADER

    def export(self, samples: TrajectorySamples) -> Path:
        return self.file_handler.write(
            (row.t, row.s, row.i, row.c, row.h, row.r, row.k, row.event) for row in samples.rows
        )


class SweepExport(BaseExport):
    file_name = SWEEP_FILE_NAME
    header = SWEEP_CSV_HEADER

    def export(self, rows: Sequence[SweepRow]) -> Path:
        return self.file_handler.write((row.theta, row.r0, row.t_f, row.k_tf, row.status) for row in rows)


class ExitPointsExport(BaseExport):
    file_name = EXIT_POINTS_FILE_NAME
    header = EXIT_POINTS_CSV_HEADER

    def export(self, results: Sequence[EntryExitResult]) -> Path:
        return self.file_handler.write(
            (r.s_entry, r.s_exit_predicted, r.s_exit_simulated, r.abs_err_point, r.status) for r in results
        )


class ExitTimesExport(BaseExport):
    file_name = EXIT_TIMES_FILE_NAME
    header = EXIT_TIMES_CSV_HEADER

    def export(self, results: Sequence[EntryExitResult]) -> Path:
        return self.file_handler.write(
            (r.s_entry, r.tau_exit_predicted, r.tau_exit_simulated, r.abs_err_time, r.status) for r in results
        )


class BifurcationExport(BaseExport):
    file_name = BIFURCATION_FILE_NAME
    header = BIFURCATION_CSV_HEADER

    def export(self, branches: Sequence[BifurcationBranch]) -> Path:
        def rows():
            for branch in branches:
                for n in range(len(branch)):
                    yield (
                        branch.branch_id.value, branch.beta_grid[n],
                        branch.s[n], branch.i[n], branch.c[n], branch.h[n],
                        branch.p_i[n], branch.p_c[n], branch.p_h[n],
                        bool(branch.stable[n]),
                    )

        return self.file_handler.write(rows())


class ReportExport:

    def __init__(self, directory: BaseDir):
        self.file_handler = ReportFile(directory=directory, file_name=REPORT_FILE_NAME)

    def export(self, data: Dict[str, object]) -> Path:
        return self.file_handler.write(data)
