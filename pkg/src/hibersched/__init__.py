"""Deadline-aware bag-of-tasks scheduling on spot and on-demand cloud VMs.

Primary tasks go to the cheapest fast instances (spot where possible); every
task on a spot instance also gets an on-demand backup plan with a latest
launch period, so a hibernated spot VM never causes a deadline miss.
"""

__version__ = "0.1.0"

from .backup import (BackupMap, RecoveryGroup, compute_stbkp, get_best_vm, parallel_set,
                     rec_group, runtime, schedule_backup, succ_set)
from .catalog import BillingConfig, Catalog, VmType, default_catalog, load_catalog, number_of_slots
from .errors import (HiberschedError, Infeasible, InfeasibleBackup, NoFeasibleVm, ParseError,
                     ScenarioError, StatsError, ValidationError)
from .experiment import find_min_deadline, plan, run_matrix
from .model import Market, Placement, Role, VmInstance
from .price_trace import derive_hibernation_events, load_price_history
from .primary import PrimaryMap, best_vm, check_insertion, schedule_primary, waste
from .scenarios import REFERENCE_JOBS, JobStats, build_scenario_suite, synthesize_job
from .simulator import HibernationEvent, Policy, SimulationReport, bill, simulate
from .workload import Job, TaskSpec, effective_duration, load_job

__all__ = [name for name in dir() if not name.startswith("_")]
