import warnings
from typing import Any, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .errors import ValidationError
from .modules import (AttenuatorParams, SalienceState, Scenario, StepRecord,
                      SweepSpec, Trajectory)
from .ops import Attenuate, BaseOp, Reinforce, SelectOutput, init_state
from .utils import weights_entropy


class Pipeline:
    """Base class for batches of independent simulation jobs.

    Subclasses implement `keys`, listing the jobs, and `process_one`, which
    runs a single job. `run` executes all jobs, possibly in parallel, and
    returns their results in the order of `keys`.
    """
    def __init__(self, n_jobs=1, show_progress=False, warn_on_error=False):
        """Initialize the base class.

        Parameters
        ----------
        n_jobs : int, optional
            The number of worker processes to use for parallel computation
            (default 1).

        show_progress : bool, optional
            Whether joblib should report progress.

        warn_on_error : bool, optional
            Whether a failing job only warns (its result is None) instead of
            aborting the whole run.
        """
        self.n_jobs = n_jobs
        self.show_progress = show_progress
        self.warn_on_error = warn_on_error

    def __repr__(self):
        attrs = [(k, v) for k, v in self.__dict__.items() if not k.startswith("_")]
        args = ", ".join(f"{k}={v}" for k, v in attrs)
        return f"{self.__class__.__module__}.{self.__class__.__name__}({args})"

    def keys(self) -> List[Any]:
        raise NotImplementedError

    def process_one(self, key):
        """Run one job.

        Parameters
        ----------
        key
            One of the values returned by `keys`.
        """
        raise NotImplementedError

    def _process_wrapper(self, key):
        try:
            return self.process_one(key)
        except Exception as e:
            message = f"{type(e).__name__} while processing job {key}: " + str(e)
            if self.warn_on_error:
                warnings.warn(message, category=RuntimeWarning)
                return None
            raise RuntimeError(message) from e

    def run(self) -> List[Any]:
        """Execute the pipeline, possibly in parallel.
        """
        # Joblib prints progress to stdout if verbose > 50
        verbose = 51 if self.show_progress else 0

        return Parallel(n_jobs=self.n_jobs, verbose=verbose)(
            delayed(self._process_wrapper)(key) for key in self.keys())


class SalienceLoop:
    """Closed reinforcement loop composed of step ops.

    Each step selects an output for the current input, reinforces it and,
    when an attenuation op is present, corrects the reinforced state.
    """
    def __init__(self, select: SelectOutput, reinforce: Reinforce, attenuate: Optional[Attenuate] = None):
        self.select = select
        self.reinforce = reinforce
        self.attenuate = attenuate

    @property
    def ops(self) -> List[BaseOp]:
        return [op for op in (self.select, self.reinforce, self.attenuate) if op is not None]

    def __repr__(self):
        return f"{self.__class__.__name__}({', '.join(map(repr, self.ops))})"

    def step(self, state: SalienceState, input_channel: int) -> StepRecord:
        chosen = self.select(state, input_channel)
        state = self.reinforce(state, chosen)
        if self.attenuate is not None:
            state, beta = self.attenuate(state)
        else:
            beta = np.zeros(state.k)
        return StepRecord(step=state.step,
                          input_channel=int(input_channel),
                          chosen_output=chosen,
                          weights_after=state.weights,
                          beta_applied=beta,
                          entropy=weights_entropy(state.weights))

    def run(self, state: SalienceState, inputs: Sequence[int]) -> List[StepRecord]:
        records = []
        for t, input_channel in enumerate(inputs):
            record = self.step(state.with_weights(state.weights, step=t), input_channel)
            records.append(record)
            state = SalienceState(record.weights_after, step=t + 1)
        return records


def run_trajectory(scenario: Scenario,
                   params: Optional[AttenuatorParams] = None,
                   attenuator_on: Optional[bool] = None,
                   mode: Optional[str] = None,
                   seed: Optional[int] = None,
                   steps: Optional[int] = None) -> Trajectory:
    """Simulate a scenario.

    Parameters
    ----------
    scenario
        The scenario to run.

    params, optional
        Attenuator parameters. Defaults to the scenario's own overrides
        applied to the package defaults.

    attenuator_on, mode, optional
        Override the scenario's attenuator preference.

    seed, optional
        Override the scenario seed.

    steps, optional
        Override the number of steps; 0 yields an empty trajectory.

    Returns
    -------
    Trajectory
        Bit-identical for identical arguments.
    """
    params = scenario.attenuator_params() if params is None else params
    attenuator_on = scenario.attenuator if attenuator_on is None else attenuator_on
    mode = scenario.mode if mode is None else mode
    seed = scenario.seed if seed is None else seed
    steps = scenario.steps if steps is None else steps
    if steps < 0:
        raise ValidationError(f"steps must be >= 0, got {steps}")

    model = scenario.model
    state = init_state(scenario.k, scenario.initial, normalized=model.normalized)
    inputs = scenario.schedule.expand(steps, scenario.k, seed=seed)

    loop = SalienceLoop(SelectOutput(model, np.random.default_rng(seed)),
                        Reinforce(model),
                        Attenuate(params, mode, model.normalized) if attenuator_on else None)
    records = loop.run(state, inputs)
    return Trajectory(records=records,
                      scenario_id=scenario.id,
                      seed=seed,
                      initial=state.weights,
                      normalized=model.normalized,
                      meta=scenario.meta())


JobLike = Union[Scenario, Mapping[str, Any]]


class TrajectoryBatch(Pipeline):
    """Runs independent trajectories through joblib.

    Each job is a mapping of `run_trajectory` keyword arguments (it must
    contain `scenario`) or a bare `Scenario`.
    """
    def __init__(self, jobs: Sequence[JobLike], n_jobs=1, show_progress=False, warn_on_error=False):
        super().__init__(n_jobs=n_jobs, show_progress=show_progress, warn_on_error=warn_on_error)
        self._jobs = [{"scenario": job} if isinstance(job, Scenario) else dict(job) for job in jobs]
        for i, job in enumerate(self._jobs):
            if not isinstance(job.get("scenario"), Scenario):
                raise ValidationError(f"job {i} has no scenario")

    def keys(self):
        return list(range(len(self._jobs)))

    def process_one(self, key):
        return run_trajectory(**self._jobs[key])


def run_batch(jobs: Sequence[JobLike], n_jobs: int = 1, show_progress: bool = False) -> List[Trajectory]:
    """Run several trajectories, ordered by job index."""
    return TrajectoryBatch(jobs, n_jobs=n_jobs, show_progress=show_progress).run()


def sweep_metric(traj: Trajectory, metric: str, params: AttenuatorParams) -> float:
    """Summarize one trajectory for a sweep.

    `peak_w_max` is the largest weight seen, `final_entropy` the entropy at
    the last step. `recovery_steps` counts the steps from the (first) peak
    until the largest weight drops below `eps_a`; NaN if it never does.
    """
    if len(traj) == 0:
        return float("nan")
    w_max = traj.w_max()
    if metric == "peak_w_max":
        return float(w_max.max())
    if metric == "final_entropy":
        return float(traj.entropy()[-1])
    if metric == "recovery_steps":
        peak = int(np.argmax(w_max))
        below = np.flatnonzero(w_max[peak + 1:] < params.eps_a)
        return float(below[0] + 1) if below.size else float("nan")
    raise ValidationError(f"unknown sweep metric: {metric}")


class ParameterSweep(Pipeline):
    """One trajectory per grid point of a `SweepSpec`.

    The parameters for every grid point are built up front, so invalid
    values fail before anything runs.
    """
    def __init__(self,
                 scenario: Scenario,
                 spec: SweepSpec,
                 params: Optional[AttenuatorParams] = None,
                 attenuator_on: bool = True,
                 mode: Optional[str] = None,
                 n_jobs=1,
                 show_progress=False):
        super().__init__(n_jobs=n_jobs, show_progress=show_progress)
        self.scenario = scenario
        self.spec = spec
        self.attenuator_on = attenuator_on
        self.mode = mode
        base = scenario.attenuator_params() if params is None else params
        self._grid = spec.grid()
        self._params = [base.replace(**{spec.param: float(value)}) for value in self._grid]

    def keys(self):
        return list(range(len(self._grid)))

    def process_one(self, key):
        params = self._params[key]
        traj = run_trajectory(self.scenario, params=params,
                              attenuator_on=self.attenuator_on, mode=self.mode)
        return sweep_metric(traj, self.spec.metric, params)

    def table(self) -> pd.DataFrame:
        values = self.run()
        return pd.DataFrame({"param": [self.spec.param] * len(self._grid),
                             "value": self._grid,
                             "metric": [self.spec.metric] * len(self._grid),
                             "metric_value": np.array(values, dtype=np.float64)})


def sweep(scenario: Scenario,
          spec: SweepSpec,
          params: Optional[AttenuatorParams] = None,
          attenuator_on: bool = True,
          mode: Optional[str] = None,
          n_jobs: int = 1,
          show_progress: bool = False) -> pd.DataFrame:
    """Sweep one attenuator parameter over a grid.

    Returns
    -------
    pd.DataFrame
        Columns `param, value, metric, metric_value`, one row per grid point
        in grid order.
    """
    return ParameterSweep(scenario, spec, params=params, attenuator_on=attenuator_on,
                          mode=mode, n_jobs=n_jobs, show_progress=show_progress).table()
