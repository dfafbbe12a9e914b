"""Request/response schemas for the experiment service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    """One experiment: a single algorithm config fanned out over seeds.

    Optional fields left as None fall back to the documented defaults during
    config resolution on the server.
    """

    algo: str
    env: str
    arch: str = "lin"
    stochastic: bool = False
    seeds: str = "0"
    out_dir: str
    config_text: Optional[str] = None
    max_workers: Optional[int] = Field(default=None, ge=1)

    steps: Optional[int] = None
    lr_actor: Optional[float] = None
    lr_critic: Optional[float] = None
    sigma: Optional[float] = None
    gamma: Optional[float] = None
    batch_size: Optional[int] = None
    buffer_capacity: Optional[int] = None
    critic_updates: Optional[int] = None
    actor_updates: Optional[int] = None
    update_every: Optional[int] = None
    obs_normalization: Optional[bool] = None
    critic_hidden: Optional[str] = None
    critic_activation: Optional[str] = None
    semi_gradient: Optional[bool] = None
    n_evals: Optional[int] = None
    eval_episodes: Optional[int] = None
    metric: Optional[str] = None
    n_directions: Optional[int] = None
    n_elite: Optional[int] = None
    critic_path: Optional[str] = None
    zs_policies: Optional[int] = None
    zs_steps: Optional[int] = None
    zs_eval_every: Optional[int] = None
    zs_eval_episodes: Optional[int] = None
    dataset_size: Optional[int] = None
    perturb_every: Optional[int] = None
    offline_updates: Optional[int] = None
    checkpoint_every: Optional[int] = None
    oracle_instances: Optional[int] = None
    force: bool = False

    def config_options(self) -> dict[str, Any]:
        skip = {"seeds", "out_dir", "config_text", "max_workers"}
        out: dict[str, Any] = {}
        for name, value in self.model_dump().items():
            if name in skip or value is None:
                continue
            out[name] = value
        return out


class SummaryModel(BaseModel):
    algo: str
    env: str
    arch: str
    seed_count: int
    avg_metric_mean: float
    avg_metric_std: float
    final_metric_mean: float
    final_metric_std: float


class SeedArtifacts(BaseModel):
    seed: int
    curve_path: str
    checkpoint_path: Optional[str] = None
    avg_metric: float
    final_metric: float


class JobStatus(BaseModel):
    job_id: str
    state: str  # queued | running | done | failed
    detail: Optional[str] = None
    error_kind: Optional[str] = None  # config | runtime
    summary: Optional[SummaryModel] = None
    summary_path: Optional[str] = None
    seeds: list[SeedArtifacts] = Field(default_factory=list)


class JobList(BaseModel):
    jobs: list[JobStatus]


class LandscapeRequest(BaseModel):
    critic_path: str
    out_path: str
    resolution: int = Field(default=101, ge=2)
    mode: Optional[str] = None


class LandscapeResult(BaseModel):
    out_path: str
    mode: str
    resolution: int
    r_squared: float
    true_max_theta: list[float]


class OracleRequest(BaseModel):
    out_path: str
    instances: int = Field(default=20, ge=1)
    seed: int = 0
    gamma: float = 0.9


class OracleRow(BaseModel):
    instance: str
    thm1_maxerr: float
    thm3_maxerr: float
    degris_bias: float


class OracleResult(BaseModel):
    out_path: str
    thm1_maxerr: float
    thm3_maxerr: float
    constructed_bias: float
    rows: list[OracleRow]


class HealthResponse(BaseModel):
    status: str
    version: str
