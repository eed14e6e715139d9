"""Pydantic request/response models for the solver service.

Instances travel as decimal strings so capacity arithmetic stays exact; the
wire format matches the on-disk JSON files.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..core import Instance, Packing, Size

Algorithm = Literal["ffk", "ffdk", "nfk", "dlvl", "kk1", "kk2", "exact"]


class InstanceModel(BaseModel):
    capacity: str
    demands: list[str] = Field(min_length=1)

    def to_instance(self) -> Instance:
        return Instance(
            tuple(Size.from_str(d) for d in self.demands), Size.from_str(self.capacity)
        )

    @classmethod
    def from_instance(cls, instance: Instance) -> "InstanceModel":
        return cls(capacity=str(instance.capacity), demands=[str(d) for d in instance.demands])


class PackingModel(BaseModel):
    k: int = Field(ge=1)
    bins: list[list[int]]

    def to_packing(self) -> Packing:
        return Packing(self.k, tuple(tuple(b) for b in self.bins))

    @classmethod
    def from_packing(cls, packing: Packing) -> "PackingModel":
        return cls(k=packing.k, bins=[list(b) for b in packing.bins])


class PackRequest(BaseModel):
    instance: InstanceModel
    k: int = Field(ge=1)
    alg: Algorithm = "ffk"
    eps: Optional[str] = None
    g: int = Field(default=2, ge=2)
    node_budget: Optional[int] = None
    dump_lp: bool = False


class PackResponse(BaseModel):
    packing: PackingModel
    bins: int
    volume_lower_bound: int
    valid: bool
    optimal: Optional[bool] = None
    volume_certified: bool
    lp_dump: Optional[dict] = None


class ValidateRequest(BaseModel):
    instance: InstanceModel
    packing: PackingModel


class VerdictModel(BaseModel):
    ok: bool
    reason: Optional[str] = None
    bin_index: Optional[int] = None


class WelfareRequest(BaseModel):
    utilities: list[float] = Field(min_length=1)


class WelfareModel(BaseModel):
    utilitarian: float
    egalitarian: float
    max_utility_difference: float


class RmaxRequest(BaseModel):
    instance: InstanceModel
    k_max: int = Field(default=9, ge=1)


class RmaxResponse(BaseModel):
    r_max: str
    minimal_k: Optional[int]
    opt_table: list[tuple[int, int]]
    support: list[tuple[list[int], str]]


class WattsRequest(BaseModel):
    instance: InstanceModel
    ha: Literal[1, 2, 3, 4]
    k: int = Field(ge=1)
    alg: Literal["ffk", "ffdk"] = "ffk"
    u: str = "0.25"


class WattsResponse(BaseModel):
    g: int
    always_on: list[int]
    bins: list[list[int]]
    durations: list[str]
    watts: list[float]
    egalitarian: float
    leximin_key: list[float]


class GenerateInstancesRequest(BaseModel):
    capacity: str = "10.0"
    opt: int = Field(ge=1)
    count: int = Field(default=1, ge=1)
    seed: int = 0


class GeneratedInstanceModel(BaseModel):
    instance: InstanceModel
    opt: int
    certificate: list[list[int]]
    seed: int  # the batch seed that reproduces this instance


class GenerateSeriesRequest(BaseModel):
    n_agents: int = Field(ge=1)
    weeks: int = Field(default=13, ge=1)
    seed: int = 0


class SeriesResponse(BaseModel):
    csv: str


class RatioRequest(BaseModel):
    algs: list[Algorithm] = ["ffk", "ffdk"]
    k_list: list[int] = [2, 3, 4, 5]
    opt_list: list[int] = [2, 3, 4, 5, 6, 7, 8, 9]
    instances_per_cell: int = Field(default=10, ge=1)
    seed: int = 0
    capacity: str = "10.0"


class RatioRow(BaseModel):
    alg: str
    k: int
    opt: int
    opt_dk: int
    max_bins: int
    bound_ffk_conjecture: float
    bound_ffdk_conjecture: float


class SimulateRequest(BaseModel):
    series_csv: str
    k: int = Field(ge=1)
    alg: Literal["ffk", "ffdk"] = "ffk"
    sigma: float = Field(default=0.05, ge=0)
    runs: int = Field(default=9, ge=1)
    seed: int = 0
    discard_weeks: int = Field(default=4, ge=0)


class SimulateResponse(BaseModel):
    runs: list[dict[str, float]]
    mean: dict[str, float]
    sd: dict[str, float]


class WattsSeriesRequest(BaseModel):
    series_csv: str
    ha: Literal[1, 2, 3, 4]
    k: int = Field(ge=1)
    alg: Literal["ffk", "ffdk"] = "ffk"
    u: str = "0.25"


class WattsSeriesResponse(BaseModel):
    utilitarian: float
    egalitarian: float
    max_diff: float
    shedding_hours: int
