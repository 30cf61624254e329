from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .field import MAX_M, MAX_P, is_prime

Command = Literal["catalog", "verify-borel", "verify-sl2", "extend", "invariants", "classify", "decompose", "equiv", "suite"]
Mode = Literal["symbolic", "exhaustive", "auto"]

FORM_COMMANDS = {"catalog", "verify-borel", "verify-sl2", "extend", "invariants", "classify", "decompose", "equiv"}


class _Report(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(default=1, alias="schema")


class CheckReport(_Report):
    """Итог проверки соотношения: backend всегда назван, провал всегда доказан."""

    passed: bool
    backend: str
    checked_relations: list[str] = Field(default_factory=list)
    failed_relation: str | None = None
    counterexample: dict[str, Any] | None = None
    difference: str | None = None
    fields: list[int] = Field(default_factory=list)
    note: str = ""

    @model_validator(mode="after")
    def validate_failure_evidence(self) -> "CheckReport":
        if not self.passed and self.counterexample is None and self.difference is None:
            raise ValueError("failed check must carry a counterexample or a difference polynomial")
        if self.passed and self.failed_relation is not None:
            raise ValueError("failed_relation must be null when passed=true")
        return self


class Certificate(BaseModel):
    """Нарушенное линейное уравнение на коэффициенты phi-."""

    model_config = ConfigDict(extra="forbid")

    field: int
    point: dict[str, int]
    entry: list[int]
    equation: str


class PhiMinusReport(_Report):
    form: str
    p: int
    params: dict[str, int]
    status: Literal["unique", "inconsistent"]
    phi_minus: list[list[str]] | None = None
    certificate: Certificate | None = None
    degree_bound: int = Field(ge=1)
    fields: list[int] = Field(default_factory=list)
    sigma: list[list[str]] | None = None
    note: str = ""

    @model_validator(mode="after")
    def validate_status_payload(self) -> "PhiMinusReport":
        if self.status == "unique" and self.phi_minus is None:
            raise ValueError("phi_minus is required when status=unique")
        if self.status == "inconsistent" and self.certificate is None:
            raise ValueError("certificate is required when status=inconsistent")
        return self


class SignatureModel(_Report):
    form: str | None = None
    q: int
    weights: list[int]
    weights_modulus: int | None = None
    d_sigma: list[int] = Field(min_length=2, max_length=2)
    d_unipotent: list[int] = Field(min_length=2, max_length=2)
    end_dim: int = Field(ge=1)


class SummandModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    form: str
    params: dict[str, int]
    multiplicity: int = Field(ge=1)


class DecompositionModel(_Report):
    form: str | None = None
    q: int
    indecomposable: bool
    summands: list[SummandModel]
    conjugator: list[list[int]]


class EquivalenceModel(_Report):
    equivalent: bool
    exact: bool
    q: int
    conjugator: list[list[int]] | None = None
    note: str = ""


class ClassifyModel(_Report):
    q: int
    form: str
    params: dict[str, int]
    signature: SignatureModel
    candidates: int = Field(ge=1)


class CatalogEntryModel(_Report):
    """Запись каталога: борелевская пара или замкнутая форма sigma."""

    form: str
    p: int
    params: dict[str, int]
    dim: int = Field(ge=1)
    weights: list[int]
    twists: list[int] = Field(default_factory=list)
    phi_plus: list[list[str]] | None = None
    phi_minus: list[list[str]] | None = None
    sigma: list[list[str]] | None = None
    note: str = ""


class CriterionVerdict(BaseModel):
    model_config = ConfigDict(extra="forbid")

    criterion: int = Field(ge=1, le=8)
    title: str
    passed: bool
    jobs: int = Field(ge=0)
    failures: list[str] = Field(default_factory=list)
    evidence: str
    seconds: float = Field(ge=0)


class SuiteReport(_Report):
    run_id: str
    p_set: list[int]
    e_max: int
    seed: int
    passed: bool
    criteria: list[CriterionVerdict]
    started_at: str
    finished_at: str


class JobConfig(BaseModel):
    """Параметры одного запуска CLI; единственный источник настроек команды."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    action: Literal["run", "report"] = "run"
    form: str | None = None
    form2: str | None = None
    p: int = 2
    m: int | None = Field(default=None, ge=1)
    params: dict[str, int] = Field(default_factory=dict)
    params2: dict[str, int] = Field(default_factory=dict)
    mode: Mode = "auto"
    relation: Literal["borel", "opposite"] = "borel"
    seed: int = 0
    budget: int = Field(default=10**6, ge=1)
    jobs: int = Field(default=1, ge=1)
    out: str | None = None
    db: str | None = None
    run_id: str | None = None
    e_max: int = Field(default=1, ge=0, le=3)
    p_set: list[int] = Field(default_factory=lambda: [2, 3, 5])
    conj: bool = False
    degree_bound: int | None = Field(default=None, ge=1)
    md: str = "artifacts/suite.md"

    @model_validator(mode="after")
    def validate_job(self) -> "JobConfig":
        if not is_prime(self.p) or self.p > MAX_P:
            raise ValueError(f"p must be a prime <= {MAX_P}, got {self.p}")
        if self.m is not None and self.m > MAX_M:
            raise ValueError(f"m must be in 1..{MAX_M}, got {self.m}")
        bad = [p for p in self.p_set if not is_prime(p) or p > MAX_P]
        if bad:
            raise ValueError(f"p_set must contain primes <= {MAX_P}, got {bad}")
        if self.command in FORM_COMMANDS and not self.form:
            raise ValueError(f"--form is required for {self.command}")
        if self.command == "equiv" and not self.form2:
            raise ValueError("--form2 is required for equiv")
        if self.mode == "symbolic":
            if self.command == "extend":
                raise ValueError("mode=symbolic is not available for extend: the opposite relation has rational arguments")
            if self.command == "verify-borel" and self.relation == "opposite":
                raise ValueError("mode=symbolic is not available for the opposite relation")
        if self.action == "report" and (self.command != "suite" or not self.db):
            raise ValueError("report action needs command=suite and --db")
        return self
