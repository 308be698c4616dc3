from pydantic import BaseModel, ConfigDict, Field

DEFAULT_BATCH_SIZE = 4096


class SimulationSettings(BaseModel):
    """How many replications to run and how to split them.

    Attributes:
        replications: Number of independent replications.
        seed: Master seed; replication i uses the stream derived from (seed, i).
        delay_cap: Maximum number of post-change observations per replication. None lets each
            estimator choose its default cap.
        workers: Worker processes; None uses every CPU (capped by QUICKDETECT_THREADS).
        batch_size: Replications per vectorized batch. Results do not depend on the worker count.
    """

    model_config = ConfigDict(frozen=True)

    replications: int = Field(default=100_000, ge=1)
    seed: int = Field(default=0, ge=0)
    delay_cap: int | None = Field(default=None, ge=1)
    workers: int | None = Field(default=None, ge=1)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=1)
