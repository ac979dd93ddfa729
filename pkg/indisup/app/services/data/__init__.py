from indisup.app.services.data.batching import Batch, make_batches, split_wells
from indisup.app.services.data.records import (
    INPUT_CHANNELS,
    Dataset,
    RowRejection,
    Standardization,
    WellRecord,
)
from indisup.app.services.data.synthetic import generate_synthetic_field
from indisup.app.services.data.table import load_table, write_table

__all__ = [
    "INPUT_CHANNELS",
    "Batch",
    "Dataset",
    "RowRejection",
    "Standardization",
    "WellRecord",
    "generate_synthetic_field",
    "load_table",
    "make_batches",
    "split_wells",
    "write_table",
]
