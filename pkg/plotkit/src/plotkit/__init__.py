"""Charts for experiment result CSVs.

The only contract with the producer is the file format: schema-tagged
CSV summaries or trial tables.  See `PlotSpec` and `render`.
"""

from .charts import KINDS, PlotSpec, render, render_figure, summarize
from .csvio import (
    EmptyInputError,
    MissingColumnError,
    SchemaMismatchError,
    Table,
    read_table,
)

__version__ = "0.1.0"
