"""Figure rendering for matching-bandits experiment CSVs."""

from .render import (
    EXPECTED_HEADER,
    EmptyInputError,
    PanelSeries,
    PlotSpec,
    RenderResult,
    ResultTable,
    SchemaError,
    compute_bands,
    load_result_table,
    render_regret_curves,
)

__version__ = "0.1.0"
